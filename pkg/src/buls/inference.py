"""Likelihood-based inference for the bivariate unit-log-symmetric model.

The reported log-likelihood is that of the latent positive-scale pair
(T1, T2) = (-ln(1-W1), -ln(1-W2)),

    l(theta) = -n ln(sigma1 sigma2) - (n/2) ln(1-rho^2)
               + sum_i ln g(x_i) - n ln Z_g - sum_i ln(t1i t2i),

which differs from the sum of unit-scale joint log-densities only by the
theta-free Jacobian sum_i ln[(1-w1i)(1-w2i)].  Information criteria use
k = 5 free parameters; shape parameters are profiled over a grid and not
counted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import generators as gn
from .core import ModelParams
from .generators import GeneratorFamily

PARAM_NAMES = ("eta1", "eta2", "sigma1", "sigma2", "rho")


@dataclass(frozen=True)
class BivariateDataset:
    """Observations on the open unit square, one (w1, w2) pair per row."""

    rows: np.ndarray
    label: str | None = None

    def __post_init__(self) -> None:
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if rows.ndim != 2 or rows.shape[1] != 2:
            raise ValueError("rows must form an (n, 2) array")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows must be finite")
        if np.any(rows <= 0.0) or np.any(rows >= 1.0):
            raise ValueError("all coordinates must lie strictly inside (0, 1)")
        rows = rows.copy()
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def w1(self) -> np.ndarray:
        return self.rows[:, 0]

    @property
    def w2(self) -> np.ndarray:
        return self.rows[:, 1]


@dataclass(frozen=True)
class FitResult:
    """Maximum-likelihood fit summary for one generator family."""

    gen: GeneratorFamily
    theta_hat: ModelParams
    se: tuple  # (eta1, eta2, sigma1, sigma2, rho) order
    loglik: float
    aic: float
    bic: float
    converged: bool
    iterations: int
    score_norm: float


def _log_t(data: BivariateDataset) -> np.ndarray:
    return np.log(-np.log1p(-data.rows))


def _standardize(theta: ModelParams, logt: np.ndarray):
    z1 = (logt[:, 0] - math.log(theta.eta1)) / theta.sigma1
    z2 = (logt[:, 1] - math.log(theta.eta2)) / theta.sigma2
    r = theta.rho
    xr = (z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / (1.0 - r * r)
    return z1, z2, np.maximum(xr, 0.0)


def loglik(gen: GeneratorFamily, theta: ModelParams, data: BivariateDataset) -> float:
    """Full log-likelihood on the latent scale; reproduces published tables."""
    logt = _log_t(data)
    n = data.n
    _, _, xr = _standardize(theta, logt)
    with np.errstate(all="ignore"):
        terms = gn.log_g(gen, xr) - logt[:, 0] - logt[:, 1]
    bad = np.flatnonzero(~np.isfinite(terms))
    if bad.size:
        raise ValueError(f"log-likelihood is not finite at row {bad[0]}")
    return (
        -n * (math.log(theta.sigma1) + math.log(theta.sigma2))
        - 0.5 * n * math.log1p(-theta.rho ** 2)
        - n * gn.log_partition(gen)
        + float(terms.sum())
    )


def score(gen: GeneratorFamily, theta: ModelParams, data: BivariateDataset) -> np.ndarray:
    """Analytic score (d l / d eta1, eta2, sigma1, sigma2, rho)."""
    logt = _log_t(data)
    n = data.n
    z1, z2, xr = _standardize(theta, logt)
    with np.errstate(all="ignore"):
        lg = gn.log_g(gen, xr)
    bad = np.flatnonzero(~np.isfinite(lg))
    if bad.size:
        # singular density contribution, e.g. a Laplace row at distance zero
        raise ValueError(f"score is not finite at row {bad[0]}")
    with np.errstate(all="ignore"):
        G = gn.g_ratio(gen, xr)
    bad = np.flatnonzero(~np.isfinite(G))
    if bad.size:
        raise ValueError(f"score is not finite at row {bad[0]}")
    e1, e2 = theta.eta1, theta.eta2
    s1, s2, r = theta.sigma1, theta.sigma2, theta.rho
    c = 1.0 - r * r
    a1 = r * z2 - z1
    a2 = r * z1 - z2
    return np.array(
        [
            2.0 / (s1 * e1 * c) * (a1 * G).sum(),
            2.0 / (s2 * e2 * c) * (a2 * G).sum(),
            -n / s1 + 2.0 / (s1 * c) * (z1 * a1 * G).sum(),
            -n / s2 + 2.0 / (s2 * c) * (z2 * a2 * G).sum(),
            n * r / c - 2.0 / (c * c) * (a2 * a1 * G).sum(),
        ]
    )


def _psi_of(theta: ModelParams) -> np.ndarray:
    return np.array(
        [
            math.log(theta.eta1),
            math.log(theta.eta2),
            math.log(theta.sigma1),
            math.log(theta.sigma2),
            math.atanh(theta.rho),
        ]
    )


def _theta_of(psi: np.ndarray) -> ModelParams:
    return ModelParams(
        eta1=math.exp(psi[0]),
        eta2=math.exp(psi[1]),
        sigma1=math.exp(psi[2]),
        sigma2=math.exp(psi[3]),
        rho=math.tanh(psi[4]),
    )


def _make_nll(gen: GeneratorFamily, data: BivariateDataset):
    """Penalized negative log-likelihood over the unconstrained coordinates
    psi = (ln eta1, ln eta2, ln sigma1, ln sigma2, atanh rho)."""
    logt = _log_t(data)
    n = data.n
    const = -n * gn.log_partition(gen) - float(logt.sum())

    def nll(psi: np.ndarray) -> float:
        le1, le2, ls1, ls2, ar = psi
        with np.errstate(all="ignore"):
            r = math.tanh(ar)
            c = 1.0 - r * r
            if c <= 0.0 or abs(ls1) > 700 or abs(ls2) > 700:
                return 1e12
            z1 = (logt[:, 0] - le1) * math.exp(-ls1)
            z2 = (logt[:, 1] - le2) * math.exp(-ls2)
            xr = np.maximum((z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / c, 0.0)
            ll = -n * (ls1 + ls2) - 0.5 * n * math.log1p(-r * r) + float(gn.log_g(gen, xr).sum()) + const
        return -ll if math.isfinite(ll) else 1e12

    return nll


def _mom_psi(data: BivariateDataset) -> np.ndarray:
    """Method-of-moments start from the log latent scales; for the Gaussian
    generator this is already the exact maximizer."""
    logt = _log_t(data)
    mu = logt.mean(axis=0)
    sd = np.maximum(logt.std(axis=0), 1e-8)
    z = (logt - mu) / sd
    r0 = float(np.clip(np.mean(z[:, 0] * z[:, 1]), -0.99, 0.99))
    return np.array([mu[0], mu[1], math.log(sd[0]), math.log(sd[1]), math.atanh(r0)])


def _hessian(f, psi: np.ndarray) -> np.ndarray:
    """Five-point central second derivatives, cross terms by the standard
    four-point stencil; step 1e-4 * (1 + |psi_j|) per coordinate."""
    p = len(psi)
    h = 1e-4 * (1.0 + np.abs(psi))
    H = np.empty((p, p))
    f0 = f(psi)
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = h[i]
        H[i, i] = (
            -f(psi + 2 * ei) + 16 * f(psi + ei) - 30 * f0 + 16 * f(psi - ei) - f(psi - 2 * ei)
        ) / (12.0 * h[i] ** 2)
    for i in range(p):
        for j in range(i + 1, p):
            ei = np.zeros(p)
            ej = np.zeros(p)
            ei[i] = h[i]
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(psi + ei + ej) - f(psi + ei - ej) - f(psi - ei + ej) + f(psi - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def _scaled_score_norm(gen, theta, data) -> float:
    """Max absolute score component in the unconstrained scale, per row."""
    try:
        s = score(gen, theta, data)
    except ValueError:
        return math.inf
    jac = np.array(
        [theta.eta1, theta.eta2, theta.sigma1, theta.sigma2, 1.0 - theta.rho ** 2]
    )
    return float(np.max(np.abs(s * jac)) / data.n)


def fit(
    gen: GeneratorFamily,
    data: BivariateDataset,
    *,
    restarts: int = 3,
    seed: int = 0,
    xatol: float = 1e-9,
    maxiter: int = 6000,
    init: ModelParams | None = None,
) -> FitResult:
    """Maximum likelihood over (ln eta1, ln eta2, ln sigma1, ln sigma2,
    atanh rho) by Nelder-Mead simplex search with seeded random restarts.

    Standard errors come from the inverse negative Hessian of the
    log-likelihood at the optimum, delta-method mapped back to the natural
    scale.  Non-convergence is reported, not raised: the best point found
    is returned with converged=False.
    """
    if data.n < 6:
        raise ValueError("fitting needs at least 6 rows (5 free parameters)")
    if restarts < 0:
        raise ValueError("restarts must be >= 0")
    nll = _make_nll(gen, data)
    psi0 = _psi_of(init) if init is not None else _mom_psi(data)
    rng = np.random.default_rng(seed)
    best = None
    iterations = 0
    start = psi0
    for attempt in range(restarts + 1):
        res = minimize(
            nll,
            start,
            method="Nelder-Mead",
            options=dict(maxiter=maxiter, xatol=xatol, fatol=1e-10),
        )
        iterations += int(res.nit)
        if best is None or res.fun < best.fun:
            best = res
        start = best.x + rng.normal(0.0, 0.05, size=5)
    psi_hat = best.x
    theta_hat = _theta_of(psi_hat)
    ll = -float(best.fun)

    H = _hessian(lambda p: -nll(p), psi_hat)
    se = np.full(5, math.nan)
    try:
        cov = np.linalg.inv(-H)
        diag = np.diag(cov)
        if np.all(diag > 0):
            jac = np.array(
                [
                    theta_hat.eta1,
                    theta_hat.eta2,
                    theta_hat.sigma1,
                    theta_hat.sigma2,
                    1.0 - theta_hat.rho ** 2,
                ]
            )
            se = jac * np.sqrt(diag)
    except np.linalg.LinAlgError:
        pass

    score_norm = _scaled_score_norm(gen, theta_hat, data)
    n = data.n
    return FitResult(
        gen=gen,
        theta_hat=theta_hat,
        se=tuple(float(v) for v in se),
        loglik=ll,
        aic=-2.0 * ll + 2.0 * 5,
        bic=-2.0 * ll + 5.0 * math.log(n),
        converged=bool(best.success) and score_norm < 1e-4,
        iterations=iterations,
        score_norm=score_norm,
    )


DEFAULT_SHAPE_GRID = tuple(range(1, 31))


def profile_fit(
    kind: str,
    data: BivariateDataset,
    shape_grid=DEFAULT_SHAPE_GRID,
    *,
    restarts: int = 3,
    seed: int = 0,
):
    """Profile the shape parameter over a grid and refit at the maximizer.

    Grid points are fitted once each, warm-started from the previous
    point's optimum; ties prefer the smaller shape.  Failed grid points
    are skipped with a warning.  Returns (FitResult, chosen shape).
    """
    if kind not in ("student", "hyperbolic", "slash"):
        raise ValueError("profile_fit applies to the student, hyperbolic and slash families")
    grid = list(shape_grid)
    if not grid:
        raise ValueError("shape grid must be nonempty")
    best_shape, best_ll, warm = None, -math.inf, None
    for s in grid:
        gen = GeneratorFamily(kind=kind, shape=float(s))
        try:
            fr = fit(gen, data, restarts=0, seed=seed, init=warm)
        except (ValueError, FloatingPointError) as exc:
            warnings.warn(f"profile point shape={s} skipped: {exc}")
            continue
        warm = fr.theta_hat
        if fr.loglik > best_ll:
            best_ll, best_shape = fr.loglik, s
    if best_shape is None:
        raise RuntimeError("every profile grid point failed")
    gen = GeneratorFamily(kind=kind, shape=float(best_shape))
    return fit(gen, data, restarts=restarts, seed=seed), best_shape


def rho_root_exists(gen: GeneratorFamily, data: BivariateDataset, fixed, grid_size: int = 1201):
    """Scan the rho score equation over (-0.999, 0.999) at fixed scale and
    power parameters; report (found, bracketing interval)."""
    eta1, eta2, sigma1, sigma2 = fixed
    logt = _log_t(data)
    z1 = (logt[:, 0] - math.log(eta1)) / sigma1
    z2 = (logt[:, 1] - math.log(eta2)) / sigma2
    n = data.n
    grid = np.linspace(-0.999, 0.999, grid_size)
    vals = np.empty(grid_size)
    for k, r in enumerate(grid):
        c = 1.0 - r * r
        xr = np.maximum((z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / c, 0.0)
        with np.errstate(all="ignore"):
            G = gn.g_ratio(gen, xr)
            vals[k] = n * r / c - 2.0 / (c * c) * ((r * z1 - z2) * (r * z2 - z1) * G).sum()
    ok = np.isfinite(vals)
    for k in range(grid_size - 1):
        if ok[k] and ok[k + 1] and vals[k] == 0.0:
            return True, (float(grid[max(k - 1, 0)]), float(grid[k + 1]))
        if ok[k] and ok[k + 1] and vals[k] * vals[k + 1] < 0.0:
            return True, (float(grid[k]), float(grid[k + 1]))
    return False, None
