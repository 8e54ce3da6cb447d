"""The bivariate unit-log-symmetric distribution.

A pair (W1, W2) on the open unit square built from a bivariate
log-symmetric vector (T1, T2) through W_i = 1 - exp(-T_i). With
t_i = -log(1 - w_i) and standardized coordinates
z_i = log[(t_i / eta_i)^(1/sigma_i)], the joint density is

    f(w1, w2) = g((z1^2 - 2 rho z1 z2 + z2^2) / (1 - rho^2))
                / [(1-w1) t1 sigma1 (1-w2) t2 sigma2 sqrt(1-rho^2) Z]

where g is the family's density generator and Z its partition constant.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from . import generators as gn
from . import specialfn as sf
from .generators import GeneratorFamily


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector theta = (eta1, eta2, sigma1, sigma2, rho).

    eta_i > 0 are the median scales, sigma_i > 0 the log-scale spreads,
    rho in (-1, 1) the dependence parameter. mu_i = log(eta_i) is derived.
    """

    eta1: float
    eta2: float
    sigma1: float
    sigma2: float
    rho: float

    def __post_init__(self) -> None:
        for name in ("eta1", "eta2", "sigma1", "sigma2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")

    @property
    def mu1(self) -> float:
        return math.log(self.eta1)

    @property
    def mu2(self) -> float:
        return math.log(self.eta2)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.eta1, self.eta2, self.sigma1, self.sigma2, self.rho]
        )


@dataclass(frozen=True)
class UnitPoint:
    """A point strictly inside the unit square."""

    w1: float
    w2: float

    def __post_init__(self) -> None:
        if not (0.0 < self.w1 < 1.0 and 0.0 < self.w2 < 1.0):
            raise ValueError("UnitPoint coordinates must lie strictly in (0, 1)")


@dataclass(frozen=True)
class Interval:
    """An interval (lo, hi) inside [0, 1] used as a conditioning event."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ValueError("Interval requires 0 <= lo < hi <= 1")


def _check_interior(w, name="w"):
    w = np.asarray(w, dtype=float)
    if np.any((w <= 0.0) | (w >= 1.0)):
        raise ValueError(f"{name} must lie strictly in (0, 1)")
    return w


def to_latent(theta: ModelParams, w1, w2):
    """Map unit-square coordinates to (t1, t2, z1, z2)."""
    w1 = _check_interior(w1, "w1")
    w2 = _check_interior(w2, "w2")
    t1 = -np.log1p(-w1)
    t2 = -np.log1p(-w2)
    z1 = (np.log(t1) - theta.mu1) / theta.sigma1
    z2 = (np.log(t2) - theta.mu2) / theta.sigma2
    return t1, t2, z1, z2


def joint_logpdf(gen: GeneratorFamily, theta: ModelParams, p: UnitPoint) -> float:
    """Log of the joint density at an interior point."""
    t1, t2, z1, z2 = to_latent(theta, p.w1, p.w2)
    r = theta.rho
    xr = (z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / (1.0 - r * r)
    return float(
        gn.log_g(gen, xr)
        - np.log1p(-p.w1)
        - np.log(t1)
        - math.log(theta.sigma1)
        - np.log1p(-p.w2)
        - np.log(t2)
        - math.log(theta.sigma2)
        - 0.5 * math.log1p(-r * r)
        - gn.log_partition(gen)
    )


def joint_pdf(gen: GeneratorFamily, theta: ModelParams, p: UnitPoint) -> float:
    return math.exp(joint_logpdf(gen, theta, p))


def joint_cdf(gen: GeneratorFamily, theta: ModelParams, p: UnitPoint) -> float:
    """P(W1 <= w1, W2 <= w2) by quadrature in standardized coordinates.

    The normal family uses the bivariate normal CDF directly; all other
    families integrate the marginal density of Z1 against the conditional
    CDF of Z2 given Z1.
    """
    _, _, z1, z2 = to_latent(theta, p.w1, p.w2)
    z1, z2 = float(z1), float(z2)
    r = theta.rho
    if gen.kind == "normal":
        cov = [[1.0, r], [r, 1.0]]
        return float(stats.multivariate_normal(cov=cov).cdf([z1, z2]))
    marg = gn.z_marginal(gen)
    s = math.sqrt(1.0 - r * r)

    def integrand(u):
        if gen.kind == "laplace" and abs(u) <= 1e-10:
            u = 1e-10  # conditional law degenerates at exactly 0
        cond = gn.z2_given_z1(gen, u)
        return marg.pdf(u) * cond.cdf((z2 - r * u) / s)

    cut = min(z1, 0.0) - 10.0
    pts = [p for p in (-1.0, 0.0, 1.0) if cut < p < z1]
    body, err1 = integrate.quad(
        integrand, cut, z1, epsabs=1e-8, epsrel=1e-8, limit=200,
        points=pts or None,
    )
    tail, err2 = integrate.quad(
        integrand, -np.inf, cut, epsabs=1e-8, epsrel=1e-8, limit=200
    )
    err = err1 + err2
    if err > 1e-6:
        raise RuntimeError(
            f"joint_cdf quadrature did not reach 1e-6 (achieved {err:.2e})"
        )
    return min(max(float(body + tail), 0.0), 1.0)


def marginal_quantile(
    gen: GeneratorFamily, theta: ModelParams, i: int, p: float
) -> float:
    """Quantile of the W_i margin: 1 - exp(-eta_i exp(sigma_i Q_Z(p)))."""
    if i not in (1, 2):
        raise ValueError("margin index must be 1 or 2")
    if not 0.0 < p < 1.0:
        raise ValueError("marginal_quantile requires 0 < p < 1")
    eta = theta.eta1 if i == 1 else theta.eta2
    sigma = theta.sigma1 if i == 1 else theta.sigma2
    zq = gn.z_marginal(gen).quantile(p)
    return -math.expm1(-eta * math.exp(sigma * zq))


def marginal_pdf(gen: GeneratorFamily, theta: ModelParams, i: int, w) -> float:
    """Density of the W_i margin: f_Z(z_i) / [(1-w) t sigma]."""
    if i not in (1, 2):
        raise ValueError("margin index must be 1 or 2")
    w = _check_interior(w)
    eta = theta.eta1 if i == 1 else theta.eta2
    sigma = theta.sigma1 if i == 1 else theta.sigma2
    t = -np.log1p(-w)
    z = (np.log(t) - math.log(eta)) / sigma
    out = gn.z_marginal(gen).pdf(z) / ((1.0 - w) * t * sigma)
    return float(out) if np.ndim(out) == 0 else out


def marginal_cdf(gen: GeneratorFamily, theta: ModelParams, i: int, w) -> float:
    """CDF of the W_i margin, F_Z(z_i)."""
    if i not in (1, 2):
        raise ValueError("margin index must be 1 or 2")
    w = float(_check_interior(w))
    eta = theta.eta1 if i == 1 else theta.eta2
    sigma = theta.sigma1 if i == 1 else theta.sigma2
    t = -math.log1p(-w)
    z = (math.log(t) - math.log(eta)) / sigma
    return float(gn.z_marginal(gen).cdf(z))


def cond_pdf_w2_given_w1(
    gen: GeneratorFamily, theta: ModelParams, w1: float, w2: float
) -> float:
    """Conditional density of W2 given W1 = w1."""
    t1, t2, z1, z2 = to_latent(theta, w1, w2)
    r = theta.rho
    s = math.sqrt(1.0 - r * r)
    cond = gn.z2_given_z1(gen, float(z1))
    arg = (float(z2) - r * float(z1)) / s
    return float(cond.pdf(arg)) / ((1.0 - float(w2)) * float(t2) * theta.sigma2 * s)


def _z_endpoint(theta: ModelParams, w: float, which: str) -> float:
    """Standardized image of a conditioning endpoint; +-inf at 0 and 1."""
    if which == "lo" and w <= 0.0:
        return -math.inf
    if which == "hi" and w >= 1.0:
        return math.inf
    t = -math.log1p(-w)
    return (math.log(t) - theta.mu2) / theta.sigma2


def cond_pdf_w1_given_w2_in(
    gen: GeneratorFamily, theta: ModelParams, w1: float, B: Interval
) -> float:
    """Density of W1 given the event W2 in B = (lo, hi).

    f(w1 | W2 in B) = f_Z1(z1) / [(1-w1) t1 sigma1]
                      * P(Z2 in B_rho | Z1 = z1) / P(Z2 in B_0)
    where B_r maps B's endpoints through the latent standardization and a
    shear by r z1 / sqrt(1 - r^2).
    """
    t1, _, z1, _ = to_latent(theta, w1, 0.5)
    t1, z1 = float(t1), float(z1)
    r = theta.rho
    s = math.sqrt(1.0 - r * r)
    zlo = _z_endpoint(theta, B.lo, "lo")
    zhi = _z_endpoint(theta, B.hi, "hi")

    marg = gn.z_marginal(gen)
    p0_lo = 0.0 if zlo == -math.inf else float(marg.cdf(zlo))
    p0_hi = 1.0 if zhi == math.inf else float(marg.cdf(zhi))
    denom = p0_hi - p0_lo
    if denom < 1e-300:
        raise ValueError("conditioning event has negligible mass")

    cond = gn.z2_given_z1(gen, z1)
    clo = 0.0 if zlo == -math.inf else float(cond.cdf((zlo - r * z1) / s))
    chi = 1.0 if zhi == math.inf else float(cond.cdf((zhi - r * z1) / s))
    numer = max(chi - clo, 0.0)

    return float(marg.pdf(z1)) / ((1.0 - w1) * t1 * theta.sigma1) * numer / denom


def mahalanobis_sq(theta: ModelParams, p: UnitPoint) -> float:
    """Squared Mahalanobis distance in the standardized latent coordinates."""
    _, _, z1, z2 = to_latent(theta, p.w1, p.w2)
    r = theta.rho
    return float((z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / (1.0 - r * r))


def maha_pdf(gen: GeneratorFamily, x: float) -> float:
    """Density of the squared Mahalanobis distance, pi g(x) / Z."""
    if not x > 0:
        raise ValueError("maha_pdf requires x > 0")
    return float(gn.r2_law(gen).pdf(x))


def maha_cdf(gen: GeneratorFamily, x: float) -> float:
    if not x >= 0:
        raise ValueError("maha_cdf requires x >= 0")
    return float(gn.r2_law(gen).cdf(x))


def maha_quantile(gen: GeneratorFamily, p: float) -> float:
    return float(gn.r2_law(gen).quantile(p))


def moment(gen: GeneratorFamily, theta: ModelParams, i: int, r: float) -> float:
    """E(W_i^r) by quadrature against the standardized marginal law.

    Negative-moment integrals may diverge near w = 0; a divergence report
    is raised instead of returning a spurious number.
    """
    if i not in (1, 2):
        raise ValueError("margin index must be 1 or 2")
    if r == 0:
        return 1.0
    eta = theta.eta1 if i == 1 else theta.eta2
    sigma = theta.sigma1 if i == 1 else theta.sigma2
    marg = gn.z_marginal(gen)

    def w_of_z(z):
        # exp overflow at extreme nodes saturates to w = 1, the correct limit
        with np.errstate(over="ignore"):
            return -np.expm1(-eta * np.exp(sigma * np.asarray(z, float)))

    def integrand(z):
        w = np.clip(w_of_z(z), 1e-300, 1.0 - 1e-16)
        return w ** r * marg.pdf(z)

    zlo = marg.quantile(1e-10)
    zhi = marg.quantile(1.0 - 1e-10)
    if r < 0 and integrand(zlo) > 1e12:
        raise ValueError(
            f"moment integral appears divergent for r = {r} "
            f"(integrand {integrand(zlo):.3e} at the lower tail)"
        )
    val, err = integrate.quad(
        integrand, zlo, zhi, epsabs=1e-10, epsrel=1e-9, limit=300,
        points=[0.0],
    )
    if err > 1e-7:
        warnings.warn(f"moment quadrature error {err:.2e} above 1e-7")
    return float(val)
