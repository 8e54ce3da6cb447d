"""Special-function kernel used by every other module.

Thin, validated wrappers around classical special functions: the gamma
family, modified Bessel functions of the second kind for the orders the
distribution theory needs, and normal / Student-t CDFs and quantiles.
Everything here is pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp


@dataclass(frozen=True)
class Accuracy:
    """Tolerance settings for the numerical kernels.

    abs_tol : target absolute error (1e-12 for gamma/normal kernels,
    1e-10 for Bessel evaluations). max_iter bounds iterative refinement
    loops such as quantile inversions.
    """

    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


BESSEL_ACCURACY = Accuracy(abs_tol=1e-10)

_HALF_ORDERS = (0.0, 0.5, 1.0, 1.5)


def ln_gamma(x):
    """Natural log of the gamma function for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("ln_gamma requires x > 0")
    out = _sp.gammaln(x)
    return float(out) if out.ndim == 0 else out


def lower_inc_gamma(s, x):
    """Lower incomplete gamma function gamma(s, x), unregularized.

    gamma(s, x) = int_0^x t^(s-1) e^(-t) dt, nondecreasing in x with
    limit Gamma(s) as x -> inf.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(s <= 0):
        raise ValueError("lower_inc_gamma requires s > 0")
    if np.any(x < 0):
        raise ValueError("lower_inc_gamma requires x >= 0")
    out = _sp.gammainc(s, x) * np.exp(_sp.gammaln(s))
    return float(out) if out.ndim == 0 else out


def ln_lower_inc_gamma(s, x):
    """log gamma(s, x), stable for small x where gamma(s,x) ~ x^s / s.

    The regularized-ratio route underflows once gammainc rounds to zero;
    the ascending series gamma(s,x) = x^s e^(-x) sum_k x^k / (s)_{k+1}
    covers that region.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(s <= 0):
        raise ValueError("ln_lower_inc_gamma requires s > 0")
    if np.any(x < 0):
        raise ValueError("ln_lower_inc_gamma requires x >= 0")
    s, x = np.broadcast_arrays(s, x)
    reg = _sp.gammainc(s, x)
    out = np.full(s.shape, -np.inf)
    ok = reg > 1e-280
    if np.any(ok):
        out[ok] = np.log(reg[ok]) + _sp.gammaln(s[ok])
    small = ~ok & (x > 0)
    if np.any(small):
        ss, xs = s[small], x[small]
        # denominator ascending series: sum_k x^k / prod_{j<=k}(s+j)
        term = np.ones_like(xs)
        acc = np.ones_like(xs)
        for k in range(60):
            term = term * xs / (ss + k + 1.0)
            acc += term
            if np.all(term < 1e-18 * acc):
                break
        out[small] = ss * np.log(xs) - np.log(ss) - xs + np.log(acc)
    out = np.where(x == 0, -np.inf, out)
    return float(out) if out.ndim == 0 else out


def bessel_k(order: float, x):
    """Modified Bessel function K_order(x) for order in {0, 1/2, 1, 3/2}.

    Half-integer orders use the closed forms
    K_{1/2}(z) = sqrt(pi/(2z)) e^(-z) and K_{3/2}(z) = K_{1/2}(z) (1 + 1/z).
    """
    if order not in _HALF_ORDERS:
        raise ValueError(f"unsupported Bessel order {order!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_k requires x > 0")
    if order == 0.0:
        out = _sp.k0(x)
    elif order == 1.0:
        out = _sp.k1(x)
    else:
        half = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x)
        out = half if order == 0.5 else half * (1.0 + 1.0 / x)
    return float(out) if out.ndim == 0 else out


def ln_bessel_k(order: float, x):
    """log K_order(x), overflow-safe for large x via scaled kernels."""
    if order not in _HALF_ORDERS:
        raise ValueError(f"unsupported Bessel order {order!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("ln_bessel_k requires x > 0")
    if order == 0.0:
        out = np.log(_sp.k0e(x)) - x
    elif order == 1.0:
        out = np.log(_sp.k1e(x)) - x
    else:
        out = 0.5 * np.log(np.pi / (2.0 * x)) - x
        if order == 1.5:
            out = out + np.log1p(1.0 / x)
    return float(out) if out.ndim == 0 else out


def normal_cdf(x):
    """Standard normal CDF."""
    out = _sp.ndtr(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def normal_quantile(p):
    """Standard normal quantile, 0 < p < 1."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("normal_quantile requires 0 < p < 1")
    out = _sp.ndtri(p)
    return float(out) if out.ndim == 0 else out


def student_t_cdf(nu: float, x):
    """Student-t CDF with nu > 0 degrees of freedom."""
    if not nu > 0:
        raise ValueError("student_t_cdf requires nu > 0")
    out = _sp.stdtr(nu, np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def student_t_quantile(nu: float, p):
    """Student-t quantile with nu > 0 degrees of freedom, 0 < p < 1."""
    if not nu > 0:
        raise ValueError("student_t_quantile requires nu > 0")
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("student_t_quantile requires 0 < p < 1")
    out = _sp.stdtrit(nu, p)
    return float(out) if out.ndim == 0 else out


def student_t_pdf(nu: float, x):
    """Student-t density with nu > 0 degrees of freedom."""
    if not nu > 0:
        raise ValueError("student_t_pdf requires nu > 0")
    x = np.asarray(x, dtype=float)
    lognorm = (
        _sp.gammaln((nu + 1.0) / 2.0)
        - _sp.gammaln(nu / 2.0)
        - 0.5 * math.log(nu * math.pi)
    )
    out = np.exp(lognorm - 0.5 * (nu + 1.0) * np.log1p(x * x / nu))
    return float(out) if out.ndim == 0 else out
