"""Density-generator families for the bivariate unit-log-symmetric model.

Each family supplies the radial profile g(x), its log, the score ratio
g'(x)/g(x), the partition constant Z = pi * int_0^inf g(u) du, the law of
one standardized component Z1, the conditional law of Z2 given Z1 = x,
and the law of the squared radius R^2 = Z1^2 + Z2^2.

Five kinds are supported: normal, student, hyperbolic, laplace, slash.
Student/hyperbolic carry a shape nu > 0, slash a shape q > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from . import specialfn as sf

KINDS = ("normal", "student", "hyperbolic", "laplace", "slash")
_SHAPED = ("student", "hyperbolic", "slash")

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_R2_KNOTS = 2048


@dataclass(frozen=True)
class GeneratorFamily:
    """One of the five elliptical density generators, plus its shape.

    shape is nu for student/hyperbolic, q for slash, and must be absent
    for normal/laplace.
    """

    kind: str
    shape: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind in _SHAPED:
            if self.shape is None or not self.shape > 0:
                raise ValueError(f"{self.kind} generator requires shape > 0")
        elif self.shape is not None:
            raise ValueError(f"{self.kind} generator takes no shape parameter")

    def with_shape(self, shape: float) -> "GeneratorFamily":
        return GeneratorFamily(self.kind, shape)


def normal() -> GeneratorFamily:
    return GeneratorFamily("normal")


def student(nu: float) -> GeneratorFamily:
    return GeneratorFamily("student", nu)


def hyperbolic(nu: float) -> GeneratorFamily:
    return GeneratorFamily("hyperbolic", nu)


def laplace() -> GeneratorFamily:
    return GeneratorFamily("laplace")


def slash(q: float) -> GeneratorFamily:
    return GeneratorFamily("slash", q)


@dataclass(frozen=True)
class UnivariateLaw:
    """A univariate continuous law given by pdf, cdf, and quantile."""

    pdf: Callable[[float], float]
    cdf: Callable[[float], float]
    quantile: Callable[[float], float]


def _gammainc_scaled(s, x):
    """G(s, x) = x^(-s) * gamma_lower(s, x), continuous down to G(s, 0) = 1/s.

    Series for small x, ratio route otherwise.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    s, x = np.broadcast_arrays(s, x)
    out = np.empty(s.shape)
    small = x < 0.5
    if np.any(small):
        ss, xs = s[small], x[small]
        # alternating series sum_k (-x)^k / (k! (s+k))
        term = np.ones_like(xs)
        acc = 1.0 / ss
        for k in range(1, 60):
            term = term * (-xs) / k
            acc = acc + term / (ss + k)
            if np.all(np.abs(term) < 1e-18):
                break
        out[small] = acc
    big = ~small
    if np.any(big):
        sb, xb = s[big], x[big]
        out[big] = np.exp(
            sf.ln_lower_inc_gamma(sb, xb) - sb * np.log(xb)
        )
    return out if out.ndim else float(out)


def g(gen: GeneratorFamily, x):
    """Density generator g(x), x >= 0."""
    return np.exp(log_g(gen, x)) if gen.kind != "slash" else _g_slash(gen, x)


def _g_slash(gen, x):
    s = (gen.shape + 2.0) / 2.0
    x = np.asarray(x, dtype=float)
    out = 2.0 ** (-s) * _gammainc_scaled(s, x / 2.0)
    return float(out) if np.ndim(out) == 0 else out


def log_g(gen: GeneratorFamily, x):
    """log g(x). Laplace returns +inf at exactly x = 0 (integrable spike)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("log_g requires x >= 0")
    kind, shape = gen.kind, gen.shape
    if kind == "normal":
        out = -x / 2.0
    elif kind == "student":
        out = -(shape + 2.0) / 2.0 * np.log1p(x / shape)
    elif kind == "hyperbolic":
        out = -shape * np.sqrt(1.0 + x)
    elif kind == "laplace":
        with np.errstate(divide="ignore"):
            out = np.where(
                x > 0,
                sf.ln_bessel_k(0.0, np.sqrt(2.0 * np.maximum(x, 1e-300))),
                np.inf,
            )
    else:
        s = (shape + 2.0) / 2.0
        out = -s * math.log(2.0) + np.log(_gammainc_scaled(s, x / 2.0))
    return float(out) if out.ndim == 0 else out


def g_ratio(gen: GeneratorFamily, x):
    """Score ratio g'(x)/g(x). Laplace and slash require x > 0."""
    x = np.asarray(x, dtype=float)
    kind, shape = gen.kind, gen.shape
    if kind in ("laplace", "slash") and np.any(x <= 0):
        raise ValueError(f"g_ratio for {kind} requires x > 0")
    if np.any(x < 0):
        raise ValueError("g_ratio requires x >= 0")
    if kind == "normal":
        out = np.full(x.shape, -0.5)
    elif kind == "student":
        out = -(shape + 2.0) / (2.0 * (shape + x))
    elif kind == "hyperbolic":
        out = -shape / (2.0 * np.sqrt(1.0 + x))
    elif kind == "laplace":
        u = np.sqrt(2.0 * x)
        out = -np.exp(sf.ln_bessel_k(1.0, u) - sf.ln_bessel_k(0.0, u)) / u
    else:
        s = (shape + 2.0) / 2.0
        ln_term = (s - 1.0) * np.log(x / 2.0) - x / 2.0 - math.log(2.0)
        out = -s / x + np.exp(ln_term - sf.ln_lower_inc_gamma(s, x / 2.0))
    return float(out) if out.ndim == 0 else out


def partition(gen: GeneratorFamily) -> float:
    """Normalizing constant Z = pi * int_0^inf g(u) du."""
    return math.exp(log_partition(gen))


def log_partition(gen: GeneratorFamily) -> float:
    kind, shape = gen.kind, gen.shape
    if kind == "normal":
        return math.log(2.0 * math.pi)
    if kind == "student":
        return (
            sf.ln_gamma(shape / 2.0)
            + math.log(shape * math.pi)
            - sf.ln_gamma((shape + 2.0) / 2.0)
        )
    if kind == "hyperbolic":
        return (
            math.log(2.0 * math.pi)
            + math.log1p(shape)
            - shape
            - 2.0 * math.log(shape)
        )
    if kind == "laplace":
        return math.log(math.pi)
    return (
        math.log(math.pi / shape) + (2.0 - shape) / 2.0 * math.log(2.0)
    )


def _invert(cdf, p: float, lo: float, hi: float) -> float:
    """Bracket-expanding cdf inversion."""
    for _ in range(200):
        if cdf(lo) < p:
            break
        lo = lo * 2 if lo < 0 else lo - max(1.0, abs(lo))
    for _ in range(200):
        if cdf(hi) > p:
            break
        hi = hi * 2 if hi > 0 else hi + max(1.0, abs(hi))
    return float(optimize.brentq(lambda t: cdf(t) - p, lo, hi, xtol=1e-12))


def _symmetric_law(pdf_vec) -> UnivariateLaw:
    """Law of a symmetric density given a vectorizable pdf; cdf by quadrature."""

    def pdf(x):
        return pdf_vec(np.asarray(x, dtype=float))

    def cdf(x):
        x = float(x)
        if x == 0.0:
            return 0.5
        half, _ = integrate.quad(pdf, 0.0, abs(x), epsabs=1e-12, epsrel=1e-11)
        return 0.5 + math.copysign(half, x)

    def quantile(p):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise ValueError("quantile requires 0 < p < 1")
        if p == 0.5:
            return 0.0
        return _invert(cdf, p, -1.0, 1.0)

    return UnivariateLaw(pdf=pdf, cdf=cdf, quantile=quantile)


def _gh_log_pdf(x, lam: float, alpha: float, delta: float):
    """Log density of the generalized hyperbolic law GH(lam, alpha, delta).

    f(x) = (alpha/delta)^lam / (sqrt(2 pi) K_lam(delta alpha))
           * K_{lam - 1/2}(alpha s) * (s / alpha)^(lam - 1/2),  s = sqrt(delta^2 + x^2)
    with lam restricted to {1/2, 1, 3/2}.
    """
    if lam not in (0.5, 1.0, 1.5):
        raise ValueError("GH order must be one of 1/2, 1, 3/2")
    x = np.asarray(x, dtype=float)
    s = np.sqrt(delta * delta + x * x)
    out = (
        lam * math.log(alpha / delta)
        - 0.5 * math.log(2.0 * math.pi)
        - sf.ln_bessel_k(lam, delta * alpha)
        + sf.ln_bessel_k(lam - 0.5, alpha * s)
        + (lam - 0.5) * (np.log(s) - math.log(alpha))
    )
    return out


def gh_law(lam: float, alpha: float, delta: float) -> UnivariateLaw:
    """Generalized hyperbolic law with order lam in {1/2, 1, 3/2}."""
    if not (alpha > 0 and delta > 0):
        raise ValueError("gh_law requires alpha > 0 and delta > 0")
    return _symmetric_law(lambda x: np.exp(_gh_log_pdf(x, lam, alpha, delta)))


def esl_law(a: float, m: float) -> UnivariateLaw:
    """Extended-slash law: Gaussian scale mixture tilted by a power weight.

    pdf(y) = (1 / sqrt(2 pi)) * G((m+1)/2, (a^2 + y^2)/2) / G(m/2, a^2/2)
    where G(s, x) = x^(-s) gamma_lower(s, x). Continuous in a, including a = 0.
    """
    if not m > 0:
        raise ValueError("esl_law requires m > 0")
    a = abs(float(a))
    den = _gammainc_scaled(m / 2.0, a * a / 2.0)

    def pdf_vec(y):
        c = (a * a + y * y) / 2.0
        return _gammainc_scaled((m + 1.0) / 2.0, c) / (_SQRT_2PI * den)

    return _symmetric_law(pdf_vec)


def sl_law(q: float) -> UnivariateLaw:
    """Classical slash law with power q > 0 (heavy polynomial tails)."""
    if not q > 0:
        raise ValueError("sl_law requires q > 0")

    def pdf_vec(x):
        return q / (2.0 * _SQRT_2PI) * _gammainc_scaled(
            (q + 1.0) / 2.0, x * x / 2.0
        )

    return _symmetric_law(pdf_vec)


@lru_cache(maxsize=128)
def z_marginal(gen: GeneratorFamily) -> UnivariateLaw:
    """Law of one standardized component of the elliptical pair."""
    kind, shape = gen.kind, gen.shape
    if kind == "normal":
        return UnivariateLaw(
            pdf=lambda x: np.exp(-np.asarray(x, float) ** 2 / 2.0) / _SQRT_2PI,
            cdf=sf.normal_cdf,
            quantile=sf.normal_quantile,
        )
    if kind == "student":
        return UnivariateLaw(
            pdf=lambda x: sf.student_t_pdf(shape, x),
            cdf=lambda x: sf.student_t_cdf(shape, x),
            quantile=lambda p: sf.student_t_quantile(shape, p),
        )
    if kind == "hyperbolic":
        return gh_law(1.5, shape, 1.0)
    if kind == "laplace":

        def lap_cdf(x):
            x = float(x)
            return (
                0.5 * math.exp(_SQRT2 * x)
                if x < 0
                else 1.0 - 0.5 * math.exp(-_SQRT2 * x)
            )

        def lap_quantile(p):
            p = float(p)
            if not 0.0 < p < 1.0:
                raise ValueError("quantile requires 0 < p < 1")
            if p < 0.5:
                return math.log(2.0 * p) / _SQRT2
            return -math.log(2.0 * (1.0 - p)) / _SQRT2

        return UnivariateLaw(
            pdf=lambda x: np.exp(-_SQRT2 * np.abs(np.asarray(x, float)))
            / _SQRT2,
            cdf=lap_cdf,
            quantile=lap_quantile,
        )
    return sl_law(shape)


def z2_given_z1(gen: GeneratorFamily, x: float) -> UnivariateLaw:
    """Conditional law of Z2 given Z1 = x for the standardized pair."""
    kind, shape = gen.kind, gen.shape
    x = float(x)
    if kind == "normal":
        return z_marginal(gen)
    if kind == "student":
        c = math.sqrt((shape + x * x) / (shape + 1.0))
        nu1 = shape + 1.0
        return UnivariateLaw(
            pdf=lambda y: sf.student_t_pdf(nu1, np.asarray(y, float) / c) / c,
            cdf=lambda y: sf.student_t_cdf(nu1, float(y) / c),
            quantile=lambda p: c * sf.student_t_quantile(nu1, p),
        )
    if kind == "hyperbolic":
        return gh_law(1.0, shape, math.sqrt(1.0 + x * x))
    if kind == "laplace":
        if abs(x) <= 1e-10:
            raise ValueError(
                "laplace conditional law degenerates at x = 0; "
                "require |x| > 1e-10"
            )
        return gh_law(0.5, _SQRT2, abs(x))
    return esl_law(x, shape + 1.0)


def _r2_table(cdf, pdf) -> Callable[[float], float]:
    """Monotone quantile from a cached cdf table, refined by root finding."""
    hi = 1.0
    while cdf(hi) < 1.0 - 1e-9:
        hi *= 2.0
        if hi > 1e12:
            break
    knots = np.concatenate(
        ([0.0], np.geomspace(1e-12, hi, _R2_KNOTS - 1))
    )
    cvals = np.array([cdf(k) for k in knots])
    # enforce monotonicity against terminal rounding
    cvals = np.maximum.accumulate(cvals)

    def quantile(p):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise ValueError("quantile requires 0 < p < 1")
        j = int(np.searchsorted(cvals, p))
        if j >= len(knots):
            lo, hi_b = knots[-1], knots[-1] * 2 + 1.0
            while cdf(hi_b) < p:
                hi_b *= 2.0
        else:
            lo = knots[j - 1] if j > 0 else 0.0
            hi_b = knots[j]
        if cdf(lo) >= p:
            return float(lo)
        return float(
            optimize.brentq(lambda t: cdf(t) - p, lo, hi_b, xtol=1e-13)
        )

    return quantile


@lru_cache(maxsize=128)
def r2_law(gen: GeneratorFamily) -> UnivariateLaw:
    """Law of the squared radius R^2 = Z1^2 + Z2^2; pdf is pi g(x) / Z."""
    kind, shape = gen.kind, gen.shape
    if kind == "normal":
        return UnivariateLaw(
            pdf=lambda x: 0.5 * np.exp(-np.asarray(x, float) / 2.0),
            cdf=lambda x: -math.expm1(-float(x) / 2.0),
            quantile=lambda p: -2.0 * math.log1p(-_checked_p(p)),
        )
    if kind == "student":
        nu = shape
        return UnivariateLaw(
            pdf=lambda x: 0.5 * np.exp(
                -(nu + 2.0) / 2.0 * np.log1p(np.asarray(x, float) / nu)
            ),
            cdf=lambda x: -math.expm1(-nu / 2.0 * math.log1p(float(x) / nu)),
            quantile=lambda p: nu * ((1.0 - _checked_p(p)) ** (-2.0 / nu) - 1.0),
        )
    log_z = log_partition(gen)

    def pdf(x):
        return np.exp(math.log(math.pi) + log_g(gen, x) - log_z)

    if kind == "hyperbolic":
        nu = shape

        def cdf(x):
            r = math.sqrt(1.0 + float(x))
            return 1.0 - (nu * r + 1.0) / (nu + 1.0) * math.exp(-nu * (r - 1.0))

    elif kind == "laplace":

        def cdf(x):
            u = math.sqrt(2.0 * float(x))
            if u == 0.0:
                return 0.0
            return 1.0 - u * float(sf.bessel_k(1.0, u))

    else:
        q = shape

        def cdf(x):
            x = float(x)
            return 1.0 - q / 2.0 * float(
                _gammainc_scaled(q / 2.0, x / 2.0)
            )

    return UnivariateLaw(pdf=pdf, cdf=cdf, quantile=_r2_table(cdf, pdf))


def _checked_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("quantile requires 0 < p < 1")
    return p
