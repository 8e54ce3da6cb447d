"""Exact simulation via the stochastic representation.

A standardized elliptical pair is generated as

    Z1 = R * D * U1,    Z2 = R * sqrt(1 - D^2) * U2,

with R^2 following the family's squared-radius law, D = sin(pi V / 2) for
V uniform, and U1, U2 independent random signs. Closed-form radius draws
are used where available; the hyperbolic radius inverts its exact CDF.
The slash pair is drawn directly as a Gaussian pair over a power-law
scale, which is the same law without any table work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import generators as gn
from .core import ModelParams
from .generators import GeneratorFamily


@dataclass
class RandomSource:
    """Deterministic counter-based random stream (Philox, 64-bit seed).

    Identical seeds reproduce identical streams across runs and platforms.
    Each source is single-consumer; derive independent child sources for
    parallel work with child().
    """

    seed: int
    algorithm: str = "philox"
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.algorithm != "philox":
            raise ValueError("only the philox algorithm is supported")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self._gen = np.random.Generator(np.random.Philox(int(self.seed)))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, index: int) -> "RandomSource":
        """Independently-seeded source: seed = base xor (index + 1)."""
        return RandomSource(int(self.seed) ^ (int(index) + 1))


def _sample_z(gen: GeneratorFamily, rng: np.random.Generator, n: int):
    """n standardized elliptical pairs, shape (n, 2)."""
    kind, shape = gen.kind, gen.shape
    if kind == "slash":
        # Gaussian pair divided by T = U^(1/q)
        z = rng.standard_normal((n, 2))
        t = rng.random(n) ** (1.0 / shape)
        return z / t[:, None]
    if kind == "normal":
        r2 = -2.0 * np.log(rng.random(n))
    elif kind == "student":
        u = rng.random(n)
        r2 = shape * ((1.0 - u) ** (-2.0 / shape) - 1.0)
    elif kind == "laplace":
        # exponential scale mixture of the Gaussian radius
        r2 = rng.exponential(size=n) * rng.chisquare(2, size=n)
    else:
        law = gn.r2_law(gen)
        u = rng.random(n)
        r2 = np.array([law.quantile(p) for p in u])
    r = np.sqrt(r2)
    d = np.sin(0.5 * np.pi * rng.random(n))
    s1 = rng.integers(0, 2, size=n) * 2.0 - 1.0
    s2 = rng.integers(0, 2, size=n) * 2.0 - 1.0
    z1 = r * d * s1
    z2 = r * np.sqrt(1.0 - d * d) * s2
    return np.column_stack([z1, z2])


def sample_z_pair(gen: GeneratorFamily, rng: RandomSource):
    """One standardized pair (Z1, Z2) from the family's elliptical law."""
    z = _sample_z(gen, rng.generator, 1)
    return float(z[0, 0]), float(z[0, 1])


def sample_buls(gen: GeneratorFamily, theta: ModelParams, n: int, rng: RandomSource):
    """n independent draws of (W1, W2) under the given parameters.

    W1 = 1 - exp(-eta1 e^(sigma1 Z1)),
    W2 = 1 - exp(-eta2 e^(sigma2 (rho Z1 + sqrt(1-rho^2) Z2))).
    Coordinates are clamped to [1e-15, 1 - 1e-15].
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    from .inference import BivariateDataset

    z = _sample_z(gen, rng.generator, n)
    mix = theta.rho * z[:, 0] + math.sqrt(1.0 - theta.rho ** 2) * z[:, 1]
    t1 = theta.eta1 * np.exp(theta.sigma1 * z[:, 0])
    t2 = theta.eta2 * np.exp(theta.sigma2 * mix)
    w = -np.expm1(-np.column_stack([t1, t2]))
    w = np.clip(w, 1e-15, 1.0 - 1e-15)
    return BivariateDataset(rows=w)
