"""Replication harnesses: descriptive statistics, the Monte Carlo
bias/RMSE/coverage study, and Mahalanobis-distance QQ diagnostics."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ModelParams, UnitPoint, maha_quantile, mahalanobis_sq
from .generators import GeneratorFamily
from .inference import BivariateDataset, fit
from .sampling import RandomSource, sample_buls
from .specialfn import normal_quantile

PARAM_NAMES = ("eta1", "eta2", "sigma1", "sigma2", "rho")


@dataclass(frozen=True)
class VariableSummary:
    """Location, spread and shape summaries for one variable."""

    n: int
    minimum: float
    median: float
    mean: float
    maximum: float
    sd: float
    cv: float
    cs: float
    ck: float


def _summarize(x: np.ndarray, adjusted: bool) -> VariableSummary:
    n = x.size
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    # central moments with divisor n; shape statistics are reported against
    # the n-1 standard deviation, the convention the reference tables use
    d = x - mean
    m2 = float((d * d).mean())
    m3 = float((d ** 3).mean())
    m4 = float((d ** 4).mean())
    if sd == 0.0:
        cv, cs, ck = 0.0, math.nan, math.nan
    elif adjusted:
        g1 = m3 / m2 ** 1.5
        g2 = m4 / (m2 * m2) - 3.0
        cv = 100.0 * sd / mean
        cs = math.sqrt(n * (n - 1)) / (n - 2) * g1
        ck = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0)
    else:
        cv = 100.0 * sd / mean
        cs = m3 / sd ** 3
        ck = m4 / sd ** 4 - 3.0
    return VariableSummary(
        n=n,
        minimum=float(x.min()),
        median=float(np.median(x)),
        mean=mean,
        maximum=float(x.max()),
        sd=sd,
        cv=cv,
        cs=cs,
        ck=ck,
    )


def describe(data: BivariateDataset, adjusted: bool = False) -> dict:
    """Per-variable summary statistics keyed by 'w1' and 'w2'.

    sd uses divisor n-1; cv = 100 * sd / mean.  Skewness and excess
    kurtosis divide the divisor-n central moments by powers of sd;
    adjusted=True switches to the small-sample bias-corrected variants.
    A constant column reports sd = cv = 0 and NaN shape statistics.
    """
    if data.n < 2:
        raise ValueError("summaries need at least 2 rows")
    return {
        "w1": _summarize(data.w1, adjusted),
        "w2": _summarize(data.w2, adjusted),
    }


@dataclass(frozen=True)
class MCConfig:
    """Settings for one Monte Carlo estimation study."""

    gen: GeneratorFamily
    theta_true: ModelParams
    sample_sizes: tuple
    replications: int
    confidence: float = 0.95
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.sample_sizes or any(n < 6 for n in self.sample_sizes):
            raise ValueError("every sample size must be >= 6")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")


@dataclass(frozen=True)
class MCCell:
    """Aggregate for one (sample size, parameter) pair."""

    n: int
    param: str
    bias: float
    rmse: float
    cp: float
    cp_se: float


@dataclass(frozen=True)
class MCReport:
    """Study output: one cell per (sample size, parameter), plus the
    per-size fraction of replications discarded for failed fits."""

    config: MCConfig
    cells: tuple
    failure_rates: tuple  # (sample size, rate) pairs

    def cell(self, n: int, param: str) -> MCCell:
        for c in self.cells:
            if c.n == n and c.param == param:
                return c
        raise KeyError((n, param))


def _mc_replicate(args):
    """One simulate-and-fit replication; module level so it pickles."""
    gen, theta, n, seed = args
    data = sample_buls(gen, theta, n, RandomSource(seed))
    try:
        fr = fit(gen, data, restarts=1, seed=seed)
    except ValueError:
        return None
    est = fr.theta_hat.as_array()
    se = np.asarray(fr.se)
    if not fr.converged or not np.all(np.isfinite(se)):
        return None
    return est, se


def _coverage(theta_true, est, se, conf):
    """Wald interval indicator per parameter; the rho interval is built on
    the atanh scale and mapped back."""
    z = normal_quantile(0.5 * (1.0 + conf))
    truth = theta_true.as_array()
    cover = np.empty(5)
    for j in range(4):
        cover[j] = abs(est[j] - truth[j]) <= z * se[j]
    ar, ar_se = math.atanh(est[4]), se[4] / (1.0 - est[4] ** 2)
    lo, hi = math.tanh(ar - z * ar_se), math.tanh(ar + z * ar_se)
    cover[4] = lo <= truth[4] <= hi
    return cover


def mc_study(cfg: MCConfig) -> MCReport:
    """Simulate, refit and aggregate bias, RMSE and coverage.

    Replications draw from independent child seeds, so the report is
    reproducible for a fixed config and invariant to worker count.
    Failed fits (non-convergence or unusable standard errors) are
    excluded; a failure rate above 20% for any sample size aborts.
    Parallelism is capped by the BULS_THREADS environment variable.
    """
    threads = int(os.environ.get("BULS_THREADS", os.cpu_count() or 1))
    cells = []
    failure_rates = []
    base = RandomSource(cfg.base_seed)
    counter = 0
    for n in cfg.sample_sizes:
        jobs = []
        for _ in range(cfg.replications):
            jobs.append((cfg.gen, cfg.theta_true, int(n), base.child(counter).seed))
            counter += 1
        if threads > 1 and cfg.replications > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_mc_replicate, jobs, chunksize=8))
        else:
            results = [_mc_replicate(j) for j in jobs]
        kept = [r for r in results if r is not None]
        rate = 1.0 - len(kept) / cfg.replications
        failure_rates.append((int(n), rate))
        if rate > 0.20:
            raise RuntimeError(
                f"failure rate {rate:.1%} at sample size {n} exceeds 20%"
            )
        est = np.array([r[0] for r in kept])
        se = np.array([r[1] for r in kept])
        truth = cfg.theta_true.as_array()
        m = len(kept)
        cover = np.array(
            [_coverage(cfg.theta_true, est[i], se[i], cfg.confidence) for i in range(m)]
        )
        for j, name in enumerate(PARAM_NAMES):
            err = est[:, j] - truth[j]
            cp = float(cover[:, j].mean())
            cells.append(
                MCCell(
                    n=int(n),
                    param=name,
                    bias=float(err.mean()),
                    rmse=float(np.sqrt(np.mean(err * err))),
                    cp=cp,
                    cp_se=math.sqrt(cp * (1.0 - cp) / m),
                )
            )
    return MCReport(config=cfg, cells=tuple(cells), failure_rates=tuple(failure_rates))


@dataclass(frozen=True)
class QQSeries:
    """Sorted (theoretical, empirical) squared-distance quantile pairs."""

    pairs: tuple
    gen: GeneratorFamily

    def __post_init__(self) -> None:
        th = [p[0] for p in self.pairs]
        em = [p[1] for p in self.pairs]
        if list(th) != sorted(th) or list(em) != sorted(em):
            raise ValueError("QQ pairs must be nondecreasing in both coordinates")


def qq_data(gen: GeneratorFamily, theta_hat: ModelParams, data: BivariateDataset) -> QQSeries:
    """Empirical Mahalanobis-distance quantiles against the model law,
    plotting positions (i - 0.5) / n."""
    d2 = np.sort(
        [mahalanobis_sq(theta_hat, UnitPoint(float(w1), float(w2))) for w1, w2 in data.rows]
    )
    n = data.n
    pairs = tuple(
        (maha_quantile(gen, (i - 0.5) / n), float(d2[i - 1])) for i in range(1, n + 1)
    )
    return QQSeries(pairs=pairs, gen=gen)
