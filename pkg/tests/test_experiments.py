"""Descriptive summaries, Monte Carlo study plumbing and QQ diagnostics."""

import math

import numpy as np
import pytest

from buls.cli import dataset
from buls.core import ModelParams, maha_quantile
from buls.experiments import (
    MCConfig,
    MCReport,
    QQSeries,
    describe,
    mc_study,
    qq_data,
)
from buls.generators import laplace, normal
from buls.inference import BivariateDataset, fit
from buls.sampling import RandomSource, sample_buls

UEFA = dataset("uefa")
FIFA = dataset("fifa")

# published summary rows: min, median, mean, max, sd, cv, cs, ck
TABLE_UEFA = {
    "w1": (0.022, 0.456, 0.454, 0.911, 0.224, 49.274, 0.164, -0.930),
    "w2": (0.022, 0.311, 0.365, 0.944, 0.254, 69.475, 0.522, -0.839),
}
TABLE_FIFA = {
    "w1": (0.769, 0.860, 0.860, 0.931, 0.038, 4.376, -0.373, -0.194),
    "w2": (0.427, 0.556, 0.550, 0.751, 0.075, 13.713, 0.308, -0.425),
}


@pytest.mark.parametrize(
    "data,table", [(UEFA, TABLE_UEFA), (FIFA, TABLE_FIFA)], ids=["uefa", "fifa"]
)
def test_describe_reproduces_published_summaries(data, table):
    out = describe(data)
    for var, row in table.items():
        s = out[var]
        mn, med, mean, mx, sd, cv, cs, ck = row
        assert s.n == data.n
        assert s.minimum == pytest.approx(mn, abs=5e-3)
        assert s.median == pytest.approx(med, abs=5e-3)
        assert s.mean == pytest.approx(mean, abs=5e-3)
        assert s.maximum == pytest.approx(mx, abs=5e-3)
        assert s.sd == pytest.approx(sd, abs=5e-3)
        assert s.cv == pytest.approx(cv, abs=0.05)
        assert s.cs == pytest.approx(cs, abs=0.05)
        assert s.ck == pytest.approx(ck, abs=0.05)


def test_describe_is_permutation_invariant():
    perm = np.random.default_rng(3).permutation(UEFA.n)
    shuffled = BivariateDataset(rows=UEFA.rows[perm])
    base = describe(UEFA)
    other = describe(shuffled)
    for var in ("w1", "w2"):
        for name in ("n", "minimum", "median", "mean", "maximum", "sd", "cv", "cs", "ck"):
            assert getattr(other[var], name) == pytest.approx(
                getattr(base[var], name), rel=1e-10
            )


def test_describe_handles_constant_column():
    rows = np.column_stack([np.full(8, 0.4), np.linspace(0.1, 0.8, 8)])
    s = describe(BivariateDataset(rows=rows))["w1"]
    assert s.sd == 0.0 and s.cv == 0.0
    assert math.isnan(s.cs) and math.isnan(s.ck)


def test_describe_adjusted_flag_changes_shape_coefficients():
    plain = describe(UEFA)["w1"]
    adj = describe(UEFA, adjusted=True)["w1"]
    assert plain.mean == adj.mean and plain.sd == adj.sd
    assert plain.cs != adj.cs and plain.ck != adj.ck


def test_describe_needs_two_observations():
    with pytest.raises(ValueError):
        describe(BivariateDataset(rows=np.array([[0.3, 0.4]])))


def test_mc_config_validation():
    th = ModelParams(1, 1, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        MCConfig(normal(), th, (50,), 0)
    with pytest.raises(ValueError):
        MCConfig(normal(), th, (), 10)
    with pytest.raises(ValueError):
        MCConfig(normal(), th, (5,), 10)
    with pytest.raises(ValueError):
        MCConfig(normal(), th, (50,), 10, confidence=1.0)


def test_mc_study_is_reproducible(monkeypatch):
    monkeypatch.setenv("BULS_THREADS", "2")
    cfg = MCConfig(
        normal(), ModelParams(1, 1, 0.5, 0.5, 0.5), (40,), 12, base_seed=7
    )
    a = mc_study(cfg)
    b = mc_study(cfg)
    assert isinstance(a, MCReport)
    assert a.cells == b.cells
    assert a.failure_rates == b.failure_rates
    for c in a.cells:
        assert c.rmse >= abs(c.bias) - 1e-12
        assert 0.0 <= c.cp <= 1.0
        assert c.cp_se >= 0.0
    with pytest.raises(KeyError):
        a.cell(40, "nu")


def test_mc_study_single_replication_collapses_rmse(monkeypatch):
    monkeypatch.setenv("BULS_THREADS", "1")
    cfg = MCConfig(
        normal(), ModelParams(1, 1, 0.5, 0.5, 0.3), (60,), 1, base_seed=11
    )
    rep = mc_study(cfg)
    for c in rep.cells:
        assert c.rmse == pytest.approx(abs(c.bias), rel=1e-12)
        assert c.cp in (0.0, 1.0)


def test_mc_study_aborts_on_widespread_failures(monkeypatch):
    monkeypatch.setenv("BULS_THREADS", "1")
    # the Laplace likelihood is unbounded, so these fits never converge
    cfg = MCConfig(
        laplace(), ModelParams(1, 1, 0.5, 0.5, 0.3), (20,), 3, base_seed=2
    )
    with pytest.raises(RuntimeError):
        mc_study(cfg)


def test_qq_series_orders_both_coordinates():
    with pytest.raises(ValueError):
        QQSeries(pairs=((0.5, 1.0), (0.4, 2.0)), gen=normal())
    res = fit(normal(), UEFA)
    qq = qq_data(normal(), res.theta_hat, UEFA)
    assert len(qq.pairs) == UEFA.n
    theo = [p[0] for p in qq.pairs]
    emp = [p[1] for p in qq.pairs]
    assert theo == sorted(theo) and emp == sorted(emp)


def test_qq_single_row_sits_at_the_median():
    row = BivariateDataset(rows=np.array([[0.3, 0.6]]))
    th = ModelParams(1, 1, 0.5, 0.5, 0.0)
    qq = qq_data(normal(), th, row)
    assert len(qq.pairs) == 1
    assert qq.pairs[0][0] == pytest.approx(maha_quantile(normal(), 0.5), rel=1e-12)


def test_qq_tracks_the_line_under_the_true_model():
    th = ModelParams(1, 1, 0.7, 0.7, 0.4)
    data = sample_buls(normal(), th, 2000, RandomSource(42))
    qq = qq_data(normal(), th, data)
    theo = np.array([p[0] for p in qq.pairs])
    emp = np.array([p[1] for p in qq.pairs])
    assert np.corrcoef(theo, emp)[0, 1] > 0.99


def test_qq_flags_the_champions_league_outlier():
    res = fit(normal(), UEFA)
    qq = qq_data(normal(), res.theta_hat, UEFA)
    emp = np.array([p[1] for p in qq.pairs])
    # one observation sits far above the reference line
    assert (emp[-1] - emp.mean()) / emp.std(ddof=1) > 2.0
