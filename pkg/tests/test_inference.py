"""Likelihood, score and maximum-likelihood machinery."""

import math

import numpy as np
import pytest

from buls.cli import dataset
from buls.core import ModelParams, joint_logpdf, UnitPoint
from buls.generators import hyperbolic, laplace, normal, slash, student
from buls.inference import (
    BivariateDataset,
    FitResult,
    fit,
    loglik,
    profile_fit,
    rho_root_exists,
    score,
)
from buls.sampling import RandomSource, sample_buls

UEFA = dataset("uefa")

# published Champions-League estimates used as fixed reference points
REF_NORMAL = ModelParams(0.5288, 0.3414, 0.8865, 1.1355, 0.4956)
REF_STUDENT7 = ModelParams(0.5541, 0.3783, 0.7431, 0.9734, 0.4723)


def test_dataset_validation_and_views():
    d = BivariateDataset(rows=np.array([[0.2, 0.3], [0.4, 0.5]]), label="toy")
    assert d.n == 2 and d.label == "toy"
    np.testing.assert_array_equal(d.w1, [0.2, 0.4])
    np.testing.assert_array_equal(d.w2, [0.3, 0.5])
    with pytest.raises(ValueError):
        d.rows[0, 0] = 0.9  # read-only view
    # a bare pair is promoted to a single row
    assert BivariateDataset(rows=np.array([0.2, 0.3])).n == 1
    with pytest.raises(ValueError):
        BivariateDataset(rows=np.array([[0.2, 0.3, 0.4]]))
    with pytest.raises(ValueError):
        BivariateDataset(rows=np.array([[0.0, 0.5]]))
    with pytest.raises(ValueError):
        BivariateDataset(rows=np.array([[0.5, 1.0]]))
    with pytest.raises(ValueError):
        BivariateDataset(rows=np.array([[0.5, np.nan]]))


def test_loglik_at_published_estimates():
    assert loglik(normal(), REF_NORMAL, UEFA) == pytest.approx(-36.693, abs=0.01)
    assert loglik(student(7), REF_STUDENT7, UEFA) == pytest.approx(-35.487, abs=0.01)


def test_loglik_single_row_relation_to_joint_density():
    # the criterion is defined on the log scale of the latent failure times,
    # which shifts the unit-square density by the transform Jacobian
    th = ModelParams(0.7, 1.1, 0.8, 0.6, 0.35)
    row = BivariateDataset(rows=np.array([[0.42, 0.77]]))
    expected = joint_logpdf(student(5), th, UnitPoint(0.42, 0.77)) + math.log(
        (1 - 0.42) * (1 - 0.77)
    )
    assert loglik(student(5), th, row) == pytest.approx(expected, rel=1e-12)


def test_loglik_rejects_rows_with_infinite_contribution():
    med = 1.0 - math.exp(-0.7)
    rows = np.array([[0.3, 0.4], [med, med], [0.6, 0.2]])
    data = BivariateDataset(rows=rows)
    th = ModelParams(0.7, 0.7, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError, match="row 1"):
        loglik(laplace(), th, data)
    with pytest.raises(ValueError, match="row 1"):
        score(laplace(), th, data)


def test_score_matches_finite_differences():
    th = ModelParams(0.9, 0.6, 0.7, 1.1, -0.3)
    for gen in (normal(), student(7), hyperbolic(2), laplace(), slash(3)):
        s = score(gen, th, UEFA)
        vec = np.array([th.eta1, th.eta2, th.sigma1, th.sigma2, th.rho])
        for k in range(5):
            h = 1e-6 * max(1.0, abs(vec[k]))
            up, dn = vec.copy(), vec.copy()
            up[k] += h
            dn[k] -= h
            fd = (
                loglik(gen, ModelParams(*up), UEFA)
                - loglik(gen, ModelParams(*dn), UEFA)
            ) / (2 * h)
            assert s[k] == pytest.approx(fd, rel=2e-5, abs=1e-7)


def test_gaussian_rho_score_at_independence():
    th = ModelParams(0.8, 1.2, 0.9, 0.7, 0.0)
    z1 = (np.log(-np.log1p(-UEFA.w1)) - math.log(0.8)) / 0.9
    z2 = (np.log(-np.log1p(-UEFA.w2)) - math.log(1.2)) / 0.7
    assert score(normal(), th, UEFA)[4] == pytest.approx((z1 * z2).sum(), rel=1e-12)


def test_fit_reproduces_published_gaussian_row():
    res = fit(normal(), UEFA, seed=0)
    assert isinstance(res, FitResult)
    assert res.converged
    est = res.theta_hat
    for got, want in zip(
        (est.eta1, est.eta2, est.sigma1, est.sigma2, est.rho),
        (0.5288, 0.3414, 0.8865, 1.1355, 0.4956),
    ):
        assert got == pytest.approx(want, abs=2e-4)
    for got, want in zip(res.se, (0.0771, 0.0637, 0.1031, 0.1320, 0.1240)):
        assert got == pytest.approx(want, abs=5e-4)
    assert res.loglik == pytest.approx(-36.6931, abs=0.005)
    assert res.aic == pytest.approx(-2 * res.loglik + 10, rel=1e-12)
    assert res.bic == pytest.approx(-2 * res.loglik + 5 * math.log(UEFA.n), rel=1e-12)
    assert res.score_norm < 1e-4


def test_fit_improves_on_a_user_supplied_start():
    start = ModelParams(0.4, 0.4, 1.0, 1.0, 0.2)
    res = fit(normal(), UEFA, restarts=0, init=start)
    assert res.loglik >= loglik(normal(), start, UEFA)


def test_fit_requires_minimum_sample():
    rows = np.full((5, 2), 0.4) + np.linspace(0, 0.1, 5)[:, None]
    with pytest.raises(ValueError):
        fit(normal(), BivariateDataset(rows=rows))


def test_fit_recovers_simulation_truth():
    truth = ModelParams(1.0, 1.0, 0.7, 0.7, 0.4)
    data = sample_buls(normal(), truth, 5000, RandomSource(2601))
    res = fit(normal(), data, restarts=1)
    assert res.converged
    est = res.theta_hat
    vals = (est.eta1, est.eta2, est.sigma1, est.sigma2, est.rho)
    for got, want, se in zip(vals, (1.0, 1.0, 0.7, 0.7, 0.4), res.se):
        assert abs(got - want) < 3 * se


def test_profile_fit_selects_published_degrees_of_freedom():
    res, shape = profile_fit("student", UEFA, seed=0)
    assert shape == 7
    assert res.loglik == pytest.approx(-35.487, abs=0.01)
    with pytest.raises(ValueError):
        profile_fit("normal", UEFA)


def test_rho_root_scan():
    found, bracket = rho_root_exists(
        student(7), UEFA, (0.5541, 0.3783, 0.7431, 0.9734)
    )
    assert found
    assert bracket[0] < 0.4723 < bracket[1]
    # a single observation at the double median admits no interior root
    lone = BivariateDataset(rows=np.array([[0.9, 0.9]]))
    assert rho_root_exists(normal(), lone, (1.0, 1.0, 1.0, 1.0)) == (False, None)
