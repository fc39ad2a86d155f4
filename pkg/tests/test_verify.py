"""Tests for the Monte-Carlo estimators behind the bound checks."""

import math

import numpy as np
import pytest

from sgdstop.losses import LossKind
from sgdstop.numerics import RngState
from sgdstop.sgd import SgdConfig, StopRule
from sgdstop.theory import (
    GaussianFoldedModel,
    Regime,
    low_regime_expected_T_bound,
    regime_set,
)
from sgdstop.verify import (
    TrialStats,
    check_drift_inequality,
    estimate_angle_deviation,
    estimate_expected_T,
    estimate_hitting_time,
    make_drift_probes,
)


def _model(d=6, sigma=0.1, scale=1.0):
    mu = np.zeros(d)
    mu[0] = scale
    return GaussianFoldedModel(mu, sigma)


def test_expected_T_deterministic_and_positive():
    model = _model()
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1)
    a = estimate_expected_T(model, cfg, 40, RngState(3))
    b = estimate_expected_T(model, cfg, 40, RngState(3))
    assert a == b
    assert a.n_trials == 40 and a.n_censored == 0 and a.n_used == 40
    assert a.mean > 0 and a.stderr > 0
    # a different seed gives a different (but nearby) estimate
    c = estimate_expected_T(model, cfg, 40, RngState(4))
    assert c.mean != a.mean
    assert abs(c.mean - a.mean) < 10.0 * (a.stderr + c.stderr)


def test_expected_T_respects_bound():
    model = _model(d=10)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1)
    stats = estimate_expected_T(model, cfg, 100, RngState(5))
    assert stats.n_censored == 0
    assert stats.mean <= low_regime_expected_T_bound(LossKind.LOGISTIC, model, 0.1)


def test_expected_T_censoring_counted():
    model = _model(sigma=0.5)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.001, max_iter=5)
    stats = estimate_expected_T(model, cfg, 30, RngState(6))
    assert stats.n_censored == 30  # alpha too small to fire within 5 steps
    assert math.isnan(stats.mean) and math.isnan(stats.stderr)


def test_expected_T_input_validation():
    with pytest.raises(ValueError):
        estimate_expected_T(_model(), SgdConfig(LossKind.LOGISTIC, 0.1), 0, RngState(1))


def test_extra_sample_rule_uses_independent_check_stream():
    model = _model()
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1, rule=StopRule.extra_sample())
    stats = estimate_expected_T(model, cfg, 50, RngState(7))
    assert stats.n_censored == 0
    assert stats.mean > 0


def test_angle_deviation_validation():
    model = _model(d=4)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1)
    bad_norm = np.array([0.0, 2.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        estimate_angle_deviation(model, cfg, bad_norm, 5, RngState(1))
    not_ortho = np.array([1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        estimate_angle_deviation(model, cfg, not_ortho, 5, RngState(1))
    with pytest.raises(ValueError):
        estimate_angle_deviation(model, cfg, np.zeros(3), 5, RngState(1))


def test_angle_deviation_stats_share_trials():
    model = _model(d=4, sigma=0.3)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.05)
    v = np.array([0.0, 1.0, 0.0, 0.0])
    dev, times = estimate_angle_deviation(model, cfg, v, 60, RngState(8))
    assert dev.n_trials == times.n_trials == 60
    assert dev.n_censored == times.n_censored == 0
    assert dev.mean >= 0.0
    assert times.mean > 0.0
    # same trials as the plain stopping-time estimator on the same streams
    alone = estimate_expected_T(model, cfg, 60, RngState(8))
    assert times == alone


def test_hitting_time_basic():
    model = _model(d=4)
    rset = regime_set(LossKind.LOGISTIC, model, 0.1)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1, rule=StopRule.none())
    stats = estimate_hitting_time(np.zeros(4), rset, cfg, 50, RngState(9))
    assert stats.n_censored == 0
    assert stats.mean >= 1.0
    # the drift argument caps the mean hit time by V(theta_0) / b
    v0 = (rset.params.M - 0.0) ** 2
    assert stats.mean <= v0 / rset.params.b + 4.0 * stats.stderr


def test_hitting_time_rejects_start_inside():
    model = _model(d=4)
    rset = regime_set(LossKind.LOGISTIC, model, 0.1)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1, rule=StopRule.none())
    inside = np.zeros(4)
    inside[0] = 2.0  # mu . theta = 2 >= 1
    with pytest.raises(ValueError):
        estimate_hitting_time(inside, rset, cfg, 5, RngState(1))


def test_hitting_time_censors_when_step_too_small():
    model = _model(d=4)
    rset = regime_set(LossKind.LOGISTIC, model, 1e-7)
    cfg = SgdConfig(LossKind.LOGISTIC, 1e-7, max_iter=10, rule=StopRule.none())
    stats = estimate_hitting_time(np.zeros(4), rset, cfg, 10, RngState(10))
    assert stats.n_censored == 10


def test_make_drift_probes_geometry():
    model = _model(d=8, scale=2.0)
    rset = regime_set(LossKind.LOGISTIC, model, 0.1)
    dots = [-5.0, 0.0, 0.9]
    probes = make_drift_probes(rset, dots, RngState(11), ortho_norm=1.5)
    assert len(probes) == 3
    for t, theta in zip(dots, probes):
        assert float(model.mu @ theta) == pytest.approx(t, abs=1e-10)
        perp = theta - (float(model.mu @ theta) / model.mu_norm**2) * model.mu
        assert float(np.linalg.norm(perp)) == pytest.approx(1.5, rel=1e-12)
    # determinism
    again = make_drift_probes(rset, dots, RngState(11), ortho_norm=1.5)
    for a, b in zip(probes, again):
        assert np.array_equal(a, b)


def test_make_drift_probes_rejects_inside_target():
    model = _model(d=4)
    rset = regime_set(LossKind.LOGISTIC, model, 0.1)
    with pytest.raises(ValueError):
        make_drift_probes(rset, [2.0], RngState(1))  # mu . theta = 2 is inside


def test_drift_inequality_passes_in_low_regime():
    model = _model(d=10)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1)
    rset = regime_set(LossKind.LOGISTIC, model, 0.1)
    probes = make_drift_probes(rset, [-5.0, 0.0, 0.9], RngState(12).substream(0))
    checks = check_drift_inequality(rset, cfg, probes, 4000, RngState(12).substream(1))
    assert len(checks) == 3
    for c in checks:
        assert c.passed
        assert c.decrement == pytest.approx(0.1, rel=1e-15)
        assert c.estimate < -c.decrement
        assert c.stderr > 0


def test_drift_inequality_zero_step_control_fails():
    # alpha = 0 makes the drift exactly 0, which must not pass the strict test
    model = _model(d=10)
    cfg = SgdConfig(LossKind.LOGISTIC, 0.0)
    rset = regime_set(LossKind.LOGISTIC, model, 0.0)
    probes = make_drift_probes(rset, [0.0, 0.9], RngState(13).substream(0))
    checks = check_drift_inequality(rset, cfg, probes, 2000, RngState(13).substream(1))
    for c in checks:
        assert c.estimate == 0.0 and c.stderr == 0.0
        assert not c.passed


def test_drift_inequality_guards():
    high = GaussianFoldedModel(np.array([1.0, 0.0]), 2.0)
    rset_high = regime_set(LossKind.LOGISTIC, high, 0.01)
    assert rset_high.regime is Regime.HIGH
    with pytest.raises(ValueError):
        check_drift_inequality(rset_high, SgdConfig(LossKind.LOGISTIC, 0.01), [], 100, RngState(1))

    model = _model(d=4)
    rset = regime_set(LossKind.LOGISTIC, model, 0.1)
    inside = np.zeros(4)
    inside[0] = 3.0
    with pytest.raises(ValueError):
        check_drift_inequality(rset, SgdConfig(LossKind.LOGISTIC, 0.1), [inside], 100, RngState(1))
    with pytest.raises(ValueError):
        check_drift_inequality(rset, SgdConfig(LossKind.LOGISTIC, 0.1), [], 1, RngState(1))


def test_drift_inequality_hinge_matches_per_sample_recompute():
    # the vectorized row V must agree with literally stepping each sample
    from sgdstop.sgd import sgd_step
    from sgdstop.theory import drift_value
    from sgdstop.data import folded_gaussian_stream

    model = _model(d=5)
    cfg = SgdConfig(LossKind.HINGE, 0.1)
    rset = regime_set(LossKind.HINGE, model, 0.1)
    probes = make_drift_probes(rset, [0.5], RngState(14).substream(0))
    n = 500
    checks = check_drift_inequality(rset, cfg, probes, n, RngState(14).substream(1))
    theta = probes[0]
    gen = RngState(14).substream(1).substream(0).generator()
    from sgdstop.numerics import standard_normals

    noise = standard_normals(gen, n * model.d).reshape(n, model.d)
    xis = model.mu + model.sigma * noise
    v0 = drift_value(rset, theta, 0.1)
    dvs = [
        drift_value(rset, sgd_step(theta, xi, LossKind.HINGE, 0.1), 0.1) - v0
        for xi in xis
    ]
    assert checks[0].estimate == pytest.approx(float(np.mean(dvs)), rel=1e-12)


def test_trial_stats_single_trial_has_nan_stderr():
    model = _model()
    cfg = SgdConfig(LossKind.LOGISTIC, 0.1)
    stats = estimate_expected_T(model, cfg, 1, RngState(15))
    assert isinstance(stats, TrialStats)
    assert stats.n_trials == 1
    assert math.isnan(stats.stderr)
