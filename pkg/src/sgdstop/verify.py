"""Monte-Carlo estimators that check the finite-time bounds by simulation.

Each estimator runs many independent trials of the SGD engine on the folded
Gaussian model and reduces them to a :class:`TrialStats` (mean, standard
error, censoring counts).  Trial i draws through ``rng.substream(i)``, with
two designated sub-streams per run where a rule needs an independent check
stream, so a fixed (seed, stream) input reproduces every trial bit-for-bit
and trials never share randomness.

All the comparisons these estimators feed are one-sided: the theory gives
upper bounds, so checks are of the form

    estimate <= bound + (slack in standard errors),

and for the drift decrement the inequality is strict (a step of exactly 0,
as with alpha = 0, must fail).

Censored trials (max_iter reached, or an exhausted sampler) are excluded
from the mean and reported in ``n_censored``; an all-censored estimate is
NaN rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .losses import LossKind
from .numerics import RngState, standard_normals
from .data import folded_gaussian_stream
from .sgd import RunResult, SgdConfig, StopKind, run, sgd_step
from .theory import GaussianFoldedModel, Regime, RegimeSet, drift_value, target_set_contains

__all__ = [
    "TrialStats",
    "DriftCheck",
    "estimate_expected_T",
    "estimate_angle_deviation",
    "estimate_hitting_time",
    "make_drift_probes",
    "check_drift_inequality",
]


@dataclass(frozen=True)
class TrialStats:
    """Mean and standard error over the uncensored trials of an estimator."""

    mean: float
    stderr: float
    n_trials: int
    n_censored: int

    @property
    def n_used(self) -> int:
        return self.n_trials - self.n_censored


def _reduce(values: list[float], n_trials: int) -> TrialStats:
    n_censored = n_trials - len(values)
    if not values:
        return TrialStats(math.nan, math.nan, n_trials, n_censored)
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    stderr = (
        float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.nan
    )
    return TrialStats(mean, stderr, n_trials, n_censored)


def _trial_run(
    model: GaussianFoldedModel, config: SgdConfig, trial_rng: RngState
) -> RunResult:
    sampler = folded_gaussian_stream(model.mu, model.sigma, trial_rng.substream(0))
    check = None
    if config.rule.kind is StopKind.EXTRA_SAMPLE:
        check = folded_gaussian_stream(model.mu, model.sigma, trial_rng.substream(1))
    return run(sampler, config, check_sampler=check)


def estimate_expected_T(
    model: GaussianFoldedModel, config: SgdConfig, n_trials: int, rng: RngState
) -> TrialStats:
    """Empirical mean stopping time of the configured rule on the model."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    times = []
    for i in range(n_trials):
        result = _trial_run(model, config, rng.substream(i))
        if not result.censored:
            times.append(float(result.iterations))
    return _reduce(times, n_trials)


def estimate_angle_deviation(
    model: GaussianFoldedModel,
    config: SgdConfig,
    v: np.ndarray,
    n_trials: int,
    rng: RngState,
) -> tuple[TrialStats, TrialStats]:
    """(stats of |v . theta_T|, stats of T) over uncensored trials.

    ``v`` must be a unit vector orthogonal to mu: along such directions the
    stopped iterate is a stopped martingale, which is what the deviation
    bound controls.  Both statistics come from the same trials, so their
    standard errors can be propagated into one combined slack.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (model.d,):
        raise ValueError(f"v has shape {v.shape}, expected ({model.d},)")
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
        raise ValueError("v must be a unit vector")
    if abs(float(v @ model.mu)) > 1e-9 * model.mu_norm:
        raise ValueError("v must be orthogonal to mu")
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    deviations = []
    times = []
    for i in range(n_trials):
        result = _trial_run(model, config, rng.substream(i))
        if not result.censored:
            deviations.append(abs(float(v @ result.theta)))
            times.append(float(result.iterations))
    return _reduce(deviations, n_trials), _reduce(times, n_trials)


def estimate_hitting_time(
    theta0: np.ndarray,
    rset: RegimeSet,
    config: SgdConfig,
    n_trials: int,
    rng: RngState,
) -> TrialStats:
    """Empirical mean of the first entry time into the target set.

    Plain SGD (no stopping test) from theta0, which must lie outside the
    set; the hit index is the first k >= 1 with theta_k inside.  Runs not
    entering within max_iter count as censored.
    """
    theta0 = np.asarray(theta0, dtype=float)
    if target_set_contains(rset, theta0):
        raise ValueError("theta0 already lies in the target set")
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    times = []
    for i in range(n_trials):
        sampler = folded_gaussian_stream(
            rset.model.mu, rset.model.sigma, rng.substream(i).substream(0)
        )
        theta = theta0.copy()
        for k in range(1, config.max_iter + 1):
            theta = sgd_step(theta, next(sampler), config.kind, config.alpha)
            if target_set_contains(rset, theta):
                times.append(float(k))
                break
    return _reduce(times, n_trials)


def make_drift_probes(
    rset: RegimeSet,
    mu_dots: list[float],
    rng: RngState,
    ortho_norm: float = 1.0,
) -> list[np.ndarray]:
    """Probe iterates with prescribed mu . theta and random orthogonal parts.

    Each probe is (t / |mu|^2) mu + ortho_norm * u with u a random unit
    vector orthogonal to mu (drawn from the given stream), t running over
    mu_dots.  Probes must land outside the target set.
    """
    model = rset.model
    gen = rng.generator()
    mu2 = model.mu_norm**2
    probes = []
    for t in mu_dots:
        g = standard_normals(gen, model.d)
        g -= (float(g @ model.mu) / mu2) * model.mu
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            raise ArithmeticError("degenerate orthogonal draw")
        theta = (t / mu2) * model.mu + (ortho_norm / norm) * g
        if target_set_contains(rset, theta):
            raise ValueError(f"probe with mu.theta = {t} lies inside the target set")
        probes.append(theta)
    return probes


@dataclass(frozen=True)
class DriftCheck:
    """One-step drift estimate at a probe against the guaranteed decrement."""

    theta: np.ndarray
    estimate: float
    stderr: float
    decrement: float  # guaranteed bound: estimate must fall below -decrement
    passed: bool


def check_drift_inequality(
    rset: RegimeSet,
    config: SgdConfig,
    probes: list[np.ndarray],
    n_mc: int,
    rng: RngState,
) -> list[DriftCheck]:
    """Monte-Carlo check of E[V(theta_1) - V(theta) | theta] <= -b outside C.

    Only the low-noise regime carries a quantitative decrement b = alpha
    |mu|^2, so high-regime sets are rejected.  The pass condition is strict
    (estimate < -b + 4 stderr): a drift of exactly zero, as produced by
    alpha = 0, must fail.
    """
    if rset.regime is not Regime.LOW:
        raise ValueError("quantitative drift decrement is only specified for low noise")
    if n_mc < 2:
        raise ValueError(f"n_mc must be >= 2, got {n_mc}")
    model = rset.model
    b = config.alpha * model.mu_norm**2
    checks = []
    for j, theta in enumerate(probes):
        theta = np.asarray(theta, dtype=float)
        if target_set_contains(rset, theta):
            raise ValueError(f"probe {j} lies inside the target set")
        gen = rng.substream(j).generator()
        noise = standard_normals(gen, n_mc * model.d).reshape(n_mc, model.d)
        xis = model.mu + model.sigma * noise
        margins = xis @ theta
        if config.kind is LossKind.LOGISTIC:
            s = _sigmoid(-margins)
        else:
            s = (margins <= 1.0).astype(float)
        # V(theta_1) depends on theta_1 only through mu . theta_1, so the
        # rowwise V uses mu . theta + alpha s (mu . xi) directly.
        mu_dot = float(model.mu @ theta)
        mu_dot_1 = mu_dot + config.alpha * s * (xis @ model.mu)
        v0 = drift_value(rset, theta, config.alpha)
        dv = (rset.params.M - mu_dot_1) ** 2 - v0
        est = float(dv.mean())
        se = float(dv.std(ddof=1) / math.sqrt(n_mc))
        checks.append(
            DriftCheck(
                theta=theta,
                estimate=est,
                stderr=se,
                decrement=b,
                passed=bool(est < -b + 4.0 * se),
            )
        )
    return checks


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out
