"""Exact quantities for the folded Gaussian model and the stopping bounds.

Folding maps a two-class Gaussian problem onto a single distribution: a
labeled pair (zeta, y) with class means mu_0, mu_1 becomes xi = (2y - 1)
(zeta - offset), and with the offset at the midpoint both classes produce
xi ~ N(mu, sigma^2 I_d) where mu = (mu_1 - mu_0)/2.  A linear classifier
theta is correct on a sample exactly when xi . theta > 0, so for this model

    accuracy(theta)  = Phi(mu . theta / (sigma |theta|)),

maximized by any positive multiple of mu at the value Phi(|mu|/sigma).
The stopping test fires on a check sample when its margin reaches 1, which
happens with probability

    Phi((mu . theta - 1) / (sigma |theta|)).

Restricted to the ray theta = rho mu, the population loss has a unique
minimizer rho_star:

    logistic: rho_star = 2 / sigma^2 (independent of |mu|);
    hinge:    rho_star = r / sigma^2 where r solves, with
              w = sigma/(r |mu|) - |mu|/sigma,
              Phi(w) exp(w^2 / 2) = sigma / (|mu| sqrt(2 pi)).

The left side is strictly increasing in w, so the hinge relation is solved
by bisection, carried out on logarithms so extreme |mu|/sigma ratios stay
in range.

The expected-stopping-time machinery is organized around regimes and target
sets.  Noise is "low" when sigma <= c |mu| (c = 0.33 logistic, 1.25 hinge)
and "high" otherwise.  Each regime has a target set C that attracts the
iterates and on which the test fires with probability at least delta:

    low:  C = {theta : mu . theta >= 1},            delta = 1/2,
          drift witness V(theta) = (M - mu . theta)^2;
    high: C = {theta : |rho - rho_star| < rho_star/2, sigma |theta_perp| <= c'},
          delta = Phi^c((2/rho_star - |mu|^2)/(sigma |mu|)) / 2,
          drift witness V(theta) = |theta - rho_star mu|^2 / (2 alpha),

where rho = mu . theta / |mu|^2 and theta_perp = theta - rho mu.  Outside C
the drift witness decreases in expectation by at least b = alpha |mu|^2 per
step, which caps the expected entry time from theta at V(theta)/b and yields
the closed-form expected-stopping-time bound exposed here for the low regime.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .losses import LossKind
from .numerics import std_normal_cdf, std_normal_ccdf

__all__ = [
    "GaussianFoldedModel",
    "Regime",
    "RegimeSet",
    "BoundParams",
    "LOW_NOISE_RATIO",
    "minimizer_rho_star",
    "classifier_accuracy",
    "optimal_accuracy",
    "termination_probability",
    "regime_of",
    "bound_params",
    "regime_set",
    "target_set_contains",
    "drift_value",
    "low_regime_expected_T_bound",
    "high_regime_max_step",
    "angle_bound",
]

# Margin level the stopping test checks against.
MARGIN_THRESHOLD = 1.0

# Largest sigma/|mu| ratio counted as low noise, per loss.
LOW_NOISE_RATIO = {LossKind.LOGISTIC: 0.33, LossKind.HINGE: 1.25}


@dataclass(frozen=True)
class GaussianFoldedModel:
    """Folded sample distribution N(mu, sigma^2 I_d)."""

    mu: np.ndarray
    sigma: float

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu must be a nonempty 1-D vector")
        if not np.all(np.isfinite(mu)):
            raise ValueError("mu must be finite")
        n = float(np.linalg.norm(mu))
        if n == 0.0:
            raise ValueError("mu must be nonzero")
        if not (self.sigma >= 0.0):
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        object.__setattr__(self, "mu", mu)

    @property
    def d(self) -> int:
        return self.mu.shape[0]

    @property
    def mu_norm(self) -> float:
        return float(np.linalg.norm(self.mu))


class Regime(enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class BoundParams:
    """Constants entering the stopping-time bounds for one (loss, model, step).

    b is the guaranteed one-step expected decrease of the drift witness
    outside the target set; M sets the witness scale; c_prime bounds the
    orthogonal component of the high-noise target set; delta lower-bounds
    the firing probability on the target set (exactly 1/2 in the low
    regime).
    """

    kind: LossKind
    c: float
    b: float
    M: float
    rho_star: float
    c_prime: float
    delta: float


@dataclass(frozen=True)
class RegimeSet:
    """A regime together with its target set / drift constants."""

    regime: Regime
    params: BoundParams
    model: GaussianFoldedModel


def minimizer_rho_star(kind: LossKind, mu_norm: float, sigma: float) -> float:
    """Ray coefficient of the population-loss minimizer rho_star mu.

    sigma = 0 is rejected: the separable population problem has no finite
    minimizer on the ray.
    """
    if mu_norm <= 0:
        raise ValueError(f"mu_norm must be positive, got {mu_norm}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if kind is LossKind.LOGISTIC:
        return 2.0 / (sigma * sigma)
    if kind is LossKind.HINGE:
        w = _solve_hinge_w(mu_norm, sigma)
        r = sigma / (mu_norm * (w + mu_norm / sigma))
        return r / (sigma * sigma)
    raise TypeError(f"unknown loss kind: {kind!r}")


def _solve_hinge_w(mu_norm: float, sigma: float, tol: float = 1e-12) -> float:
    """Root of log Phi(w) + w^2/2 = log(sigma / (mu_norm sqrt(2 pi))).

    The left side is strictly increasing (phi(w)/Phi(w) + w > 0 for all w),
    and the root always lies in (-mu_norm/sigma, 40): just above the lower
    endpoint the left side is below the target, and at 40 the w^2/2 term
    dominates any sane right side.
    """
    target = math.log(sigma / (mu_norm * math.sqrt(2.0 * math.pi)))

    def f(w: float) -> float:
        return float(log_ndtr(w)) + 0.5 * w * w - target

    lo = -mu_norm / sigma + 1e-12
    hi = 40.0
    if not (f(lo) < 0.0 < f(hi)):
        raise ArithmeticError(
            f"hinge minimizer bracket failed for mu_norm={mu_norm}, sigma={sigma}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classifier_accuracy(theta: np.ndarray, model: GaussianFoldedModel) -> float:
    """P(xi . theta > 0) for xi ~ N(mu, sigma^2 I); requires theta != 0."""
    theta = np.asarray(theta, dtype=float)
    norm = float(np.linalg.norm(theta))
    if norm == 0.0:
        raise ValueError("classifier accuracy undefined for theta = 0")
    mean_margin = float(model.mu @ theta)
    if model.sigma == 0.0:
        return 1.0 if mean_margin > 0.0 else 0.0
    return std_normal_cdf(mean_margin / (model.sigma * norm))


def optimal_accuracy(model: GaussianFoldedModel) -> float:
    """Best achievable accuracy, attained along mu: Phi(|mu|/sigma)."""
    if model.sigma == 0.0:
        return 1.0
    return std_normal_cdf(model.mu_norm / model.sigma)


def termination_probability(theta: np.ndarray, model: GaussianFoldedModel) -> float:
    """P(xi . theta >= 1) on an independent check sample.

    theta = 0 gives margin 0 with certainty, hence probability 0.
    """
    theta = np.asarray(theta, dtype=float)
    norm = float(np.linalg.norm(theta))
    mean_margin = float(model.mu @ theta)
    spread = model.sigma * norm
    if spread == 0.0:
        return 1.0 if mean_margin >= MARGIN_THRESHOLD else 0.0
    return std_normal_cdf((mean_margin - MARGIN_THRESHOLD) / spread)


def regime_of(kind: LossKind, model: GaussianFoldedModel) -> Regime:
    """Low noise iff sigma <= c |mu| (boundary counts as low)."""
    if model.sigma <= LOW_NOISE_RATIO[kind] * model.mu_norm:
        return Regime.LOW
    return Regime.HIGH


def bound_params(
    kind: LossKind, model: GaussianFoldedModel, alpha: float
) -> BoundParams:
    # alpha = 0 is allowed so degenerate configurations can still be probed;
    # the decrement b is then 0 and no quantitative bound holds.
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    mu2 = model.mu_norm**2
    c = LOW_NOISE_RATIO[kind]
    b = alpha * mu2
    if kind is LossKind.LOGISTIC:
        M = 501.0 + 640.0 * alpha * mu2
    elif kind is LossKind.HINGE:
        M = 501.0 + 782.0 * alpha * mu2
    else:
        raise TypeError(f"unknown loss kind: {kind!r}")
    rho_star = minimizer_rho_star(kind, model.mu_norm, model.sigma)
    if kind is LossKind.LOGISTIC:
        c_prime = 436.0
    else:
        c_prime = 8.0 + 10.0 * rho_star * model.sigma**2
    if regime_of(kind, model) is Regime.LOW:
        delta = 0.5
    else:
        delta = 0.5 * std_normal_ccdf(
            (2.0 / rho_star - mu2) / (model.sigma * model.mu_norm)
        )
    return BoundParams(
        kind=kind, c=c, b=b, M=M, rho_star=rho_star, c_prime=c_prime, delta=delta
    )


def regime_set(
    kind: LossKind, model: GaussianFoldedModel, alpha: float
) -> RegimeSet:
    return RegimeSet(
        regime=regime_of(kind, model),
        params=bound_params(kind, model, alpha),
        model=model,
    )


def _ray_split(theta: np.ndarray, model: GaussianFoldedModel) -> tuple[float, float]:
    """(rho, |orthogonal part|) of theta = rho mu + theta_perp."""
    theta = np.asarray(theta, dtype=float)
    mu2 = model.mu_norm**2
    rho = float(model.mu @ theta) / mu2
    perp = theta - rho * model.mu
    return rho, float(np.linalg.norm(perp))


def target_set_contains(rset: RegimeSet, theta: np.ndarray) -> bool:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (rset.model.d,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({rset.model.d},)")
    if rset.regime is Regime.LOW:
        return float(rset.model.mu @ theta) >= MARGIN_THRESHOLD
    rho, perp_norm = _ray_split(theta, rset.model)
    rho_star = rset.params.rho_star
    return (
        abs(rho - rho_star) < 0.5 * rho_star
        and rset.model.sigma * perp_norm <= rset.params.c_prime
    )


def drift_value(rset: RegimeSet, theta: np.ndarray, alpha: float) -> float:
    """Drift witness V(theta) for the regime's target set.

    Low regime: (M - mu . theta)^2.  High regime: |theta - rho_star mu|^2
    / (2 alpha).  Nonnegative everywhere; the high-regime witness vanishes
    only at the ray minimizer.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (rset.model.d,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({rset.model.d},)")
    if rset.regime is Regime.LOW:
        return (rset.params.M - float(rset.model.mu @ theta)) ** 2
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    diff = theta - rset.params.rho_star * rset.model.mu
    return float(diff @ diff) / (2.0 * alpha)


def low_regime_expected_T_bound(
    kind: LossKind, model: GaussianFoldedModel, alpha: float
) -> float:
    """Closed-form bound on the expected stopping time in the low regime.

        E[T] <= 2 + (2 M^2 / b) (Phi^c(|mu|/sigma)
                + (alpha sigma^3 / |mu|) exp(-|mu|^2/(2 sigma^2)) / sqrt(2 pi)
                + 1)

    with b = alpha |mu|^2 and the loss-specific M.  Requires the model to
    actually be in the low-noise regime for the chosen loss.
    """
    if regime_of(kind, model) is not Regime.LOW:
        raise ValueError("expected-stopping-time bound only holds in the low regime")
    if model.sigma == 0.0:
        raise ValueError("bound requires sigma > 0")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    p = bound_params(kind, model, alpha)
    t = model.mu_norm / model.sigma
    tail = std_normal_ccdf(t)
    gauss_term = (
        alpha
        * model.sigma**3
        / model.mu_norm
        * math.exp(-0.5 * t * t)
        / math.sqrt(2.0 * math.pi)
    )
    return 2.0 + (2.0 * p.M**2 / p.b) * (tail + gauss_term + 1.0)


def high_regime_max_step(
    mu_norm: float, sigma: float, d: int, scale: float = 1.0
) -> float:
    """Largest admissible step in the high regime, up to a universal factor.

        alpha <= scale * |mu|^2 / (sigma^2 (|mu|^2 + d sigma^2))

    The universal factor is not pinned down quantitatively, so the caller
    supplies ``scale`` (default 1.0).
    """
    if mu_norm <= 0:
        raise ValueError(f"mu_norm must be positive, got {mu_norm}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if d <= 0:
        raise ValueError(f"d must be positive, got {d}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    mu2 = mu_norm * mu_norm
    return scale * mu2 / (sigma * sigma * (mu2 + d * sigma * sigma))


def angle_bound(sigma: float, alpha: float, expected_T: float) -> float:
    """Bound on E|v . theta_T| for any unit v orthogonal to mu.

        E|v . theta_T| <= sigma alpha sqrt(2/pi) E[T]

    The orthogonal coordinate is a martingale with per-step first absolute
    moment at most sigma alpha sqrt(2/pi), stopped at T.
    """
    if sigma < 0 or alpha < 0:
        raise ValueError("sigma and alpha must be nonnegative")
    if expected_T < 0:
        raise ValueError(f"expected_T must be nonnegative, got {expected_T}")
    return sigma * alpha * math.sqrt(2.0 / math.pi) * expected_T
