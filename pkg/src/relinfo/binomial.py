"""Binomial toy model: observed trials plus a known count of missing trials.

Missing data are n_missing additional exchangeable Bernoulli trials whose
missingness is independent of outcome, so the complete-data likelihood is
a plain binomial on n_observed + n_missing trials.  Because the family is
exponential with sufficient statistic (successes, trials), sufficient-
statistic imputation is exact for every linear functional, and instances
with a small missing count admit an exact enumeration oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special, stats

from .core import ModelContract
from .errors import BoundaryError, OracleUnavailableError, ValidationError
from .mc import stream_uniforms

ENUMERATION_CAP = 25


@dataclass(frozen=True)
class BinomialObserved:
    successes: int
    n_observed: int
    n_missing: int

    def __post_init__(self):
        if self.n_observed < 1:
            raise ValidationError("n_observed must be positive")
        if not 0 <= self.successes <= self.n_observed:
            raise ValidationError("successes must lie in [0, n_observed]")
        if self.n_missing < 0:
            raise ValidationError("n_missing must be nonnegative")

    @property
    def n_total(self) -> int:
        return self.n_observed + self.n_missing


@dataclass(frozen=True)
class BinomialComplete:
    """Complete data; successes_total may be fractional (imputation) or an
    array over Monte Carlo draws (vectorized completion)."""

    successes_total: float | np.ndarray
    n_total: int


def _counts(data):
    if isinstance(data, BinomialObserved):
        return data.successes, data.n_observed
    if isinstance(data, BinomialComplete):
        return data.successes_total, data.n_total
    raise ValidationError(f"unsupported data type {type(data).__name__}")


def _log_likelihood(p, data):
    x, n = _counts(data)
    # xlogy keeps 0*log(0) = 0 at the data boundary.
    return special.xlogy(x, p) + special.xlogy(n - x, 1.0 - p)


def _mle(data):
    x, n = _counts(data)
    return x / n


def _draw_completion(observed: BinomialObserved, theta, rng: np.random.Generator):
    extra = rng.binomial(observed.n_missing, theta) if observed.n_missing else 0
    return BinomialComplete(observed.successes + extra, observed.n_total)


def _draw_completions_batch(observed: BinomialObserved, theta, n_draws: int, seed: int):
    if observed.n_missing == 0:
        extra = np.zeros(n_draws)
    else:
        u = stream_uniforms(seed, n_draws)
        extra = stats.binom.ppf(u, observed.n_missing, theta)
    return BinomialComplete(observed.successes + extra, observed.n_total)


def _impute_completion(observed: BinomialObserved, theta):
    return BinomialComplete(observed.successes + observed.n_missing * theta,
                            observed.n_total)


def _sufficient_statistic(data):
    x, n = _counts(data)
    return np.array([x, n], dtype=float)


def binomial_model() -> ModelContract:
    """Contract for the binomial with the success probability restricted to (0, 1)."""
    return ModelContract(
        name="binomial",
        log_likelihood=_log_likelihood,
        mle=_mle,
        draw_completion=_draw_completion,
        sufficient_statistic=_sufficient_statistic,
        impute_completion=_impute_completion,
        draw_completions_batch=_draw_completions_batch,
        in_domain=lambda p: 0.0 < p < 1.0,
        is_boundary=lambda p: not 0.0 < p < 1.0,
    )


def ri1_closed_form(obs: BinomialObserved) -> float:
    """RI1 = n_observed / n_total.

    The lod is linear in the success count and imputation at the observed
    MLE preserves the success fraction, so the expected complete-data lod
    is the observed lod scaled by n_total / n_observed.
    """
    if not 0 < obs.successes < obs.n_observed:
        raise BoundaryError("observed MLE on the boundary; RI1 refused")
    return obs.n_observed / obs.n_total


def enumerate_expectation(obs: BinomialObserved, theta: float,
                          functional: Callable[[BinomialComplete], float],
                          cap: int = ENUMERATION_CAP) -> float:
    """Exact conditional expectation over the missing-success count.

    Sums functional(complete data with successes + k) against the
    Binomial(n_missing, theta) pmf; exact to floating precision.
    """
    if obs.n_missing > cap:
        raise OracleUnavailableError(
            f"n_missing={obs.n_missing} exceeds the enumeration cap {cap}")
    ks = np.arange(obs.n_missing + 1)
    weights = stats.binom.pmf(ks, obs.n_missing, theta)
    values = np.array([functional(BinomialComplete(obs.successes + int(k), obs.n_total))
                       for k in ks], dtype=float)
    return float(weights @ values)


def ri1_enumeration(obs: BinomialObserved, theta_null: float, *,
                    theta_alt: float | None = None,
                    draw_theta: float | None = None,
                    cap: int = ENUMERATION_CAP) -> float:
    """RI1 with the denominator expectation computed by exact enumeration."""
    model = binomial_model()
    theta_hat = _mle(obs)
    if not 0.0 < theta_hat < 1.0:
        raise BoundaryError("observed MLE on the boundary; RI1 refused")
    if theta_alt is None:
        theta_alt = theta_hat
    if draw_theta is None:
        draw_theta = theta_hat
    lod_ob = float(_log_likelihood(theta_alt, obs) - _log_likelihood(theta_null, obs))
    denom = enumerate_expectation(
        obs, draw_theta,
        lambda co: float(_log_likelihood(theta_alt, co) - _log_likelihood(theta_null, co)),
        cap=cap,
    )
    return lod_ob / denom
