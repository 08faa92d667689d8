"""Model-agnostic lod-score and relative-information measures.

Everything here is parameterized by a :class:`ModelContract`; the binomial
and Cox modules supply concrete contracts.  The central quantity is the
lod score, the natural-log likelihood ratio between an alternative and a
null parameter value.  Relative information compares the observed-data lod
with the expected lod that complete data would have produced.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import mc
from .errors import (
    BoundaryError,
    DomainError,
    InstabilityError,
    UndefinedMeasureError,
    UnsupportedModelError,
    ValidationError,
)
from .mc import MCConfig, MCEstimate


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    SUFFICIENT_STAT = "sufficient_stat_imputation"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class HypothesisPair:
    """Null and alternative parameter values at which lods are evaluated."""

    theta_null: Any
    theta_alt: Any

    def __post_init__(self):
        if np.shape(self.theta_null) != np.shape(self.theta_alt):
            raise ValidationError("theta_null and theta_alt must have equal dimension")


@dataclass(frozen=True)
class LodScore:
    """Log-likelihood ratio, natural-log scale."""

    value: float

    def __float__(self) -> float:
        return _as_scalar(self.value)


@dataclass(frozen=True)
class ModelContract:
    """Pluggable likelihood machinery a model must provide.

    ``impute_completion`` is present only for exponential-family models: it
    returns pseudo-complete data whose sufficient statistic equals the
    conditional expectation of the complete-data sufficient statistic given
    the observed data at the supplied parameter.  ``draw_completions_batch``
    is an optional vectorized sampler returning one data object whose
    fields are arrays over draw index; it must derive draw i's randomness
    from the counter block owned by i (see :func:`relinfo.mc.stream_uniforms`).
    """

    name: str
    log_likelihood: Callable[[Any, Any], Any]
    mle: Callable[[Any], Any]
    draw_completion: Callable[[Any, Any, np.random.Generator], Any]
    sufficient_statistic: Callable[[Any], np.ndarray] | None = None
    impute_completion: Callable[[Any, Any], Any] | None = None
    draw_completions_batch: Callable[[Any, Any, int, int], Any] | None = None
    in_domain: Callable[[Any], bool] | None = None
    is_boundary: Callable[[Any], bool] | None = None

    @property
    def exponential_family(self) -> bool:
        return self.impute_completion is not None


@dataclass(frozen=True)
class RelInfoResult:
    """A relative-information estimate with Monte Carlo provenance."""

    estimate: float
    mc_standard_error: float
    n_draws: int
    seed: int
    method: Method
    diagnostics: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mc_standard_error < 0:
            raise ValidationError("mc_standard_error must be nonnegative")
        if (self.n_draws == 0) != (self.method is not Method.MONTE_CARLO):
            raise ValidationError("n_draws is 0 iff the method is not Monte Carlo")


@dataclass(frozen=True)
class ExpectedLodGap:
    """Shared-draw expectations of the complete-data lod at two alternatives.

    ``at_draw_mle`` evaluates each draw's lod at that draw's own
    complete-data MLE; ``at_fixed_alt`` holds the alternative fixed at the
    observed-data MLE.  ``paired_diff`` is the per-draw difference (first
    minus second), which is nonnegative by MLE maximality.
    """

    at_draw_mle: MCEstimate
    at_fixed_alt: MCEstimate
    paired_diff: MCEstimate
    dominance_violations: int

    @property
    def gap(self) -> float:
        return self.paired_diff.mean


def _check_domain(model: ModelContract, theta) -> None:
    if model.in_domain is not None and not model.in_domain(theta):
        raise DomainError(f"parameter {theta!r} outside the domain of model {model.name!r}")


def _lod_value(model: ModelContract, theta_alt, theta_null, data):
    """Raw lod; broadcasts over array-valued data or parameters."""
    return model.log_likelihood(theta_alt, data) - model.log_likelihood(theta_null, data)


def _as_scalar(value) -> float:
    arr = np.asarray(value, dtype=float)
    if arr.size != 1:
        raise ValidationError(f"expected a scalar lod, got shape {arr.shape}")
    return float(arr.reshape(()))


def lod(model: ModelContract, pair: HypothesisPair, data) -> LodScore:
    """Lod score of ``pair.theta_alt`` against ``pair.theta_null`` on ``data``."""
    _check_domain(model, pair.theta_alt)
    _check_domain(model, pair.theta_null)
    value = _lod_value(model, pair.theta_alt, pair.theta_null, data)
    if np.size(value) == 1 and not math.isfinite(_as_scalar(value)):
        raise DomainError("lod is not finite; parameter on a degenerate boundary")
    return LodScore(_as_scalar(value) if np.size(value) == 1 else value)


def _observed_setup(model: ModelContract, observed, theta_null):
    """Common preamble: observed MLE (with boundary refusal) and domain checks."""
    theta_hat = model.mle(observed)
    if model.is_boundary is not None and model.is_boundary(theta_hat):
        raise BoundaryError("observed-data MLE lies on the parameter boundary")
    _check_domain(model, theta_null)
    return theta_hat


def _completion_lods(model: ModelContract, observed, draw_theta,
                     theta_alt, theta_null, n_draws: int, seed: int,
                     worker_hint: int = 0) -> np.ndarray:
    """Per-draw lod(theta_alt, theta_null | Y_co) for completions at draw_theta."""
    if model.draw_completions_batch is not None:
        completed = model.draw_completions_batch(observed, draw_theta, n_draws, seed)
        return np.asarray(_lod_value(model, theta_alt, theta_null, completed), dtype=float)
    config = MCConfig(n_draws=n_draws, seed=seed, worker_hint=worker_hint)
    return mc.collect_values(
        lambda i, rng: model.draw_completion(observed, draw_theta, rng),
        lambda y_co: _lod_value(model, theta_alt, theta_null, y_co),
        config,
    )


def ri1(model: ModelContract, observed, theta_null, engine: MCConfig | None = None,
        *, theta_alt=None, draw_theta=None, method: str = "auto") -> RelInfoResult:
    """Observed-data lod over the expected complete-data lod.

    By default both the lod's alternative and the completion-drawing
    parameter are the observed-data MLE.  ``theta_alt`` pins the lod to a
    fixed (sharp) alternative; ``draw_theta`` overrides the parameter under
    which completions are drawn or imputed (used e.g. for pooled combining).

    For exponential-family models the conditional expectation is computed
    exactly by sufficient-statistic imputation (lods are linear in the
    sufficient statistic); otherwise Monte Carlo draws are used.
    """
    theta_hat = _observed_setup(model, observed, theta_null)
    if theta_alt is None:
        theta_alt = theta_hat
    if draw_theta is None:
        draw_theta = theta_hat
    pair = HypothesisPair(theta_null=theta_null, theta_alt=theta_alt)
    lod_ob = _as_scalar(lod(model, pair, observed).value)
    if lod_ob == 0.0:
        raise UndefinedMeasureError("observed lod is zero; RI1 undefined")

    if method == "auto":
        method = "sufficient_stat" if model.exponential_family else "monte_carlo"
    if method == "sufficient_stat":
        if not model.exponential_family:
            raise UnsupportedModelError(
                f"model {model.name!r} does not declare exponential-family structure")
        pseudo = model.impute_completion(observed, draw_theta)
        denom = _as_scalar(_lod_value(model, theta_alt, theta_null, pseudo))
        if denom <= 0.0:
            raise InstabilityError("imputed complete-data lod is nonpositive",
                                   {"denominator": denom})
        return RelInfoResult(
            estimate=lod_ob / denom, mc_standard_error=0.0, n_draws=0,
            seed=0, method=Method.SUFFICIENT_STAT,
            diagnostics={"lod_observed": lod_ob, "denominator": denom},
        )
    if method != "monte_carlo":
        raise ValidationError(f"unknown ri1 method {method!r}")
    if engine is None:
        raise ValidationError("Monte Carlo ri1 requires an MCConfig engine")

    values = _completion_lods(model, observed, draw_theta, theta_alt, theta_null,
                              engine.n_draws, engine.seed, engine.worker_hint)
    est = mc.estimate_from_values(values)
    if est.mean <= 0.0:
        raise InstabilityError(
            "Monte Carlo denominator estimate is nonpositive",
            {"denominator_mean": est.mean, "denominator_se": est.standard_error,
             "n_effective": est.n_effective, "sentinel_count": est.sentinel_count},
        )
    # Delta method for a ratio with a fixed numerator.
    se = abs(lod_ob) * est.standard_error / est.mean**2
    return RelInfoResult(
        estimate=lod_ob / est.mean, mc_standard_error=se,
        n_draws=est.n_draws, seed=engine.seed, method=Method.MONTE_CARLO,
        diagnostics={
            "lod_observed": lod_ob,
            "denominator_mean": est.mean,
            "denominator_se": est.standard_error,
            "sentinel_count": est.sentinel_count,
            "se_method": "delta-method ratio, fixed numerator",
            "generator": mc.GENERATOR_ID,
        },
    )


def ri0(model: ModelContract, observed, theta_null) -> RelInfoResult:
    """Null-imputation counterpart of ri1 (exponential families only).

    The complete-data sufficient statistic is imputed at ``theta_null``;
    the pseudo-complete data are refit and their lod against the null is
    divided by the observed lod.  Orientation is chosen so the result lies
    in (0, 1] for this family; the choice is recorded in diagnostics.
    """
    if not model.exponential_family:
        raise UnsupportedModelError("ri0 requires a declared exponential family")
    theta_hat = _observed_setup(model, observed, theta_null)
    lod_ob = _as_scalar(_lod_value(model, theta_hat, theta_null, observed))
    if lod_ob == 0.0:
        raise UndefinedMeasureError("observed lod is zero; RI0 undefined")
    pseudo = model.impute_completion(observed, theta_null)
    theta_imp = model.mle(pseudo)
    lod_imp = _as_scalar(_lod_value(model, theta_imp, theta_null, pseudo))
    return RelInfoResult(
        estimate=lod_imp / lod_ob, mc_standard_error=0.0, n_draws=0,
        seed=0, method=Method.SUFFICIENT_STAT,
        diagnostics={
            "lod_observed": lod_ob,
            "lod_imputed": lod_imp,
            "theta_imputed": theta_imp,
            "orientation": "imputed-lod / observed-lod (kept within (0, 1])",
        },
    )


def ri_y_samples(model: ModelContract, observed, pair: HypothesisPair,
                 n_draws: int, seed: int) -> np.ndarray:
    """Per-draw ratios lod(pair | Y_ob) / lod(pair | Y_co).

    Completions are drawn at the observed-data MLE; the hypothesis pair is
    fixed (the sharp-alternative setting).  Draws whose complete-data lod
    is exactly zero are recorded as +inf sentinels.
    """
    theta_hat = model.mle(observed)
    lod_ob = _as_scalar(lod(model, pair, observed).value)
    lods_co = _completion_lods(model, observed, theta_hat,
                               pair.theta_alt, pair.theta_null, n_draws, seed)
    with np.errstate(divide="ignore"):
        samples = np.where(lods_co == 0.0, np.inf, lod_ob / lods_co)
    return samples


def lod_ratio_variance(model: ModelContract, observed, theta_null,
                       n_draws: int, seed: int, *, worker_hint: int = 0) -> RelInfoResult:
    """Conditional variance of the complete-data lod over the squared observed lod.

    Each draw's lod is evaluated at that draw's own complete-data MLE.
    """
    theta_hat = _observed_setup(model, observed, theta_null)
    lod_ob = _as_scalar(_lod_value(model, theta_hat, theta_null, observed))
    if lod_ob == 0.0:
        raise UndefinedMeasureError("observed lod is zero; measure undefined")

    if model.draw_completions_batch is not None:
        completed = model.draw_completions_batch(observed, theta_hat, n_draws, seed)
        theta_co = model.mle(completed)
        values = np.asarray(_lod_value(model, theta_co, theta_null, completed), dtype=float)
        var = mc.variance_from_values(values)
    else:
        config = MCConfig(n_draws=n_draws, seed=seed, worker_hint=worker_hint)

        def lod_at_own_mle(y_co):
            return _lod_value(model, model.mle(y_co), theta_null, y_co)

        var = mc.mc_variance(lambda i, rng: model.draw_completion(observed, theta_hat, rng),
                             lod_at_own_mle, config)

    scale = lod_ob**2
    return RelInfoResult(
        estimate=var.mean / scale, mc_standard_error=var.standard_error / scale,
        n_draws=var.n_draws, seed=seed, method=Method.MONTE_CARLO,
        diagnostics={
            "lod_observed": lod_ob,
            "variance_mean": var.mean,
            "variance_se": var.standard_error,
            "sentinel_count": var.sentinel_count,
            "generator": mc.GENERATOR_ID,
        },
    )


# Numerical guard for the draw-wise MLE dominance check: exact math gives a
# nonnegative difference, but two ~equal log-likelihood sums can invert by
# rounding when the draw's MLE coincides with the observed-data MLE.
_DOMINANCE_TOL = 1e-10


def expected_lod_gap(model: ModelContract, observed, theta_null,
                     n_draws: int, seed: int) -> ExpectedLodGap:
    """E[lod at per-draw complete-data MLE] vs E[lod at the fixed observed MLE].

    Both expectations use the same completions, so the paired difference is
    nonnegative draw by draw (MLE maximality) and its mean is the gap that
    breaks the naive identity between the two conditional expectations.
    """
    theta_hat = _observed_setup(model, observed, theta_null)
    lod_ob = _as_scalar(_lod_value(model, theta_hat, theta_null, observed))
    if lod_ob == 0.0:
        raise UndefinedMeasureError("observed lod is zero")

    if model.draw_completions_batch is not None:
        completed = model.draw_completions_batch(observed, theta_hat, n_draws, seed)
        theta_co = model.mle(completed)
        at_mle = np.asarray(_lod_value(model, theta_co, theta_null, completed), dtype=float)
        at_fixed = np.asarray(_lod_value(model, theta_hat, theta_null, completed), dtype=float)
    else:
        at_mle = np.empty(n_draws)
        at_fixed = np.empty(n_draws)
        for i in range(n_draws):
            y_co = model.draw_completion(observed, theta_hat, mc.substream(seed, i))
            at_mle[i] = _lod_value(model, model.mle(y_co), theta_null, y_co)
            at_fixed[i] = _lod_value(model, theta_hat, theta_null, y_co)

    diff = at_mle - at_fixed
    violations = int(np.sum(diff < -_DOMINANCE_TOL))
    return ExpectedLodGap(
        at_draw_mle=mc.estimate_from_values(at_mle),
        at_fixed_alt=mc.estimate_from_values(at_fixed),
        paired_diff=mc.estimate_from_values(diff),
        dominance_violations=violations,
    )
