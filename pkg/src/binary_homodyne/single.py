"""Single-copy binary homodyne statistics.

A binary homodyne detector (BHD) records only the sign of the displaced
quadrature, x + alpha. For a zero-mean state with variance V the '+'
probability is Phi(alpha / sqrt V). With alpha > 0 the narrower squeezed
state lands on '+' more often, so '+' is read as "squeezed".
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from .exceptions import ValidationError
from .numerics import Interval, ToleranceSpec, maximize_scalar, std_normal_cdf, std_normal_sf
from .states import COHERENT_VARIANCE, _check_r, variance_of_r

ALPHA_DOMAIN = Interval(0.0, 10.0)
OPT_TOL = ToleranceSpec(abs_tol=1e-9, rel_tol=1e-12, max_iter=200)


class BinaryOutcome(str, enum.Enum):
    PLUS = "+"
    MINUS = "-"


def _check_alpha(alpha: float) -> None:
    if not math.isfinite(alpha):
        raise ValidationError(f"alpha must be finite, got {alpha}")


def p_plus(V: float, alpha: float) -> float:
    """P(+ | V, alpha) = Phi(alpha / sqrt V)."""
    if not V > 0:
        raise ValidationError(f"variance must be positive, got {V}")
    _check_alpha(alpha)
    return std_normal_cdf(alpha / math.sqrt(V))


def p_minus(V: float, alpha: float) -> float:
    if not V > 0:
        raise ValidationError(f"variance must be positive, got {V}")
    _check_alpha(alpha)
    return std_normal_sf(alpha / math.sqrt(V))


def outcome_probability(y: BinaryOutcome, V: float, alpha: float) -> float:
    return p_plus(V, alpha) if BinaryOutcome(y) is BinaryOutcome.PLUS else p_minus(V, alpha)


def delta_pi(r: float, alpha: float) -> float:
    """P(+|squeezed) - P(+|coherent) at displacement alpha."""
    _check_r(r)
    if r == 0:
        return 0.0
    return p_plus(variance_of_r(r), alpha) - p_plus(COHERENT_VARIANCE, alpha)


def _posterior_from_probs(pc_plus, pc_minus, ps_plus, ps_minus) -> float:
    total = 0.0
    for c, s in ((pc_plus, ps_plus), (pc_minus, ps_minus)):
        if c + s > 0:
            total += (c * c + s * s) / (2.0 * (c + s))
    return total


def single_posterior(r: float, alpha: float) -> float:
    """Average a-posteriori probability of a single BHD outcome.

    sum_y sum_h P(y|h)^2 / (4 P_Y(y)) with equal priors and
    P_Y(y) = (P(y|coh) + P(y|sqz)) / 2. It is 1/2 for identical hypotheses
    and tends to 2/3 as r grows with alpha -> 0+.
    """
    _check_r(r)
    _check_alpha(alpha)
    Vs = variance_of_r(r)
    return _posterior_from_probs(
        p_plus(COHERENT_VARIANCE, alpha), p_minus(COHERENT_VARIANCE, alpha),
        p_plus(Vs, alpha), p_minus(Vs, alpha),
    )


def success_at(r: float, alpha: float) -> float:
    """Success probability (1 + |dPi|)/2 of the sign rule at fixed alpha.

    For alpha < 0 the rule relabels the outcomes, hence the absolute value.
    """
    return 0.5 * (1.0 + abs(delta_pi(r, alpha)))


def optimal_displacement_success(r: float) -> float:
    """Closed-form success-optimal displacement sqrt(2r / (e^{2r} - 1)).

    This is where the two marginal densities intersect; r = 0 gives the
    limit 1.
    """
    _check_r(r)
    if r == 0:
        return 1.0
    # e^{-r} sqrt(2r / (1 - e^{-2r})) avoids overflow for large r
    return math.exp(-r) * math.sqrt(2.0 * r / -math.expm1(-2.0 * r))


def single_success(r: float) -> tuple[float, float]:
    """Maximal single-shot success probability; returns ``(probability, alpha)``."""
    _check_r(r)
    alpha, value = maximize_scalar(lambda a: success_at(r, a), ALPHA_DOMAIN, OPT_TOL)
    return value, alpha


def optimize_single_posterior(r: float) -> tuple[float, float]:
    """Posterior-optimal displacement; returns ``(alpha, probability)``."""
    _check_r(r)
    return maximize_scalar(lambda a: single_posterior(r, a), ALPHA_DOMAIN, OPT_TOL)


@dataclass(frozen=True)
class SingleCopyReport:
    alpha: float
    p_plus_coh: float
    p_plus_sqz: float
    delta_pi: float
    avg_posterior: float
    success_prob: float

    def as_dict(self) -> dict:
        return asdict(self)


def single_report(r: float, alpha: float) -> SingleCopyReport:
    _check_r(r)
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    pc = p_plus(COHERENT_VARIANCE, alpha)
    ps = p_plus(variance_of_r(r), alpha)
    return SingleCopyReport(
        alpha=alpha,
        p_plus_coh=pc,
        p_plus_sqz=ps,
        delta_pi=delta_pi(r, alpha),
        avg_posterior=single_posterior(r, alpha),
        success_prob=success_at(r, alpha),
    )
