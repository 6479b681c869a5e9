"""Multi-copy binary homodyne inference.

N identically prepared copies give N independent sign outcomes. The number
k of '+' outcomes is binomial and is a sufficient statistic, so every
figure of merit here is a sum over k in [0, N]. Probabilities are kept as
log-pmfs; sums of them use logaddexp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from .exceptions import ValidationError
from .numerics import (
    BinomialLogPmf,
    ToleranceSpec,
    log_binomial_pmf,
    maximize_scalar,
    std_normal_cdf,
    std_normal_sf,
)
from .single import ALPHA_DOMAIN, BinaryOutcome, p_minus, p_plus
from .states import COHERENT_VARIANCE, Hypothesis, _check_r, variance_of_r

NORMAL_CROSSOVER = 100_000
WINDOW_MIN_N = 2_000
WINDOW_NATS = 1500.0
LN2 = math.log(2.0)
OPT_TOL = ToleranceSpec(abs_tol=1e-7, rel_tol=1e-12, max_iter=200)


@dataclass(frozen=True)
class OutcomeCount:
    N: int
    k: int

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError(f"N must be >= 1, got {self.N}")
        if not 0 <= self.k <= self.N:
            raise ValidationError(f"need 0 <= k <= N, got k={self.k}, N={self.N}")

    @property
    def frequency(self) -> float:
        return self.k / self.N


@dataclass(frozen=True)
class DecisionPolicy:
    """Guess 'squeezed' iff k > tau, at displacement alpha."""

    alpha: float
    tau: int

    def validate(self, N: int) -> None:
        if not 0 <= self.tau <= N:
            raise ValidationError(f"tau must satisfy 0 <= tau <= N={N}, got {self.tau}")
        if not math.isfinite(self.alpha):
            raise ValidationError(f"alpha must be finite, got {self.alpha}")

    def accept_set(self, N: int) -> tuple[int, ...]:
        """Counts k for which the squeezed hypothesis is chosen."""
        return tuple(range(self.tau + 1, N + 1))


def _check_N(N: int) -> None:
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N}")


class _Binomials:
    """Log-pmfs of both hypotheses for one N, sharing the Stirling terms.

    For large N only the counts whose probability under either hypothesis
    can exceed exp(-WINDOW_NATS) are evaluated; everything outside is far
    below double precision relative to anything the callers report.
    """

    def __init__(self, N: int, coh_variance: float, sqz_variance: float, windowed: bool | None = None):
        self.N = N
        self.Vc = coh_variance
        self.Vs = sqz_variance
        self.logpmf = BinomialLogPmf(N)
        self.windowed = N >= WINDOW_MIN_N if windowed is None else windowed

    def pair(self, alpha: float) -> tuple[int, np.ndarray, np.ndarray]:
        """(k offset, coherent log-pmf, squeezed log-pmf) over a common k-range."""
        pc, ps = p_plus(self.Vc, alpha), p_plus(self.Vs, alpha)
        lo, hi = 0, self.N
        if self.windowed:
            wc = self.logpmf.support_window(pc, WINDOW_NATS)
            ws = self.logpmf.support_window(ps, WINDOW_NATS)
            lo, hi = min(wc[0], ws[0]), max(wc[1], ws[1])
        return lo, self.logpmf(pc, lo, hi), self.logpmf(ps, lo, hi)


def outcome_distribution(N: int, V: float, alpha: float) -> np.ndarray:
    """Probabilities of k = 0..N '+' outcomes among N copies."""
    return np.exp(log_outcome_distribution(N, V, alpha))


def log_outcome_distribution(N: int, V: float, alpha: float) -> np.ndarray:
    """Natural logs of :func:`outcome_distribution`, safe far into the tails."""
    _check_N(N)
    return log_binomial_pmf(N, np.arange(N + 1), p_plus(V, alpha))


# ---------------------------------------------------------------- posteriors

def _normalize_logs(logs: Sequence[float]) -> tuple[float, ...]:
    m = max(logs)
    if m == -math.inf:
        raise ValidationError("outcome record is impossible under both hypotheses")
    w = [math.exp(x - m) for x in logs]
    z = math.fsum(w)
    return tuple(x / z for x in w)


def sequence_posterior(outcomes: Iterable, r: float, alpha: float) -> dict[Hypothesis, float]:
    """Posterior of each hypothesis after an ordered record of sign outcomes.

    Log-likelihoods are accumulated outcome by outcome. The result depends on
    the record only through (N, k).
    """
    _check_r(r)
    Vs = variance_of_r(r)
    log_c = 0.0
    log_s = 0.0
    n = 0
    for y in outcomes:
        y = BinaryOutcome(y)
        if y is BinaryOutcome.PLUS:
            log_c += _safe_log(p_plus(COHERENT_VARIANCE, alpha))
            log_s += _safe_log(p_plus(Vs, alpha))
        else:
            log_c += _safe_log(p_minus(COHERENT_VARIANCE, alpha))
            log_s += _safe_log(p_minus(Vs, alpha))
        n += 1
    if n == 0:
        raise ValidationError("outcome sequence must be nonempty")
    pc, ps = _normalize_logs((log_c, log_s))
    return {Hypothesis.COHERENT: pc, Hypothesis.SQUEEZED: ps}


def _safe_log(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def count_posterior_variances(
    count: OutcomeCount, coh_variance: float, sqz_variance: float, alpha: float
) -> dict[Hypothesis, float]:
    N, k = count.N, count.k
    logs = []
    for V in (coh_variance, sqz_variance):
        lp = _safe_log(p_plus(V, alpha))
        lq = _safe_log(p_minus(V, alpha))
        logs.append((k * lp if k else 0.0) + ((N - k) * lq if N - k else 0.0))
    pc, ps = _normalize_logs(logs)
    return {Hypothesis.COHERENT: pc, Hypothesis.SQUEEZED: ps}


def count_posterior(count: OutcomeCount, r: float, alpha: float) -> dict[Hypothesis, float]:
    """Posterior from the sufficient statistic (N, k); binomial coefficients cancel."""
    _check_r(r)
    return count_posterior_variances(count, COHERENT_VARIANCE, variance_of_r(r), alpha)


def _avg_posterior_from_logs(lc: np.ndarray, ls: np.ndarray) -> float:
    m = np.maximum(lc, ls)
    ok = np.isfinite(m)
    c = np.exp(lc[ok] - m[ok])
    s = np.exp(ls[ok] - m[ok])
    terms = np.exp(m[ok]) * (c * c + s * s) / (2.0 * (c + s))
    return math.fsum(terms)


def multicopy_posterior(N: int, r: float, alpha: float) -> float:
    """Average posterior sum_k sum_h P(k|h)^2 / (2 sum_h' P(k|h')) at fixed alpha."""
    _check_N(N)
    _check_r(r)
    b = _Binomials(N, COHERENT_VARIANCE, variance_of_r(r))
    return _avg_posterior_from_logs(*b.pair(alpha)[1:])


def optimize_multicopy_posterior(N: int, r: float) -> tuple[float, float]:
    """Posterior-optimal displacement for N copies; returns ``(alpha, probability)``."""
    _check_N(N)
    _check_r(r)
    if r == 0:
        return ALPHA_DOMAIN.lo, 0.5
    b = _Binomials(N, COHERENT_VARIANCE, variance_of_r(r))
    return maximize_scalar(lambda a: _avg_posterior_from_logs(*b.pair(a)[1:]), ALPHA_DOMAIN, OPT_TOL)


# ----------------------------------------------------------- success / error

def _log_error_by_tau(lc: np.ndarray, ls: np.ndarray) -> np.ndarray:
    """log of 2 * error(tau) for tau = 0..N under the rule 'squeezed iff k > tau'.

    error(tau) = [P(k > tau | coh) + P(k <= tau | sqz)] / 2.
    """
    log_cdf_s = np.logaddexp.accumulate(ls)
    tail = np.logaddexp.accumulate(lc[::-1])[::-1]  # P(k >= j | coh)
    log_sf_c = np.append(tail[1:], -np.inf)  # P(k > tau | coh)
    return np.logaddexp(log_sf_c, log_cdf_s)


def _exact_best(b: _Binomials, alpha: float) -> tuple[int, float]:
    lo, lc, ls = b.pair(alpha)
    le = _log_error_by_tau(lc, ls)
    j = int(np.argmin(le))  # first minimum: ties go to the smaller tau
    if b.windowed and le[j] >= 0.0:
        # no threshold beats guessing; every tau outside the window ties too
        return 0, -LN2
    if b.windowed and le[j] < -0.9 * WINDOW_NATS:
        # error comparable to the truncated mass: redo on the full support
        return _exact_best(_Binomials(b.N, b.Vc, b.Vs, windowed=False), alpha)
    return lo + j, float(le[j]) - LN2


def _normal_log_error(N: int, pc: float, ps: float, tau: int) -> float:
    mc, sc = N * pc, math.sqrt(N * pc * (1.0 - pc))
    ms, ss = N * ps, math.sqrt(N * ps * (1.0 - ps))
    edge = tau + 0.5  # continuity correction
    e_c = std_normal_sf((edge - mc) / sc) if sc > 0 else float(edge < mc)
    e_s = std_normal_cdf((edge - ms) / ss) if ss > 0 else float(edge >= ms)
    tot = e_c + e_s
    return math.log(tot) - LN2 if tot > 0 else -math.inf


def _normal_crossing(N: int, pc: float, ps: float) -> float:
    """Count at which the two approximating normal densities cross (between the means)."""
    mc, sc = N * pc, math.sqrt(N * pc * (1.0 - pc))
    ms, ss = N * ps, math.sqrt(N * ps * (1.0 - ps))

    def d(t):
        return (-(t - mc) ** 2 / (2 * sc * sc) - math.log(sc)) - (-(t - ms) ** 2 / (2 * ss * ss) - math.log(ss))

    lo, hi = min(mc, ms), max(mc, ms)
    if hi > lo and d(lo) * d(hi) < 0:
        return optimize.brentq(d, lo, hi, xtol=1e-9 * max(1.0, hi), rtol=1e-15)
    return 0.5 * (mc + ms)


def _normal_best(N: int, Vc: float, Vs: float, alpha: float) -> tuple[int, float]:
    pc = p_plus(Vc, alpha)
    ps = p_plus(Vs, alpha)
    if pc == ps:
        return 0, -LN2
    if 0 < pc < 1 and 0 < ps < 1:
        t = _normal_crossing(N, pc, ps)
    else:
        t = 0.5 * N * (pc + ps)
    centre = int(math.floor(t - 0.5))
    best_tau, best = 0, math.inf
    for tau in range(centre - 2, centre + 3):
        if 0 <= tau <= N:
            le = _normal_log_error(N, pc, ps, tau)
            if le < best:
                best_tau, best = tau, le
    return best_tau, best


def _pick_method(N: int, method: str) -> str:
    if method not in ("auto", "exact", "normal"):
        raise ValidationError(f"method must be auto, exact or normal, got {method!r}")
    if method == "auto":
        return "normal" if N > NORMAL_CROSSOVER else "exact"
    return method


def multicopy_success(N: int, r: float, policy: DecisionPolicy) -> float:
    """Success probability of a fixed (alpha, tau) policy, exact binomial sums."""
    _check_N(N)
    _check_r(r)
    policy.validate(N)
    b = _Binomials(N, COHERENT_VARIANCE, variance_of_r(r), windowed=False)
    _, lc, ls = b.pair(policy.alpha)
    le = _log_error_by_tau(lc, ls)[policy.tau] - LN2
    return 1.0 - math.exp(le)


@dataclass(frozen=True)
class SuccessOptimum:
    alpha: float
    tau: int
    success: float
    error: float
    method: str

    def accept_set(self, N: int) -> tuple[int, ...]:
        return DecisionPolicy(self.alpha, self.tau).accept_set(N)


def optimize_success_variances(
    N: int, coh_variance: float, sqz_variance: float, method: str = "auto"
) -> SuccessOptimum:
    """Jointly optimal (alpha, tau) minimum-error rule for arbitrary hypothesis variances."""
    _check_N(N)
    method = _pick_method(N, method)
    if coh_variance == sqz_variance:
        return SuccessOptimum(ALPHA_DOMAIN.lo, 0, 0.5, 0.5, method)

    if method == "exact":
        b = _Binomials(N, coh_variance, sqz_variance)
        inner = lambda a: _exact_best(b, a)  # noqa: E731
    else:
        inner = lambda a: _normal_best(N, coh_variance, sqz_variance, a)  # noqa: E731

    # maximize -log(error) so tiny error probabilities keep their resolution
    alpha, neg_log_err = maximize_scalar(lambda a: -inner(a)[1], ALPHA_DOMAIN, OPT_TOL)
    tau, log_err = inner(alpha)
    err = math.exp(log_err)
    return SuccessOptimum(alpha, tau, 1.0 - err, err, method)


def optimize_multicopy_success(N: int, r: float, method: str = "auto") -> tuple[float, int, float]:
    """Jointly optimal displacement and threshold; returns ``(alpha, tau, probability)``."""
    _check_r(r)
    opt = optimize_success_variances(N, COHERENT_VARIANCE, variance_of_r(r), method)
    return opt.alpha, opt.tau, opt.success


def error_probability(N: int, r: float, method: str = "auto") -> float:
    """Minimum average error probability over (alpha, tau).

    Exact binomial sums up to N = 1e5, a continuity-corrected normal
    approximation above (override with ``method``).
    """
    _check_r(r)
    return optimize_success_variances(N, COHERENT_VARIANCE, variance_of_r(r), method).error
