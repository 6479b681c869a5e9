"""Non-discretized homodyne baseline.

With continuous samples the sufficient statistic for a zero-mean quadrature
is the empirical variance sigma2 = sum x_k^2 / N, distributed as
(V/N) chi2_N. The baseline's posterior, MAP rule and error probability are
built on that density. The sample-overhead ratio of the binary detector is
also computed here.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

from scipy import special

from .exceptions import ValidationError
from .multicopy import optimize_multicopy_posterior
from .numerics import ToleranceSpec, integrate_halfline, scaled_chi2_logpdf
from .states import COHERENT_VARIANCE, Hypothesis, _check_r, variance_of_r

QUAD_TOL = ToleranceSpec(abs_tol=1e-13, rel_tol=1e-11, max_iter=500)
TARGET_RANGE = (0.55, 0.999)
ALPHA_STRATEGY = "per-N posterior-optimal displacement"


@dataclass(frozen=True)
class VarianceStatistic:
    sigma2: float
    N: int

    def __post_init__(self):
        if not (self.sigma2 >= 0 and math.isfinite(self.sigma2)):
            raise ValidationError(f"sigma2 must be finite and >= 0, got {self.sigma2}")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N}")

    @classmethod
    def from_samples(cls, samples) -> "VarianceStatistic":
        """Zero-mean variance estimate sum x^2 / N of displacement-free samples."""
        import numpy as np

        x = np.asarray(samples, dtype=float)
        if x.size == 0:
            raise ValidationError("need at least one sample")
        return cls(float(np.mean(x * x)), int(x.size))


def variance_likelihood(stat: VarianceStatistic, V: float) -> float:
    """Log-density of observing ``stat.sigma2`` when the true variance is V."""
    return scaled_chi2_logpdf(stat.sigma2, stat.N, V)


def _posterior_pair(lc: float, ls: float) -> tuple[float, float]:
    m = max(lc, ls)
    c = math.exp(lc - m)
    s = math.exp(ls - m)
    return c / (c + s), s / (c + s)


def variance_posterior(stat: VarianceStatistic, r: float) -> dict[Hypothesis, float]:
    _check_r(r)
    if r == 0:
        return {Hypothesis.COHERENT: 0.5, Hypothesis.SQUEEZED: 0.5}
    Vs = variance_of_r(r)
    if stat.sigma2 == 0:
        # limit sigma2 -> 0+: the shared power of sigma2 cancels and f_s/f_c -> (Vc/Vs)^(N/2)
        a = 0.5 * stat.N
        pc, ps = _posterior_pair(-a * math.log(COHERENT_VARIANCE), -a * math.log(Vs))
    else:
        pc, ps = _posterior_pair(variance_likelihood(stat, COHERENT_VARIANCE), variance_likelihood(stat, Vs))
    return {Hypothesis.COHERENT: pc, Hypothesis.SQUEEZED: ps}


def ideal_map_decide(stat: VarianceStatistic, r: float) -> Hypothesis:
    """MAP decision; exact ties go to the coherent hypothesis."""
    post = variance_posterior(stat, r)
    if post[Hypothesis.SQUEEZED] > post[Hypothesis.COHERENT]:
        return Hypothesis.SQUEEZED
    return Hypothesis.COHERENT


def likelihood_crossover(N: int, coh_variance: float, sqz_variance: float) -> float:
    """Variance below which the squeezed likelihood exceeds the coherent one.

    The log-likelihood difference is linear in sigma2, so the crossing is
    ln(Vc/Vs) / (1/Vs - 1/Vc), independent of N.
    """
    if not 0 < sqz_variance < coh_variance:
        raise ValidationError("need 0 < sqz_variance < coh_variance")
    return math.log(coh_variance / sqz_variance) / (1.0 / sqz_variance - 1.0 / coh_variance)


def ideal_avg_posterior(N: int, r: float) -> float:
    """Average posterior 1/2 sum_h int f_h P(h|s) ds over the variance statistic."""
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N}")
    _check_r(r)
    if r == 0:
        return 0.5
    Vc, Vs = COHERENT_VARIANCE, variance_of_r(r)

    def integrand(s: float) -> float:
        lc = scaled_chi2_logpdf(s, N, Vc)
        ls = scaled_chi2_logpdf(s, N, Vs)
        m = max(lc, ls)
        if m == -math.inf:
            return 0.0
        c = math.exp(lc - m)
        w = math.exp(ls - m)
        return 0.5 * math.exp(m) * (c * c + w * w) / (c + w)

    width = math.sqrt(2.0 / N)
    points = [likelihood_crossover(N, Vc, Vs)]
    for V in (Vc, Vs):
        points += [V * (1 + j * width) for j in (-6, -3, -1, 0, 1, 3, 6)]
    # N = 1 has an integrable s^(-1/2) singularity at 0, handled by QUADPACK
    return integrate_halfline(integrand, QUAD_TOL, scale=1.0, points=points)


def ideal_error_prob(N: int, r: float) -> float:
    """Minimum error probability 1/2 int min_h f_h ds of the MAP rule."""
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N}")
    _check_r(r)
    if r == 0:
        return 0.5
    Vc, Vs = COHERENT_VARIANCE, variance_of_r(r)
    s_star = likelihood_crossover(N, Vc, Vs)
    a = 0.5 * N
    # squeezed is chosen below s_star: coherent errs below, squeezed errs above
    err_c = special.gammainc(a, a * s_star / Vc)
    err_s = special.gammaincc(a, a * s_star / Vs)
    return 0.5 * float(err_c + err_s)


def ideal_success(N: int, r: float) -> float:
    return 1.0 - ideal_error_prob(N, r)


# ------------------------------------------------------------------ overhead

def samples_for_target(curve: Callable[[int], float], target: float, n_max: int = 10**7) -> float:
    """Real-valued N at which a nondecreasing curve first reaches ``target``.

    Exponential bracketing and integer bisection find the adjacent pair
    (n, n+1) that straddles the target; N is then interpolated linearly
    between them.
    """
    cache: dict[int, float] = {}

    def f(n: int) -> float:
        if n not in cache:
            cache[n] = curve(n)
        return cache[n]

    if f(1) >= target:
        return 1.0
    lo, hi = 1, 2
    while f(hi) < target:
        lo, hi = hi, hi * 2
        if hi > n_max:
            raise ValidationError(f"target {target} not reached within N <= {n_max}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    f_lo, f_hi = f(lo), f(hi)
    return lo + (target - f_lo) / (f_hi - f_lo)


def bhd_posterior_curve(r: float) -> Callable[[int], float]:
    return lambda n: optimize_multicopy_posterior(n, r)[1]


def ideal_posterior_curve(r: float) -> Callable[[int], float]:
    return lambda n: ideal_avg_posterior(n, r)


@dataclass(frozen=True)
class OverheadResult:
    target_posterior: float
    r: float
    n_bhd: float
    n_ideal: float
    ratio: float
    alpha_strategy: str = ALPHA_STRATEGY

    def as_dict(self) -> dict:
        return asdict(self)


def overhead(target_posterior: float, r: float) -> OverheadResult:
    lo, hi = TARGET_RANGE
    if not lo < target_posterior < hi:
        raise ValidationError(
            f"target posterior must lie in ({lo}, {hi}); values near 1/2 are dominated by "
            f"binomial discreteness, got {target_posterior}"
        )
    _check_r(r)
    if r <= 0:
        raise ValidationError("overhead ratio needs r > 0")
    n_bhd = samples_for_target(bhd_posterior_curve(r), target_posterior)
    n_ideal = samples_for_target(ideal_posterior_curve(r), target_posterior)
    return OverheadResult(target_posterior, r, n_bhd, n_ideal, n_bhd / n_ideal)


def overhead_ratio(target_posterior: float, r: float) -> float:
    """Binary-to-ideal sample ratio needed to reach the same average posterior."""
    return overhead(target_posterior, r).ratio
