"""Scalar numerical kernels shared by every analysis module.

All routines are pure. Probabilities that can get close to 0 or 1 are
computed through complementary branches, and products of probabilities are
kept in log space by callers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .exceptions import ConvergenceError, NonFiniteError, ValidationError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MIN_GRID_POINTS = 256


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError(f"interval bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ValidationError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class ToleranceSpec:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 or self.rel_tol > 0):
            raise ValidationError("at least one of abs_tol, rel_tol must be positive")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValidationError("tolerances must be nonnegative")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = ToleranceSpec()


def std_normal_cdf(x):
    """Standard normal CDF, Phi(x) = (1 + erf(x / sqrt 2)) / 2.

    Evaluated with ``scipy.special.ndtr``, which switches to ``erfc`` in the
    tails, so Phi(-8) ~ 6.2e-16 keeps full relative precision instead of
    cancelling against 1. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"std_normal_cdf requires finite input, got {x!r}")
    out = special.ndtr(arr)
    return float(out) if out.ndim == 0 else out


def std_normal_sf(x):
    """Upper tail 1 - Phi(x) without cancellation."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"std_normal_sf requires finite input, got {x!r}")
    out = special.ndtr(-arr)
    return float(out) if out.ndim == 0 else out


_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """log(n!) - [(n + 1/2) log n - n + log sqrt(2 pi)], for integer n >= 1."""
    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    small = n <= 15
    ns = n[small]
    out[small] = special.gammaln(ns + 1.0) - (ns + 0.5) * np.log(ns) + ns - _LN_SQRT_2PI
    nl = n[~small]
    nn = nl * nl
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    out[~small] = np.where(
        nl > 500, (s0 - s1 / nn) / nl,
        np.where(
            nl > 80, (s0 - (s1 - s2 / nn) / nn) / nl,
            np.where(
                nl > 35, (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / nl,
                (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nl,
            ),
        ),
    )
    return out


def _bd0(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Deviance term x log(x/m) + m - x, summed as a series when x ~ m."""
    x = np.asarray(x, dtype=float)
    x, m = np.broadcast_arrays(x, np.asarray(m, dtype=float))
    d = x - m
    near = np.abs(d) < 0.1 * (x + m)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(near, 0.0, special.xlogy(x, x / m) + m - x)
    if np.any(near):
        xn, dn = x[near], d[near]
        v = dn / (xn + m[near])
        acc = dn * v
        ej = 2.0 * xn * v
        v2 = v * v
        for j in range(1, 1000):
            ej = ej * v2
            nxt = acc + ej / (2 * j + 1)
            if np.array_equal(nxt, acc):
                break
            acc = nxt
        out[near] = acc
    return out


def log_binomial_pmf(N: int, k, p: float):
    """log of C(N, k) p^k (1-p)^(N-k).

    Uses the saddle-point decomposition (Stirling remainders plus deviance
    terms) rather than differences of log-gamma values, which lose ~1e-11
    absolute precision once N reaches 1e4. ``k`` may be an integer or an
    integer array. ``p`` in {0, 1} is exact; impossible outcomes give -inf.
    """
    if N < 0 or int(N) != N:
        raise ValidationError(f"N must be a nonnegative integer, got {N}")
    if not (0.0 <= p <= 1.0):
        raise ValidationError(f"p must lie in [0, 1], got {p}")
    ks = np.asarray(k)
    scalar = ks.ndim == 0
    ks = np.atleast_1d(ks)
    if np.any(ks < 0) or np.any(ks > N):
        raise ValidationError(f"k must satisfy 0 <= k <= N={N}")
    return _loader_logpmf(float(N), ks.astype(float), p, scalar)


def _loader_base(N: float, km: np.ndarray) -> np.ndarray:
    """The p-independent part of the saddle-point log-pmf for interior k."""
    lf = math.log(2.0 * math.pi) + np.log(km) + np.log1p(-km / N)
    return _stirlerr(np.array([N]))[0] - _stirlerr(km) - _stirlerr(N - km) - 0.5 * lf


def _loader_logpmf(N: float, ks: np.ndarray, p: float, scalar: bool = False, base=None):
    q = 1.0 - p
    out = np.empty_like(ks)

    if p == 0.0 or q == 0.0:
        sure = 0.0 if p == 0.0 else N
        out[:] = np.where(ks == sure, 0.0, -np.inf)
        return float(out[0]) if scalar else out

    lo = ks == 0
    hi = ks == N
    mid = ~(lo | hi)
    # the edges use log1p so tiny p or q keep their digits
    out[lo] = N * math.log1p(-p)
    out[hi] = N * math.log(p)
    if np.any(mid):
        km = ks[mid]
        b = _loader_base(N, km) if base is None else base
        out[mid] = b - _bd0(km, N * p) - _bd0(N - km, N * q)
    return float(out[0]) if scalar else out


class BinomialLogPmf:
    """log-pmf over k = 0..N for repeated evaluation at different p.

    The Stirling remainders depend only on N and k and are computed once.
    """

    def __init__(self, N: int):
        if N < 1 or int(N) != N:
            raise ValidationError(f"N must be a positive integer, got {N}")
        self.N = float(N)
        self.k = np.arange(int(N) + 1, dtype=float)
        self._base = np.full(self.k.shape, np.nan)
        if N > 1:
            self._base[1:-1] = _loader_base(self.N, self.k[1:-1])

    def __call__(self, p: float, lo: int = 0, hi: int | None = None) -> np.ndarray:
        """log-pmf at k = lo..hi (inclusive; the whole support by default)."""
        if not (0.0 <= p <= 1.0):
            raise ValidationError(f"p must lie in [0, 1], got {p}")
        hi = int(self.N) if hi is None else hi
        ks = self.k[lo : hi + 1]
        base = self._base[lo : hi + 1]
        interior = (ks > 0) & (ks < self.N)
        return _loader_logpmf(self.N, ks, p, base=base[interior])

    def support_window(self, p: float, nats: float) -> tuple[int, int]:
        """Smallest k-range outside which every pmf value is below exp(-nats).

        Uses the Chernoff bound P(k) <= exp(-N KL(k/N || p)).
        """
        N = self.N
        if p <= 0.0 or p >= 1.0:
            k = 0 if p <= 0.0 else int(N)
            return k, k

        def excess(x: float) -> float:
            return N * (special.rel_entr(x, p) + special.rel_entr(1.0 - x, 1.0 - p)) - nats

        lo = 0 if excess(0.0) <= 0 else int(math.floor(N * optimize.brentq(excess, 0.0, p, xtol=1e-15)))
        hi = int(N) if excess(1.0) <= 0 else int(math.ceil(N * optimize.brentq(excess, p, 1.0, xtol=1e-15)))
        return max(lo, 0), min(hi, int(N))


def scaled_chi2_logpdf(s, N: int, V: float):
    """Log-density of S = (V/N) * chi2_N, i.e. Gamma(N/2, scale=2V/N).

    This is the law of the mean of N squared zero-mean normal samples with
    variance V; its mean is V.
    """
    if N < 1 or int(N) != N:
        raise ValidationError(f"N must be a positive integer, got {N}")
    if not V > 0:
        raise ValidationError(f"V must be positive, got {V}")
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise ValidationError(f"s must be nonnegative, got {s!r}")
    shape = 0.5 * N
    scale = 2.0 * V / N
    with np.errstate(divide="ignore"):
        out = (
            -special.gammaln(shape)
            - shape * math.log(scale)
            + special.xlogy(shape - 1.0, arr)
            - arr / scale
        )
    return float(out) if out.ndim == 0 else out


def _checked(f: Callable[[float], float], x: float) -> float:
    y = float(f(x))
    if not math.isfinite(y):
        raise NonFiniteError(f"objective is non-finite ({y}) at x={x!r}", x)
    return y


def golden_section_max(f, a: float, b: float, abs_tol: float = 1e-9, max_iter: int = 200):
    """Golden-section search for a local maximum of ``f`` on [a, b]."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1 = _checked(f, x1)
    f2 = _checked(f, x2)
    it = 0
    while b - a > abs_tol and it < max_iter:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = _checked(f, x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = _checked(f, x2)
        it += 1
    return (x1, f1) if f1 >= f2 else (x2, f2)


def maximize_scalar(
    f: Callable[[float], float],
    domain: Interval,
    tol: ToleranceSpec = DEFAULT_TOL,
    grid_points: int = MIN_GRID_POINTS,
    candidates: int = 3,
) -> tuple[float, float]:
    """Maximize a 1-D function by a grid scan followed by golden-section refinement.

    The grid (at least 256 points, endpoints included) locates basins. The
    best ``candidates`` grid-local maxima are each refined inside their two
    neighbouring cells, which keeps the right basin when a piecewise-smooth
    objective has near-equal peaks. Values equal up to a few ulps count as
    ties and go to the smallest abscissa; a refined point only replaces its
    grid point if it is strictly better.

    Returns ``(argmax, max)``.
    """
    n = max(int(grid_points), MIN_GRID_POINTS)
    xs = np.linspace(domain.lo, domain.hi, n)
    ys = np.empty(n)
    for i, x in enumerate(xs):
        ys[i] = _checked(f, float(x))
    ymax = ys.max()
    slack = 4.0 * np.finfo(float).eps * max(1.0, abs(ymax))

    padded = np.concatenate(([-np.inf], ys, [-np.inf]))
    is_peak = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
    peaks = np.flatnonzero(is_peak)
    # best first; stable sort keeps smaller abscissae first among equal values
    peaks = peaks[np.argsort(-ys[peaks], kind="stable")][: max(1, candidates)]

    best_x, best_y = None, -np.inf
    for i in sorted(int(j) for j in peaks):
        x_i, y_i = float(xs[i]), float(ys[i])
        a = float(xs[max(i - 1, 0)])
        b = float(xs[min(i + 1, n - 1)])
        step_tol = max(tol.abs_tol, tol.rel_tol * max(abs(a), abs(b)))
        x_ref, y_ref = golden_section_max(f, a, b, abs_tol=step_tol, max_iter=tol.max_iter)
        if y_ref > y_i + slack:
            x_i, y_i = x_ref, y_ref
        if y_i > best_y + slack:
            best_x, best_y = x_i, y_i
    return best_x, best_y


def integrate_halfline(
    f: Callable[[float], float],
    tol: ToleranceSpec = DEFAULT_TOL,
    scale: float = 1.0,
    points: Sequence[float] = (),
) -> float:
    """Integrate ``f`` over [0, inf) with adaptive Gauss-Kronrod quadrature.

    The half line is compactified by s = scale * t / (1 - t), t in [0, 1).
    ``scale`` should be of the order of the integrand's bulk and ``points``
    may list abscissae (in s) near which the integrand is sharply peaked;
    they are passed to the quadrature as forced breakpoints.
    """
    if not scale > 0:
        raise ValidationError(f"scale must be positive, got {scale}")

    def g(t: float) -> float:
        if t >= 1.0:
            return 0.0
        s = scale * t / (1.0 - t)
        y = float(f(s))
        if not math.isfinite(y):
            raise NonFiniteError(f"integrand is non-finite ({y}) at s={s!r}", s)
        return y * scale / (1.0 - t) ** 2

    brk = sorted({p / (p + scale) for p in points if p > 0})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(
            g, 0.0, 1.0,
            epsabs=tol.abs_tol, epsrel=tol.rel_tol, limit=tol.max_iter,
            points=brk or None, full_output=1,
        )
    value, err = float(res[0]), float(res[1])
    # a fourth element (the message) is only present when QUADPACK flagged a problem
    if len(res) > 3 and err > max(tol.abs_tol, tol.rel_tol * abs(value)):
        raise ConvergenceError(
            f"quadrature did not converge within {tol.max_iter} subdivisions "
            f"(estimate {value!r}, error {err!r}): {res[3]}",
            value,
        )
    return value
