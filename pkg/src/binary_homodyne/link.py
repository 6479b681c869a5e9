"""Sample budget for certifying squeezing through a lossy (satellite) link."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

from .exceptions import ValidationError
from .multicopy import optimize_success_variances
from .states import COHERENT_VARIANCE, apply_loss, db_to_variance

N_MAX = 10**15


@dataclass(frozen=True)
class LinkScenario:
    loss_db: float = 40.0
    squeezing_db_in: float = 6.0
    target_error: float = 1e-2
    sample_rate_hz: float = 1e9
    link_time_s: float = 300.0

    def __post_init__(self):
        for name in ("loss_db", "squeezing_db_in", "target_error", "sample_rate_hz", "link_time_s"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{name} must be a finite number, got {v!r}")
        if self.loss_db < 0:
            raise ValidationError(f"loss_db must be >= 0, got {self.loss_db}")
        if not self.squeezing_db_in > 0:
            raise ValidationError(f"squeezing_db_in must be > 0, got {self.squeezing_db_in}")
        if not 0 < self.target_error < 0.5:
            raise ValidationError(f"target_error must lie in (0, 0.5), got {self.target_error}")
        if not self.sample_rate_hz > 0:
            raise ValidationError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        if not self.link_time_s > 0:
            raise ValidationError(f"link_time_s must be > 0, got {self.link_time_s}")

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, object]) -> "LinkScenario":
        """Build from a flat key-value configuration; unknown keys are rejected."""
        known = set(cls.__dataclass_fields__)
        extra = set(cfg) - known
        if extra:
            raise ValidationError(f"unknown scenario keys: {sorted(extra)}")
        try:
            return cls(**{k: float(v) for k, v in cfg.items()})
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"scenario values must be numeric: {exc}") from exc

    def as_dict(self) -> dict:
        return asdict(self)


def effective_hypotheses(s: LinkScenario) -> tuple[float, float]:
    """Coherent and squeezed quadrature variances after the channel."""
    return COHERENT_VARIANCE, apply_loss(db_to_variance(s.squeezing_db_in), s.loss_db)


def link_error(N: int, s: LinkScenario) -> float:
    """Minimum error probability of the optimized (alpha, tau) rule with N samples."""
    vc, vs = effective_hypotheses(s)
    return optimize_success_variances(int(N), vc, vs).error


def required_samples(s: LinkScenario) -> int:
    """Smallest N whose optimized error probability is at most the target.

    Exponential bracketing followed by integer bisection; the error curve is
    treated as nonincreasing in N.
    """
    vc, vs = effective_hypotheses(s)
    if not vs < vc:
        raise ValidationError(
            f"scenario is degenerate: squeezed variance {vs!r} equals the coherent variance "
            f"after {s.loss_db} dB loss, no sample count can separate them"
        )

    def ok(n: int) -> bool:
        return optimize_success_variances(n, vc, vs).error <= s.target_error

    if ok(1):
        return 1
    lo, hi = 1, 2
    while not ok(hi):
        lo, hi = hi, hi * 2
        if hi > N_MAX:
            raise ValidationError(f"target error {s.target_error} not reached below N = {N_MAX}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def acquisition_time(N: int, s: LinkScenario) -> tuple[float, bool]:
    """Seconds needed to record N samples and whether that fits one link window."""
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N}")
    t = N / s.sample_rate_hz
    return t, t <= s.link_time_s


def error_curve(s: LinkScenario, N_grid: Sequence[int]) -> list[tuple[int, float]]:
    if not N_grid:
        raise ValidationError("N grid must be nonempty")
    grid = [int(n) for n in N_grid]
    if any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("N grid must be positive and strictly ascending")
    return [(n, link_error(n, s)) for n in grid]


def log_grid(n_min: int, n_max: int, per_decade: int = 10) -> list[int]:
    """Log-spaced integer grid from n_min to n_max inclusive, duplicates removed."""
    if not 1 <= n_min <= n_max:
        raise ValidationError("need 1 <= n_min <= n_max")
    lo, hi = math.log10(n_min), math.log10(n_max)
    steps = max(1, int(math.ceil((hi - lo) * per_decade)))
    pts = {int(round(10 ** (lo + (hi - lo) * i / steps))) for i in range(steps + 1)}
    return sorted(pts | {n_min, n_max})
