"""Gaussian quadrature model of the two hypotheses.

Variances are in shot-noise units: a coherent (or vacuum) state has
quadrature variance 1 and a squeezed state with parameter r has e^{-2r}
along its squeezed quadrature. A displacement only shifts the mean.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError

COHERENT_VARIANCE = 1.0


class Hypothesis(str, enum.Enum):
    COHERENT = "coherent"
    SQUEEZED = "squeezed"

    @property
    def prior(self) -> float:
        return 0.5


@dataclass(frozen=True)
class QuadratureModel:
    variance: float
    mean: float = 0.0

    def __post_init__(self):
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise ValidationError(f"variance must be positive and finite, got {self.variance}")
        if not math.isfinite(self.mean):
            raise ValidationError(f"mean must be finite, got {self.mean}")

    def displaced(self, alpha: float) -> "QuadratureModel":
        return QuadratureModel(self.variance, self.mean + alpha)


@dataclass(frozen=True)
class DetectionSetup:
    """Squeezing parameter, displacement and the two hypothesis variances."""

    r: float
    alpha: float
    coh_variance: float = COHERENT_VARIANCE
    sqz_variance: float | None = None

    def __post_init__(self):
        _check_r(self.r)
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValidationError(f"alpha must be finite and >= 0, got {self.alpha}")
        if self.sqz_variance is None:
            object.__setattr__(self, "sqz_variance", variance_of_r(self.r))
        if not (0 < self.sqz_variance <= self.coh_variance):
            raise ValidationError(
                f"need 0 < sqz_variance <= coh_variance, got {self.sqz_variance} > {self.coh_variance}"
            )

    def model(self, h: Hypothesis) -> QuadratureModel:
        v = self.coh_variance if h is Hypothesis.COHERENT else self.sqz_variance
        return QuadratureModel(v)


def _check_r(r: float) -> None:
    if not (r >= 0 and math.isfinite(r)):
        raise ValidationError(f"squeezing parameter r must be finite and >= 0, got {r}")


def variance_of_r(r: float) -> float:
    _check_r(r)
    return math.exp(-2.0 * r)


def r_of_variance(V: float) -> float:
    """Inverse of :func:`variance_of_r` for 0 < V <= 1."""
    if not (0 < V <= 1):
        raise ValidationError(f"variance must lie in (0, 1], got {V}")
    return -0.5 * math.log(V)


def variance_to_db(V: float) -> float:
    """Noise reduction below shot noise in dB, -10 log10(V)."""
    if not V > 0:
        raise ValidationError(f"variance must be positive, got {V}")
    return -10.0 * math.log10(V)


def db_to_variance(db: float) -> float:
    if not math.isfinite(db):
        raise ValidationError(f"dB value must be finite, got {db}")
    return 10.0 ** (-db / 10.0)


def transmissivity(loss_db: float) -> float:
    if not loss_db >= 0:
        raise ValidationError(f"loss must be >= 0 dB, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def apply_loss(V: float, loss_db: float) -> float:
    """Pure-loss channel: V -> eta V + (1 - eta) with eta = 10^(-loss/10)."""
    if not V > 0:
        raise ValidationError(f"variance must be positive, got {V}")
    eta = transmissivity(loss_db)
    # written as 1 - eta (1 - V) so the deviation from shot noise keeps its digits
    return 1.0 - eta * (1.0 - V)


def marginal_pdf(model: QuadratureModel, x):
    z = (np.asarray(x, dtype=float) - model.mean) / math.sqrt(model.variance)
    out = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * model.variance)
    return float(out) if out.ndim == 0 else out
