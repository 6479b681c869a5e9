"""Quadrature sample sets: synthesis, file I/O, binarization and posterior traces.

Sample file format
------------------
A payload file holds the raw samples, either little-endian signed 16-bit
integers (``int16-le``, quantized detector counts) or little-endian
float64 (``float64-le``, already in shot-noise units). A mandatory JSON
sidecar named ``<payload>.json`` carries::

    {"format": "int16-le", "count": 3, "scale": 1000.0,
     "quantization_bits": 16, "description": "...", "seed": 7}

Ingested samples are ``raw / scale`` in shot-noise units. Float payloads
use ``scale`` 1 and ``quantization_bits`` null.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import (
    ContradictorySidecarError,
    InvalidScaleError,
    MissingSidecarError,
    SampleFormatError,
    TruncatedPayloadError,
    ValidationError,
)
from .multicopy import OutcomeCount, count_posterior_variances
from .states import COHERENT_VARIANCE, Hypothesis, _check_r, variance_of_r

FORMATS = {"int16-le": np.dtype("<i2"), "float64-le": np.dtype("<f8")}
SIDECAR_SUFFIX = ".json"


@dataclass
class SampleSet:
    samples: np.ndarray
    quantization_bits: int | None = None
    scale: float | None = None
    source: str = "synthetic"
    seed: int | None = None
    description: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValidationError("a sample set needs a nonempty 1-D array of samples")
        if self.source not in ("synthetic", "ingested"):
            raise ValidationError(f"unknown sample source {self.source!r}")
        if self.quantization_bits is not None:
            if self.scale is None or not self.scale > 0:
                raise InvalidScaleError(f"quantized sets need a positive scale, got {self.scale}")
            counts = self.samples * self.scale
            if not np.allclose(counts, np.round(counts), rtol=0.0, atol=1e-6):
                raise ValidationError("quantized samples must be integer multiples of 1/scale")

    def __len__(self) -> int:
        return int(self.samples.size)

    def counts(self) -> np.ndarray:
        """Raw integer detector counts of a quantized set."""
        if self.quantization_bits is None:
            raise ValidationError("set is not quantized")
        return np.round(self.samples * self.scale).astype(np.int64)

    def head(self, n: int) -> "SampleSet":
        return SampleSet(self.samples[:n], self.quantization_bits, self.scale, self.source, self.seed, self.description)


def generate_samples(V: float, count: int, seed: int) -> SampleSet:
    """Zero-mean normal quadrature samples with variance V, reproducible from ``seed``."""
    if not V > 0:
        raise ValidationError(f"variance must be positive, got {V}")
    if int(count) != count or count < 1:
        raise ValidationError(f"count must be a positive integer, got {count}")
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, math.sqrt(V), int(count))
    return SampleSet(x, source="synthetic", seed=seed, description=f"normal(0, {V!r})")


def quantize(sample_set: SampleSet, scale: float, bits: int = 16) -> SampleSet:
    """Round to the nearest multiple of 1/scale and clip to the signed ``bits`` range."""
    if not scale > 0:
        raise InvalidScaleError(f"scale must be positive, got {scale}")
    if bits < 2 or bits > 16:
        raise ValidationError(f"only 2..16 bit quantizers fit the int16 payload, got {bits}")
    top = 2 ** (bits - 1) - 1
    counts = np.clip(np.round(sample_set.samples * scale), -top - 1, top)
    return SampleSet(
        counts / scale, bits, float(scale), sample_set.source, sample_set.seed, sample_set.description
    )


def binarize(sample_set: SampleSet, alpha: float) -> OutcomeCount:
    """Displace by alpha after detection and keep the sign; x + alpha == 0 counts as '+'."""
    if not math.isfinite(alpha):
        raise ValidationError(f"alpha must be finite, got {alpha}")
    k = int(np.count_nonzero(sample_set.samples + alpha >= 0.0))
    return OutcomeCount(len(sample_set), k)


# ------------------------------------------------------------------- file I/O

def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + SIDECAR_SUFFIX)


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_samples(sample_set: SampleSet, path, description: str | None = None) -> Path:
    """Write payload and sidecar; int16 for quantized sets, float64 otherwise."""
    path = Path(path)
    if sample_set.quantization_bits is not None:
        fmt = "int16-le"
        payload = sample_set.counts().astype(FORMATS[fmt]).tobytes()
        scale = float(sample_set.scale)
    else:
        fmt = "float64-le"
        payload = sample_set.samples.astype(FORMATS[fmt]).tobytes()
        scale = 1.0
    meta = {
        "format": fmt,
        "count": len(sample_set),
        "scale": scale,
        "quantization_bits": sample_set.quantization_bits,
        "description": description if description is not None else sample_set.description,
        "seed": sample_set.seed,
    }
    _atomic_write_bytes(path, payload)
    _atomic_write_bytes(sidecar_path(path), (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode())
    return path


def _read_sidecar(path: Path) -> dict:
    side = sidecar_path(path)
    if not side.exists():
        raise MissingSidecarError(f"missing sidecar {side} for payload {path}")
    try:
        meta = json.loads(side.read_text())
    except json.JSONDecodeError as exc:
        raise SampleFormatError(f"sidecar {side} is not valid JSON: {exc}") from exc
    if not isinstance(meta, dict):
        raise SampleFormatError(f"sidecar {side} must hold a JSON object")
    for key in ("format", "count", "scale"):
        if key not in meta:
            raise SampleFormatError(f"sidecar {side} lacks required key {key!r}")
    return meta


def ingest(path) -> SampleSet:
    """Read a payload + sidecar pair into a :class:`SampleSet` in shot-noise units."""
    path = Path(path)
    meta = _read_sidecar(path)
    fmt = meta["format"]
    if fmt not in FORMATS:
        raise ContradictorySidecarError(f"unknown payload format {fmt!r}; expected one of {sorted(FORMATS)}")
    scale = meta["scale"]
    if not isinstance(scale, (int, float)) or not scale > 0 or not math.isfinite(scale):
        raise InvalidScaleError(f"sidecar scale must be a positive number, got {scale!r}")
    count = meta["count"]
    if not isinstance(count, int) or count < 1:
        raise SampleFormatError(f"sidecar count must be a positive integer, got {count!r}")
    bits = meta.get("quantization_bits")
    if fmt == "int16-le" and bits is None:
        bits = 16
    if fmt == "float64-le" and bits is not None:
        raise ContradictorySidecarError("float64 payload cannot declare quantization_bits")
    if fmt == "int16-le" and not (isinstance(bits, int) and 2 <= bits <= 16):
        raise ContradictorySidecarError(f"int16 payload cannot carry {bits!r}-bit samples")
    if not path.exists():
        raise SampleFormatError(f"payload {path} not found")

    dtype = FORMATS[fmt]
    raw = path.read_bytes()
    if len(raw) % dtype.itemsize:
        raise TruncatedPayloadError(count, len(raw) // dtype.itemsize)
    actual = len(raw) // dtype.itemsize
    if actual < count:
        raise TruncatedPayloadError(count, actual)
    if actual > count:
        raise ContradictorySidecarError(f"payload holds {actual} samples but sidecar declares {count}")

    values = np.frombuffer(raw, dtype=dtype).astype(float)
    return SampleSet(
        values / float(scale),
        quantization_bits=bits,
        scale=float(scale) if bits is not None else None,
        source="ingested",
        seed=meta.get("seed"),
        description=str(meta.get("description", "")),
    )


def summarize(sample_set: SampleSet) -> dict:
    x = sample_set.samples
    return {
        "count": len(sample_set),
        "mean": float(np.mean(x)),
        "variance": float(np.var(x)),
        "second_moment": float(np.mean(x * x)),
        "min": float(np.min(x)),
        "max": float(np.max(x)),
        "quantization_bits": sample_set.quantization_bits,
        "scale": sample_set.scale,
        "source": sample_set.source,
        "seed": sample_set.seed,
        "description": sample_set.description,
    }


# --------------------------------------------------------------------- traces

@dataclass(frozen=True)
class PosteriorTrace:
    hypothesis: Hypothesis
    N: tuple[int, ...]
    posterior: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if len(self.N) != len(self.posterior):
            raise ValidationError("trace needs one posterior per checkpoint")
        if any(b <= a for a, b in zip(self.N, self.N[1:])):
            raise ValidationError("trace checkpoints must be strictly increasing")

    def items(self):
        return zip(self.N, self.posterior)


def default_checkpoints(n_max: int) -> list[int]:
    """1, 2, 5, 10, 20, 50, ... up to ``n_max``."""
    out = []
    decade = 1
    while decade <= n_max:
        for m in (1, 2, 5):
            if m * decade <= n_max:
                out.append(m * decade)
        decade *= 10
    return out


def _trace(sample_set: SampleSet, truth: Hypothesis, Vs: float, alpha: float, checkpoints) -> PosteriorTrace:
    plus = np.cumsum(sample_set.samples[: checkpoints[-1]] + alpha >= 0.0)
    post = []
    for n in checkpoints:
        p = count_posterior_variances(OutcomeCount(n, int(plus[n - 1])), COHERENT_VARIANCE, Vs, alpha)
        post.append(p[truth])
    return PosteriorTrace(truth, tuple(checkpoints), tuple(post))


def posterior_trace(
    coh_set: SampleSet,
    sqz_set: SampleSet,
    r: float,
    alpha: float,
    checkpoints: Sequence[int],
) -> tuple[PosteriorTrace, PosteriorTrace]:
    """Posterior of the true hypothesis after the first N samples, for each checkpoint N."""
    _check_r(r)
    cps = sorted(set(int(c) for c in checkpoints))
    if not cps:
        raise ValidationError("need at least one checkpoint")
    if cps[0] < 1:
        raise ValidationError("checkpoints must be >= 1")
    for name, s in (("coherent", coh_set), ("squeezed", sqz_set)):
        if cps[-1] > len(s):
            raise ValidationError(f"checkpoint {cps[-1]} exceeds the {len(s)} samples of the {name} set")
    Vs = variance_of_r(r)
    return (
        _trace(coh_set, Hypothesis.COHERENT, Vs, alpha, cps),
        _trace(sqz_set, Hypothesis.SQUEEZED, Vs, alpha, cps),
    )
