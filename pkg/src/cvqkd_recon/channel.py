"""Simulated quantum-measurement data and the BI-AWGN reference channel.

The signal variance is pinned to one, so SNR = 1 / noise_variance exactly.
Heterodyne detection is modeled at the data level only: every quadrature
measurement contributes one real sample to the x/y sequences, and the
reconciliation layer never sees anything but the resulting pair of
correlated Gaussian sequences.

Randomness comes from a counter-based generator (Philox, 4x64) keyed by
``(seed, stream)``.  Distinct keys give independent streams by construction,
which is what makes per-frame substreams reproducible and non-overlapping
regardless of how frames are scheduled across workers.  A hardware QRNG can
replace this source behind the same interface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ChannelParams:
    """Operating point of the simulated channel.

    ``snr`` is linear (not dB); ``noise_variance`` is derived as ``1/snr``.
    """

    snr: float
    n_samples: int
    noise_variance: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.snr) and self.snr > 0):
            raise ConfigError(f"snr must be finite and positive, got {self.snr}")
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        object.__setattr__(self, "noise_variance", 1.0 / self.snr)


@dataclass(frozen=True)
class SeededRng:
    """Deterministic random source: Philox 4x64 keyed by (seed, stream).

    ``generator(stream)`` returns an independent ``numpy.random.Generator``
    for each stream index; campaigns use one stream per frame.
    """

    seed: int
    algorithm: str = "philox4x64"

    def generator(self, stream: int = 0) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def generate_gaussian_pair(params: ChannelParams, rng: np.random.Generator):
    """Draw (x, y): x ~ iid N(0, 1), y = x + n with n ~ iid N(0, noise_variance)."""
    n = params.n_samples
    x = rng.standard_normal(n)
    y = x + math.sqrt(params.noise_variance) * rng.standard_normal(n)
    return x, y


def generate_biawgn(params: ChannelParams, bits, rng: np.random.Generator) -> np.ndarray:
    """Exact LLRs of bits sent over a BI-AWGN channel at the same SNR.

    Channel output is ``r = (-1)^bit + n`` with ``n ~ N(0, noise_variance)``;
    the returned LLRs are ``2 r / noise_variance`` (positive favors bit 0).
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (params.n_samples,):
        raise ConfigError("bits length must equal n_samples")
    sigma2 = params.noise_variance
    r = (1.0 - 2.0 * bits) + math.sqrt(sigma2) * rng.standard_normal(bits.size)
    return 2.0 * r / sigma2


def generate_raw_key(n: int, rng: np.random.Generator) -> np.ndarray:
    """n iid uniform bits as uint8."""
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def write_sample_file(path, samples) -> None:
    """Write samples as little-endian 64-bit floats."""
    np.asarray(samples, dtype="<f8").tofile(path)


def read_sample_file(path) -> np.ndarray:
    return np.fromfile(path, dtype="<f8")


def write_descriptor(path, n_samples: int, noise_variance: float) -> None:
    Path(path).write_text(
        json.dumps({"n_samples": int(n_samples), "noise_variance": float(noise_variance)}) + "\n"
    )


def load_measurement(x_path, y_path, descriptor_path=None):
    """Load real (or simulated) measurement data.

    Returns ``(x, y, noise_variance)`` where ``noise_variance`` is None when
    no descriptor is given.  The descriptor is a small JSON file of the form
    ``{"n_samples": ..., "noise_variance": ...}`` and, when present, must be
    consistent with the sample files.
    """
    x = read_sample_file(x_path)
    y = read_sample_file(y_path)
    if x.size != y.size:
        raise ConfigError(f"x has {x.size} samples but y has {y.size}")
    noise_variance = None
    if descriptor_path is not None:
        try:
            desc = json.loads(Path(descriptor_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read descriptor {descriptor_path}: {exc}") from exc
        if int(desc.get("n_samples", -1)) != x.size:
            raise ConfigError(
                f"descriptor says {desc.get('n_samples')} samples, files hold {x.size}"
            )
        noise_variance = float(desc["noise_variance"])
        if not (math.isfinite(noise_variance) and noise_variance > 0):
            raise ConfigError("descriptor noise_variance must be finite and positive")
    return x, y, noise_variance
