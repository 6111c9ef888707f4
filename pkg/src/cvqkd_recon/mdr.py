"""Multidimensional reconciliation: rotation messages and synthetic-channel LLRs.

Bob owns the raw key.  For every block of ``dim`` quantum samples y he maps
his key bits to the unit vector u with ``u_i = (-1)^bit_i / sqrt(dim)`` and
publishes the rotation ``m = u * inverse(y / |y|)`` together with ``|y|``.
The rotation has unit norm whatever the bits are, so the classical message
reveals the block norm and nothing about the key.

Alice applies the rotation to her own samples, ``v = m * x``, which turns the
Gaussian channel into a per-component virtual BPSK channel

    v_i = |y| * u_i + w_i,

and computes the channel LLRs

    L_i = 2 * |y| * v_i / (sqrt(dim) * noise_variance).

This is the posterior log-odds of the virtual channel (the MMSE shrinkage of
x given y scales amplitude and noise variance by the same factor, so it
cancels); the Monte-Carlo calibration test in the suite checks that
``P(bit = 0 | L)`` matches ``1 / (1 + exp(-L))``.  Positive LLR means bit 0.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .algebra import VALID_DIMS, CdElement, _conj, _mul
from .errors import ConfigError, DegenerateInputError, DimensionMismatchError

# Blocks with smaller norm are rejected: probability zero under the Gaussian
# model, so they indicate pathological input rather than bad luck.
MIN_BLOCK_NORM = 1e-12


@dataclass(frozen=True)
class MdrConfig:
    """Rotation dimension and quantum noise variance (signal variance is 1)."""

    dim: int
    noise_variance: float

    def __post_init__(self):
        if self.dim not in VALID_DIMS:
            raise ConfigError(f"dim must be one of {VALID_DIMS}, got {self.dim}")
        if not (math.isfinite(self.noise_variance) and self.noise_variance > 0):
            raise ConfigError("noise_variance must be finite and positive")


@dataclass(frozen=True)
class MdrBlockMessage:
    """Classical message for one block: unit-norm rotation plus receiver norm."""

    rotation: CdElement
    receiver_norm: float

    def __post_init__(self):
        if self.receiver_norm < 0:
            raise ValueError("receiver_norm must be non-negative")
        nrm = math.sqrt(float(np.dot(self.rotation.coords, self.rotation.coords)))
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"rotation must have unit norm, got {nrm}")

    def to_bytes(self) -> bytes:
        """Little-endian float64s: rotation coordinates, then the norm."""
        return struct.pack(
            f"<{self.rotation.dim + 1}d", *self.rotation.coords, self.receiver_norm
        )

    @classmethod
    def from_bytes(cls, data: bytes, dim: int) -> "MdrBlockMessage":
        vals = struct.unpack(f"<{dim + 1}d", data)
        return cls(rotation=CdElement(vals[:dim]), receiver_norm=vals[dim])


@dataclass(frozen=True)
class LlrFrame:
    """Channel LLRs entering the decoder (natural log; positive favors bit 0)."""

    llrs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.llrs, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("llrs must be a flat vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("llrs must be finite")
        object.__setattr__(self, "llrs", arr)

    @property
    def frame_len(self) -> int:
        return self.llrs.shape[0]


def _encode_blocks(y2d: np.ndarray, bits2d: np.ndarray):
    """Array path: y2d, bits2d of shape (blocks, dim) -> (rotations, norms)."""
    d = y2d.shape[1]
    norms = np.sqrt(np.einsum("ij,ij->i", y2d, y2d))
    if np.any(norms <= MIN_BLOCK_NORM):
        raise DegenerateInputError(
            "a sample block has (near-)zero norm; discard and re-draw the block"
        )
    u = (1.0 - 2.0 * bits2d.astype(np.float64)) / math.sqrt(d)
    y_unit = y2d / norms[:, None]
    # inverse of a unit-norm element is its conjugate
    rotations = _mul(u, _conj(y_unit))
    return rotations, norms


def _decode_blocks(
    x2d: np.ndarray, rotations: np.ndarray, norms: np.ndarray, noise_variance: float
) -> np.ndarray:
    d = x2d.shape[1]
    v = _mul(rotations, x2d)
    return 2.0 * norms[:, None] * v / (math.sqrt(d) * noise_variance)


def mdr_encode_block(y_block: CdElement, bits, cfg: MdrConfig) -> MdrBlockMessage:
    """Bob's step for one block: map bits to u and publish u * inverse(y/|y|)."""
    if y_block.dim != cfg.dim:
        raise DimensionMismatchError(f"block dim {y_block.dim} != configured {cfg.dim}")
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (cfg.dim,):
        raise DimensionMismatchError(f"need exactly {cfg.dim} bits per block")
    rot, norms = _encode_blocks(y_block.coords[None, :], bits[None, :])
    return MdrBlockMessage(rotation=CdElement(rot[0]), receiver_norm=float(norms[0]))


def mdr_decode_block(x_block: CdElement, msg: MdrBlockMessage, cfg: MdrConfig) -> np.ndarray:
    """Alice's step for one block: rotate her samples and emit per-bit LLRs."""
    if x_block.dim != msg.rotation.dim or x_block.dim != cfg.dim:
        raise DimensionMismatchError(
            f"dims disagree: x {x_block.dim}, rotation {msg.rotation.dim}, cfg {cfg.dim}"
        )
    llrs = _decode_blocks(
        x_block.coords[None, :],
        msg.rotation.coords[None, :],
        np.array([msg.receiver_norm]),
        cfg.noise_variance,
    )
    return llrs[0]


def _frame_blocks(samples, cfg: MdrConfig) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0 or arr.size % cfg.dim != 0:
        raise DimensionMismatchError(
            f"frame length {arr.size} is not a positive multiple of dim {cfg.dim}"
        )
    return arr.reshape(-1, cfg.dim)


def mdr_encode_frame(y, raw_bits, cfg: MdrConfig) -> list[MdrBlockMessage]:
    """Encode a whole frame block by block, in order."""
    y2d = _frame_blocks(y, cfg)
    bits = np.asarray(raw_bits, dtype=np.uint8)
    if bits.shape != (y2d.size,):
        raise DimensionMismatchError(f"need {y2d.size} bits, got {bits.shape}")
    rotations, norms = _encode_blocks(y2d, bits.reshape(-1, cfg.dim))
    return [
        MdrBlockMessage(rotation=CdElement(rotations[b]), receiver_norm=float(norms[b]))
        for b in range(rotations.shape[0])
    ]


def mdr_decode_frame(x, msgs: list[MdrBlockMessage], cfg: MdrConfig) -> LlrFrame:
    """Decode a whole frame: concatenation of per-block LLRs, in order."""
    x2d = _frame_blocks(x, cfg)
    if len(msgs) != x2d.shape[0]:
        raise DimensionMismatchError(
            f"frame has {x2d.shape[0]} blocks but got {len(msgs)} messages"
        )
    rotations = np.stack([m.rotation.coords for m in msgs])
    if rotations.shape[1] != cfg.dim:
        raise DimensionMismatchError("message dimension does not match configuration")
    norms = np.array([m.receiver_norm for m in msgs])
    llrs = _decode_blocks(x2d, rotations, norms, cfg.noise_variance)
    return LlrFrame(llrs=llrs.reshape(-1))
