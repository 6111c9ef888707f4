"""Composition-algebra arithmetic for dimensions 1, 2, 4 and 8.

The four algebras (reals, complex numbers, quaternions, octonions) are built
by recursive doubling.  The doubling convention used throughout the library
is pinned to

    (A, B) * (C, D) = (A*C - conj(D)*B,  D*A + B*conj(C))

with real multiplication at dimension 1.  Texts differ on this convention;
any single convention works as long as both protocol parties share it, so
this one is fixed and documented here.  Dimension 16 is rejected: sedenions
are not a composition algebra (the norm identity ``|a*b| = |a|*|b|`` fails),
which would break the rotation scheme built on top of this module.

The ``_mul``/``_conj`` kernels operate on arrays of shape ``(..., dim)`` so
that callers can batch many elements in one call; ``CdElement`` and the
``cd_*`` functions are the scalar, validated surface.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError

VALID_DIMS = (1, 2, 4, 8)

# Norms below this are treated as exactly zero when inverting.
ZERO_NORM_EPS = 1e-12


def _conj(a: np.ndarray) -> np.ndarray:
    """Conjugate of elements stored along the last axis: negate coords 1..d-1."""
    out = a.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched product along the last axis under the pinned doubling convention."""
    d = a.shape[-1]
    if d == 1:
        return a * b
    h = d // 2
    ah, at = a[..., :h], a[..., h:]
    bh, bt = b[..., :h], b[..., h:]
    head = _mul(ah, bh) - _mul(_conj(bt), at)
    tail = _mul(bt, ah) + _mul(at, _conj(bh))
    return np.concatenate((head, tail), axis=-1)


class CdElement:
    """An element of the dimension-``dim`` composition algebra.

    Parameters
    ----------
    coords : array-like of float
        Exactly 1, 2, 4 or 8 finite real coordinates.
    """

    __slots__ = ("dim", "coords")

    def __init__(self, coords):
        arr = np.asarray(coords, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] not in VALID_DIMS:
            raise DimensionMismatchError(
                f"coords must be a flat vector of length 1, 2, 4 or 8, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("coords must be finite")
        self.dim = int(arr.shape[0])
        self.coords = arr

    @classmethod
    def identity(cls, dim: int) -> "CdElement":
        """The two-sided multiplicative identity (1, 0, ..., 0)."""
        c = np.zeros(dim)
        c[0] = 1.0
        return cls(c)

    def __repr__(self) -> str:
        return f"CdElement({self.coords.tolist()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CdElement)
            and self.dim == other.dim
            and bool(np.array_equal(self.coords, other.coords))
        )


def cd_multiply(a: CdElement, b: CdElement) -> CdElement:
    """Product ``a * b`` in the shared algebra.

    Raises
    ------
    DimensionMismatchError
        If the operands live in different algebras.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"cannot multiply dim {a.dim} by dim {b.dim}")
    return CdElement(_mul(a.coords, b.coords))


def cd_conjugate(a: CdElement) -> CdElement:
    """Conjugate: first coordinate unchanged, all others negated."""
    return CdElement(_conj(a.coords))


def cd_norm(a: CdElement) -> float:
    """Euclidean norm of the coordinate vector."""
    return math.sqrt(float(np.dot(a.coords, a.coords)))


def cd_inverse(a: CdElement) -> CdElement:
    """Multiplicative inverse ``conj(a) / |a|^2``.

    Raises
    ------
    DegenerateInputError
        If the norm of ``a`` is zero or numerically indistinguishable from it.
    """
    nsq = float(np.dot(a.coords, a.coords))
    if nsq <= ZERO_NORM_EPS * ZERO_NORM_EPS:
        raise DegenerateInputError("cannot invert an element of (near-)zero norm")
    return CdElement(_conj(a.coords) / nsq)
