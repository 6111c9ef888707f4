"""Rate-adaptive LDPC code construction and parity-check matrix handling.

The code family is built around a fixed progressive-edge-growth mother code
of rate 1/5 with ``n = 5k`` variables and ``m = 4k`` checks.  Higher-rate...
lower-rate members are obtained by appending ``i`` extension stages: stage
``t`` adds one fresh degree-1 variable and one fresh check tying it to
``d_ext`` existing variables, giving block length ``n = 5k + i`` and
``m = 4k + i`` checks, hence rate ``R = k / (5k + i)``.

Properties the tests lean on:

* the mother code depends only on ``(k, d_ext)``, never on the seed;
* extension stage ``t`` is hashed from ``(seed, t)`` alone, so the matrix
  for ``i1 < i2`` stages is an exact leading submatrix of the ``i2`` one;
* adjacency is stored canonically (rows and columns sorted ascending), so
  equality of two matrices is plain array equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._peg import extension_choices, peg_edges
from .errors import AlistParseError, InvalidSpecError

MIN_RATE = Fraction(1, 100)
MAX_RATE = Fraction(1, 5)

# mother-code variable degree profile: (degree, fraction of variables)
MOTHER_PROFILE = ((2, 0.55), (3, 0.30), (5, 0.15))
DEFAULT_D_EXT = 3


class ParityCheckMatrix:
    """Sparse binary parity-check matrix in compressed adjacency form.

    Both orientations are kept: ``chk_ptr``/``chk_vars`` list the variable
    indices of each check row, ``var_ptr``/``var_chks`` list the check
    indices of each variable column.  Rows and columns are sorted ascending
    and duplicate-free; every check has degree at least one.
    """

    __slots__ = (
        "n_vars",
        "n_checks",
        "n_edges",
        "chk_ptr",
        "chk_vars",
        "var_ptr",
        "var_chks",
        "__weakref__",
    )

    def __init__(self, n_vars: int, n_checks: int, edge_var: np.ndarray, edge_chk: np.ndarray):
        if n_vars <= 0 or n_checks <= 0:
            raise InvalidSpecError("matrix dimensions must be positive")
        if max(n_vars, n_checks) >= 2**31:
            raise InvalidSpecError("matrix dimensions exceed 32-bit indexing")
        edge_var = np.asarray(edge_var)
        edge_chk = np.asarray(edge_chk)
        if edge_var.ndim != 1 or edge_var.shape != edge_chk.shape:
            raise InvalidSpecError("edge arrays must be 1-d and of equal length")
        if edge_var.size:
            if edge_var.min() < 0 or edge_var.max() >= n_vars:
                raise InvalidSpecError("variable index out of range")
            if edge_chk.min() < 0 or edge_chk.max() >= n_checks:
                raise InvalidSpecError("check index out of range")
        edge_var = np.ascontiguousarray(edge_var, dtype=np.int32)
        edge_chk = np.ascontiguousarray(edge_chk, dtype=np.int32)

        order = np.lexsort((edge_var, edge_chk))
        ev = edge_var[order]
        ec = edge_chk[order]
        if ev.size and np.any((ec[1:] == ec[:-1]) & (ev[1:] == ev[:-1])):
            raise InvalidSpecError("duplicate edge in parity-check matrix")

        chk_deg = np.bincount(ec, minlength=n_checks)
        if np.any(chk_deg == 0):
            raise InvalidSpecError("every check must have degree >= 1")
        self.n_vars = int(n_vars)
        self.n_checks = int(n_checks)
        self.n_edges = int(ev.size)
        self.chk_ptr = np.zeros(n_checks + 1, dtype=np.int64)
        np.cumsum(chk_deg, out=self.chk_ptr[1:])
        self.chk_vars = ev

        order_v = np.lexsort((ec, ev))
        var_deg = np.bincount(ev, minlength=n_vars)
        self.var_ptr = np.zeros(n_vars + 1, dtype=np.int64)
        np.cumsum(var_deg, out=self.var_ptr[1:])
        self.var_chks = ec[order_v]

    def vars_of_check(self, j: int) -> np.ndarray:
        return self.chk_vars[self.chk_ptr[j] : self.chk_ptr[j + 1]]

    def checks_of_var(self, i: int) -> np.ndarray:
        return self.var_chks[self.var_ptr[i] : self.var_ptr[i + 1]]

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.chk_ptr)

    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def to_dense(self) -> np.ndarray:
        """Dense 0/1 array; intended for small matrices in tests."""
        h = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        for j in range(self.n_checks):
            h[j, self.vars_of_check(j)] = 1
        return h

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and self.n_checks == other.n_checks
            and np.array_equal(self.chk_ptr, other.chk_ptr)
            and np.array_equal(self.chk_vars, other.chk_vars)
        )

    # equality is structural (for round-trip checks); hashing stays
    # identity-based so instances can key weak caches
    __hash__ = object.__hash__

    def __repr__(self) -> str:
        return (
            f"ParityCheckMatrix(n_vars={self.n_vars}, n_checks={self.n_checks}, "
            f"n_edges={self.n_edges})"
        )


@dataclass(frozen=True)
class CodeSpec:
    """Member of the rate family ``R = k / (5k + i)``.

    ``k`` is the key length carried by every member; ``rate_index`` is the
    number of extension stages ``i``.  ``i = 0`` gives the mother rate 1/5
    and ``i = 95k`` the floor rate 1/100.
    """

    k: int
    rate_index: int
    d_ext: int = DEFAULT_D_EXT

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise InvalidSpecError("k must be a positive integer")
        if not isinstance(self.rate_index, int) or self.rate_index < 0:
            raise InvalidSpecError("rate_index must be a non-negative integer")
        if self.rate_index > 95 * self.k:
            raise InvalidSpecError(
                f"rate_index {self.rate_index} exceeds 95*k = {95 * self.k} (rate below 1/100)"
            )
        if not isinstance(self.d_ext, int) or not 1 <= self.d_ext <= 5 * self.k:
            raise InvalidSpecError("d_ext must be a positive integer no larger than 5*k")

    @property
    def n_vars(self) -> int:
        return 5 * self.k + self.rate_index

    @property
    def n_checks(self) -> int:
        return 4 * self.k + self.rate_index

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n_vars)

    @classmethod
    def from_rate(cls, k: int, rate: float, d_ext: int = DEFAULT_D_EXT) -> "CodeSpec":
        """Nearest family member to a target rate: ``i = round(k/R) - 5k``."""
        if not rate > 0:
            raise InvalidSpecError("target rate must be positive")
        idx = round(k / rate) - 5 * k
        if idx < 0:
            raise InvalidSpecError(f"target rate {rate} above family maximum 1/5")
        return cls(k=k, rate_index=idx, d_ext=d_ext)


def _mother_degrees(n_mother: int) -> np.ndarray:
    counts = {}
    assigned = 0
    for deg, frac in MOTHER_PROFILE[::-1][:-1]:
        counts[deg] = int(round(frac * n_mother))
        assigned += counts[deg]
    lowest = MOTHER_PROFILE[0][0]
    counts[lowest] = n_mother - assigned
    if counts[lowest] < 0:
        raise InvalidSpecError("degree profile fractions exceed 1")
    degrees = np.empty(n_mother, dtype=np.int32)
    pos = 0
    for deg in sorted(counts):  # ascending degree = ascending index
        degrees[pos : pos + counts[deg]] = deg
        pos += counts[deg]
    return degrees


def build_mother_code(k: int, max_depth: int = 5) -> ParityCheckMatrix:
    """Rate-1/5 mother code: 5k variables, 4k checks, degrees from the fixed
    profile, edges placed by progressive edge growth.

    ``max_depth`` is the edge-growth search horizon: cycles shorter than
    2*(max_depth + 1) are avoided where capacity allows.  The default is
    plenty below ~10^4 variables; huge graphs have enough room for degree-2
    cycles just past the horizon (low-weight codewords, an error floor), so
    deepen it when building large codes if build time permits.
    """
    if k < 1:
        raise InvalidSpecError("k must be a positive integer")
    n0, m0 = 5 * k, 4 * k
    degrees = _mother_degrees(n0)
    edge_var, edge_chk, ok = peg_edges(degrees, m0, max_depth)
    if not ok:
        raise InvalidSpecError("edge growth overflowed the check-degree capacity")
    return ParityCheckMatrix(n0, m0, edge_var, edge_chk)


def build_rate_adaptive(spec: CodeSpec, seed: int = 0, max_depth: int = 5) -> ParityCheckMatrix:
    """Mother code plus ``spec.rate_index`` seeded extension stages.

    The seed drives only the extension picks; matrices for the same seed and
    increasing ``rate_index`` form a nested prefix family.  ``max_depth`` is
    forwarded to the mother-code edge growth.
    """
    n0, m0 = 5 * spec.k, 4 * spec.k
    degrees = _mother_degrees(n0)
    ev0, ec0, ok = peg_edges(degrees, m0, max_depth)
    if not ok:
        raise InvalidSpecError("edge growth overflowed the check-degree capacity")

    i = spec.rate_index
    if i == 0:
        return ParityCheckMatrix(n0, m0, ev0, ec0)

    picks = extension_choices(seed, i, n0, spec.d_ext)
    stage = np.arange(i, dtype=np.int32)
    ext_var = np.empty(i * (spec.d_ext + 1), dtype=np.int32)
    ext_chk = np.empty_like(ext_var)
    ext_var[:: spec.d_ext + 1] = n0 + stage  # the new degree-1 variable
    ext_chk[:: spec.d_ext + 1] = m0 + stage
    for r in range(spec.d_ext):
        ext_var[r + 1 :: spec.d_ext + 1] = picks[:, r]
        ext_chk[r + 1 :: spec.d_ext + 1] = m0 + stage

    edge_var = np.concatenate((ev0.astype(np.int32), ext_var))
    edge_chk = np.concatenate((ec0.astype(np.int32), ext_chk))
    return ParityCheckMatrix(spec.n_vars, spec.n_checks, edge_var, edge_chk)


def syndrome(matrix: ParityCheckMatrix, bits: np.ndarray) -> np.ndarray:
    """GF(2) product ``H @ bits`` as a uint8 array of length ``n_checks``."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.shape[0] != matrix.n_vars:
        raise InvalidSpecError(
            f"bit vector length {bits.shape} does not match n_vars={matrix.n_vars}"
        )
    vals = bits.astype(np.uint8)[matrix.chk_vars]
    return np.bitwise_xor.reduceat(vals, matrix.chk_ptr[:-1])


def save_alist(matrix: ParityCheckMatrix) -> str:
    """Serialize in alist format (header ``n m``, 1-based, zero-padded)."""
    n, m = matrix.n_vars, matrix.n_checks
    vdeg = matrix.var_degrees()
    cdeg = matrix.check_degrees()
    max_v = int(vdeg.max()) if n else 0
    max_c = int(cdeg.max()) if m else 0
    lines = [f"{n} {m}", f"{max_v} {max_c}"]
    lines.append(" ".join(str(int(d)) for d in vdeg))
    lines.append(" ".join(str(int(d)) for d in cdeg))
    for i in range(n):
        entries = [str(int(c) + 1) for c in matrix.checks_of_var(i)]
        entries += ["0"] * (max_v - len(entries))
        lines.append(" ".join(entries))
    for j in range(m):
        entries = [str(int(v) + 1) for v in matrix.vars_of_check(j)]
        entries += ["0"] * (max_c - len(entries))
        lines.append(" ".join(entries))
    return "\n".join(lines) + "\n"


def _parse_int_line(tokens: list[str], lineno: int) -> list[int]:
    out = []
    for tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise AlistParseError(f"non-integer token {tok!r}", line=lineno) from None
    return out


def load_alist(text: str) -> ParityCheckMatrix:
    """Parse alist text; raises :class:`AlistParseError` with a line number.

    Adjacency lines may be zero-padded to the maximum degree or left
    unpadded; entries are 1-based.  The variable-side and check-side lists
    must describe the same edge set.
    """
    raw = text.splitlines()
    lines = [(no + 1, ln.split()) for no, ln in enumerate(raw) if ln.strip()]
    if len(lines) < 4:
        raise AlistParseError("truncated file: fewer than 4 content lines", line=len(raw))

    lineno, toks = lines[0]
    if len(toks) != 2:
        raise AlistParseError("header must be exactly 'n_vars n_checks'", line=lineno)
    n, m = _parse_int_line(toks, lineno)
    if n < 1 or m < 1:
        raise AlistParseError("matrix dimensions must be positive", line=lineno)

    lineno, toks = lines[1]
    if len(toks) != 2:
        raise AlistParseError("expected 'max_var_degree max_chk_degree'", line=lineno)
    max_v, max_c = _parse_int_line(toks, lineno)

    lineno, toks = lines[2]
    vdeg = _parse_int_line(toks, lineno)
    if len(vdeg) != n:
        raise AlistParseError(f"expected {n} variable degrees, got {len(vdeg)}", line=lineno)
    if any(d < 0 or d > max_v for d in vdeg):
        raise AlistParseError("variable degree outside [0, max_var_degree]", line=lineno)

    lineno, toks = lines[3]
    cdeg = _parse_int_line(toks, lineno)
    if len(cdeg) != m:
        raise AlistParseError(f"expected {m} check degrees, got {len(cdeg)}", line=lineno)
    if any(d < 1 or d > max_c for d in cdeg):
        raise AlistParseError("check degree outside [1, max_chk_degree]", line=lineno)

    if len(lines) != 4 + n + m:
        raise AlistParseError(
            f"expected {4 + n + m} content lines, found {len(lines)}", line=lines[-1][0]
        )

    def read_adjacency(rows, degs, limit, what):
        heads: list[np.ndarray] = []
        for row_idx, (lno, tks) in enumerate(rows):
            deg = degs[row_idx]
            vals = _parse_int_line(tks, lno)
            if len(vals) > deg and any(v != 0 for v in vals[deg:]):
                raise AlistParseError("nonzero entry beyond declared degree", line=lno)
            if len(vals) < deg:
                raise AlistParseError(
                    f"{what} row lists {len(vals)} entries, degree says {deg}", line=lno
                )
            head = vals[:deg]
            if any(v < 1 or v > limit for v in head):
                raise AlistParseError(f"{what} index out of range 1..{limit}", line=lno)
            arr = np.asarray(head, dtype=np.int64) - 1
            if np.unique(arr).size != arr.size:
                raise AlistParseError(f"duplicate {what} index", line=lno)
            heads.append(arr)
        return heads

    var_rows = read_adjacency(lines[4 : 4 + n], vdeg, m, "check")
    chk_rows = read_adjacency(lines[4 + n :], cdeg, n, "variable")

    edge_chk = np.concatenate(var_rows) if var_rows else np.empty(0, dtype=np.int64)
    edge_var = np.repeat(np.arange(n, dtype=np.int64), vdeg)
    matrix = ParityCheckMatrix(n, m, edge_var, edge_chk)

    # the check-side lists must agree with the variable-side ones
    for j in range(m):
        if not np.array_equal(np.sort(chk_rows[j]), matrix.vars_of_check(j)):
            raise AlistParseError(
                f"check row {j + 1} disagrees with variable-side adjacency",
                line=lines[4 + n + j][0],
            )
    return matrix
