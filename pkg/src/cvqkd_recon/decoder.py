"""Syndrome-based sum-product decoding.

The decoder works on the syndrome formulation: given channel LLRs for a
word ``x`` and a target syndrome ``s``, it searches for the word with that
exact syndrome, flipping the usual check-node rule by the sign
``(-1)**s_j``.  With ``s = 0`` it reduces to textbook codeword decoding.

Arithmetic is pinned down to the operation order so that independent
reimplementations can be compared bit for bit:

* check messages use literal leave-one-out products of ``tanh(L/2)`` in
  ascending edge order, the product clipped to just below 1 before
  ``2*atanh``;
* variable messages use literal leave-one-out sums in ascending check
  order starting from the clamped channel LLR;
* posteriors are full sums in the same order; the hard decision maps a
  zero posterior to bit 0;
* every stored variable-to-check message (including initialization) is
  clamped to ``[-llr_clamp, +llr_clamp]``.

``tanh``/``atanh`` are evaluated either directly (libm) or through uniform
lookup tables with nearest-entry rounding; the table variant trades a tiny
statistical penalty for cheaper iterations.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .code import ParityCheckMatrix
from .errors import ConfigError, InvalidSpecError
from .mdr import LlrFrame

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap

SCHEDULES = ("flooding", "layered")
EVALUATIONS = ("direct", "lookup")
DEFAULT_LLR_CLAMP = 38.0
DEFAULT_LOOKUP_RESOLUTION = 1 << 16


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 500
    schedule: str = "flooding"
    evaluation: str = "direct"
    llr_clamp: float = DEFAULT_LLR_CLAMP
    lookup_resolution: int = DEFAULT_LOOKUP_RESOLUTION

    def __post_init__(self):
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise ConfigError("max_iterations must be a positive integer")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if self.evaluation not in EVALUATIONS:
            raise ConfigError(f"evaluation must be one of {EVALUATIONS}, got {self.evaluation!r}")
        if not (math.isfinite(self.llr_clamp) and self.llr_clamp > 0):
            raise ConfigError("llr_clamp must be positive and finite")
        if not isinstance(self.lookup_resolution, int) or self.lookup_resolution < 2:
            raise ConfigError("lookup_resolution must be an integer >= 2")


@dataclass(frozen=True)
class LookupTables:
    """Uniform grids for ``tanh(x/2)`` on ``[0, clamp]`` and ``2*atanh(y)``
    on ``[0, tanh(clamp/2)]``; signs are handled outside the tables."""

    tanh_table: np.ndarray
    atanh_table: np.ndarray
    llr_clamp: float
    resolution: int
    tanh_index_scale: float
    atanh_index_scale: float


def build_lookup_tables(
    llr_clamp: float = DEFAULT_LLR_CLAMP, resolution: int = DEFAULT_LOOKUP_RESOLUTION
) -> LookupTables:
    if not (math.isfinite(llr_clamp) and llr_clamp > 0):
        raise ConfigError("llr_clamp must be positive and finite")
    if resolution < 2:
        raise ConfigError("lookup_resolution must be an integer >= 2")
    one_minus = np.nextafter(1.0, 0.0)
    xs = np.linspace(0.0, llr_clamp, resolution)
    tanh_table = np.minimum(np.tanh(0.5 * xs), one_minus)
    f_max = float(tanh_table[-1])
    ys = np.minimum(np.linspace(0.0, f_max, resolution), one_minus)
    atanh_table = np.minimum(2.0 * np.arctanh(ys), llr_clamp)
    return LookupTables(
        tanh_table=tanh_table,
        atanh_table=atanh_table,
        llr_clamp=float(llr_clamp),
        resolution=int(resolution),
        tanh_index_scale=(resolution - 1) / llr_clamp,
        atanh_index_scale=(resolution - 1) / f_max,
    )


@dataclass(frozen=True)
class DecodeResult:
    bits: np.ndarray
    converged: bool
    iterations_used: int
    syndrome_matched: bool
    posteriors: np.ndarray


@njit(cache=True, nogil=True)
def _decode_flooding(
    chk_ptr,
    chk_vars,
    var_ptr,
    var_eids,
    llr,
    synd,
    max_iters,
    clamp,
    use_lut,
    tanh_tab,
    tanh_scale,
    atanh_tab,
    atanh_scale,
    bits,
    totals,
):
    n_checks = chk_ptr.shape[0] - 1
    n_vars = var_ptr.shape[0] - 1
    n_edges = chk_vars.shape[0]
    one_minus = np.nextafter(1.0, 0.0)
    tsize = tanh_tab.shape[0]
    asize = atanh_tab.shape[0]

    max_deg = 0
    for j in range(n_checks):
        d = chk_ptr[j + 1] - chk_ptr[j]
        if d > max_deg:
            max_deg = d
    scratch = np.empty(max_deg, dtype=np.float64)

    base = np.empty(n_vars, dtype=np.float64)
    for i in range(n_vars):
        x = llr[i]
        if x > clamp:
            x = clamp
        elif x < -clamp:
            x = -clamp
        base[i] = x
    msg_v = np.empty(n_edges, dtype=np.float64)
    msg_c = np.empty(n_edges, dtype=np.float64)
    for e in range(n_edges):
        msg_v[e] = base[chk_vars[e]]

    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        # check-node pass
        for j in range(n_checks):
            lo = chk_ptr[j]
            deg = chk_ptr[j + 1] - lo
            sgn = 1.0 - 2.0 * synd[j]
            for t in range(deg):
                x = msg_v[lo + t]
                if use_lut:
                    ax = -x if x < 0.0 else x
                    idx = int(ax * tanh_scale + 0.5)
                    if idx >= tsize:
                        idx = tsize - 1
                    th = tanh_tab[idx]
                    scratch[t] = -th if x < 0.0 else th
                else:
                    scratch[t] = math.tanh(0.5 * x)
            for t in range(deg):
                p = 1.0
                for u in range(deg):
                    if u != t:
                        p = p * scratch[u]
                ap = -p if p < 0.0 else p
                if use_lut:
                    idx = int(ap * atanh_scale + 0.5)
                    if idx >= asize:
                        idx = asize - 1
                    mag = atanh_tab[idx]
                else:
                    if ap > one_minus:
                        ap = one_minus
                    mag = 2.0 * math.atanh(ap)
                msg_c[lo + t] = -sgn * mag if p < 0.0 else sgn * mag
        # variable-node pass and posteriors
        for i in range(n_vars):
            lo = var_ptr[i]
            hi = var_ptr[i + 1]
            tot = base[i]
            for t in range(lo, hi):
                tot = tot + msg_c[var_eids[t]]
            totals[i] = tot
            bits[i] = 1 if tot < 0.0 else 0
            for t in range(lo, hi):
                acc = base[i]
                for u in range(lo, hi):
                    if u != t:
                        acc = acc + msg_c[var_eids[u]]
                if acc > clamp:
                    acc = clamp
                elif acc < -clamp:
                    acc = -clamp
                msg_v[var_eids[t]] = acc
        # stop as soon as the hard decision reproduces the syndrome
        ok = True
        for j in range(n_checks):
            acc = 0
            for t in range(chk_ptr[j], chk_ptr[j + 1]):
                acc ^= bits[chk_vars[t]]
            if acc != synd[j]:
                ok = False
                break
        if ok:
            return True, iters
    return False, iters


@njit(cache=True, nogil=True)
def _decode_layered(
    chk_ptr,
    chk_vars,
    llr,
    synd,
    max_iters,
    clamp,
    use_lut,
    tanh_tab,
    tanh_scale,
    atanh_tab,
    atanh_scale,
    bits,
    totals,
):
    n_checks = chk_ptr.shape[0] - 1
    n_vars = llr.shape[0]
    n_edges = chk_vars.shape[0]
    one_minus = np.nextafter(1.0, 0.0)
    tsize = tanh_tab.shape[0]
    asize = atanh_tab.shape[0]

    max_deg = 0
    for j in range(n_checks):
        d = chk_ptr[j + 1] - chk_ptr[j]
        if d > max_deg:
            max_deg = d
    scratch = np.empty(max_deg, dtype=np.float64)

    for i in range(n_vars):
        x = llr[i]
        if x > clamp:
            x = clamp
        elif x < -clamp:
            x = -clamp
        totals[i] = x
    msg_c = np.zeros(n_edges, dtype=np.float64)

    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        for j in range(n_checks):
            lo = chk_ptr[j]
            deg = chk_ptr[j + 1] - lo
            sgn = 1.0 - 2.0 * synd[j]
            for t in range(deg):
                x = totals[chk_vars[lo + t]] - msg_c[lo + t]
                if x > clamp:
                    x = clamp
                elif x < -clamp:
                    x = -clamp
                if use_lut:
                    ax = -x if x < 0.0 else x
                    idx = int(ax * tanh_scale + 0.5)
                    if idx >= tsize:
                        idx = tsize - 1
                    th = tanh_tab[idx]
                    scratch[t] = -th if x < 0.0 else th
                else:
                    scratch[t] = math.tanh(0.5 * x)
            for t in range(deg):
                p = 1.0
                for u in range(deg):
                    if u != t:
                        p = p * scratch[u]
                ap = -p if p < 0.0 else p
                if use_lut:
                    idx = int(ap * atanh_scale + 0.5)
                    if idx >= asize:
                        idx = asize - 1
                    mag = atanh_tab[idx]
                else:
                    if ap > one_minus:
                        ap = one_minus
                    mag = 2.0 * math.atanh(ap)
                new = -sgn * mag if p < 0.0 else sgn * mag
                v = chk_vars[lo + t]
                totals[v] = totals[v] + new - msg_c[lo + t]
                msg_c[lo + t] = new
        for i in range(n_vars):
            bits[i] = 1 if totals[i] < 0.0 else 0
        ok = True
        for j in range(n_checks):
            acc = 0
            for t in range(chk_ptr[j], chk_ptr[j + 1]):
                acc ^= bits[chk_vars[t]]
            if acc != synd[j]:
                ok = False
                break
        if ok:
            return True, iters
    return False, iters


_EMPTY_TABLE = np.zeros(1, dtype=np.float64)
_graph_cache: "weakref.WeakKeyDictionary[ParityCheckMatrix, tuple]" = weakref.WeakKeyDictionary()
_table_cache: dict[tuple[float, int], LookupTables] = {}


def _edge_layout(matrix: ParityCheckMatrix):
    """Edge ids of each variable's messages, check-ascending within a
    variable (edge id = position in the check-major adjacency)."""
    cached = _graph_cache.get(matrix)
    if cached is None:
        edge_var = matrix.chk_vars.astype(np.int64)
        var_eids = np.argsort(edge_var, kind="stable").astype(np.int64)
        cached = (matrix.var_ptr.astype(np.int64), var_eids)
        _graph_cache[matrix] = cached
    return cached


def _tables_for(config: DecoderConfig) -> LookupTables:
    key = (config.llr_clamp, config.lookup_resolution)
    tables = _table_cache.get(key)
    if tables is None:
        tables = build_lookup_tables(config.llr_clamp, config.lookup_resolution)
        _table_cache[key] = tables
    return tables


def decode(
    matrix: ParityCheckMatrix,
    channel_llrs,
    syndrome_bits,
    config: DecoderConfig | None = None,
    tables: LookupTables | None = None,
) -> DecodeResult:
    """Run sum-product decoding toward the given syndrome."""
    if config is None:
        config = DecoderConfig()
    if isinstance(channel_llrs, LlrFrame):
        llr = channel_llrs.llrs
    else:
        llr = np.ascontiguousarray(channel_llrs, dtype=np.float64)
        if llr.ndim != 1 or not np.all(np.isfinite(llr)):
            raise InvalidSpecError("channel LLRs must be a finite 1-d array")
    if llr.shape[0] != matrix.n_vars:
        raise InvalidSpecError(
            f"LLR length {llr.shape[0]} does not match n_vars={matrix.n_vars}"
        )
    synd = np.ascontiguousarray(syndrome_bits, dtype=np.uint8)
    if synd.ndim != 1 or synd.shape[0] != matrix.n_checks:
        raise InvalidSpecError(
            f"syndrome length {synd.shape} does not match n_checks={matrix.n_checks}"
        )
    if synd.size and synd.max() > 1:
        raise InvalidSpecError("syndrome entries must be 0 or 1")

    use_lut = config.evaluation == "lookup"
    if use_lut:
        if tables is None:
            tables = _tables_for(config)
        tanh_tab = tables.tanh_table
        atanh_tab = tables.atanh_table
        tanh_scale = tables.tanh_index_scale
        atanh_scale = tables.atanh_index_scale
    else:
        tanh_tab = atanh_tab = _EMPTY_TABLE
        tanh_scale = atanh_scale = 0.0

    bits = np.zeros(matrix.n_vars, dtype=np.uint8)
    totals = np.zeros(matrix.n_vars, dtype=np.float64)
    if config.schedule == "flooding":
        var_ptr, var_eids = _edge_layout(matrix)
        converged, iters = _decode_flooding(
            matrix.chk_ptr,
            matrix.chk_vars,
            var_ptr,
            var_eids,
            llr,
            synd,
            config.max_iterations,
            config.llr_clamp,
            use_lut,
            tanh_tab,
            tanh_scale,
            atanh_tab,
            atanh_scale,
            bits,
            totals,
        )
    else:
        converged, iters = _decode_layered(
            matrix.chk_ptr,
            matrix.chk_vars,
            llr,
            synd,
            config.max_iterations,
            config.llr_clamp,
            use_lut,
            tanh_tab,
            tanh_scale,
            atanh_tab,
            atanh_scale,
            bits,
            totals,
        )
    converged = bool(converged)
    return DecodeResult(
        bits=bits,
        converged=converged,
        iterations_used=int(iters),
        syndrome_matched=converged,
        posteriors=totals,
    )
