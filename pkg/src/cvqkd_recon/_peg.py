"""Progressive edge-growth construction of bipartite check graphs.

Given per-variable degrees and a check count, edges are placed one variable
at a time (variables in index order, which the caller arranges to be
ascending degree).  For each edge a breadth-first search from the variable
classifies checks by distance; the new edge goes to a check outside the
expanded neighborhood if one exists, otherwise to one of the checks in the
farthest layer.  Ties are always broken toward the lowest check degree and
then the lowest check index, so the construction is a pure function of its
arguments.

The search expands at most ``max_depth`` check layers.  Any check not
reached within that horizon lies at distance > 2*max_depth - 1, so a new
edge to it closes no cycle shorter than 2*(max_depth + 1); treating all
such checks as candidates keeps the girth guarantee while skipping the
saturating tail of the search, which is what makes construction time
near-linear in the edge count.

The kernels below are written against flat int32 arrays so that numba can
compile them; without numba they run as plain Python (slow but identical
output, since everything is integer arithmetic).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


@njit(cache=True, nogil=True)
def _recount_min(cn_deg, floor):
    """Smallest degree value >= floor present and how many checks carry it."""
    m = cn_deg.shape[0]
    best = -1
    count = 0
    for j in range(m):
        d = cn_deg[j]
        if d < floor:
            continue
        if best == -1 or d < best:
            best = d
            count = 1
        elif d == best:
            count += 1
    return best, count


@njit(cache=True, nogil=True)
def peg_edges(var_deg, n_checks, max_depth=5):
    """Place all edges; returns (edge_var, edge_chk, ok) in placement order.

    ``ok`` is False only if a check outgrew the preallocated row capacity,
    which the degree-balancing tie-break makes effectively unreachable for
    sane inputs.
    """
    n_vars = var_deg.shape[0]
    n_edges = 0
    for i in range(n_vars):
        n_edges += var_deg[i]

    vn_ptr = np.zeros(n_vars + 1, dtype=np.int64)
    for i in range(n_vars):
        vn_ptr[i + 1] = vn_ptr[i] + var_deg[i]
    vn_adj = np.empty(n_edges, dtype=np.int32)
    vn_fill = np.zeros(n_vars, dtype=np.int32)

    # check adjacency in fixed-width contiguous rows (min-degree tie-break
    # keeps degrees within +1 of the ceiling average; cap adds headroom)
    cap = (n_edges + n_checks - 1) // n_checks + 8
    cn_deg = np.zeros(n_checks, dtype=np.int32)
    cn_adj = np.empty(n_checks * cap, dtype=np.int32)

    edge_var = np.empty(n_edges, dtype=np.int32)
    edge_chk = np.empty(n_edges, dtype=np.int32)

    # visited stamps (epoch per BFS, no clearing)
    vis_v = np.zeros(n_vars, dtype=np.int32)
    vis_c = np.zeros(n_checks, dtype=np.int32)
    epoch = 0

    frontier_v = np.empty(n_vars, dtype=np.int32)
    next_v = np.empty(n_vars, dtype=np.int32)
    new_c = np.empty(n_checks, dtype=np.int32)

    # rolling (min check degree, member count, ascending scan pointer);
    # degrees only grow, so within a degree level the pointer is monotone
    cur_min = 0
    count_at_min = n_checks
    scan_ptr = 0

    n_placed = 0
    for v in range(n_vars):
        for _k in range(var_deg[v]):
            target = -1
            if vn_fill[v] == 0:
                # first edge: every check is a candidate; take the
                # lowest-index check of globally minimal degree
                while cn_deg[scan_ptr] != cur_min:
                    scan_ptr += 1
                target = scan_ptr
            else:
                # BFS from v, stamping this epoch
                epoch += 1
                vis_v[v] = epoch
                fv_len = 1
                frontier_v[0] = v
                covered = 0
                case_b = False
                nc_len = 0
                layer = 0
                while True:
                    # variable frontier -> newly reached checks
                    nc_len = 0
                    for fi in range(fv_len):
                        u = frontier_v[fi]
                        base = vn_ptr[u]
                        for t in range(vn_fill[u]):
                            c = vn_adj[base + t]
                            fresh = vis_c[c] != epoch
                            vis_c[c] = epoch
                            new_c[nc_len] = c
                            nc_len += fresh
                    covered += nc_len
                    if nc_len == 0:
                        break  # neighborhood exhausted with checks uncovered
                    if covered == n_checks:
                        case_b = True  # the last layer is the far set
                        break
                    layer += 1
                    if layer == max_depth:
                        break  # everything beyond the horizon is far enough
                    # newly reached checks -> next variable frontier
                    nfv = 0
                    for ci in range(nc_len):
                        c = new_c[ci]
                        base = c * cap
                        for t in range(cn_deg[c]):
                            u = cn_adj[base + t]
                            fresh = vis_v[u] != epoch
                            vis_v[u] = epoch
                            next_v[nfv] = u
                            nfv += fresh
                    if nfv == 0:
                        break  # no new variables; next check layer is empty
                    tmp = frontier_v
                    frontier_v = next_v
                    next_v = tmp
                    fv_len = nfv

                best_deg = -1
                if case_b:
                    # candidates: checks first reached in the final layer
                    for ci in range(nc_len):
                        c = new_c[ci]
                        d = cn_deg[c]
                        if best_deg == -1 or d < best_deg or (d == best_deg and c < target):
                            best_deg = d
                            target = c
                else:
                    # candidates: checks not reached at all; usually one of
                    # them sits at the global minimum degree, so try the
                    # cheap ascending scan first
                    ptr = scan_ptr
                    while ptr < n_checks and (cn_deg[ptr] != cur_min or vis_c[ptr] == epoch):
                        ptr += 1
                    if ptr < n_checks:
                        target = ptr
                    else:
                        for c in range(n_checks):
                            if vis_c[c] != epoch:
                                d = cn_deg[c]
                                if best_deg == -1 or d < best_deg:
                                    best_deg = d
                                    target = c

            # place edge (v, target)
            if cn_deg[target] >= cap:
                return edge_var, edge_chk, False
            vn_adj[vn_ptr[v] + vn_fill[v]] = target
            vn_fill[v] += 1
            cn_adj[target * cap + cn_deg[target]] = v
            edge_var[n_placed] = v
            edge_chk[n_placed] = target
            n_placed += 1
            if cn_deg[target] == cur_min:
                count_at_min -= 1
            cn_deg[target] += 1
            if count_at_min == 0:
                cur_min, count_at_min = _recount_min(cn_deg, cur_min + 1)
                scan_ptr = 0

    return edge_var, edge_chk, True


_MASK64 = (1 << 64) - 1
_SM_GAMMA = 0x9E3779B97F4B7C15
_SM_M1 = 0xBF58476D1CE4E5B9
_SM_M2 = 0x94D049BB133111EB


def splitmix64(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over uint64 arrays."""
    z = (x + np.uint64(_SM_GAMMA)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM_M2)
    return z ^ (z >> np.uint64(31))


def splitmix64_int(x: int) -> int:
    """Scalar splitmix64 over Python ints, identical to the array version."""
    z = (x + _SM_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _SM_M1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM_M2) & _MASK64
    return z ^ (z >> 31)


def extension_choices(seed: int, n_stages: int, pool_base: int, d_ext: int) -> np.ndarray:
    """Pseudorandom neighbor picks for the degree-1 extension stages.

    Stage ``t`` (1-based) picks ``d_ext`` distinct variable indices from
    ``[0, pool_base + t - 1)``.  Each stage is hashed independently from
    ``(seed, t)``, so the choices for stage ``t`` never depend on how many
    stages follow; that is what makes shorter codes exact prefixes of longer
    ones built from the same seed.
    """
    if n_stages == 0:
        return np.empty((0, d_ext), dtype=np.int64)
    stages = np.arange(1, n_stages + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        stage_keys = splitmix64(np.uint64(seed & _MASK64) ^ (stages * np.uint64(_SM_GAMMA)))
        pools = pool_base - 1 + np.arange(1, n_stages + 1, dtype=np.int64)
        picks = np.empty((n_stages, d_ext), dtype=np.int64)
        for r in range(d_ext):
            slot_key = np.uint64(((r + 1) * _SM_M1) & _MASK64)
            h = splitmix64(stage_keys ^ slot_key)
            picks[:, r] = (h % pools.astype(np.uint64)).astype(np.int64)
    # resolve the rare within-stage collisions by re-hashing that slot
    dup = np.zeros(n_stages, dtype=bool)
    for a in range(d_ext):
        for b in range(a + 1, d_ext):
            dup |= picks[:, a] == picks[:, b]
    for t_idx in np.nonzero(dup)[0]:
        pool = int(pools[t_idx])
        key = int(stage_keys[t_idx])
        chosen: list[int] = []
        for r in range(d_ext):
            slot_key = ((r + 1) * _SM_M1) & _MASK64
            attempt = 0
            while True:
                bump = (attempt * _SM_M2) & _MASK64
                cand = splitmix64_int(key ^ slot_key ^ bump) % pool
                if cand not in chosen:
                    chosen.append(cand)
                    break
                attempt += 1
        picks[t_idx] = chosen
    return picks
