"""Exhaustive ground truth for small graphs.

``brute_force_best`` walks all ``2^n`` subsets in Gray-code order, updating
``O_S``, the volume and ``|S|`` by one node per step.  ``enumerate_stable_states``
tests every state against the Hopfield update in vectorized blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .graph import Graph
from .objective import CommunityState, HopfieldOperator, ObjectiveSpec, evaluate

BEST_CAP = 24
STABLE_CAP = 20
MAX_TIES = 4096


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_subset: tuple[int, ...]
    best_value: float
    evaluated_count: int
    ties: tuple[tuple[int, ...], ...]
    ties_truncated: bool = False


@numba.njit(cache=True)
def _gray_sweep(n, indptr, indices, data, deg, kind_q, rho, two_m, rel_tol, max_ties, record, out):
    field = np.zeros(n)  # (A x)_v for the current subset
    inside = np.zeros(n, dtype=np.bool_)
    o_s = 0.0
    vol = 0.0
    size = 0
    mask = 0
    best = -np.inf
    ties = np.empty(max_ties, dtype=np.int64)
    n_ties = 0
    truncated = False
    total = 1 << n
    for step in range(total):
        if step > 0:
            # bit that flips between gray(step-1) and gray(step)
            v = 0
            t = step
            while (t & 1) == 0:
                t >>= 1
                v += 1
            lo = indptr[v]
            hi = indptr[v + 1]
            a_vv = 0.0
            for p in range(lo, hi):
                if indices[p] == v:
                    a_vv = data[p]
            if inside[v]:
                o_s -= 2.0 * field[v] - a_vv
                vol -= deg[v]
                size -= 1
                inside[v] = False
                sign = -1.0
            else:
                o_s += 2.0 * field[v] + a_vv
                vol += deg[v]
                size += 1
                inside[v] = True
                sign = 1.0
            for p in range(lo, hi):
                field[indices[p]] += sign * data[p]
            mask ^= 1 << v
        if kind_q:
            val = o_s / two_m - (vol / two_m) ** 2
        else:
            if size == 0:
                continue
            val = rho * n * o_s / size - vol
        if record:
            out[mask] = val
        scale = max(1.0, abs(best)) if best != -np.inf else 1.0
        if val > best + rel_tol * scale:
            best = val
            ties[0] = mask
            n_ties = 1
            truncated = False
        elif val >= best - rel_tol * scale:
            if n_ties < max_ties:
                ties[n_ties] = mask
                n_ties += 1
            else:
                truncated = True
    return best, ties[:n_ties], truncated


def _mask_nodes(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if (mask >> i) & 1)


def brute_force_best(g: Graph, spec: ObjectiveSpec, tie_tolerance: float = 1e-12) -> OracleResult:
    """Exact maximum of the objective over all subsets (``W`` excludes the empty set)."""
    n = g.n
    if n > BEST_CAP:
        raise OracleLimitError(f"oracle limit exceeded: n={n} > {BEST_CAP}")
    a = g.adjacency
    two_m = g.total_weight if g.total_weight > 0 else 1.0
    _, masks, truncated = _gray_sweep(
        n, a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data.astype(np.float64),
        g.degree.astype(np.float64), spec.kind == "Q", float(spec.rho), float(two_m),
        tie_tolerance, MAX_TIES, False, np.empty(1))
    # re-score candidates from scratch; keep only exact maxima
    subsets = [_mask_nodes(int(m), n) for m in masks]
    scored = [(evaluate(g, CommunityState.from_nodes(n, s), spec), s) for s in subsets]
    best_value = max(v for v, _ in scored)
    ties = sorted((s for v, s in scored if v == best_value), key=lambda s: (len(s), s))
    evaluated = (1 << n) - (0 if spec.kind == "Q" else 1)
    return OracleResult(ties[0], float(best_value), evaluated, tuple(ties), bool(truncated))


def gray_values(g: Graph, spec: ObjectiveSpec) -> np.ndarray:
    """Objective of every subset as computed incrementally by the Gray walk.

    Indexed by bitmask; the empty W set is ``nan``.
    """
    n = g.n
    if n > BEST_CAP:
        raise OracleLimitError(f"oracle limit exceeded: n={n} > {BEST_CAP}")
    a = g.adjacency
    out = np.full(1 << n, np.nan)
    _gray_sweep(n, a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data.astype(np.float64),
                g.degree.astype(np.float64), spec.kind == "Q", float(spec.rho), float(g.total_weight),
                1e-12, MAX_TIES, True, out)
    return out


def all_values(g: Graph, spec: ObjectiveSpec) -> np.ndarray:
    """Objective of every subset indexed by bitmask (``nan`` for the empty W set).

    Built by a from-scratch vectorized route independent of the Gray walk.
    """
    n = g.n
    if n > BEST_CAP:
        raise OracleLimitError(f"oracle limit exceeded: n={n} > {BEST_CAP}")
    masks = np.arange(1 << n, dtype=np.int64)
    X = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    dense = g.adjacency.toarray()
    o_s = np.einsum("ki,ij,kj->k", X, dense, X)
    vol = X @ g.degree
    size = X.sum(axis=1)
    if spec.kind == "Q":
        return o_s / g.total_weight - (vol / g.total_weight) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = spec.rho * n * o_s / size - vol
    out[0] = np.nan
    return out


def enumerate_stable_states(op: HopfieldOperator, tol: float = 1e-12, block: int = 1 << 14) -> list[CommunityState]:
    """Every fixed point of ``x = sgn(M x - T)``, in bitmask order."""
    n = op.n
    if n > STABLE_CAP:
        raise OracleLimitError(f"oracle limit exceeded: n={n} > {STABLE_CAP}")
    bits = np.arange(n)
    found = []
    for start in range(0, 1 << n, block):
        masks = np.arange(start, min(start + block, 1 << n), dtype=np.int64)
        X = ((masks[None, :] >> bits[:, None]) & 1).astype(np.float64)  # (n, k)
        upd = op.net_input(X) >= -tol
        ok = np.all(upd == (X > 0.5), axis=0)
        for col in np.flatnonzero(ok):
            found.append(CommunityState(X[:, col]))
    return found
