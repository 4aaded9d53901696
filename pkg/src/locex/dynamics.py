"""Synchronous discrete Hopfield dynamics ``x <- sgn(M x - T)``."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .objective import CommunityState, HopfieldOperator, ObjectiveError

FIXED_POINT = "fixed_point"
TWO_CYCLE = "two_cycle"
MAX_ITER = "max_iter"

CYCLE_MODES = ("report", "async_break")


@dataclass(frozen=True)
class SdhnConfig:
    max_iterations: int = 100
    sign_tolerance: float = 1e-12
    cycle_handling: str = "async_break"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.sign_tolerance < 0:
            raise ValueError("sign_tolerance must be >= 0")
        if self.cycle_handling not in CYCLE_MODES:
            raise ValueError(f"cycle_handling must be one of {CYCLE_MODES}")


@dataclass(frozen=True)
class SdhnOutcome:
    status: str
    state: CommunityState
    iterations: int
    energy: float


def sgn_threshold(v, T, tol: float = 1e-12) -> np.ndarray:
    """Unit step with ``sgn(0) = 1``; values within ``tol`` below zero count as zero."""
    v = np.asarray(v, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if v.shape != T.shape:
        raise ValueError(f"shape mismatch {v.shape} vs {T.shape}")
    return (v - T >= -tol).astype(np.uint8)


def _update(op: HopfieldOperator, x: np.ndarray, tol: float) -> np.ndarray:
    return sgn_threshold(op.coupling(x), op.thresholds(), tol)


def is_stable(op: HopfieldOperator, x, tol: float = 1e-12) -> bool:
    x = _indicator(op, x)
    return bool(np.array_equal(_update(op, x, tol), x))


def energy(op: HopfieldOperator, x) -> float:
    """``E(x) = -x^T M x / 2 + T^T x``."""
    x = _indicator(op, x).astype(np.float64)
    return float(-0.5 * (x @ op.apply(x)) + op.threshold * x.sum())


def _indicator(op: HopfieldOperator, x) -> np.ndarray:
    ind = x.indicator if isinstance(x, CommunityState) else (np.asarray(x) != 0).astype(np.uint8)
    if ind.shape != (op.n,):
        raise ObjectiveError(f"state length {ind.size} does not match n={op.n}")
    return ind


@numba.njit(cache=True)
def _sweep_kernel(indptr, indices, data, deg, diag, kind_q, scale, inv, threshold, self_coupling,
                  x, ax, size, vol, max_sweeps, tol):
    n = x.size
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        flipped = False
        for i in range(n):
            # same arithmetic as HopfieldOperator.local_input
            if kind_q:
                mx = ax[i] - deg[i] * vol * inv
            else:
                mx = scale * ax[i] - (deg[i] * size + vol) * inv
            if self_coupling:
                h = mx - threshold
            else:
                h = mx - diag[i] * x[i] - threshold + 0.5 * diag[i]
            new = 1 if h >= -tol else 0
            if new == x[i]:
                continue
            delta = 1.0 if new == 1 else -1.0
            x[i] = new
            for p in range(indptr[i], indptr[i + 1]):
                ax[indices[p]] += delta * data[p]
            size += delta
            vol += delta * deg[i]
            flipped = True
        if not flipped:
            return sweeps, True
    return sweeps, False


def sequential_sweeps(op: HopfieldOperator, x0, max_sweeps: int, tol: float = 1e-12,
                      on_flip=None) -> tuple[np.ndarray, int, bool]:
    """Asynchronous updates in index order until a sweep changes nothing.

    Returns ``(state, sweeps_used, converged)``.  ``on_flip(i, x)`` is called
    after each accepted flip, mainly for tests tracking the energy; it forces
    the interpreted path; otherwise a compiled kernel does the same updates.
    """
    g = op.graph
    a = g.adjacency
    indptr, indices, data = a.indptr, a.indices, a.data
    deg = g.degree
    x = _indicator(op, x0).copy()
    xf = x.astype(np.float64)
    ax = a @ xf
    size = float(xf.sum())
    vol = float(deg @ xf)
    if on_flip is None:
        sweeps, ok = _sweep_kernel(
            indptr.astype(np.int64), indices.astype(np.int64), data, deg, op.diagonal(),
            op.kind == "Q", op._scale, op._inv, op.threshold, op.self_coupling,
            x, ax, size, vol, int(max_sweeps), float(tol))
        return x, int(sweeps), bool(ok)
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        flipped = False
        for i in range(op.n):
            new = 1 if op.local_input(i, x[i], ax[i], size, vol) >= -tol else 0
            if new == x[i]:
                continue
            delta = 1.0 if new else -1.0
            x[i] = new
            lo, hi = indptr[i], indptr[i + 1]
            ax[indices[lo:hi]] += delta * data[lo:hi]
            size += delta
            vol += delta * deg[i]
            flipped = True
            on_flip(i, x)
        if not flipped:
            return x, sweeps, True
    return x, sweeps, False


def sdhn_run(op: HopfieldOperator, x0, cfg: SdhnConfig = SdhnConfig()) -> SdhnOutcome:
    """Iterate the synchronous update to a fixed point or a two-cycle.

    Under ``cycle_handling="async_break"`` a detected two-cycle is resolved by
    sequential updates from its lower-energy member, using the remaining
    iteration budget as the sweep limit.
    """
    tol = cfg.sign_tolerance
    x = _indicator(op, x0).copy()
    prev = None
    it = 0
    while it < cfg.max_iterations:
        it += 1
        nxt = _update(op, x, tol)
        if np.array_equal(nxt, x):
            return SdhnOutcome(FIXED_POINT, CommunityState(x), it, energy(op, x))
        if prev is not None and np.array_equal(nxt, prev):
            # x <-> nxt is a period-two orbit
            e_x, e_n = energy(op, x), energy(op, nxt)
            low = x if e_x <= e_n else nxt
            if cfg.cycle_handling == "report":
                return SdhnOutcome(TWO_CYCLE, CommunityState(low), it, min(e_x, e_n))
            budget = cfg.max_iterations - it
            if budget < 1:
                break
            y, used, ok = sequential_sweeps(op, low, budget, tol)
            status = FIXED_POINT if ok else MAX_ITER
            return SdhnOutcome(status, CommunityState(y), it + used, energy(op, y))
        prev, x = x, nxt
    return SdhnOutcome(MAX_ITER, CommunityState(x), it, energy(op, x))
