"""Dinkelbach iteration for maximizing ``W_S^rho`` with SDHN subproblem solves.

Scalar convention (operator scale, the prefactor ``n`` dropped):

    b(x) = -x^T M x,   a(x) = e^T x,   lambda(x) = b(x) / a(x) = -W_S^rho / n

so the subproblem ``min b(x) - lambda a(x)`` is the Hopfield energy with
threshold ``T = -lambda / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import FIXED_POINT, SdhnConfig, is_stable, sdhn_run, sequential_sweeps
from .graph import Graph
from .objective import CommunityState, HopfieldOperator, ObjectiveError, eval_W_rho

CONVERGED = "converged"
STALLED = "stalled"
TRIVIAL = "trivial"
MAX_OUTER = "max_outer"


@dataclass(frozen=True)
class QfpConfig:
    lambda_tolerance: float = 1e-9
    max_outer_iterations: int = 50
    sdhn: SdhnConfig = field(default_factory=SdhnConfig)

    def __post_init__(self):
        if not self.lambda_tolerance > 0:
            raise ValueError("lambda_tolerance must be > 0")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")


@dataclass(frozen=True)
class QfpResult:
    state: CommunityState | None
    lambda_star: float
    objective: float
    outer_iterations: int
    trajectory: tuple[float, ...]
    status: str
    stable: bool

    @property
    def failed(self) -> bool:
        return self.state is None


def _ab(op: HopfieldOperator, x: np.ndarray) -> tuple[float, float]:
    xf = x.astype(np.float64)
    return -float(xf @ op.apply(xf)), float(xf.sum())


def lambda_of(g: Graph, rho: float, x) -> float:
    """``b(x)/a(x) = -x^T M x / e^T x``; equals ``-W_S^rho / n``."""
    s = x if isinstance(x, CommunityState) else CommunityState(np.asarray(x))
    if s.size == 0:
        raise ObjectiveError("lambda undefined for the empty state")
    b, a = _ab(HopfieldOperator(g, "W_rho", rho), s.indicator)
    return b / a


def qfp_solve(g: Graph, rho: float, x0, cfg: QfpConfig = QfpConfig()) -> QfpResult:
    """Run the Dinkelbach loop from ``x0``.

    Each outer step solves the parametric subproblem at the current lambda by
    SDHN, warm-started from the current state.  When the synchronous run does
    not end at an improving fixed point, sequential updates from the current
    state are tried instead: at its own lambda the current state has zero
    energy, so any unstable state descends to a strictly better one.  A new
    state is accepted only if it lowers lambda.

    The loop ends when the subproblem value ``b - lambda a`` is zero within
    tolerance (converged), when SDHN falls into the empty state (trivial), or
    when no decrease is found (stalled).
    """
    s0 = x0 if isinstance(x0, CommunityState) else CommunityState(np.asarray(x0))
    if s0.n != g.n:
        raise ObjectiveError(f"state length {s0.n} does not match n={g.n}")
    if s0.size == 0:
        raise ObjectiveError("trivial initial state")
    base = HopfieldOperator(g, "W_rho", rho)
    x = s0.indicator
    b, a = _ab(base, x)
    lam = b / a
    trajectory = [lam]
    best = None  # (state, lam) of the last accepted fixed point
    status = MAX_OUTER
    outer = 0
    tol = cfg.lambda_tolerance
    while outer < cfg.max_outer_iterations:
        outer += 1
        op = base.with_lambda(lam)
        out = sdhn_run(op, x, cfg.sdhn)
        y, fixed = out.state.indicator, out.status == FIXED_POINT
        b_y, a_y = _ab(base, y)
        delta = b_y - lam * a_y
        if not fixed or delta > -tol * max(1.0, abs(b_y)):
            z, _, ok = sequential_sweeps(op, x, cfg.sdhn.max_iterations, cfg.sdhn.sign_tolerance)
            b_z, a_z = _ab(base, z)
            delta_z = b_z - lam * a_z
            if (ok and not fixed) or (ok == fixed and delta_z < delta):
                y, fixed, b_y, a_y, delta = z, ok, b_z, a_z, delta_z
        if not y.any():
            status = TRIVIAL
            break
        if abs(delta) <= tol * max(1.0, abs(b_y)):
            if fixed:
                best = (y, lam)
                status = CONVERGED
            else:
                status = STALLED
            break
        if delta > 0:
            status = STALLED
            break
        lam = b_y / a_y
        trajectory.append(lam)
        x = y
        if fixed:
            best = (y, lam)
    if best is None:
        return QfpResult(None, float("nan"), float("nan"), outer, tuple(trajectory), status, False)
    state = CommunityState(best[0])
    lam_star = best[1]
    stable = is_stable(base.with_lambda(lam_star), state, cfg.sdhn.sign_tolerance)
    return QfpResult(
        state=state,
        lambda_star=lam_star,
        objective=eval_W_rho(g, state, rho),
        outer_iterations=outer,
        trajectory=tuple(trajectory),
        status=status,
        stable=stable,
    )
