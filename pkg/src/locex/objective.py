"""Local community objectives and their implicit Hopfield operators.

Three set functions are supported on a node subset ``S``:

* ``Q``    local modularity, ``O_S/O_V - ((O_S + B_S)/O_V)**2``
* ``W``    the extraction criterion ``|S^c| O_S/|S| - B_S``
* ``W_rho`` its resolution-tunable form with ``|S^c|`` replaced by ``rho n - |S|``

``O_S`` is twice the internal edge weight and ``B_S`` the boundary weight.
All ``W`` variants are evaluated in the expanded form
``rho n O_S/|S| - O_S - B_S``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Graph, GraphError

KINDS = ("Q", "W", "W_rho")


class ObjectiveError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CommunityState:
    """Binary indicator over the nodes of one graph."""

    indicator: np.ndarray

    def __post_init__(self):
        ind = np.asarray(self.indicator)
        if ind.ndim != 1:
            raise ObjectiveError("indicator must be one-dimensional")
        if ind.dtype != np.bool_ and np.any((ind != 0) & (ind != 1)):
            raise ObjectiveError("indicator entries must be 0 or 1")
        ind = (ind != 0).astype(np.uint8)
        ind.setflags(write=False)
        object.__setattr__(self, "indicator", ind)

    @classmethod
    def from_nodes(cls, n: int, nodes: Iterable[int]) -> "CommunityState":
        x = np.zeros(n, dtype=np.uint8)
        idx = np.fromiter((int(i) for i in nodes), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ObjectiveError("node index out of range")
        x[idx] = 1
        return cls(x)

    @classmethod
    def empty(cls, n: int) -> "CommunityState":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def full(cls, n: int) -> "CommunityState":
        return cls(np.ones(n, dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.indicator.size

    @property
    def size(self) -> int:
        return int(self.indicator.sum())

    @property
    def nodes(self) -> np.ndarray:
        return np.flatnonzero(self.indicator)

    def as_float(self) -> np.ndarray:
        return self.indicator.astype(np.float64)

    def key(self) -> bytes:
        return np.packbits(self.indicator).tobytes()

    def __eq__(self, other):
        if not isinstance(other, CommunityState):
            return NotImplemented
        return np.array_equal(self.indicator, other.indicator)

    def __hash__(self):
        return hash((self.n, self.key()))

    def __repr__(self):
        return f"CommunityState(n={self.n}, nodes={self.nodes.tolist()})"


@dataclass(frozen=True)
class ObjectiveSpec:
    """Objective kind and resolution.

    ``reference_n`` fixes the network size in ``|S^rho| = rho n - |S|`` when
    the objective is evaluated on a subgraph (sequential extraction); by
    default the evaluated graph's own size is used.
    """

    kind: str = "W"
    rho: float = 1.0
    reference_n: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ObjectiveError(f"unknown objective kind {self.kind!r}")
        if not (0.0 < self.rho <= 1.0):
            raise ObjectiveError(f"rho must lie in (0, 1], got {self.rho}")
        if self.kind == "W" and self.rho != 1.0:
            raise ObjectiveError("kind 'W' is W_rho at rho=1; use 'W_rho' for other rho")
        if self.reference_n is not None and self.reference_n < 1:
            raise ObjectiveError("reference_n must be positive")

    def with_reference(self, n: int | None) -> "ObjectiveSpec":
        return ObjectiveSpec(self.kind, self.rho, n)

    def effective_rho(self, n: int) -> float:
        """Coefficient of ``A`` on a graph of ``n`` nodes (may exceed 1 on subgraphs)."""
        if self.reference_n is None:
            return self.rho
        return self.rho * self.reference_n / n

    @classmethod
    def Q(cls) -> "ObjectiveSpec":
        return cls("Q", 1.0)

    @classmethod
    def W(cls, rho: float = 1.0) -> "ObjectiveSpec":
        return cls("W", 1.0) if rho == 1.0 else cls("W_rho", float(rho))

    @property
    def fractional(self) -> bool:
        return self.kind != "Q"


def _as_state(g: Graph, s) -> CommunityState:
    if not isinstance(s, CommunityState):
        s = CommunityState(np.asarray(s))
    if s.n != g.n:
        raise ObjectiveError(f"state length {s.n} does not match n={g.n}")
    return s


def set_statistics(g: Graph, s) -> tuple[float, float, int]:
    """Return ``(O_S, B_S, |S|)`` touching only the rows of ``S``."""
    s = _as_state(g, s)
    idx = s.nodes
    if idx.size == 0:
        return 0.0, 0.0, 0
    rows = g.adjacency[idx]
    o_s = float((rows @ s.as_float()).sum())
    vol = float(g.degree[idx].sum())
    return o_s, vol - o_s, int(idx.size)


def eval_Q(g: Graph, s) -> float:
    o_s, b_s, _ = set_statistics(g, s)
    o_v = g.total_weight
    return o_s / o_v - ((o_s + b_s) / o_v) ** 2


def eval_W_rho(g: Graph, s, rho: float = 1.0) -> float:
    o_s, b_s, size = set_statistics(g, s)
    if size == 0:
        raise ObjectiveError("W is undefined on empty set")
    return rho * g.n * o_s / size - o_s - b_s


def evaluate(g: Graph, s, spec: ObjectiveSpec) -> float:
    if spec.kind == "Q":
        return eval_Q(g, s)
    return eval_W_rho(g, s, spec.effective_rho(g.n))


class HopfieldOperator:
    """Implicit weight matrix ``M`` and uniform threshold ``T`` of a Hopfield net.

    ``M`` is never formed.  It is sparse ``A`` plus a rank-one (Q) or
    symmetric rank-two (W) degree correction:

    * Q:  ``M = A - d d^T / 2m``,                 ``T = 0``
    * W:  ``M = rho A - (d e^T + e d^T) / 2n``,   ``T = -lambda / 2``

    The update rule sees the self-coupling-free net ``M' = M - diag(M)`` with
    per-node thresholds ``T'_i = T - M_ii / 2``.  On binary states
    ``x_i^2 = x_i``, so both nets have the same energy everywhere, but only
    the second has the fixed points equal to the single-flip local minima.
    ``self_coupling=True`` keeps the diagonal in the update instead.
    """

    def __init__(self, g: Graph, kind: str = "Q", rho: float = 1.0, threshold: float = 0.0,
                 self_coupling: bool = False):
        if kind not in KINDS:
            raise ObjectiveError(f"unknown operator kind {kind!r}")
        if kind != "Q" and not rho > 0:
            raise ObjectiveError(f"operator rho must be positive, got {rho}")
        if kind == "Q" and g.total_weight <= 0:
            raise ObjectiveError("Q operator needs at least one edge")
        self.graph = g
        self.kind = kind
        self.rho = 1.0 if kind == "Q" else float(rho)
        self.threshold = float(threshold)
        self.self_coupling = bool(self_coupling)
        self._deg = g.degree
        if kind == "Q":
            self._scale = 1.0
            self._inv = 1.0 / g.total_weight
        else:
            self._scale = self.rho
            self._inv = 1.0 / (2.0 * g.n)

        self._diag = self._compute_diagonal()

    @classmethod
    def for_spec(cls, g: Graph, spec: ObjectiveSpec, lam: float = 0.0,
                 self_coupling: bool = False) -> "HopfieldOperator":
        if spec.kind == "Q":
            return cls(g, "Q", self_coupling=self_coupling)
        return cls(g, spec.kind, spec.effective_rho(g.n), threshold=-lam / 2.0,
                   self_coupling=self_coupling)

    def with_lambda(self, lam: float) -> "HopfieldOperator":
        return HopfieldOperator(self.graph, self.kind, self.rho, threshold=-lam / 2.0,
                                self_coupling=self.self_coupling)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def lam(self) -> float:
        return -2.0 * self.threshold

    def thresholds(self) -> np.ndarray:
        """Per-node thresholds of the net the update rule runs on."""
        if self.self_coupling:
            return np.full(self.n, self.threshold)
        return self.threshold - 0.5 * self._diag

    def coupling(self, x) -> np.ndarray:
        """Input ``M' x`` to the update rule (``M x`` with self-coupling)."""
        mx = self.apply(x)
        if self.self_coupling:
            return mx
        x = np.asarray(x, dtype=np.float64)
        return mx - (self._diag[:, None] * x if x.ndim == 2 else self._diag * x)

    def net_input(self, x) -> np.ndarray:
        """``M' x - T'``; the update sets ``x_i = 1`` where this is >= 0."""
        t = self.thresholds()
        c = self.coupling(x)
        return c - (t[:, None] if c.ndim == 2 else t)

    def apply(self, x) -> np.ndarray:
        """``M @ x`` for a vector or an (n, k) block of column vectors."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n:
            raise GraphError(f"vector length {x.shape[0]} does not match n={self.n}")
        d = self._deg
        ax = self.graph.adjacency @ x
        dx = d @ x
        if self.kind == "Q":
            corr = np.multiply.outer(d, dx) if x.ndim == 2 else d * dx
            return ax - corr * self._inv
        ex = x.sum(axis=0)
        if x.ndim == 2:
            corr = np.multiply.outer(d, ex) + dx[None, :]
        else:
            corr = d * ex + dx
        return self._scale * ax - corr * self._inv

    def diagonal(self) -> np.ndarray:
        return self._diag.copy()

    def _compute_diagonal(self) -> np.ndarray:
        a_ii = self.graph.adjacency.diagonal()
        d = self._deg
        if self.kind == "Q":
            return a_ii - d * d * self._inv
        return self._scale * a_ii - 2.0 * d * self._inv

    # Incremental net input for sequential updates.  ``ax_i`` is (A x)_i,
    # ``size`` is e^T x and ``vol`` is d^T x.
    def local_input(self, i: int, x_i: int, ax_i: float, size: float, vol: float) -> float:
        if self.kind == "Q":
            mx = ax_i - self._deg[i] * vol * self._inv
        else:
            mx = self._scale * ax_i - (self._deg[i] * size + vol) * self._inv
        if self.self_coupling:
            return mx - self.threshold
        m_ii = self._diag[i]
        return mx - m_ii * x_i - self.threshold + 0.5 * m_ii

    def quadratic_form(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(x @ self.apply(x))

    def __repr__(self):
        return (f"HopfieldOperator(kind={self.kind}, rho={self.rho}, T={self.threshold!r}, "
                f"n={self.n}, self_coupling={self.self_coupling})")


def operator_apply(op: HopfieldOperator, x) -> np.ndarray:
    return op.apply(x)


def quadratic_identity_Q(g: Graph, s) -> float:
    """``x^T M_Q x / 2m``, the quadratic-form route to ``Q_S``."""
    s = _as_state(g, s)
    return HopfieldOperator(g, "Q").quadratic_form(s.as_float()) / g.total_weight


def fractional_identity_W(g: Graph, s, rho: float = 1.0) -> float:
    """``n x^T M x / e^T x``, the fractional-form route to ``W_S^rho``."""
    s = _as_state(g, s)
    a = s.size
    if a == 0:
        raise ObjectiveError("a(x)=0: fractional form undefined on empty set")
    op = HopfieldOperator(g, "W_rho", rho)
    return g.n * op.quadratic_form(s.as_float()) / a


def rho_flags(n: int, rho: float, sizes: Iterable[int], weights: Iterable[float] | None = None) -> dict:
    """Post-hoc checks of the lower bound ``2|S|/n < rho``.

    ``strict`` applies it to each size; ``expected`` applies it to the
    (optionally weighted) mean size.
    """
    sizes = np.asarray(list(sizes), dtype=np.float64)
    if sizes.size == 0:
        return {"strict": [], "expected": True, "expected_size": 0.0}
    if weights is None:
        mean = float(sizes.mean())
    else:
        w = np.asarray(list(weights), dtype=np.float64)
        mean = float((sizes * w).sum() / w.sum()) if w.sum() > 0 else float(sizes.mean())
    return {
        "strict": [bool(2.0 * s / n < rho) for s in sizes],
        "expected": bool(2.0 * mean / n < rho),
        "expected_size": mean,
    }
