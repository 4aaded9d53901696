"""Immutable sparse undirected weighted graphs.

Adjacency is held as a symmetric CSR matrix.  A self-loop of weight ``w`` is
stored as ``A[i, i] = 2 w`` so that ``d_i = sum_j A_ij`` and ``2m = sum_i d_i``
hold without special cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Invalid graph construction or query."""


class ParseError(GraphError):
    """Malformed edge-list input."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Sparse undirected weighted graph with cached degrees.

    Use :meth:`from_edges` or :func:`load_edge_list` rather than the raw
    constructor.
    """

    labels: tuple[str, ...]
    adjacency: sp.csr_matrix
    degree: np.ndarray
    total_weight: float
    edge_count: int
    _label_index: dict = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, n, u, v, w=None, labels=None) -> "Graph":
        """Build a graph from parallel endpoint arrays.

        Duplicate pairs are summed; ``u == v`` is a self-loop.
        """
        n = int(n)
        if n < 1:
            raise GraphError("graph needs at least one node")
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if w is None:
            w = np.ones(len(u), dtype=np.float64)
        else:
            w = np.asarray(w, dtype=np.float64)
        if not (len(u) == len(v) == len(w)):
            raise GraphError("endpoint and weight arrays differ in length")
        if len(u) and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n):
            raise GraphError("edge endpoint out of range")
        if np.any(w <= 0):
            raise GraphError("edge weights must be positive")
        if labels is None:
            labels = tuple(str(i) for i in range(n))
        else:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise GraphError("label count does not match node count")

        loop = u == v
        rows = np.concatenate([u, v[~loop]])
        cols = np.concatenate([v, u[~loop]])
        vals = np.concatenate([np.where(loop, 2.0 * w, w), w[~loop]])
        adj = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        adj.sum_duplicates()
        adj.sort_indices()
        return cls._from_csr(adj, labels)

    @classmethod
    def _from_csr(cls, adj: sp.csr_matrix, labels: tuple[str, ...]) -> "Graph":
        n = adj.shape[0]
        # degree via the same kernel as adjacency_multiply, so A e == d exactly
        degree = adj @ np.ones(n)
        diag_nnz = int(np.count_nonzero(adj.diagonal()))
        edge_count = (adj.nnz - diag_nnz) // 2 + diag_nnz
        return cls(
            labels=labels,
            adjacency=adj,
            degree=degree,
            total_weight=float(degree.sum()),
            edge_count=edge_count,
            _label_index={lab: i for i, lab in enumerate(labels)},
        )

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def weighted(self) -> bool:
        off = self.adjacency.copy()
        off.setdiag(0)
        off.eliminate_zeros()
        return bool(np.any(off.data != 1.0)) or bool(
            np.any(self.adjacency.diagonal()[self.adjacency.diagonal() != 0] != 2.0)
        )

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[str(label)]
        except KeyError:
            raise GraphError(f"unknown node label {label!r}") from None

    def indices_of(self, labels: Iterable) -> np.ndarray:
        return np.array(sorted(self.index_of(x) for x in labels), dtype=np.int64)

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def weight(self, i: int, j: int) -> float:
        """Stored symmetric weight; a self-loop reports its edge weight ``w``."""
        val = float(self.adjacency[i, j])
        return val / 2.0 if i == j else val

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(u, v, w)`` with ``u <= v``, each undirected edge once."""
        upper = sp.triu(self.adjacency, format="coo")
        w = upper.data.copy()
        w[upper.row == upper.col] /= 2.0
        order = np.lexsort((upper.col, upper.row))
        return upper.row[order].astype(np.int64), upper.col[order].astype(np.int64), w[order]


def load_edge_list(text: str | TextIO) -> Graph:
    """Parse ``u v`` / ``u v w`` lines into a :class:`Graph`.

    Node indices follow first appearance.  Lines starting with ``#`` and blank
    lines are skipped.
    """
    if not isinstance(text, str):
        text = text.read()
    index: dict[str, int] = {}
    us, vs, ws = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(lineno, f"expected 2 or 3 fields, got {len(parts)}")
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise ParseError(lineno, f"non-numeric weight {parts[2]!r}") from None
            if not np.isfinite(w) or w <= 0:
                raise ParseError(lineno, f"weight must be positive, got {parts[2]!r}")
        else:
            w = 1.0
        ends = []
        for lab in parts[:2]:
            if lab not in index:
                index[lab] = len(index)
            ends.append(index[lab])
        us.append(ends[0])
        vs.append(ends[1])
        ws.append(w)
    if not us:
        raise GraphError("no edges")
    return Graph.from_edges(len(index), us, vs, ws, labels=list(index))


def write_edge_list(g: Graph, stream: TextIO, header: str | None = None) -> None:
    if header:
        for line in header.splitlines():
            stream.write(f"# {line}\n")
    u, v, w = g.edges()
    unweighted = not g.weighted
    for a, b, x in zip(u, v, w):
        if unweighted:
            stream.write(f"{g.labels[a]}\t{g.labels[b]}\n")
        else:
            stream.write(f"{g.labels[a]}\t{g.labels[b]}\t{float(x)!r}\n")


def induced_subgraph(g: Graph, keep: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Restrict ``g`` to the node indices in ``keep``.

    Returns the subgraph (degrees recomputed on it) and the old-to-new index
    map.  Labels carry over unchanged.
    """
    keep_idx = np.unique(np.fromiter((int(k) for k in keep), dtype=np.int64))
    if keep_idx.size == 0:
        raise GraphError("empty subgraph")
    if keep_idx[0] < 0 or keep_idx[-1] >= g.n:
        raise GraphError("subgraph node out of range")
    sub = g.adjacency[keep_idx][:, keep_idx].tocsr()
    sub.sort_indices()
    labels = tuple(g.labels[i] for i in keep_idx)
    mapping = {int(old): new for new, old in enumerate(keep_idx)}
    return Graph._from_csr(sub, labels), mapping


def adjacency_multiply(g: Graph, x: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return ``A @ x`` in O(m + n).  ``x`` may be a vector or an (n, k) block."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.n:
        raise GraphError(f"vector length {x.shape[0]} does not match n={g.n}")
    return g.adjacency @ x
