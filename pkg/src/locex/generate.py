"""Seedable network constructors and null models.

Every randomized constructor is a pure function of its parameters and seed.
Node labels are the 0-based indices as strings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphError

BACKGROUND = 0


@dataclass(frozen=True)
class PlantedTruth:
    """Ground-truth block of each node (``0`` = background, ``1..k`` = community)."""

    assignment: np.ndarray
    sizes: tuple[int, ...]
    p_in: float
    p_out: float

    def members(self, block: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == block)


def _check_prob(name, p):
    if not (0.0 <= p <= 1.0):
        raise GraphError(f"{name} must lie in [0, 1], got {p}")


def _sample_distinct(rng: np.random.Generator, population: int, p: float) -> np.ndarray:
    """Indices of a Bernoulli(p) subset of ``range(population)``."""
    if population == 0 or p == 0.0:
        return np.empty(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(population, dtype=np.int64)
    k = int(rng.binomial(population, p))
    return np.sort(rng.choice(population, size=k, replace=False)).astype(np.int64)


def _unrank_pairs(t: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Map ranks in ``[0, k(k-1)/2)`` to pairs ``i < j`` in row-major order."""
    t = np.asarray(t, dtype=np.int64)
    # row i starts at rank i*k - i*(i+1)/2
    i = k - 2 - np.floor(np.sqrt(-8.0 * t + 4.0 * k * (k - 1) - 7.0) / 2.0 - 0.5).astype(np.int64)
    start = i * k - i * (i + 1) // 2
    # guard the float estimate
    over = start > t
    while np.any(over):
        i[over] -= 1
        start = i * k - i * (i + 1) // 2
        over = start > t
    nxt = (i + 1) * k - (i + 1) * (i + 2) // 2
    under = nxt <= t
    while np.any(under):
        i[under] += 1
        nxt = (i + 1) * k - (i + 1) * (i + 2) // 2
        under = nxt <= t
    start = i * k - i * (i + 1) // 2
    j = t - start + i + 1
    return i, j


def _random_block_edges(rng, block_a: np.ndarray, block_b: np.ndarray | None, p: float):
    """Bernoulli(p) edges within ``block_a`` (if ``block_b`` is None) or across."""
    if block_b is None:
        k = block_a.size
        ranks = _sample_distinct(rng, k * (k - 1) // 2, p)
        i, j = _unrank_pairs(ranks, k)
        return block_a[i], block_a[j]
    kb = block_b.size
    ranks = _sample_distinct(rng, block_a.size * kb, p)
    return block_a[ranks // kb], block_b[ranks % kb]


def _clique_edges(nodes: np.ndarray):
    i, j = np.triu_indices(nodes.size, k=1)
    return nodes[i], nodes[j]


def ring_of_cliques(m: int, n_cliques: int) -> Graph:
    """``n_cliques`` copies of ``K_m`` joined in a ring by single bridges.

    Clique ``c`` holds nodes ``c*m .. c*m + m - 1``; its last node links to the
    first node of clique ``c + 1`` (mod ``n_cliques``).
    """
    if m < 2 or n_cliques < 3:
        raise GraphError("ring_of_cliques needs m >= 2 and n_cliques >= 3")
    us, vs = [], []
    for c in range(n_cliques):
        u, v = _clique_edges(np.arange(c * m, (c + 1) * m))
        us.append(u)
        vs.append(v)
    c = np.arange(n_cliques)
    us.append(c * m + m - 1)
    vs.append(((c + 1) % n_cliques) * m)
    return Graph.from_edges(m * n_cliques, np.concatenate(us), np.concatenate(vs))


def two_cliques_background(p: int, n_bg: int, bg_prob: float, seed: int = 0) -> Graph:
    """Two bridged ``K_p`` cliques, each tied by one edge to a random background.

    Nodes ``0..p-1`` and ``p..2p-1`` are the cliques; background nodes follow.
    Bridges: ``p-1 -- p``, ``0 -- 2p`` and ``2p-1 -- 2p+n_bg-1``.
    """
    if p < 2 or n_bg < 1:
        raise GraphError("two_cliques_background needs p >= 2 and n_bg >= 1")
    _check_prob("bg_prob", bg_prob)
    rng = np.random.default_rng(seed)
    a = np.arange(p)
    b = np.arange(p, 2 * p)
    bg = np.arange(2 * p, 2 * p + n_bg)
    parts = [_clique_edges(a), _clique_edges(b),
             (np.array([p - 1, 0, 2 * p - 1]), np.array([p, bg[0], bg[-1]])),
             _random_block_edges(rng, bg, None, bg_prob)]
    u = np.concatenate([x[0] for x in parts])
    v = np.concatenate([x[1] for x in parts])
    return Graph.from_edges(2 * p + n_bg, u, v)


def planted_groups(n: int, sizes, p_in: float, p_out: float, seed: int = 0) -> tuple[Graph, PlantedTruth]:
    """Dense planted groups embedded in a sparse background.

    Groups occupy consecutive index ranges starting at node 0 and are labelled
    ``1..len(sizes)``; the remaining nodes are background.  Pairs inside one
    group link with ``p_in``; every other pair links with ``p_out``.
    """
    sizes = tuple(int(s) for s in sizes)
    if any(s < 0 for s in sizes) or sum(sizes) > n or n < 1:
        raise GraphError("group sizes must be nonnegative and sum to at most n")
    _check_prob("p_in", p_in)
    _check_prob("p_out", p_out)
    rng = np.random.default_rng(seed)
    assignment = np.zeros(n, dtype=np.int64)
    blocks = []
    start = 0
    for label, s in enumerate(sizes, start=1):
        assignment[start:start + s] = label
        blocks.append(np.arange(start, start + s))
        start += s
    blocks.append(np.arange(start, n))  # background last
    us, vs = [], []
    for bi, blk in enumerate(blocks):
        within = p_in if bi < len(sizes) else p_out
        u, v = _random_block_edges(rng, blk, None, within)
        us.append(u)
        vs.append(v)
        for blk2 in blocks[bi + 1:]:
            u, v = _random_block_edges(rng, blk, blk2, p_out)
            us.append(u)
            vs.append(v)
    g = Graph.from_edges(n, np.concatenate(us), np.concatenate(vs))
    return g, PlantedTruth(assignment, sizes, float(p_in), float(p_out))


def planted_two_communities(n: int, n1: int, n2: int, p_in: float, p_out: float,
                            seed: int = 0) -> tuple[Graph, PlantedTruth]:
    """Two planted communities of sizes ``n1`` and ``n2`` in a background."""
    return planted_groups(n, (n1, n2), p_in, p_out, seed)


def hierarchical_planted(n_blocks: int, cliques_per_block: int, clique_size: int,
                         n_background: int, p_clique: float, p_block: float, p_out: float,
                         seed: int = 0) -> tuple[Graph, PlantedTruth, np.ndarray]:
    """Dense cliques nested in sparser blocks, in a sparse background.

    Returns the graph, the fine (clique-level) truth and the coarse block label
    of every node (``0`` for background).
    """
    if min(n_blocks, cliques_per_block, clique_size) < 1 or n_background < 0:
        raise GraphError("hierarchical_planted needs positive block counts")
    for name, val in (("p_clique", p_clique), ("p_block", p_block), ("p_out", p_out)):
        _check_prob(name, val)
    rng = np.random.default_rng(seed)
    n_fine = n_blocks * cliques_per_block
    n = n_fine * clique_size + n_background
    fine = np.zeros(n, dtype=np.int64)
    coarse = np.zeros(n, dtype=np.int64)
    fine[: n_fine * clique_size] = np.repeat(np.arange(1, n_fine + 1), clique_size)
    coarse[: n_fine * clique_size] = (fine[: n_fine * clique_size] - 1) // cliques_per_block + 1
    # pair probability by relation; upper-triangular sweep by block pairs
    us, vs = [], []
    groups = [np.flatnonzero(fine == f) for f in range(1, n_fine + 1)]
    groups.append(np.flatnonzero(fine == 0))
    for gi, ga in enumerate(groups):
        is_bg = gi == n_fine
        u, v = _random_block_edges(rng, ga, None, p_out if is_bg else p_clique)
        us.append(u)
        vs.append(v)
        for gj in range(gi + 1, len(groups)):
            gb = groups[gj]
            same_block = (not is_bg and gj < n_fine
                          and gi // cliques_per_block == gj // cliques_per_block)
            u, v = _random_block_edges(rng, ga, gb, p_block if same_block else p_out)
            us.append(u)
            vs.append(v)
    g = Graph.from_edges(n, np.concatenate(us), np.concatenate(vs))
    truth = PlantedTruth(fine, tuple([clique_size] * n_fine), float(p_clique), float(p_out))
    return g, truth, coarse


def gnm_random(n: int, m_edges: int, seed: int = 0, labels=None) -> Graph:
    """Uniform simple graph with exactly ``m_edges`` edges."""
    total = n * (n - 1) // 2
    if n < 1 or m_edges < 0 or m_edges > total:
        raise GraphError(f"cannot place {m_edges} edges on {n} nodes (max {total})")
    rng = np.random.default_rng(seed)
    ranks = np.sort(rng.choice(total, size=m_edges, replace=False)) if m_edges else np.empty(0, np.int64)
    i, j = _unrank_pairs(ranks, n)
    return Graph.from_edges(n, i, j, labels=labels)


def degree_preserving_rewire(g: Graph, swap_attempts: int, seed: int = 0) -> Graph:
    """Double-edge swaps that keep every degree; self-loops and multi-edges rejected."""
    if swap_attempts < 0:
        raise GraphError("swap_attempts must be >= 0")
    if g.weighted:
        raise GraphError("rewiring requires unweighted graph")
    u, v, _ = g.edges()
    if np.any(u == v):
        raise GraphError("rewiring requires a graph without self-loops")
    u = u.copy()
    v = v.copy()
    present = {(int(a), int(b)) for a, b in zip(u, v)}
    rng = np.random.default_rng(seed)
    m = u.size
    if m >= 2:
        picks = rng.integers(0, m, size=(swap_attempts, 2))
        orient = rng.integers(0, 2, size=swap_attempts)
        for (e1, e2), o in zip(picks, orient):
            if e1 == e2:
                continue
            a, b = int(u[e1]), int(v[e1])
            c, d = int(u[e2]), int(v[e2])
            if o:
                c, d = d, c
            # (a,b),(c,d) -> (a,d),(c,b)
            if a == d or c == b:
                continue
            n1 = (min(a, d), max(a, d))
            n2 = (min(c, b), max(c, b))
            if n1 == n2 or n1 in present or n2 in present:
                continue
            present.discard((min(a, b), max(a, b)))
            present.discard((min(c, d), max(c, d)))
            present.add(n1)
            present.add(n2)
            u[e1], v[e1] = n1
            u[e2], v[e2] = n2
    return Graph.from_edges(g.n, u, v, labels=g.labels)
