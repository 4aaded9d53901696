"""Multi-trial extraction, sequential extraction, rho sweeps and significance."""

from __future__ import annotations

import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import FIXED_POINT, SdhnConfig, is_stable, sdhn_run
from .fractional import QfpConfig, qfp_solve
from .generate import degree_preserving_rewire, gnm_random
from .graph import Graph, GraphError, induced_subgraph
from .objective import CommunityState, HopfieldOperator, ObjectiveSpec, evaluate, rho_flags

INIT_MODES = ("bernoulli", "ball", "mixed")
NULL_MODELS = ("gnm", "rewire")


@dataclass(frozen=True)
class TrialConfig:
    """How each trial draws its random initial state and solves from it.

    ``bernoulli`` sets each node with probability ``density``.  ``ball`` grows
    a breadth-first ball from a uniform seed node to a size drawn
    log-uniformly from ``[1, n/2]``.  ``mixed`` alternates the two by trial
    parity.
    """

    init: str = "mixed"
    density: float = 0.5
    qfp: QfpConfig = field(default_factory=QfpConfig)
    sdhn: SdhnConfig = field(default_factory=SdhnConfig)
    workers: int | None = None

    def __post_init__(self):
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}")
        if not (0.0 < self.density <= 1.0):
            raise ValueError("density must lie in (0, 1]")


@dataclass(frozen=True)
class Community:
    nodes: tuple[int, ...]
    labels: tuple[str, ...]
    objective: float
    lambda_star: float | None
    count: int
    frequency: float
    stable: bool

    @property
    def size(self) -> int:
        return len(self.nodes)

    def to_dict(self) -> dict:
        return OrderedDict(
            labels=list(self.labels),
            size=self.size,
            objective=self.objective,
            lambda_star=self.lambda_star,
            count=self.count,
            frequency=self.frequency,
            stable=self.stable,
        )


@dataclass(frozen=True)
class ExtractionReport:
    communities: tuple[Community, ...]
    trials: int
    failed_trials: int
    uncertified_trials: int
    spec: ObjectiveSpec
    seed: int
    n: int
    rho_validity: dict

    @property
    def top(self) -> Community | None:
        return self.communities[0] if self.communities else None

    def to_dict(self, max_communities: int | None = None) -> dict:
        comms = self.communities if max_communities is None else self.communities[:max_communities]
        return OrderedDict(
            objective=self.spec.kind,
            rho=self.spec.rho,
            seed=self.seed,
            n=self.n,
            trials=self.trials,
            failed_trials=self.failed_trials,
            uncertified_trials=self.uncertified_trials,
            distinct_states=len(self.communities),
            rho_validity=self.rho_validity,
            communities=[c.to_dict() for c in comms],
        )


def _worker_count(requested: int | None) -> int:
    if requested is None:
        raw = os.environ.get("LOCEX_THREADS", "1")
        try:
            requested = int(raw)
        except ValueError:
            requested = 1
    if requested <= 0:
        requested = os.cpu_count() or 1
    return requested


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial)]))


def _bfs_ball(g: Graph, start: int, size: int, rng: np.random.Generator) -> np.ndarray:
    a = g.adjacency
    x = np.zeros(g.n, dtype=np.uint8)
    x[start] = 1
    frontier = [start]
    count = 1
    while frontier and count < size:
        nxt = []
        for i in frontier:
            nb = a.indices[a.indptr[i]:a.indptr[i + 1]]
            nb = nb[x[nb] == 0]
            if nb.size == 0:
                continue
            if count + nb.size > size:
                nb = rng.permutation(nb)[: size - count]
            x[nb] = 1
            count += nb.size
            nxt.extend(nb.tolist())
            if count >= size:
                break
        frontier = nxt
    return x


def initial_state(g: Graph, rng: np.random.Generator, trial: int, cfg: TrialConfig) -> np.ndarray:
    mode = cfg.init
    if mode == "mixed":
        mode = "bernoulli" if trial % 2 == 0 else "ball"
    if mode == "bernoulli":
        return (rng.random(g.n) < cfg.density).astype(np.uint8)
    top = max(1.0, g.n / 2.0)
    size = int(round(np.exp(rng.uniform(0.0, np.log(top)))))
    start = int(rng.integers(g.n))
    return _bfs_ball(g, start, max(1, size), rng)


@dataclass(frozen=True)
class _Trial:
    state: CommunityState | None
    objective: float
    lambda_star: float | None
    stable: bool


def run_trial(g: Graph, spec: ObjectiveSpec, seed: int, trial: int, cfg: TrialConfig) -> _Trial:
    rng = _trial_rng(seed, trial)
    x0 = initial_state(g, rng, trial, cfg)
    if not x0.any():
        return _Trial(None, float("nan"), None, False)
    if spec.kind == "Q":
        op = HopfieldOperator(g, "Q")
        out = sdhn_run(op, x0, cfg.sdhn)
        if not out.state.indicator.any():
            return _Trial(None, float("nan"), None, False)
        stable = out.status == FIXED_POINT and is_stable(op, out.state, cfg.sdhn.sign_tolerance)
        return _Trial(out.state, evaluate(g, out.state, spec), None, stable)
    qfp = cfg.qfp if cfg.qfp.sdhn == cfg.sdhn else QfpConfig(
        cfg.qfp.lambda_tolerance, cfg.qfp.max_outer_iterations, cfg.sdhn)
    res = qfp_solve(g, spec.effective_rho(g.n), x0, qfp)
    if res.state is None:
        return _Trial(None, float("nan"), None, False)
    return _Trial(res.state, res.objective, res.lambda_star, res.stable)


def _rank_key(c: Community):
    return (-c.objective, c.size, c.labels)


def extract_one(g: Graph, spec: ObjectiveSpec, trials: int = 500, seed: int = 0,
                cfg: TrialConfig = TrialConfig()) -> ExtractionReport:
    """Run ``trials`` independent attempts and rank the distinct stable states.

    Trials ending in the empty state count as failed.  Terminal states that do
    not pass the stability certificate are counted as uncertified and left out
    of the ranking.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = _worker_count(cfg.workers)
    run = lambda t: run_trial(g, spec, seed, t, cfg)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]

    failed = sum(r.state is None for r in results)
    uncertified = 0
    seen: dict[bytes, list] = {}
    for r in results:
        if r.state is None:
            continue
        if not r.stable:
            uncertified += 1
            continue
        key = r.state.key()
        if key in seen:
            seen[key][1] += 1
        else:
            seen[key] = [r, 1]
    comms = []
    for r, count in seen.values():
        nodes = tuple(int(i) for i in r.state.nodes)
        comms.append(Community(
            nodes=nodes,
            labels=tuple(sorted(g.labels[i] for i in nodes)),
            objective=float(r.objective),
            lambda_star=None if r.lambda_star is None else float(r.lambda_star),
            count=count,
            frequency=count / trials,
            stable=True,
        ))
    comms.sort(key=_rank_key)
    if spec.fractional and comms:
        flags = rho_flags(spec.reference_n or g.n, spec.rho, [c.size for c in comms],
                          [c.count for c in comms])
    else:
        flags = {"strict": [True] * len(comms), "expected": True,
                 "expected_size": 0.0 if not comms else float(np.average(
                     [c.size for c in comms], weights=[c.count for c in comms]))}
    return ExtractionReport(tuple(comms), trials, failed, uncertified, spec, int(seed), g.n, flags)


@dataclass(frozen=True)
class SequentialStep:
    """One round of sequential extraction, labels in the original graph's space."""

    report: ExtractionReport
    nodes: tuple[int, ...]  # indices into the original graph
    subgraph_n: int


COMPLEMENT_SIZES = ("original", "subgraph")


def extract_sequential(g: Graph, spec: ObjectiveSpec, k: int = 1, trials: int = 500, seed: int = 0,
                       cfg: TrialConfig = TrialConfig(),
                       complement_size: str = "original") -> list[SequentialStep]:
    """Extract up to ``k`` communities, each from the complement of the previous ones.

    Every round works on the induced subgraph of the remaining nodes, with
    degrees recomputed there.  ``complement_size`` picks the network size in
    ``|S^rho| = rho n - |S|``: ``"original"`` keeps the size of ``g`` in every
    round, ``"subgraph"`` uses the shrinking remainder.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if complement_size not in COMPLEMENT_SIZES:
        raise ValueError(f"complement_size must be one of {COMPLEMENT_SIZES}")
    if spec.fractional and complement_size == "original":
        spec = spec.with_reference(spec.reference_n or g.n)
    steps: list[SequentialStep] = []
    current = g
    to_original = np.arange(g.n)
    for step in range(k):
        rep = extract_one(current, spec, trials, _step_seed(seed, step), cfg)
        if rep.top is None:
            break
        orig = tuple(int(to_original[i]) for i in rep.top.nodes)
        steps.append(SequentialStep(rep, orig, current.n))
        remaining = np.setdiff1d(np.arange(current.n), np.asarray(rep.top.nodes))
        if remaining.size == 0:
            break
        current, mapping = induced_subgraph(current, remaining)
        inverse = np.empty(len(mapping), dtype=np.int64)
        for old, new in mapping.items():
            inverse[new] = to_original[old]
        to_original = inverse
        if current.total_weight <= 0:
            break
    return steps


def _step_seed(seed: int, step: int) -> int:
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, 0x5E0, step]).generate_state(1)[0]) \
        if step else int(seed)


def memberships(n: int, steps: Sequence[SequentialStep]) -> np.ndarray:
    """Node membership vector: ``j`` for the j-th extracted community, ``0`` otherwise."""
    m = np.zeros(n, dtype=np.int64)
    for j, st in enumerate(steps, start=1):
        m[list(st.nodes)] = j
    return m


def partition_of(membership: np.ndarray) -> frozenset:
    """Label-free view of a membership vector (background excluded)."""
    return frozenset(frozenset(np.flatnonzero(membership == j).tolist())
                     for j in np.unique(membership) if j != 0)


@dataclass(frozen=True)
class SweepResult:
    rho_grid: tuple[float, ...]
    membership: np.ndarray  # shape (len(grid), n)
    steps: tuple[tuple[SequentialStep, ...], ...]
    labels: tuple[str, ...]

    def identical_partitions(self) -> bool:
        parts = {partition_of(row) for row in self.membership}
        return len(parts) == 1

    def community_counts(self) -> list[int]:
        return [len(s) for s in self.steps]

    def spectrum_tsv(self) -> str:
        head = "node\t" + "\t".join(repr(float(r)) for r in self.rho_grid)
        lines = [head]
        for i, lab in enumerate(self.labels):
            lines.append(lab + "\t" + "\t".join(str(int(v)) for v in self.membership[:, i]))
        return "\n".join(lines) + "\n"


def validate_rho_grid(grid: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(float(r) for r in grid)
    if not grid:
        raise ValueError("rho grid is empty")
    for r in grid:
        if not (0.0 < r <= 1.0):
            raise ValueError(f"rho {r} outside (0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("rho grid must be strictly increasing")
    return grid


def rho_sweep(g: Graph, rho_grid: Sequence[float], k: int = 1, trials: int = 500, seed: int = 0,
              cfg: TrialConfig = TrialConfig(), complement_size: str = "original") -> SweepResult:
    grid = validate_rho_grid(rho_grid)
    rows, all_steps = [], []
    for r in grid:
        steps = extract_sequential(g, ObjectiveSpec.W(r), k, trials, seed, cfg, complement_size)
        rows.append(memberships(g.n, steps))
        all_steps.append(tuple(steps))
    return SweepResult(grid, np.vstack(rows), tuple(all_steps), g.labels)


@dataclass(frozen=True)
class SignificanceResult:
    observed: float
    null_objectives: tuple[float, ...]
    p_value: float
    null_model: str

    def to_dict(self) -> dict:
        return OrderedDict(
            observed=self.observed,
            null_model=self.null_model,
            nulls=len(self.null_objectives),
            p_value=self.p_value,
            null_objectives=list(self.null_objectives),
        )


def null_graph(g: Graph, model: str, seed: int) -> Graph:
    if model == "gnm":
        return gnm_random(g.n, g.edge_count, seed, labels=g.labels)
    if model == "rewire":
        return degree_preserving_rewire(g, 10 * g.edge_count, seed)
    raise ValueError(f"null model must be one of {NULL_MODELS}")


def significance(g: Graph, community, spec: ObjectiveSpec, nulls: int = 100, null_model: str = "gnm",
                 seed: int = 0, trials: int = 500, cfg: TrialConfig = TrialConfig(),
                 null_factory: Callable[[Graph, str, int], Graph] = null_graph) -> SignificanceResult:
    """Empirical p-value of a community's objective against best objectives on null graphs.

    ``p = (#{null >= observed} + 1) / (nulls + 1)``.  A null graph on which
    every trial fails contributes ``-inf``.
    """
    if nulls < 1:
        raise ValueError("nulls must be >= 1")
    if null_model not in NULL_MODELS:
        raise ValueError(f"null model must be one of {NULL_MODELS}")
    nodes = [int(i) for i in community]
    if not nodes:
        raise ValueError("community is empty")
    if min(nodes) < 0 or max(nodes) >= g.n:
        raise GraphError("community is not a subset of the graph's nodes")
    observed = float(evaluate(g, CommunityState.from_nodes(g.n, nodes), spec))
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, 0x9]).spawn(nulls)
    values = []
    for child in ss:
        s1, s2 = (int(v) for v in child.generate_state(2))
        h = null_factory(g, null_model, s1)
        rep = extract_one(h, spec, trials, s2, cfg)
        values.append(rep.top.objective if rep.top is not None else float("-inf"))
    hits = sum(v >= observed for v in values)
    return SignificanceResult(observed, tuple(values), (hits + 1) / (nulls + 1), null_model)
