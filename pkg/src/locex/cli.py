"""``locex`` command line: extract, sweep, oracle, generate.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import io
import sys
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import report
from .data import BUILTIN, builtin_text
from .extract import (
    COMPLEMENT_SIZES,
    INIT_MODES,
    TrialConfig,
    extract_sequential,
    rho_sweep,
    significance,
)
from .generate import (
    gnm_random,
    planted_two_communities,
    ring_of_cliques,
    two_cliques_background,
)
from .graph import Graph, GraphError, load_edge_list, write_edge_list
from .objective import ObjectiveSpec
from .oracle import BEST_CAP, OracleLimitError, brute_force_best

BUILTIN_PREFIX = "builtin:"


class UsageError(Exception):
    pass


def _read_graph(source: str) -> Graph:
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        if name not in BUILTIN:
            raise UsageError(f"unknown builtin network {name!r}; available: {', '.join(BUILTIN)}")
        return load_edge_list(builtin_text(name))
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RuntimeError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return load_edge_list(text)
    except GraphError as exc:
        raise RuntimeError(f"{path}: {exc}") from exc


def _spec(args) -> ObjectiveSpec:
    kind = args.objective
    if kind == "wrho":
        if args.rho is None:
            raise UsageError("--objective wrho requires --rho")
        if not (0.0 < args.rho <= 1.0):
            raise UsageError(f"--rho must lie in (0, 1], got {args.rho}")
        return ObjectiveSpec("W_rho", args.rho)
    if args.rho is not None:
        raise UsageError(f"--rho only applies to --objective wrho, not {kind}")
    return ObjectiveSpec.Q() if kind == "q" else ObjectiveSpec.W()


def _write(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text)
    except OSError as exc:
        raise RuntimeError(f"{output}: {exc.strerror or exc}") from exc


def _trial_config(args) -> TrialConfig:
    return TrialConfig(init=args.init)


def _add_extraction_flags(p: argparse.ArgumentParser, rho_flag: bool = True) -> None:
    p.add_argument("--input", required=True, help="edge-list path or builtin:karate")
    if rho_flag:
        p.add_argument("--objective", choices=("q", "w", "wrho"), default="w")
        p.add_argument("--rho", type=float)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--communities", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--init", choices=INIT_MODES, default="mixed")
    p.add_argument("--complement-size", choices=COMPLEMENT_SIZES, default="original")
    p.add_argument("--list", type=int, default=10, dest="listed",
                   help="distinct states listed per extraction round")


def _check_counts(args) -> None:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.communities < 1:
        raise UsageError("--communities must be >= 1")
    if args.listed < 1:
        raise UsageError("--list must be >= 1")


def _step_payload(step, index: int, listed: int) -> OrderedDict:
    out = OrderedDict()
    out["step"] = index
    out["subgraph_n"] = step.subgraph_n
    out["community"] = step.report.top.to_dict()
    out["extraction"] = step.report.to_dict(max_communities=listed)
    return out


def _step_warnings(step, index: int) -> list[str]:
    rep = step.report
    msgs = []
    if rep.failed_trials:
        msgs.append(f"step {index}: {rep.failed_trials} of {rep.trials} trials ended in the trivial state")
    if rep.uncertified_trials:
        msgs.append(f"step {index}: {rep.uncertified_trials} trials ended without a stability certificate")
    if rep.spec.fractional:
        flags = rep.rho_validity
        if flags["strict"] and not flags["strict"][0]:
            msgs.append(f"step {index}: top community violates 2|S|/n < rho")
        if not flags["expected"]:
            msgs.append(f"step {index}: mean stable-state size violates 2<S>/n < rho")
    return msgs


def cmd_extract(args) -> str:
    _check_counts(args)
    spec = _spec(args)
    if args.null != "none" and args.nulls < 1:
        raise UsageError("--nulls must be >= 1")
    g = _read_graph(args.input)
    cfg = _trial_config(args)
    steps = extract_sequential(g, spec, args.communities, args.trials, args.seed, cfg,
                               args.complement_size)
    payload_steps, warnings = [], []
    for j, st in enumerate(steps, start=1):
        item = _step_payload(st, j, args.listed)
        if args.null != "none":
            null_trials = args.null_trials or args.trials
            sig = significance(g, st.nodes, spec, args.nulls, args.null,
                               seed=args.seed + j, trials=null_trials, cfg=cfg)
            item["significance"] = sig.to_dict()
        payload_steps.append(item)
        warnings.extend(_step_warnings(st, j))
    if len(steps) < args.communities:
        warnings.append(f"stopped after {len(steps)} of {args.communities} communities")
    inv = OrderedDict(
        input=args.input, objective=spec.kind, rho=spec.rho, trials=args.trials,
        communities=args.communities, seed=args.seed, init=args.init,
        complement_size=args.complement_size, null=args.null,
        nulls=args.nulls if args.null != "none" else 0,
        null_trials=(args.null_trials or args.trials) if args.null != "none" else 0,
        listed=args.listed,
    )
    result = OrderedDict(steps=payload_steps)
    return report.dumps(report.document("extract", inv, report.graph_summary(g, args.input),
                                        result, warnings))


def _grid(args) -> list[float]:
    lo, hi, steps = args.rho_min, args.rho_max, args.rho_steps
    for name, val in (("--rho-min", lo), ("--rho-max", hi)):
        if not (0.0 < val <= 1.0):
            raise UsageError(f"{name} must lie in (0, 1], got {val}")
    if steps < 1:
        raise UsageError("--rho-steps must be >= 1")
    if lo > hi:
        raise UsageError("--rho-min must not exceed --rho-max")
    if steps == 1:
        return [lo]
    if lo == hi:
        raise UsageError("--rho-steps > 1 needs --rho-min < --rho-max")
    # round away linspace noise so grid points print as typed
    return [float(round(v, 12)) for v in np.linspace(lo, hi, steps)]


def cmd_sweep(args) -> str:
    _check_counts(args)
    grid = _grid(args)
    g = _read_graph(args.input)
    sw = rho_sweep(g, grid, args.communities, args.trials, args.seed, _trial_config(args),
                   args.complement_size)
    rows, warnings = [], []
    for r, steps, member in zip(sw.rho_grid, sw.steps, sw.membership):
        rows.append(OrderedDict(
            rho=r,
            communities=[st.report.top.to_dict() for st in steps],
            membership=member,
        ))
        for j, st in enumerate(steps, start=1):
            warnings.extend(f"rho={r!r} {w}" for w in _step_warnings(st, j))
    result = OrderedDict(
        rho_grid=list(sw.rho_grid),
        nodes=list(sw.labels),
        identical_partitions=sw.identical_partitions(),
        rows=rows,
    )
    if args.tsv:
        _write(sw.spectrum_tsv(), args.tsv)
    inv = OrderedDict(
        input=args.input, rho_min=args.rho_min, rho_max=args.rho_max, rho_steps=args.rho_steps,
        trials=args.trials, communities=args.communities, seed=args.seed, init=args.init,
        complement_size=args.complement_size, tsv=args.tsv,
    )
    return report.dumps(report.document("sweep", inv, report.graph_summary(g, args.input),
                                        result, warnings))


def cmd_oracle(args) -> str:
    spec = _spec(args)
    g = _read_graph(args.input)
    if g.n > BEST_CAP:
        raise RuntimeError(f"oracle limit exceeded: n={g.n} > cap {BEST_CAP}")
    res = brute_force_best(g, spec)
    result = OrderedDict(
        best_value=res.best_value,
        best_subset=[g.labels[i] for i in res.best_subset],
        evaluated_count=res.evaluated_count,
        ties=[[g.labels[i] for i in t] for t in res.ties],
        ties_truncated=res.ties_truncated,
    )
    inv = OrderedDict(input=args.input, objective=spec.kind, rho=spec.rho)
    return report.dumps(report.document("oracle", inv, report.graph_summary(g, args.input), result))


def cmd_generate(args) -> str:
    kind = args.family
    try:
        if kind == "ring":
            g = ring_of_cliques(args.m, args.cliques)
            header = f"ring_of_cliques m={args.m} cliques={args.cliques}"
            truth = None
        elif kind == "two-cliques":
            g = two_cliques_background(args.p, args.n_bg, args.bg_prob, args.seed)
            header = f"two_cliques_background p={args.p} n_bg={args.n_bg} bg_prob={args.bg_prob} seed={args.seed}"
            truth = None
        elif kind == "planted":
            g, truth = planted_two_communities(args.n, args.n1, args.n2, args.pin, args.pout, args.seed)
            header = (f"planted_two_communities n={args.n} n1={args.n1} n2={args.n2} "
                      f"pin={args.pin} pout={args.pout} seed={args.seed}")
        else:
            g = gnm_random(args.n, args.m, args.seed)
            header = f"gnm n={args.n} m={args.m} seed={args.seed}"
            truth = None
    except GraphError as exc:
        raise UsageError(str(exc)) from exc
    if g.edge_count == 0:
        raise UsageError("generated graph has no edges; the edge-list format cannot represent it")
    buf = io.StringIO()
    write_edge_list(g, buf, header=header)
    if truth is not None:
        lines = [f"{g.labels[i]}\t{int(b)}" for i, b in enumerate(truth.assignment)]
        labels_text = "\n".join(lines) + "\n"
        labels_path = args.labels or (f"{args.output}.labels" if args.output and args.output != "-" else None)
        if labels_path is None:
            raise UsageError("planted output to stdout needs --labels PATH for the ground truth")
        _write(labels_text, labels_path)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract local communities")
    _add_extraction_flags(p)
    p.add_argument("--null", choices=("none", "gnm", "rewire"), default="none")
    p.add_argument("--nulls", type=int, default=100)
    p.add_argument("--null-trials", type=int, default=None,
                   help="trials per null network (default: --trials)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("sweep", help="rho sweep of sequential extractions")
    _add_extraction_flags(p, rho_flag=False)
    p.add_argument("--rho-min", type=float, required=True)
    p.add_argument("--rho-max", type=float, required=True)
    p.add_argument("--rho-steps", type=int, required=True)
    p.add_argument("--tsv", help="write the node x rho membership matrix here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustive optimum for small graphs")
    p.add_argument("--input", required=True)
    p.add_argument("--objective", choices=("q", "w", "wrho"), default="w")
    p.add_argument("--rho", type=float)
    p.add_argument("--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("generate", help="write a generated network as an edge list")
    fam = p.add_subparsers(dest="family", required=True)
    f = fam.add_parser("ring")
    f.add_argument("--m", type=int, required=True)
    f.add_argument("--cliques", type=int, required=True)
    f = fam.add_parser("two-cliques")
    f.add_argument("--p", type=int, required=True)
    f.add_argument("--n-bg", type=int, required=True)
    f.add_argument("--bg-prob", type=float, required=True)
    f = fam.add_parser("planted")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--n1", type=int, required=True)
    f.add_argument("--n2", type=int, required=True)
    f.add_argument("--pin", type=float, required=True)
    f.add_argument("--pout", type=float, required=True)
    f.add_argument("--labels", help="ground-truth output (default: OUTPUT.labels)")
    f = fam.add_parser("gnm")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--m", type=int, required=True)
    for f in fam.choices.values():
        f.add_argument("--seed", type=int, default=0)
        f.add_argument("--output")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
        _write(text, args.output)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"locex: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, GraphError, OracleLimitError, ValueError) as exc:
        print(f"locex: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
