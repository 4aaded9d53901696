"""Canonical JSON report documents.

Keys keep insertion order, floats use the shortest round-trip repr, and
non-finite floats become ``null``, so identical runs give identical bytes.
"""

from __future__ import annotations

import json
import math
from collections import OrderedDict
from typing import Any

import numpy as np

from . import __version__
from .graph import Graph

SCHEMA = "locex.report/1"

CONVENTIONS = OrderedDict(
    lambda_scale="lambda(x) = -x^T M x / e^T x = -W / n; threshold T = -lambda/2",
    dinkelbach_init="lambda(0) = b(x0)/a(x0)",
    dinkelbach_stop="stop when |b - lambda a| <= tol*max(1,|b|); accept only lambda decreases",
    update_rule="x_i <- [ (M x)_i - M_ii x_i - (T - M_ii/2) >= -eps ]",
    two_cycle="resolved by sequential updates from the lower-energy member",
    p_value="(#{null >= observed} + 1) / (nulls + 1)",
)


def clean(obj: Any) -> Any:
    """Convert to plain JSON types; ``nan``/``inf`` map to ``None``."""
    if isinstance(obj, dict):
        return OrderedDict((str(k), clean(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else None
    return obj


def graph_summary(g: Graph, source: str | None = None) -> OrderedDict:
    out = OrderedDict()
    if source is not None:
        out["source"] = source
    out["n"] = g.n
    out["m"] = g.edge_count
    out["total_weight"] = g.total_weight
    out["weighted"] = g.weighted
    return out


def document(command: str, invocation: dict, graph: dict | None, result: Any,
             warnings: list[str] | None = None) -> OrderedDict:
    doc = OrderedDict()
    doc["schema"] = SCHEMA
    doc["tool"] = "locex"
    doc["version"] = __version__
    doc["command"] = command
    doc["invocation"] = invocation
    if graph is not None:
        doc["graph"] = graph
    doc["conventions"] = CONVENTIONS
    doc["result"] = result
    doc["warnings"] = list(warnings or [])
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(clean(doc), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
