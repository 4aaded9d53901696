"""Local community extraction as stable states of a discrete Hopfield network."""

__version__ = "0.1.0"

from .graph import Graph, GraphError, ParseError, adjacency_multiply, induced_subgraph, load_edge_list  # noqa: E402
from .objective import (  # noqa: E402
    CommunityState,
    HopfieldOperator,
    ObjectiveSpec,
    eval_Q,
    eval_W_rho,
    fractional_identity_W,
    operator_apply,
    quadratic_identity_Q,
)
from .dynamics import SdhnConfig, SdhnOutcome, energy, is_stable, sdhn_run, sgn_threshold  # noqa: E402
from .fractional import QfpConfig, QfpResult, lambda_of, qfp_solve  # noqa: E402
from .extract import (  # noqa: E402
    ExtractionReport,
    SignificanceResult,
    SweepResult,
    TrialConfig,
    extract_one,
    extract_sequential,
    rho_sweep,
    significance,
)
from .data import load_karate  # noqa: E402

__all__ = [
    "Graph", "GraphError", "ParseError", "adjacency_multiply", "induced_subgraph", "load_edge_list",
    "CommunityState", "HopfieldOperator", "ObjectiveSpec", "eval_Q", "eval_W_rho",
    "fractional_identity_W", "operator_apply", "quadratic_identity_Q",
    "SdhnConfig", "SdhnOutcome", "energy", "is_stable", "sdhn_run", "sgn_threshold",
    "QfpConfig", "QfpResult", "lambda_of", "qfp_solve",
    "ExtractionReport", "SignificanceResult", "SweepResult", "TrialConfig",
    "extract_one", "extract_sequential", "rho_sweep", "significance", "load_karate",
]
