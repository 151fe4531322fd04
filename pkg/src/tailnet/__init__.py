"""Tail-risk linkage networks from daily price panels.

Pipeline: return panel -> rolling CoES matrices -> cosine-similarity
networks with breakpoint-classified signed adjacency -> market-cap
weighted systemic risk score and per-asset decomposition.
"""

from tailnet._kernels import BACKEND
from tailnet.errors import (
    ComputationError,
    DegenerateRiskStructureError,
    InputError,
    StaleArtifactError,
    TailnetError,
)
from tailnet.network import (
    BreakpointEstimate,
    BreakpointResult,
    CorrelationSet,
    SignedAdjacency,
    breakpoint_theta,
    build_adjacency,
    build_adjacency_fixed,
    correlation_set,
    cosine_similarity,
    export_graphml,
)
from tailnet.panel import (
    AssetRecord,
    GapPolicy,
    ReturnPanel,
    build_panel,
    load_records,
    read_panel,
    write_panel,
)
from tailnet.risk import (
    RiskSeries,
    annual_table,
    decompose_score,
    negative_ratio,
    risk_series,
    systemic_score,
)
from tailnet.tail import (
    CoESMatrix,
    TailConfig,
    coes_pair,
    expected_shortfall,
    historical_var,
    rolling_coes,
    tail_set,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "AssetRecord",
    "BreakpointEstimate",
    "BreakpointResult",
    "CoESMatrix",
    "ComputationError",
    "CorrelationSet",
    "DegenerateRiskStructureError",
    "GapPolicy",
    "InputError",
    "ReturnPanel",
    "RiskSeries",
    "SignedAdjacency",
    "StaleArtifactError",
    "TailnetError",
    "TailConfig",
    "annual_table",
    "breakpoint_theta",
    "build_adjacency",
    "build_adjacency_fixed",
    "build_panel",
    "coes_pair",
    "correlation_set",
    "cosine_similarity",
    "decompose_score",
    "expected_shortfall",
    "export_graphml",
    "historical_var",
    "load_records",
    "negative_ratio",
    "read_panel",
    "risk_series",
    "rolling_coes",
    "systemic_score",
    "tail_set",
    "write_panel",
]
