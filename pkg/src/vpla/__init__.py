"""Assistance engine for visual/low-code programming.

Measures program complexity (structural + layout metrics), mines project
corpora for frequent substructures to recommend the next block during
editing, and detects and encapsulates code clones.
"""

from .graphs import (
    CompositeBlockDef,
    Edge,
    Embedding,
    Node,
    ProjectGraph,
    expand_edge_params,
    find_embeddings,
    flatten,
    parse_project,
    serialize_project,
)
from .metrics import (
    LayoutWeights,
    MetricsReport,
    compute_report,
    cyclomatic,
    halstead,
    layout_metrics,
    layout_quality,
    select_metrics,
)
from .mining import (
    FrequentSubgraph,
    StructuralTable,
    build_structural_table,
    canonical_code,
    mine_frequent,
    mine_single_graph,
)
from .ged import EditCosts, ged_exact, ged_upper_bound
from .recommend import Recommendation, recommend, upstream_graph
from .encapsulate import (
    EncapsulationPlan,
    encapsulate,
    find_clone_plans,
    metrics_delta,
    optimize_layout,
    select_clone,
)
from .corpus import generate_corpus, preprocess, run_pipeline

__all__ = [
    "CompositeBlockDef",
    "Edge",
    "EditCosts",
    "Embedding",
    "EncapsulationPlan",
    "FrequentSubgraph",
    "LayoutWeights",
    "MetricsReport",
    "Node",
    "ProjectGraph",
    "Recommendation",
    "StructuralTable",
    "build_structural_table",
    "canonical_code",
    "compute_report",
    "cyclomatic",
    "encapsulate",
    "expand_edge_params",
    "find_clone_plans",
    "find_embeddings",
    "flatten",
    "ged_exact",
    "ged_upper_bound",
    "generate_corpus",
    "halstead",
    "layout_metrics",
    "layout_quality",
    "metrics_delta",
    "mine_frequent",
    "mine_single_graph",
    "optimize_layout",
    "parse_project",
    "preprocess",
    "recommend",
    "run_pipeline",
    "select_clone",
    "select_metrics",
    "serialize_project",
    "upstream_graph",
]

__version__ = "0.1.0"
