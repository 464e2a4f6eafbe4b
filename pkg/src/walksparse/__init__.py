"""Deterministic discrepancy-walk partial coloring and the sparsifiers built on it."""

from .errors import (
    InvalidInput,
    NotPSD,
    ParseError,
    StepTooLarge,
    SubspaceExhausted,
    WalksparseError,
)
from .graph import Graph, bipartite_lift, expander_decompose, graph_matrices, sv_error_matrices
from .linalg import Subspace, intersect, nullspace
from .matrix_walk import DoubledFamily, MatrixFamily, WalkLog, WalkOptions, partial_color
from .sketches import SketchOptions, resistance_sparsify, sketch, sketch_expander
from .sparsify import (
    Reweighting,
    SparsifyOptions,
    degree_subspace,
    spectral_sparsify,
    sv_sparsify,
    sv_sparsify_expander,
    uc_sparsify,
)
from .vector_walk import MwuOptions, vector_partial_color
from .verify import (
    ApproxReport,
    brute_force_min_discrepancy,
    check_matrix_approx,
    check_sv,
    check_uc_undirected,
    effective_resistance_report,
)

__all__ = [
    "ApproxReport",
    "DoubledFamily",
    "Graph",
    "InvalidInput",
    "MatrixFamily",
    "MwuOptions",
    "NotPSD",
    "ParseError",
    "Reweighting",
    "SketchOptions",
    "SparsifyOptions",
    "StepTooLarge",
    "Subspace",
    "SubspaceExhausted",
    "WalkLog",
    "WalkOptions",
    "WalksparseError",
    "bipartite_lift",
    "brute_force_min_discrepancy",
    "check_matrix_approx",
    "check_sv",
    "check_uc_undirected",
    "degree_subspace",
    "effective_resistance_report",
    "expander_decompose",
    "graph_matrices",
    "sv_error_matrices",
    "intersect",
    "nullspace",
    "partial_color",
    "resistance_sparsify",
    "sketch",
    "sketch_expander",
    "spectral_sparsify",
    "sv_sparsify",
    "sv_sparsify_expander",
    "uc_sparsify",
    "vector_partial_color",
]
