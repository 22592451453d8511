"""Semirandom block models, spectral bisection, and threshold experiments."""

from .bisection import (
    BisectionOutput,
    SpectralBisection,
    recheck,
    spectral_bisection,
    sweep_cut,
    zero_cut,
)
from .eigen import (
    EigenResult,
    NonConvergenceError,
    compare_eigenresults,
    dense_oracle,
    smallest_eigenpairs,
)
from .graph import (
    DenseCapError,
    Graph,
    GraphError,
    IsolatedVertexError,
    MatrixKind,
    SymmetricOperator,
    build_graph,
    degree_split,
    graph_from_adjacency,
    matrix,
    read_edge_list,
    read_partition,
    write_edge_list,
    write_partition,
)
from .harness import ExperimentConfig, run_experiment
from .metrics import (
    Score,
    agreement,
    eigvec_distance,
    embedding_variance,
    ideal_second_eigenvector,
    misclassification,
    score,
)
from .models import (
    BlockProbabilitySpec,
    DcmSpec,
    SpecError,
    apply_deterministic_plant,
    erdos_renyi,
    nested_block_spec,
    nested_hypothesis_ok,
    nssbm_benchmark_spec,
    planted_clique_internal,
    sample_block_model,
    sample_dcm,
    ssbm_spec,
)
from .streams import Seed, stable_stream
from .theory import (
    ConcentrationReport,
    ConsistencyCertificate,
    TheoryReport,
    concentration_diagnostics,
    consistency_certificate,
    davis_kahan_bound,
    dcm_expected_laplacian,
    expected_adjacency,
    expected_laplacian,
    nested_block_expected_spectrum,
    nested_block_normalized_operator,
    thresholds,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
