"""Persistence hierarchies of Morse-Smale partitions over sampled scalar
functions, partition-local regression measures, and an exploration service."""

__version__ = "0.1.0"

from .analysis import (
    ORIGINAL,
    AnalysisBundle,
    AnalysisError,
    AnalysisParams,
    load_analysis,
    save_analysis,
)
from .dataset import Dataset, DatasetError, load_table, standardize
from .measures import (
    AttributeStore,
    MeasureDef,
    MeasureError,
    load_cache,
    register_regression_measures,
    register_structural_measures,
    save_cache,
)
from .msc import (
    BasePartition,
    CancellationSequence,
    CancellationStep,
    FlowAssignment,
    MergeRecord,
    NeighborhoodGraph,
    build_neighborhood_graph,
    compute_cancellation_sequence,
    compute_flow,
    extract_base_partitions,
)
from .projection import (
    ProjectionSpec,
    default_spec,
    project,
    project_curve,
    project_partition_edges,
    update_axis,
)
from .regression import (
    DimModelVector,
    InverseCurve,
    LinearModel,
    cosine_similarity,
    dim_score_vector,
    fit_dim_models,
    fit_inverse_curve,
    fit_model,
    normalize_coefficients,
    r2_score,
)
from .tree import (
    LayoutRect,
    Partition,
    PartitionTree,
    Selection,
    TreeError,
    build_tree,
    cut_at_persistence,
    keep_min_lifespan,
    keep_min_points,
    keep_value_range,
    layout_tree,
    reduce_tree,
    select_step_line,
    validate_selection,
)
