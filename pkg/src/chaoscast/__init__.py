"""Delay-embedding forecasting toolkit for stationary chaotic systems.

Core pipeline: sample a benchmark system (systems), build delay
coordinate maps and diagnose their geometry (embedding), query exact
nearest neighbors with temporal exclusion (neighbors), predict with
local mean / local linear fits (predictors), and combine disjoint
delay-map views into probabilistic predictions of extremes (ensemble).
A CLI (cli) and an HTTP service (service) wrap the same operations.
"""

__version__ = "0.1.0"

from .embedding import (
    AmbiguityDecomposition,
    BoxDimEstimate,
    DelayMapSpec,
    EmbeddedDataset,
    PartitionEnsemble,
    SelfIntersectionReport,
    build_embedding,
    decompose_ambiguity,
    estimate_box_dimension,
    find_self_intersections,
    intersection_overlap,
    make_partitions,
)
from .ensemble import (
    CalibrationReport,
    DensityComponent,
    PredictionConfig,
    PredictiveDensity,
    central_interval,
    density_cdf,
    density_quantile,
    ensemble_predict,
    evaluate_calibration,
    tail_probability,
)
from .neighbors import (
    NeighborIndex,
    NeighborSet,
    build_index,
    neighbor_schedule,
    query_knn,
)
from .predictors import (
    FallbackPrediction,
    LocalLinearFit,
    LocalSolveError,
    fallback_predict,
    predict_local_linear,
    predict_local_mean,
)
from .systems import (
    DivergenceError,
    MultiSeries,
    SystemSpec,
    generate,
    integrate_flow,
    iterate_map,
    system_spec,
)

__all__ = [
    "AmbiguityDecomposition",
    "BoxDimEstimate",
    "CalibrationReport",
    "DelayMapSpec",
    "DensityComponent",
    "DivergenceError",
    "EmbeddedDataset",
    "FallbackPrediction",
    "LocalLinearFit",
    "LocalSolveError",
    "MultiSeries",
    "NeighborIndex",
    "NeighborSet",
    "PartitionEnsemble",
    "PredictionConfig",
    "PredictiveDensity",
    "SelfIntersectionReport",
    "SystemSpec",
    "build_embedding",
    "build_index",
    "central_interval",
    "decompose_ambiguity",
    "density_cdf",
    "density_quantile",
    "ensemble_predict",
    "estimate_box_dimension",
    "evaluate_calibration",
    "fallback_predict",
    "find_self_intersections",
    "generate",
    "integrate_flow",
    "intersection_overlap",
    "iterate_map",
    "make_partitions",
    "neighbor_schedule",
    "predict_local_linear",
    "predict_local_mean",
    "query_knn",
    "system_spec",
    "tail_probability",
]
