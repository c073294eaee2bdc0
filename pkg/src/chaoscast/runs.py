"""Experiment drivers shared by the CLI and the HTTP service.

Each driver takes validated inputs, runs core operations, and returns a
JSON-ready payload; writing artifacts or HTTP envelopes is the caller's
business. All drivers are deterministic given their arguments.
"""

from __future__ import annotations

import numpy as np

from .embedding import (
    DelayMapSpec,
    PartitionEnsemble,
    build_embedding,
    estimate_box_dimension,
    find_self_intersections,
)
from .ensemble import (
    PredictionConfig,
    central_interval,
    density_quantile,
    ensemble_predict,
    evaluate_calibration,
    tail_probability,
)
from .neighbors import build_index, neighbor_schedule, query_knn
from .predictors import fallback_predict, predict_local_linear, predict_local_mean
from .predictors import LocalSolveError
from .systems import MultiSeries

REPORT_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def boxdim_report(points: np.ndarray, eps_grid) -> dict:
    estimate = estimate_box_dimension(points, eps_grid)
    return estimate.describe()


def selfintersect_report(
    series: MultiSeries, spec: DelayMapSpec, delta: float, epsilon: float
) -> dict:
    """Self-intersections of one delay map against the full-state track.

    The reference state at row time t is the vector of all observables
    at t, which for the benchmark systems is the complete system state.
    """
    dataset = build_embedding(series, spec)
    states = series.values[dataset.t]
    report = find_self_intersections(dataset, states, delta, epsilon)
    return report.describe()


def causal_prediction_rows(
    series: MultiSeries,
    spec: DelayMapSpec,
    test_count: int,
    config: PredictionConfig,
) -> list[dict]:
    """Per-query predictions at the last test_count rows, causally trained.

    For each query row only rows whose target was already observed at
    the query time (t + horizon <= query_time) are eligible training
    data, on top of the temporal exclusion window. Both predictors are
    reported per query along with the fallback decision.
    """
    dataset = build_embedding(series, spec)
    if test_count < 1:
        raise ValueError(f"test_count must be >= 1, got {test_count}")
    if test_count > len(dataset) // 2:
        raise ValueError(
            f"test_count {test_count} leaves too little history "
            f"(embedding has {len(dataset)} rows)"
        )
    rows = []
    for row_idx in range(len(dataset) - test_count, len(dataset)):
        query_time = int(dataset.t[row_idx])
        query_vec = dataset.x[row_idx]
        train = dataset.take(dataset.t + spec.horizon <= query_time)
        k = neighbor_schedule(len(train), config.c, config.gamma)
        neighbors = query_knn(
            build_index(train), query_vec, k, query_time, config.exclusion
        )
        outcome = fallback_predict(neighbors, train, query_vec, config.ridge)
        mean_pred = predict_local_mean(neighbors, train.y)
        linear_pred = None
        if outcome.method == "linear":
            linear_pred = outcome.prediction
        elif len(neighbors.indices) >= 2:
            try:
                linear_pred = predict_local_linear(
                    neighbors, train, query_vec, config.ridge
                ).prediction
            except LocalSolveError:
                linear_pred = None
        rows.append(
            {
                "time": query_time,
                "truth": float(dataset.y[row_idx]),
                "mean": mean_pred,
                "linear": linear_pred,
                "method": outcome.method,
                "k": int(len(neighbors.indices)),
                "residual_std": float(np.std(outcome.residuals)),
            }
        )
    return rows


def ensemble_report(
    series: MultiSeries,
    partitions: PartitionEnsemble,
    query_time: int,
    config: PredictionConfig,
    thresholds=(),
) -> dict:
    density = ensemble_predict(series, partitions, query_time, config)
    return {
        "query_time": int(query_time),
        "horizon": partitions.specs[0].horizon,
        "target": partitions.specs[0].target,
        "components": [
            {
                "mu": c.mu,
                "residuals": [float(r) for r in c.residuals],
                "weight": c.weight,
                "method": c.method,
            }
            for c in density.components
        ],
        "quantiles": {
            format(q, "g"): density_quantile(density, q) for q in REPORT_QUANTILES
        },
        "tail_probabilities": {
            format(thr, "g"): tail_probability(density, thr) for thr in thresholds
        },
    }


def calibration_report(
    series: MultiSeries,
    partitions: PartitionEnsemble,
    test_times,
    config: PredictionConfig,
) -> dict:
    report = evaluate_calibration(series, partitions, test_times, config)
    return report.describe()


def default_test_times(
    series: MultiSeries,
    partitions: PartitionEnsemble,
    test_count: int,
    spacing: int,
    config: PredictionConfig,
) -> np.ndarray:
    """Latest test_count times spaced `spacing` apart with truths observed.

    Raises when the earliest test time would not leave enough history
    for every delay map to train on.
    """
    if test_count < 1:
        raise ValueError(f"test_count must be >= 1, got {test_count}")
    if spacing < 1:
        raise ValueError(f"spacing must be >= 1, got {spacing}")
    horizon = partitions.specs[0].horizon
    last = series.n - 1 - horizon
    times = last - spacing * np.arange(test_count - 1, -1, -1)
    maxlag = max(spec.maxlag for spec in partitions.specs)
    min_history = maxlag + horizon + max(config.exclusion, horizon) + 8
    if times[0] < min_history:
        raise ValueError(
            f"test_count/spacing leave insufficient history: first test time "
            f"{times[0]} < {min_history}"
        )
    return times


def interval_hit(density, level: float, truth: float) -> bool:
    """Whether truth lands inside the central interval at the level."""
    lo, hi = central_interval(density, level)
    return lo <= truth <= hi
