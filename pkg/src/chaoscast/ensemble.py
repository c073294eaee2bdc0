"""Multiview ensemble predictions and their calibration.

Each delay map in a disjoint partition ensemble produces a point
prediction for the same target plus the residual sample of its local
fit. Pairing every point prediction with its residual distribution and
mixing the views with equal weights yields an empirical predictive
density — the basis for probabilistic statements about extremes (tail
probabilities, quantiles) rather than a single number.

Residual samples are used as-is (no kernel smoothing): the density is a
finite mixture of shifted residual atoms. Quantiles follow the lower
empirical convention so identical inputs give identical outputs across
implementations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import PartitionEnsemble, build_embedding
from .neighbors import build_index, neighbor_schedule, query_knn
from .predictors import DEFAULT_RIDGE, fallback_predict
from .systems import MultiSeries

WEIGHT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PredictionConfig:
    """Knobs shared by every per-view prediction.

    c, gamma    neighbor schedule k = max(2, ceil(c * n**gamma))
    ridge       slope penalty of the local linear fit
    exclusion   temporal window (samples) around the query inside which
                rows are ineligible as neighbors
    levels      nominal central-interval levels evaluated by calibration
    """

    c: float = 1.0
    gamma: float = 0.5
    ridge: float = DEFAULT_RIDGE
    exclusion: int = 0
    levels: tuple[float, ...] = (0.5, 0.9)

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.ridge < 0:
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")
        if self.exclusion < 0:
            raise ValueError(f"exclusion must be >= 0, got {self.exclusion}")
        if any(not 0.0 < lv < 1.0 for lv in self.levels):
            raise ValueError(f"levels must lie in (0, 1), got {self.levels}")

    def describe(self) -> dict:
        return {
            "c": self.c,
            "gamma": self.gamma,
            "ridge": self.ridge,
            "exclusion": self.exclusion,
            "levels": list(self.levels),
        }


@dataclass(frozen=True)
class DensityComponent:
    """One view's contribution: point prediction, residuals, weight."""

    mu: float
    residuals: np.ndarray
    weight: float
    method: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float))
        if self.residuals.size < 1:
            raise ValueError("every component needs at least one residual")
        if not self.weight > 0:
            raise ValueError(f"component weights must be positive, got {self.weight}")


@dataclass(frozen=True)
class PredictiveDensity:
    """Equally or explicitly weighted mixture of shifted residual atoms.

    The support is the multiset {mu_j + r : r in residuals_j}, each atom
    carrying weight_j / len(residuals_j). Component weights must sum to
    one.
    """

    components: tuple[DensityComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("density needs at least one component")
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"component weights must sum to 1, got {total!r}")

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Atom values and weights, components in order."""
        values = np.concatenate([c.mu + c.residuals for c in self.components])
        weights = np.concatenate(
            [np.full(c.residuals.size, c.weight / c.residuals.size) for c in self.components]
        )
        return values, weights

    @property
    def support_size(self) -> int:
        return sum(c.residuals.size for c in self.components)


def density_cdf(density: PredictiveDensity, value: float) -> float:
    """Total weight of support atoms <= value."""
    atoms, weights = density.support()
    return float(weights[atoms <= value].sum())


def tail_probability(density: PredictiveDensity, threshold: float) -> float:
    """Total weight of support atoms strictly greater than threshold."""
    atoms, weights = density.support()
    return float(weights[atoms > threshold].sum())


def density_quantile(density: PredictiveDensity, q: float) -> float:
    """Weighted empirical quantile, lower-interpolation convention.

    Returns the smallest support atom whose cumulative weight reaches q.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1), got {q}")
    atoms, weights = density.support()
    order = np.argsort(atoms, kind="stable")
    sorted_atoms = atoms[order]
    cum = np.cumsum(weights[order])
    i = int(np.searchsorted(cum, q, side="left"))
    return float(sorted_atoms[min(i, len(sorted_atoms) - 1)])


def ensemble_predict(
    series: MultiSeries,
    partitions: PartitionEnsemble,
    query_time: int,
    config: PredictionConfig,
    weights: tuple[float, ...] | None = None,
) -> PredictiveDensity:
    """Predictive density for the shared target at query_time + horizon.

    Per view: embed the series, keep only training rows whose target has
    already been observed at the query (t + horizon <= query_time, the
    strictest leakage rule), find the scheduled number of neighbors of
    the query delay vector outside the exclusion window, predict through
    the guarded local predictor and keep its neighbor residuals. Views
    are mixed with equal weights unless explicit weights are given.
    """
    specs = partitions.specs
    if not specs:
        raise ValueError("partition ensemble holds no delay maps")
    targets = {spec.target for spec in specs}
    horizons = {spec.horizon for spec in specs}
    if len(targets) > 1 or len(horizons) > 1:
        raise ValueError(
            f"all delay maps must share target and horizon, got {targets} / {horizons}"
        )
    if weights is None:
        weights = tuple(1.0 / len(specs) for _ in specs)
    if len(weights) != len(specs):
        raise ValueError(f"need {len(specs)} weights, got {len(weights)}")

    query_time = int(query_time)
    components = []
    for spec, weight in zip(specs, weights):
        if query_time < spec.maxlag or query_time >= series.n:
            raise ValueError(
                f"query_time {query_time} outside valid range "
                f"[{spec.maxlag}, {series.n - 1}] for coords {spec.coords}"
            )
        dataset = build_embedding(series, spec)
        train = dataset.take(dataset.t + spec.horizon <= query_time)
        if len(train) == 0:
            raise ValueError(
                f"insufficient history at query_time {query_time} for coords {spec.coords}"
            )
        query_vec = np.array(
            [series.column(obs)[query_time - lag] for obs, lag in spec.coords]
        )
        k = neighbor_schedule(len(train), config.c, config.gamma)
        neighbors = query_knn(
            build_index(train), query_vec, k, query_time, config.exclusion
        )
        outcome = fallback_predict(neighbors, train, query_vec, config.ridge)
        components.append(
            DensityComponent(
                mu=outcome.prediction,
                residuals=outcome.residuals,
                weight=weight,
                method=outcome.method,
            )
        )
    return PredictiveDensity(components=tuple(components))


@dataclass(frozen=True)
class CalibrationReport:
    """Out-of-sample calibration of the ensemble's densities.

    pit_values holds the predictive CDF evaluated at each realized
    truth; coverage maps each nominal central-interval level to the
    empirical hit rate. Results are correlation-unadjusted; spacing
    records the minimum gap between consecutive test times so the reader
    can judge how correlated the evaluations are.
    """

    pit_values: np.ndarray
    coverage: dict[float, float]
    test_times: np.ndarray
    spacing: int
    truths: np.ndarray = field(repr=False, default=None)

    def describe(self) -> dict:
        return {
            "pit_values": [float(v) for v in self.pit_values],
            "coverage": {format(k, "g"): v for k, v in sorted(self.coverage.items())},
            "test_times": [int(t) for t in self.test_times],
            "spacing": self.spacing,
        }


def central_interval(density: PredictiveDensity, level: float) -> tuple[float, float]:
    """Equal-tailed central interval [q((1-level)/2), q((1+level)/2)]."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    lo = density_quantile(density, (1.0 - level) / 2.0)
    hi = density_quantile(density, (1.0 + level) / 2.0)
    return lo, hi


def evaluate_calibration(
    series: MultiSeries,
    partitions: PartitionEnsemble,
    test_times,
    config: PredictionConfig,
) -> CalibrationReport:
    """PIT values and interval coverage over strictly increasing test times.

    Every prediction uses only data available at its test time; the
    truth is the target observable horizon steps later, so each test
    time must leave both enough history and an observed truth.
    """
    times = np.asarray(test_times, dtype=int)
    if times.ndim != 1 or len(times) < 1:
        raise ValueError("test_times must be a non-empty 1-D sequence")
    if len(times) > 1 and not (np.diff(times) > 0).all():
        raise ValueError("test_times must be strictly increasing")
    horizon = partitions.specs[0].horizon
    target = partitions.specs[0].target
    if times[-1] + horizon >= series.n:
        raise ValueError(
            f"test time {times[-1]} has no observed truth at horizon {horizon} "
            f"(series length {series.n})"
        )

    target_values = series.column(target)
    pit = np.empty(len(times))
    hits = {level: 0 for level in config.levels}
    for i, tau in enumerate(times):
        density = ensemble_predict(series, partitions, int(tau), config)
        truth = float(target_values[tau + horizon])
        pit[i] = density_cdf(density, truth)
        for level in config.levels:
            lo, hi = central_interval(density, level)
            hits[level] += lo <= truth <= hi
    coverage = {level: hits[level] / len(times) for level in config.levels}
    spacing = int(np.diff(times).min()) if len(times) > 1 else 0
    return CalibrationReport(
        pit_values=pit,
        coverage=coverage,
        test_times=times,
        spacing=spacing,
        truths=target_values[times + horizon].copy(),
    )
