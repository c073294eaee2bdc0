"""Delay-coordinate maps and their geometry diagnostics.

A delay map turns K aligned observable series into vectors of lagged
values x_t = (s_{o1}[t - l1], ..., s_{op}[t - lp]) paired with a forward
target y_t = s_target[t + horizon]. This module builds those datasets,
draws disjoint random partitions of the observables into several maps,
and measures two geometric properties of a map on sampled data:

* box-counting dimension of a point cloud (occupied-cube scaling), and
* the delta-distant self-intersection set: sample points whose delay
  image nearly coincides with the image of a point far away in state
  space, i.e. where prediction from the map alone is ambiguous.

Exact image equality has probability zero on samples, so coincidence is
relaxed to an image-space tolerance epsilon.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .systems import MultiSeries

DEFAULT_LAG_POOL = tuple(range(10))

PARTITION_MODES = ("strict", "coordinate-disjoint")


@dataclass(frozen=True)
class DelayMapSpec:
    """One concrete delay coordinate map.

    coords   ordered (observable id, lag) pairs; ids are column indices
             or observable names, lags are non-negative sample offsets
             into the past
    target   observable the map predicts
    horizon  forward offset of the target, in samples (>= 1)
    """

    coords: tuple[tuple[int | str, int], ...]
    target: int | str
    horizon: int = 1

    def __post_init__(self):
        coords = tuple((obs, int(lag)) for obs, lag in self.coords)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "horizon", int(self.horizon))
        if len(coords) < 1:
            raise ValueError("coords must contain at least one (observable, lag) pair")
        if len(set(coords)) != len(coords):
            raise ValueError(f"coords must be pairwise distinct, got {coords}")
        if any(lag < 0 for _, lag in coords):
            raise ValueError("lags must be >= 0")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    @property
    def p(self) -> int:
        return len(self.coords)

    @property
    def maxlag(self) -> int:
        return max(lag for _, lag in self.coords)

    def describe(self) -> dict:
        return {
            "coords": [[obs, lag] for obs, lag in self.coords],
            "target": self.target,
            "horizon": self.horizon,
        }


@dataclass(frozen=True)
class EmbeddedDataset:
    """Rows (x_t, y_t, t) of a delay map applied to a series.

    x has shape (m, p), y shape (m,), t shape (m,) with the anchor time
    of each row. Row t uses only samples at times <= t for x and the
    single sample at t + horizon for y.
    """

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    spec: DelayMapSpec

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=int))
        if self.x.ndim != 2 or len(self.x) != len(self.y) or len(self.y) != len(self.t):
            raise ValueError("x, y, t must be aligned (m, p) / (m,) / (m,) arrays")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def take(self, rows) -> "EmbeddedDataset":
        """Row subset (mask or index array) keeping original times."""
        return EmbeddedDataset(self.x[rows], self.y[rows], self.t[rows], self.spec)


def build_embedding(series: MultiSeries, spec: DelayMapSpec) -> EmbeddedDataset:
    """Apply a delay map to a series.

    Produces n - maxlag - horizon rows ordered by time; raises if an
    observable is unknown or the series is too short to produce a row.
    """
    cols = [series.resolve(obs) for obs, _ in spec.coords]
    target_col = series.resolve(spec.target)
    need = spec.maxlag + spec.horizon
    if series.n <= need:
        raise ValueError(
            f"series too short: n={series.n} <= maxlag + horizon = {need}"
        )
    ts = np.arange(spec.maxlag, series.n - spec.horizon)
    x = np.column_stack(
        [series.values[ts - lag, col] for (_, lag), col in zip(spec.coords, cols)]
    )
    y = series.values[ts + spec.horizon, target_col]
    return EmbeddedDataset(x=x, y=y, t=ts, spec=spec)


@dataclass(frozen=True)
class PartitionEnsemble:
    """Several delay maps drawn to be mutually disjoint.

    mode "strict": no observable appears in two maps (the measurement
    functions themselves are disjoint). mode "coordinate-disjoint": no
    (observable, lag) pair appears twice, but observables may be shared
    at different lags.
    """

    specs: tuple[DelayMapSpec, ...]
    mode: str
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        if self.mode not in PARTITION_MODES:
            raise ValueError(f"mode must be one of {PARTITION_MODES}, got {self.mode!r}")
        if self.mode == "strict":
            seen: set = set()
            for spec in self.specs:
                for obs, _ in spec.coords:
                    if obs in seen:
                        raise ValueError(
                            f"strict mode violated: observable {obs!r} appears twice"
                        )
                seen.update(obs for obs, _ in spec.coords)
        else:
            seen_pairs: set = set()
            for spec in self.specs:
                for pair in spec.coords:
                    if pair in seen_pairs:
                        raise ValueError(
                            f"coordinate-disjoint mode violated: {pair} appears twice"
                        )
                    seen_pairs.add(pair)

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "specs": [s.describe() for s in self.specs],
        }


def make_partitions(
    observables: int | tuple,
    p: int,
    count: int,
    seed: int,
    mode: str = "strict",
    lag_pool: tuple[int, ...] = DEFAULT_LAG_POOL,
    target: int | str | None = None,
    horizon: int = 1,
) -> PartitionEnsemble:
    """Draw `count` disjoint delay maps of dimension p over K observables.

    observables is the count K (ids become 0..K-1) or an explicit id
    sequence. Draws use the PCG64 stream seeded with `seed`, so equal
    arguments reproduce the ensemble bit for bit. In strict mode each
    map receives p distinct observables (requires p * count <= K) with
    lags drawn without replacement from lag_pool; in coordinate-disjoint
    mode the (observable, lag) pairs themselves are drawn without
    replacement from the full product pool.
    """
    ids: tuple = tuple(range(observables)) if isinstance(observables, int) else tuple(observables)
    K = len(ids)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    lag_pool = tuple(int(l) for l in lag_pool)
    if len(set(lag_pool)) != len(lag_pool) or any(l < 0 for l in lag_pool):
        raise ValueError("lag_pool must be distinct non-negative lags")
    if target is None:
        target = ids[0]

    rng = np.random.Generator(np.random.PCG64(seed))
    specs = []
    if mode == "strict":
        if p * count > K:
            raise ValueError(
                f"strict partitions infeasible: p * count = {p * count} > K = {K}"
            )
        if p > len(lag_pool):
            raise ValueError(
                f"p = {p} exceeds lag pool size {len(lag_pool)} (lags drawn without replacement)"
            )
        order = rng.permutation(K)
        for j in range(count):
            block = order[j * p : (j + 1) * p]
            lags = rng.choice(np.asarray(lag_pool), size=p, replace=False)
            coords = tuple((ids[i], int(lag)) for i, lag in zip(block, lags))
            specs.append(DelayMapSpec(coords=coords, target=target, horizon=horizon))
    elif mode == "coordinate-disjoint":
        pool = [(obs, lag) for obs in ids for lag in lag_pool]
        if p * count > len(pool):
            raise ValueError(
                f"coordinate-disjoint partitions infeasible: p * count = {p * count} "
                f"> K * |lag_pool| = {len(pool)}"
            )
        order = rng.permutation(len(pool))
        for j in range(count):
            coords = tuple(pool[i] for i in order[j * p : (j + 1) * p])
            specs.append(DelayMapSpec(coords=coords, target=target, horizon=horizon))
    else:
        raise ValueError(f"mode must be one of {PARTITION_MODES}, got {mode!r}")

    return PartitionEnsemble(specs=tuple(specs), mode=mode, seed=seed)


# --------------------------------------------------------------------------
# box-counting dimension
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxDimEstimate:
    """Occupied-cube counts over a decreasing grid of cube sides.

    d is the least-squares slope of log(count) against -log(eps); r2 the
    quality of that fit. Counts are non-increasing in eps for nested
    (e.g. dyadic) grids.
    """

    eps_grid: tuple[float, ...]
    counts: tuple[int, ...]
    d: float
    r2: float

    @property
    def min_embedding_dim(self) -> int:
        """Smallest integer dimension strictly above twice the estimate.

        Delay maps of at least this dimension are generically one-to-one
        and immersive on a set of this box dimension.
        """
        return int(math.floor(2.0 * self.d)) + 1

    def describe(self) -> dict:
        return {
            "eps_grid": list(self.eps_grid),
            "counts": list(self.counts),
            "d": self.d,
            "r2": self.r2,
        }


def count_occupied_boxes(points: np.ndarray, eps: float) -> int:
    """Number of axis-aligned cubes of side eps containing a point.

    Cubes are anchored at the minimal corner of the data bounding box;
    anchoring shifts counts by O(1) factors only, never the slope.
    """
    pts = np.asarray(points, dtype=float)
    cells = np.floor((pts - pts.min(axis=0)) / eps).astype(np.int64)
    return len(np.unique(cells, axis=0))


def estimate_box_dimension(points, eps_grid) -> BoxDimEstimate:
    """Box-counting dimension of a point cloud over a grid of scales.

    eps_grid must be strictly decreasing and positive with at least two
    entries. A fit with r2 below 0.95 triggers a RuntimeWarning but is
    still returned; judging usability is the caller's business.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("points must be an (m >= 2, k) array")
    grid = tuple(float(e) for e in eps_grid)
    if len(grid) < 2:
        raise ValueError("eps_grid must contain at least two scales")
    if any(e <= 0 for e in grid):
        raise ValueError("eps_grid entries must be positive")
    if any(a <= b for a, b in zip(grid, grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing")

    counts = tuple(count_occupied_boxes(pts, e) for e in grid)
    logs = -np.log(np.asarray(grid))
    logn = np.log(np.asarray(counts, dtype=float))
    design = np.column_stack([logs, np.ones_like(logs)])
    coef, *_ = np.linalg.lstsq(design, logn, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((logn - fitted) ** 2))
    ss_tot = float(np.sum((logn - logn.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - ss_res / ss_tot
    d = float(coef[0])
    if r2 < 0.95:
        warnings.warn(
            f"box-count fit r2 = {r2:.3f} below 0.95; slope may be unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    return BoxDimEstimate(eps_grid=grid, counts=counts, d=d, r2=r2)


# --------------------------------------------------------------------------
# delta-distant self-intersections
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SelfIntersectionReport:
    """Sample estimate of a delay map's ambiguous set.

    Row i is flagged iff some row j sits more than delta away in the
    reference state space while the delay images lie within epsilon of
    each other. flagged holds sorted row positions; fraction is
    |flagged| / n_rows.
    """

    delta: float
    epsilon: float
    flagged: tuple[int, ...]
    n_rows: int
    fraction: float

    def flagged_set(self) -> frozenset:
        return frozenset(self.flagged)

    def describe(self) -> dict:
        return {
            "delta": self.delta,
            "epsilon": self.epsilon,
            "flagged": list(self.flagged),
            "n_rows": self.n_rows,
            "fraction": self.fraction,
        }


def find_self_intersections(
    dataset: EmbeddedDataset,
    state_points: np.ndarray,
    delta: float,
    epsilon: float,
) -> SelfIntersectionReport:
    """Flag rows whose delay image collides with a state-distant row.

    state_points is the reference full-state trajectory aligned row for
    row with the dataset. Image-space candidate pairs come from a k-d
    tree radius search, which returns exactly the pairs a full O(n^2)
    scan would (Euclidean distance <= epsilon); the state-space distance
    filter (> delta) is then applied to those pairs. Both members of a
    qualifying pair are flagged, so flagging is symmetric.
    """
    states = np.asarray(state_points, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if len(states) != len(dataset):
        raise ValueError(
            f"state_points misaligned: {len(states)} rows vs dataset {len(dataset)}"
        )
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")

    tree = cKDTree(dataset.x)
    pairs = tree.query_pairs(epsilon, output_type="ndarray")
    flagged: set[int] = set()
    if len(pairs):
        state_dist = np.linalg.norm(states[pairs[:, 0]] - states[pairs[:, 1]], axis=1)
        hits = pairs[state_dist > delta]
        flagged.update(int(i) for i in hits[:, 0])
        flagged.update(int(j) for j in hits[:, 1])
    n_rows = len(dataset)
    return SelfIntersectionReport(
        delta=float(delta),
        epsilon=float(epsilon),
        flagged=tuple(sorted(flagged)),
        n_rows=n_rows,
        fraction=len(flagged) / n_rows,
    )


@dataclass(frozen=True)
class OverlapRecord:
    """How much two ambiguous sets share, with no judgment attached."""

    n_rows: int
    overlap_count: int
    overlap_fraction: float
    fraction_first: float
    fraction_second: float

    def describe(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "overlap_count": self.overlap_count,
            "overlap_fraction": self.overlap_fraction,
            "fraction_first": self.fraction_first,
            "fraction_second": self.fraction_second,
        }


def intersection_overlap(
    first: SelfIntersectionReport, second: SelfIntersectionReport
) -> OverlapRecord:
    """Shared fraction of two self-intersection reports over equal rows."""
    if first.n_rows != second.n_rows:
        raise ValueError(
            f"reports cover different row sets: {first.n_rows} vs {second.n_rows}"
        )
    shared = first.flagged_set() & second.flagged_set()
    return OverlapRecord(
        n_rows=first.n_rows,
        overlap_count=len(shared),
        overlap_fraction=len(shared) / first.n_rows,
        fraction_first=first.fraction,
        fraction_second=second.fraction,
    )


@dataclass(frozen=True)
class AmbiguityDecomposition:
    """Test rows split by which of two delay maps is ambiguous there.

    both / only_first / only_second / neither partition all row indices
    exactly once. paired_predictions carries, per row, the predictions
    produced from each map: wherever a map is unambiguous its prediction
    is trustworthy, so outside `both` at least one entry of the pair is.
    """

    both: tuple[int, ...]
    only_first: tuple[int, ...]
    only_second: tuple[int, ...]
    neither: tuple[int, ...]
    paired_predictions: np.ndarray

    def describe(self) -> dict:
        return {
            "both": list(self.both),
            "only_first": list(self.only_first),
            "only_second": list(self.only_second),
            "neither": list(self.neither),
            "paired_predictions": [list(row) for row in np.asarray(self.paired_predictions)],
        }


def decompose_ambiguity(
    first: SelfIntersectionReport,
    second: SelfIntersectionReport,
    paired_predictions,
) -> AmbiguityDecomposition:
    """Partition rows by joint ambiguity and attach prediction pairs."""
    if first.n_rows != second.n_rows:
        raise ValueError(
            f"reports cover different row sets: {first.n_rows} vs {second.n_rows}"
        )
    preds = np.asarray(paired_predictions, dtype=float)
    if preds.shape != (first.n_rows, 2):
        raise ValueError(
            f"paired_predictions must have shape ({first.n_rows}, 2), got {preds.shape}"
        )
    f1, f2 = first.flagged_set(), second.flagged_set()
    every = range(first.n_rows)
    return AmbiguityDecomposition(
        both=tuple(sorted(f1 & f2)),
        only_first=tuple(sorted(f1 - f2)),
        only_second=tuple(sorted(f2 - f1)),
        neither=tuple(i for i in every if i not in f1 and i not in f2),
        paired_predictions=preds,
    )
