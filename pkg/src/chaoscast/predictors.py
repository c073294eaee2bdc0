"""Local predictors over a neighborhood of delay vectors.

Two estimators of the target at a query point, given its nearest
neighbors:

* local mean — the unweighted average of the neighbor targets. Simple
  averaging is consistent as the neighbor count grows slower than the
  data, but it can never extrapolate past the observed targets.
* local linear — an affine fit to the neighbors, evaluated at the query
  even when the query lies outside the neighbor hull. Because the data
  lie on a smooth image of the attractor, the fitted plane approaches
  the local tangent plane, so the extrapolation is correct to first
  order instead of zeroth.

Neighborhoods are tiny and their spread can be tinier, so the design is
standardized inside the neighborhood (centered on the neighbor mean,
scaled by per-coordinate standard deviation) and the slopes are ridge-
stabilized. The intercept is never penalized, which keeps both
predictors exactly translation-equivariant in the targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddedDataset
from .neighbors import NeighborSet

# Per-coordinate spread below this is treated as zero and replaced by a
# unit scale, turning the coordinate into a constant column the ridge
# zeroes out.
DEGENERATE_SCALE = 1e-12

DEFAULT_RIDGE = 1e-6


class LocalSolveError(RuntimeError):
    """The local least-squares solve produced non-finite values."""


@dataclass(frozen=True)
class LocalLinearFit:
    """Affine fit over one neighborhood, in standardized coordinates.

    prediction = intercept + beta . (query - center) / scale. residuals
    holds one entry per neighbor (target minus fitted value); their mean
    is zero because the design is centered and the intercept is free.
    """

    intercept: float
    beta: np.ndarray
    ridge: float
    prediction: float
    residuals: np.ndarray
    center: np.ndarray
    scale: np.ndarray


@dataclass(frozen=True)
class FallbackPrediction:
    """Outcome of the guarded predictor: value, path taken, residuals."""

    prediction: float
    method: str  # "linear" or "mean"
    residuals: np.ndarray


def predict_local_mean(neighbors: NeighborSet, targets) -> float:
    """Unweighted mean of the neighbor targets.

    targets is the full per-row target vector of the dataset the
    neighbors were drawn from.
    """
    if len(neighbors.indices) == 0:
        raise ValueError("cannot average an empty neighbor set")
    targets = np.asarray(targets, dtype=float)
    return float(targets[neighbors.indices].mean())


def predict_local_linear(
    neighbors: NeighborSet,
    dataset: EmbeddedDataset,
    query,
    ridge: float = DEFAULT_RIDGE,
) -> LocalLinearFit:
    """Ridge-stabilized affine fit over the neighborhood.

    The neighbor design is centered on its mean and scaled by its
    per-coordinate standard deviation (unit scale where the deviation is
    degenerate). The ridge penalty applies to the slopes only; with the
    centered design the intercept is exactly the neighbor target mean.
    The solve uses a least-squares path on the ridge-augmented system,
    which matches the closed-form normal equations to high accuracy on
    well-conditioned input and stays stable otherwise.
    """
    idx = neighbors.indices
    if len(idx) < 2:
        raise ValueError(f"local linear fit needs >= 2 neighbors, got {len(idx)}")
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")

    x = dataset.x[idx]
    y = dataset.y[idx]
    q = np.asarray(query, dtype=float)
    center = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale < DEGENERATE_SCALE, 1.0, scale)
    z = (x - center) / scale
    zq = (q - center) / scale

    intercept = float(y.mean())
    rhs = y - intercept
    p = z.shape[1]
    if ridge > 0:
        design = np.vstack([z, np.sqrt(ridge) * np.eye(p)])
        rhs = np.concatenate([rhs, np.zeros(p)])
    else:
        design = z
    beta, *_ = np.linalg.lstsq(design, rhs, rcond=None)

    prediction = intercept + float(zq @ beta)
    residuals = y - (intercept + z @ beta)
    if not (np.isfinite(prediction) and np.isfinite(beta).all()):
        raise LocalSolveError("local linear solve produced non-finite values")
    return LocalLinearFit(
        intercept=intercept,
        beta=beta,
        ridge=float(ridge),
        prediction=prediction,
        residuals=residuals,
        center=center,
        scale=scale,
    )


def fallback_predict(
    neighbors: NeighborSet,
    dataset: EmbeddedDataset,
    query,
    ridge: float = DEFAULT_RIDGE,
) -> FallbackPrediction:
    """Local linear when it is statistically sensible, local mean otherwise.

    The linear path runs when the neighborhood holds at least p + 2
    points (one degree of freedom beyond interpolation) and the solve is
    finite; anything else falls back to the mean. The returned method
    tag records which path produced the value.
    """
    if len(neighbors.indices) == 0:
        raise ValueError("cannot predict from an empty neighbor set")
    p = dataset.p
    if len(neighbors.indices) >= p + 2:
        try:
            fit = predict_local_linear(neighbors, dataset, query, ridge)
        except LocalSolveError:
            pass
        else:
            return FallbackPrediction(
                prediction=fit.prediction, method="linear", residuals=fit.residuals
            )
    mean = predict_local_mean(neighbors, dataset.y)
    residuals = dataset.y[neighbors.indices] - mean
    return FallbackPrediction(prediction=mean, method="mean", residuals=residuals)
