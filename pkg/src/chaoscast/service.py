"""HTTP service exposing the toolkit to multiple clients.

Stateless JSON-over-HTTP wrapper: every endpoint receives the series
inline, runs the corresponding core operation, and returns the same
payload the CLI would write as an artifact. Run with:

    uvicorn chaoscast.service:app
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .embedding import DelayMapSpec, build_embedding, make_partitions
from .ensemble import PredictionConfig
from .runs import (
    boxdim_report,
    calibration_report,
    causal_prediction_rows,
    default_test_times,
    ensemble_report,
    selfintersect_report,
)
from .systems import MultiSeries, generate, system_spec

Observable = int | str


class SeriesModel(BaseModel):
    names: list[str]
    values: list[list[float]]
    step: float = 1.0

    def to_series(self) -> MultiSeries:
        return MultiSeries(
            names=tuple(self.names), values=np.asarray(self.values), step=self.step
        )

    @classmethod
    def from_series(cls, series: MultiSeries) -> "SeriesModel":
        return cls(
            names=list(series.names),
            values=[list(map(float, row)) for row in series.values],
            step=series.step,
        )


class SystemModel(BaseModel):
    kind: str
    params: dict[str, float] = Field(default_factory=dict)
    dt: float | None = None
    transient: int = 0
    x0: list[float] | None = None


class DelayMapModel(BaseModel):
    coords: list[tuple[Observable, int]]
    target: Observable
    horizon: int = 1

    def to_spec(self) -> DelayMapSpec:
        return DelayMapSpec(
            coords=tuple((obs, lag) for obs, lag in self.coords),
            target=self.target,
            horizon=self.horizon,
        )


class PredictionConfigModel(BaseModel):
    c: float = 1.0
    gamma: float = 0.5
    ridge: float = 1e-6
    exclusion: int = 0

    def to_config(self) -> PredictionConfig:
        return PredictionConfig(
            c=self.c, gamma=self.gamma, ridge=self.ridge, exclusion=self.exclusion
        )


class PartitionModel(BaseModel):
    p: int
    count: int
    seed: int = 0
    mode: str = "strict"
    lag_pool: list[int] = Field(default_factory=lambda: list(range(10)))
    target: Observable
    horizon: int = 1


class GenerateRequest(BaseModel):
    system: SystemModel
    n: int


class EmbedRequest(BaseModel):
    series: SeriesModel
    spec: DelayMapModel


class EmbedResponse(BaseModel):
    t: list[int]
    x: list[list[float]]
    y: list[float]
    spec: DelayMapModel


class BoxdimRequest(BaseModel):
    series: SeriesModel
    eps_grid: list[float]


class SelfIntersectRequest(BaseModel):
    series: SeriesModel
    spec: DelayMapModel
    delta: float
    epsilon: float


class PredictRequest(BaseModel):
    series: SeriesModel
    spec: DelayMapModel
    test_count: int = 100
    config: PredictionConfigModel = Field(default_factory=PredictionConfigModel)


class EnsembleRequest(BaseModel):
    series: SeriesModel
    partitions: PartitionModel
    query_time: int | None = None
    thresholds: list[float] = Field(default_factory=list)
    config: PredictionConfigModel = Field(default_factory=PredictionConfigModel)


class CalibrateRequest(BaseModel):
    series: SeriesModel
    partitions: PartitionModel
    test_count: int = 200
    spacing: int | None = None
    config: PredictionConfigModel = Field(default_factory=PredictionConfigModel)


app = FastAPI(
    title="chaoscast",
    version=__version__,
    description="Delay-embedding forecasting for stationary chaotic systems.",
)


def _bad_request(exc: ValueError) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def _make_partitions(series: MultiSeries, model: PartitionModel):
    return make_partitions(
        observables=series.names,
        p=model.p,
        count=model.count,
        seed=model.seed,
        mode=model.mode,
        lag_pool=tuple(model.lag_pool),
        target=model.target,
        horizon=model.horizon,
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/generate", response_model=SeriesModel)
def generate_endpoint(req: GenerateRequest) -> SeriesModel:
    try:
        spec = system_spec(
            kind=req.system.kind,
            params=req.system.params,
            dt=req.system.dt,
            transient=req.system.transient,
            x0=tuple(req.system.x0) if req.system.x0 is not None else None,
        )
        series = generate(spec, req.n)
    except ValueError as exc:
        raise _bad_request(exc)
    return SeriesModel.from_series(series)


@app.post("/embed", response_model=EmbedResponse)
def embed_endpoint(req: EmbedRequest) -> EmbedResponse:
    try:
        dataset = build_embedding(req.series.to_series(), req.spec.to_spec())
    except ValueError as exc:
        raise _bad_request(exc)
    return EmbedResponse(
        t=[int(v) for v in dataset.t],
        x=[list(map(float, row)) for row in dataset.x],
        y=[float(v) for v in dataset.y],
        spec=req.spec,
    )


@app.post("/boxdim")
def boxdim_endpoint(req: BoxdimRequest) -> dict:
    try:
        return boxdim_report(req.series.to_series().values, tuple(req.eps_grid))
    except ValueError as exc:
        raise _bad_request(exc)


@app.post("/selfintersect")
def selfintersect_endpoint(req: SelfIntersectRequest) -> dict:
    try:
        return selfintersect_report(
            req.series.to_series(), req.spec.to_spec(), req.delta, req.epsilon
        )
    except ValueError as exc:
        raise _bad_request(exc)


@app.post("/predict")
def predict_endpoint(req: PredictRequest) -> dict:
    try:
        rows = causal_prediction_rows(
            req.series.to_series(),
            req.spec.to_spec(),
            req.test_count,
            req.config.to_config(),
        )
    except ValueError as exc:
        raise _bad_request(exc)
    return {"rows": rows}


@app.post("/ensemble")
def ensemble_endpoint(req: EnsembleRequest) -> dict:
    try:
        series = req.series.to_series()
        partitions = _make_partitions(series, req.partitions)
        query_time = series.n - 1 if req.query_time is None else req.query_time
        payload = ensemble_report(
            series, partitions, query_time, req.config.to_config(), req.thresholds
        )
        payload["partitions"] = partitions.describe()
    except ValueError as exc:
        raise _bad_request(exc)
    return payload


@app.post("/calibrate")
def calibrate_endpoint(req: CalibrateRequest) -> dict:
    try:
        series = req.series.to_series()
        partitions = _make_partitions(series, req.partitions)
        config = req.config.to_config()
        spacing = max(1, config.exclusion) if req.spacing is None else req.spacing
        times = default_test_times(series, partitions, req.test_count, spacing, config)
        payload = calibration_report(series, partitions, times, config)
        payload["partitions"] = partitions.describe()
    except ValueError as exc:
        raise _bad_request(exc)
    return payload
