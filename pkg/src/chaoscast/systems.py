"""Benchmark chaotic systems sampled as aligned scalar observable series.

Two discrete maps (logistic, Henon) and two flows (Lorenz, Rossler) in
their canonical chaotic regimes. Flows are integrated with classical
fixed-step RK4 so that sampling stays uniform, which everything
downstream (delay embedding in integer lag steps) relies on.

All generators are pure functions of their spec: the same spec and
length reproduce bit-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAP_KINDS = ("logistic", "henon")
FLOW_KINDS = ("lorenz", "rossler")
SYSTEM_KINDS = MAP_KINDS + FLOW_KINDS

DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "logistic": {"r": 3.9},
    "henon": {"a": 1.4, "b": 0.3},
    "lorenz": {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0},
    "rossler": {"a": 0.2, "b": 0.2, "c": 5.7},
}

DEFAULT_DT: dict[str, float] = {"lorenz": 0.01, "rossler": 0.05}

DEFAULT_X0: dict[str, tuple[float, ...]] = {
    "logistic": (0.5,),
    "henon": (0.0, 0.0),
    "lorenz": (1.0, 1.0, 1.0),
    "rossler": (1.0, 1.0, 1.0),
}

OBSERVABLE_NAMES: dict[str, tuple[str, ...]] = {
    "logistic": ("x",),
    "henon": ("x", "y"),
    "lorenz": ("x", "y", "z"),
    "rossler": ("x", "y", "z"),
}

# Any trajectory leaving this box is treated as numerically divergent.
DIVERGENCE_LIMIT = 1.0e6


class DivergenceError(RuntimeError):
    """A trajectory left the divergence guard box or became non-finite."""


@dataclass(frozen=True)
class SystemSpec:
    """Fully resolved description of one benchmark system.

    kind       one of SYSTEM_KINDS
    params     named real parameters of the map / vector field
    dt         integration step in model time units (flows only, None for maps)
    transient  burn-in steps discarded before the first recorded sample
    x0         initial state, dimension matching the kind
    """

    kind: str
    params: dict[str, float] = field(default_factory=dict)
    dt: float | None = None
    transient: int = 0
    x0: tuple[float, ...] = ()

    @property
    def is_flow(self) -> bool:
        return self.kind in FLOW_KINDS

    @property
    def observable_names(self) -> tuple[str, ...]:
        return OBSERVABLE_NAMES[self.kind]

    def describe(self) -> dict:
        """JSON-ready dict of the resolved spec (stable key content)."""
        return {
            "kind": self.kind,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "dt": self.dt,
            "transient": self.transient,
            "x0": list(self.x0),
        }


def system_spec(
    kind: str,
    params: dict[str, float] | None = None,
    dt: float | None = None,
    transient: int = 0,
    x0: tuple[float, ...] | None = None,
) -> SystemSpec:
    """Build a validated SystemSpec, filling canonical defaults.

    Raises ValueError naming the offending field when a value is out of
    range or does not match the system kind.
    """
    if kind not in SYSTEM_KINDS:
        raise ValueError(f"kind must be one of {SYSTEM_KINDS}, got {kind!r}")
    merged = dict(DEFAULT_PARAMS[kind])
    for name, value in (params or {}).items():
        if name not in merged:
            raise ValueError(f"params: unknown parameter {name!r} for {kind}")
        merged[name] = float(value)
    if kind in FLOW_KINDS:
        dt = DEFAULT_DT[kind] if dt is None else float(dt)
        if not dt > 0:
            raise ValueError(f"dt must be > 0 for flows, got {dt}")
    else:
        dt = None  # dt is meaningless for maps and is dropped
    transient = int(transient)
    if transient < 0:
        raise ValueError(f"transient must be >= 0, got {transient}")
    default_x0 = DEFAULT_X0[kind]
    x0 = default_x0 if x0 is None else tuple(float(v) for v in x0)
    if len(x0) != len(default_x0):
        raise ValueError(
            f"x0 must have dimension {len(default_x0)} for {kind}, got {len(x0)}"
        )
    return SystemSpec(kind=kind, params=merged, dt=dt, transient=transient, x0=x0)


@dataclass(frozen=True)
class MultiSeries:
    """K aligned, uniformly sampled scalar observable series.

    values is an (n, K) float array; names labels the columns; step is
    the sampling interval (dt for flows, 1.0 for maps). Every sample is
    finite and the columns share length and alignment.
    """

    names: tuple[str, ...]
    values: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D (n, K), got shape {values.shape}")
        if values.shape[1] != len(self.names):
            raise ValueError(
                f"names length {len(self.names)} does not match K={values.shape[1]}"
            )
        if values.shape[0] < 1:
            raise ValueError("series must contain at least one sample")
        if not np.isfinite(values).all():
            raise ValueError("series values must all be finite")
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def resolve(self, observable: int | str) -> int:
        """Map an observable id (column index or name) to its column."""
        if isinstance(observable, str):
            try:
                return self.names.index(observable)
            except ValueError:
                raise ValueError(
                    f"unknown observable {observable!r}; have {list(self.names)}"
                ) from None
        idx = int(observable)
        if not 0 <= idx < self.k:
            raise ValueError(f"unknown observable index {idx}; have K={self.k}")
        return idx

    def column(self, observable: int | str) -> np.ndarray:
        return self.values[:, self.resolve(observable)]


def _guard(state_max: float, step_no: int) -> None:
    if not math.isfinite(state_max) or state_max > DIVERGENCE_LIMIT:
        raise DivergenceError(
            f"trajectory diverged at step {step_no}: |state| exceeded {DIVERGENCE_LIMIT:g}"
        )


def iterate_map(spec: SystemSpec, n: int) -> MultiSeries:
    """Iterate a discrete map and return n post-transient states.

    The first row is the state after `transient` applications of the
    map; each following row advances one application. Logistic yields a
    single series (x), Henon two (x, y).
    """
    if spec.kind not in MAP_KINDS:
        raise ValueError(f"iterate_map requires a map kind, got {spec.kind!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")

    if spec.kind == "logistic":
        r = spec.params["r"]
        x = float(spec.x0[0])
        out = np.empty((n, 1))
        step_no = 0
        for _ in range(spec.transient):
            x = r * x * (1.0 - x)
            step_no += 1
            _guard(abs(x), step_no)
        out[0, 0] = x
        for i in range(1, n):
            x = r * x * (1.0 - x)
            step_no += 1
            _guard(abs(x), step_no)
            out[i, 0] = x
    else:  # henon
        a, b = spec.params["a"], spec.params["b"]
        x, y = float(spec.x0[0]), float(spec.x0[1])
        out = np.empty((n, 2))
        step_no = 0
        for _ in range(spec.transient):
            x, y = 1.0 - a * x * x + y, b * x
            step_no += 1
            _guard(max(abs(x), abs(y)), step_no)
        out[0] = (x, y)
        for i in range(1, n):
            x, y = 1.0 - a * x * x + y, b * x
            step_no += 1
            _guard(max(abs(x), abs(y)), step_no)
            out[i] = (x, y)

    return MultiSeries(names=spec.observable_names, values=out, step=1.0)


def _lorenz_rhs(s: np.ndarray, p: dict[str, float]) -> np.ndarray:
    x, y, z = s
    return np.array(
        [p["sigma"] * (y - x), x * (p["rho"] - z) - y, x * y - p["beta"] * z]
    )


def _rossler_rhs(s: np.ndarray, p: dict[str, float]) -> np.ndarray:
    x, y, z = s
    return np.array([-y - z, x + p["a"] * y, p["b"] + z * (x - p["c"])])


_RHS = {"lorenz": _lorenz_rhs, "rossler": _rossler_rhs}


def _rk4_step(rhs, s: np.ndarray, dt: float, params: dict[str, float]) -> np.ndarray:
    k1 = rhs(s, params)
    k2 = rhs(s + 0.5 * dt * k1, params)
    k3 = rhs(s + 0.5 * dt * k2, params)
    k4 = rhs(s + dt * k3, params)
    return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_flow(spec: SystemSpec, n: int) -> MultiSeries:
    """Sample a flow with fixed-step RK4 at interval dt.

    Returns n post-transient samples of all state coordinates (K=3).
    The first row is the state after `transient` RK4 steps.
    """
    if spec.kind not in FLOW_KINDS:
        raise ValueError(f"integrate_flow requires a flow kind, got {spec.kind!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    assert spec.dt is not None and spec.dt > 0

    rhs = _RHS[spec.kind]
    s = np.array(spec.x0, dtype=float)
    step_no = 0
    for _ in range(spec.transient):
        s = _rk4_step(rhs, s, spec.dt, spec.params)
        step_no += 1
        _guard(float(np.abs(s).max()), step_no)
    out = np.empty((n, 3))
    out[0] = s
    for i in range(1, n):
        s = _rk4_step(rhs, s, spec.dt, spec.params)
        step_no += 1
        _guard(float(np.abs(s).max()), step_no)
        out[i] = s

    return MultiSeries(names=spec.observable_names, values=out, step=spec.dt)


def generate(spec: SystemSpec, n: int) -> MultiSeries:
    """Dispatch to iterate_map or integrate_flow by spec kind."""
    if spec.kind in MAP_KINDS:
        return iterate_map(spec, n)
    return integrate_flow(spec, n)
