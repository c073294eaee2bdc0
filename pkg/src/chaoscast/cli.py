"""Command-line surface: reproducible one-shot experiment runs.

Subcommands: generate, embed, boxdim, selfintersect, predict, ensemble,
calibrate. Options come from flags or a single JSON config file, flags
winning on conflict. Every run validates its full configuration before
doing any work, writes self-describing artifacts (each embeds the
resolved configuration and seed, minus output location), prints a
one-line summary, and exits 0 on success, 2 on a validation problem, 1
on a runtime failure. Identical configuration and seed produce
byte-identical artifacts; all randomness flows from a single PCG64
stream seeded with --seed.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .embedding import (
    DEFAULT_LAG_POOL,
    DelayMapSpec,
    PARTITION_MODES,
    make_partitions,
)
from .ensemble import PredictionConfig
from .runs import (
    boxdim_report,
    calibration_report,
    causal_prediction_rows,
    default_test_times,
    ensemble_report,
    selfintersect_report,
)
from .serialize import (
    read_series_csv,
    write_embedded_csv,
    write_json_artifact,
    write_jsonl_artifact,
    write_pit_csv,
    write_series_csv,
)
from .systems import SYSTEM_KINDS
from .systems import generate as generate_series
from .systems import system_spec
from .embedding import build_embedding

DEFAULT_EPS_GRID = tuple(2.0 ** -k for k in range(1, 8))


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field."""


# ----------------------------------------------------------------------
# option parsing helpers (accept CLI strings or config-file natives)
# ----------------------------------------------------------------------

def _parse_float_list(value, fieldname: str) -> tuple[float, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    else:
        parts = list(value)
    try:
        return tuple(float(v) for v in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"{fieldname}: expected comma-separated numbers, got {value!r}")


def _parse_int_list(value, fieldname: str) -> tuple[int, ...]:
    if isinstance(value, str):
        out: list[int] = []
        for token in value.split(","):
            token = token.strip()
            if not token:
                continue
            m = re.fullmatch(r"(\d+)-(\d+)", token)
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                out.extend(range(lo, hi + 1))
            elif token.lstrip("-").isdigit():
                out.append(int(token))
            else:
                raise ConfigError(f"{fieldname}: cannot parse {token!r}")
        return tuple(out)
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{fieldname}: expected integers, got {value!r}")


def _parse_observable(token):
    if isinstance(token, str) and token.lstrip("-").isdigit():
        return int(token)
    return token


def _parse_coords(value, fieldname: str = "coords"):
    if isinstance(value, str):
        pairs = []
        for part in value.split(","):
            part = part.strip()
            if not part:
                continue
            if ":" not in part:
                raise ConfigError(f"{fieldname}: expected OBS:LAG entries, got {part!r}")
            obs, lag = part.rsplit(":", 1)
            if not lag.isdigit():
                raise ConfigError(f"{fieldname}: lag must be a non-negative integer in {part!r}")
            pairs.append((_parse_observable(obs), int(lag)))
        if not pairs:
            raise ConfigError(f"{fieldname}: no coordinates given")
        return tuple(pairs)
    try:
        return tuple((_parse_observable(obs), int(lag)) for obs, lag in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{fieldname}: expected (observable, lag) pairs, got {value!r}")


def _parse_params(value, fieldname: str = "params") -> dict:
    if value is None:
        return {}
    if isinstance(value, dict):
        return {str(k): float(v) for k, v in value.items()}
    out = {}
    for part in str(value).split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"{fieldname}: expected NAME=VALUE entries, got {part!r}")
        name, raw = part.split("=", 1)
        try:
            out[name.strip()] = float(raw)
        except ValueError:
            raise ConfigError(f"{fieldname}: {raw!r} is not a number")
    return out


def _delay_spec(cfg) -> DelayMapSpec:
    coords = _parse_coords(cfg["coords"])
    horizon = int(cfg["horizon"])
    if horizon < 1:
        raise ConfigError(f"horizon must be >= 1, got {horizon}")
    try:
        return DelayMapSpec(
            coords=coords, target=_parse_observable(cfg["target"]), horizon=horizon
        )
    except ValueError as exc:
        raise ConfigError(f"coords: {exc}")


def _prediction_config(cfg) -> PredictionConfig:
    try:
        return PredictionConfig(
            c=float(cfg["c"]),
            gamma=float(cfg["gamma"]),
            ridge=float(cfg["ridge"]),
            exclusion=int(cfg["exclusion"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _require(cfg, fields) -> None:
    for field in fields:
        if cfg.get(field) is None:
            raise ConfigError(f"{field} is required")


def _require_input(cfg) -> None:
    _require(cfg, ["input"])
    if not Path(cfg["input"]).exists():
        raise ConfigError(f"input: file not found: {cfg['input']}")


def _embeddable_config(cfg) -> dict:
    """Resolved config as embedded in artifacts: everything but location."""
    out = {}
    for key, value in cfg.items():
        if key == "out":
            continue
        if isinstance(value, Path):
            value = str(value)
        out[key] = value
    return out


def _artifact_header(command: str, cfg: dict) -> dict:
    return {"command": command, "seed": cfg["seed"], "config": _embeddable_config(cfg)}


# ----------------------------------------------------------------------
# subcommand runners
# ----------------------------------------------------------------------

def _run_generate(cfg) -> str:
    try:
        spec = system_spec(
            kind=cfg["system"],
            params=_parse_params(cfg.get("params")),
            dt=cfg.get("dt"),
            transient=int(cfg["transient"]),
            x0=_parse_float_list(cfg.get("x0"), "x0") or None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    n = int(cfg["n"])
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")

    series = generate_series(spec, n)
    path = Path(cfg["out"]) / f"{cfg['name']}.csv"
    meta = _artifact_header("generate", cfg)
    meta["system"] = spec.describe()
    meta["step"] = series.step
    write_series_csv(path, series, meta)
    return f"generate: wrote {path} ({series.n} samples, K={series.k}, system={spec.kind})"


def _run_embed(cfg) -> str:
    spec = _delay_spec(cfg)
    series, _ = read_series_csv(cfg["input"])
    dataset = build_embedding(series, spec)
    path = Path(cfg["out"]) / f"{cfg['name']}.csv"
    write_embedded_csv(path, dataset, _artifact_header("embed", cfg))
    return f"embed: wrote {path} ({len(dataset)} rows, p={dataset.p})"


def _run_boxdim(cfg) -> str:
    eps_grid = _parse_float_list(cfg["eps_grid"], "eps_grid") or DEFAULT_EPS_GRID
    if len(eps_grid) < 2:
        raise ConfigError("eps_grid needs at least two scales")
    if any(e <= 0 for e in eps_grid) or any(
        a <= b for a, b in zip(eps_grid, eps_grid[1:])
    ):
        raise ConfigError("eps_grid must be strictly decreasing and positive")
    series, _ = read_series_csv(cfg["input"])
    payload = _artifact_header("boxdim", cfg)
    payload.update(boxdim_report(series.values, eps_grid))
    path = Path(cfg["out"]) / f"{cfg['name']}.json"
    write_json_artifact(path, payload)
    return f"boxdim: wrote {path} (d={payload['d']:.4f}, r2={payload['r2']:.4f})"


def _run_selfintersect(cfg) -> str:
    spec = _delay_spec(cfg)
    delta, epsilon = float(cfg["delta"]), float(cfg["epsilon"])
    if delta <= 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    series, _ = read_series_csv(cfg["input"])
    payload = _artifact_header("selfintersect", cfg)
    payload.update(selfintersect_report(series, spec, delta, epsilon))
    path = Path(cfg["out"]) / f"{cfg['name']}.json"
    write_json_artifact(path, payload)
    return (
        f"selfintersect: wrote {path} "
        f"(flagged {len(payload['flagged'])} of {payload['n_rows']}, "
        f"fraction={payload['fraction']:.4f})"
    )


def _run_predict(cfg) -> str:
    spec = _delay_spec(cfg)
    pconfig = _prediction_config(cfg)
    test_count = int(cfg["test_count"])
    if test_count < 1:
        raise ConfigError(f"test_count must be >= 1, got {test_count}")
    series, _ = read_series_csv(cfg["input"])
    rows = causal_prediction_rows(series, spec, test_count, pconfig)
    path = Path(cfg["out"]) / f"{cfg['name']}.jsonl"
    write_jsonl_artifact(path, [_artifact_header("predict", cfg)] + rows)
    linear_rows = [r for r in rows if r["linear"] is not None]
    rmse = (
        sum((r["linear"] - r["truth"]) ** 2 for r in linear_rows) / len(linear_rows)
    ) ** 0.5 if linear_rows else float("nan")
    return (
        f"predict: wrote {path} ({len(rows)} queries, "
        f"linear on {len(linear_rows)}, linear RMSE={rmse:.6g})"
    )


def _partitions(cfg, series):
    lag_pool = _parse_int_list(cfg["lag_pool"], "lag_pool")
    for field in ("p", "count"):
        if int(cfg[field]) < 1:
            raise ConfigError(f"{field} must be >= 1, got {cfg[field]}")
    if cfg["mode"] not in PARTITION_MODES:
        raise ConfigError(f"mode must be one of {PARTITION_MODES}, got {cfg['mode']!r}")
    horizon = int(cfg["horizon"])
    if horizon < 1:
        raise ConfigError(f"horizon must be >= 1, got {horizon}")
    try:
        return make_partitions(
            observables=series.names,
            p=int(cfg["p"]),
            count=int(cfg["count"]),
            seed=int(cfg["seed"]),
            mode=cfg["mode"],
            lag_pool=lag_pool,
            target=_parse_observable(cfg["target"]),
            horizon=horizon,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _run_ensemble(cfg) -> str:
    pconfig = _prediction_config(cfg)
    thresholds = _parse_float_list(cfg.get("thresholds"), "thresholds")
    series, _ = read_series_csv(cfg["input"])
    partitions = _partitions(cfg, series)
    query_time = cfg.get("query_time")
    query_time = series.n - 1 if query_time is None else int(query_time)
    payload = _artifact_header("ensemble", cfg)
    payload["partitions"] = partitions.describe()
    payload.update(
        ensemble_report(series, partitions, query_time, pconfig, thresholds)
    )
    path = Path(cfg["out"]) / f"{cfg['name']}.json"
    write_json_artifact(path, payload)
    return (
        f"ensemble: wrote {path} ({len(payload['components'])} views, "
        f"median={payload['quantiles']['0.5']:.6g})"
    )


def _run_calibrate(cfg) -> str:
    pconfig = _prediction_config(cfg)
    series, _ = read_series_csv(cfg["input"])
    partitions = _partitions(cfg, series)
    spacing = cfg.get("spacing")
    spacing = max(1, pconfig.exclusion) if spacing is None else int(spacing)
    try:
        times = default_test_times(
            series, partitions, int(cfg["test_count"]), spacing, pconfig
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    payload = _artifact_header("calibrate", cfg)
    payload["partitions"] = partitions.describe()
    payload.update(calibration_report(series, partitions, times, pconfig))
    path = Path(cfg["out"]) / f"{cfg['name']}.json"
    write_json_artifact(path, payload)
    pit_path = Path(cfg["out"]) / f"{cfg['name']}_pit.csv"
    write_pit_csv(pit_path, payload["pit_values"], _artifact_header("calibrate", cfg))
    cov = ", ".join(f"{k}: {v:.3f}" for k, v in sorted(payload["coverage"].items()))
    return f"calibrate: wrote {path} and {pit_path} (coverage {cov})"


# ----------------------------------------------------------------------
# argument plumbing
# ----------------------------------------------------------------------

_COMMON_DEFAULTS = {"seed": 0, "out": ".", "config": None}

_DEFAULTS: dict[str, dict] = {
    "generate": {
        "system": None, "params": None, "dt": None, "transient": 0,
        "x0": None, "n": None, "name": "series",
    },
    "embed": {
        "input": None, "coords": None, "target": None, "horizon": 1,
        "name": "embedded",
    },
    "boxdim": {"input": None, "eps_grid": None, "name": "boxdim"},
    "selfintersect": {
        "input": None, "coords": None, "target": None, "horizon": 1,
        "delta": None, "epsilon": None, "name": "selfintersect",
    },
    "predict": {
        "input": None, "coords": None, "target": None, "horizon": 1,
        "test_count": 100, "c": 1.0, "gamma": 0.5, "ridge": 1e-6,
        "exclusion": 0, "name": "predictions",
    },
    "ensemble": {
        "input": None, "p": None, "count": None, "mode": "strict",
        "lag_pool": ",".join(str(l) for l in DEFAULT_LAG_POOL),
        "target": None, "horizon": 1, "query_time": None, "thresholds": None,
        "c": 1.0, "gamma": 0.5, "ridge": 1e-6, "exclusion": 0,
        "name": "ensemble",
    },
    "calibrate": {
        "input": None, "p": None, "count": None, "mode": "strict",
        "lag_pool": ",".join(str(l) for l in DEFAULT_LAG_POOL),
        "target": None, "horizon": 1, "test_count": 200, "spacing": None,
        "c": 1.0, "gamma": 0.5, "ridge": 1e-6, "exclusion": 0,
        "name": "calibration",
    },
}

_REQUIRED: dict[str, tuple[str, ...]] = {
    "generate": ("system", "n"),
    "embed": ("coords", "target"),
    "boxdim": (),
    "selfintersect": ("coords", "target", "delta", "epsilon"),
    "predict": ("coords", "target"),
    "ensemble": ("p", "count", "target"),
    "calibrate": ("p", "count", "target"),
}

_NEEDS_INPUT = ("embed", "boxdim", "selfintersect", "predict", "ensemble", "calibrate")

_RUNNERS = {
    "generate": _run_generate,
    "embed": _run_embed,
    "boxdim": _run_boxdim,
    "selfintersect": _run_selfintersect,
    "predict": _run_predict,
    "ensemble": _run_ensemble,
    "calibrate": _run_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaoscast",
        description="Delay-embedding forecasting experiments on chaotic series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, help="seed of the PCG64 random stream")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--name", help="artifact base name")

    g = sub.add_parser("generate", help="sample a benchmark system to CSV")
    common(g)
    g.add_argument("--system", choices=SYSTEM_KINDS)
    g.add_argument("--params", help="comma list NAME=VALUE overriding defaults")
    g.add_argument("--dt", type=float, help="integration step (flows)")
    g.add_argument("--transient", type=int, help="burn-in steps to discard")
    g.add_argument("--x0", help="comma list initial state")
    g.add_argument("--n", type=int, help="samples to emit")

    for cmd, extra in {
        "embed": (),
        "selfintersect": ("delta", "epsilon"),
        "predict": ("knobs",),
    }.items():
        p = sub.add_parser(cmd, help=f"{cmd} over a generated CSV")
        common(p)
        p.add_argument("--input", help="series CSV (generate format)")
        p.add_argument("--coords", help="comma list OBS:LAG delay coordinates")
        p.add_argument("--target", help="target observable (name or index)")
        p.add_argument("--horizon", type=int, help="forward steps to the target")
        if "delta" in extra:
            p.add_argument("--delta", type=float, help="state-space separation threshold")
            p.add_argument("--epsilon", type=float, help="image-space proximity tolerance")
        if "knobs" in extra:
            p.add_argument("--test-count", dest="test_count", type=int)
            _knob_args(p)

    b = sub.add_parser("boxdim", help="box-counting dimension of CSV rows")
    common(b)
    b.add_argument("--input", help="series CSV (generate format)")
    b.add_argument("--eps-grid", dest="eps_grid", help="comma list, strictly decreasing")

    for cmd in ("ensemble", "calibrate"):
        p = sub.add_parser(cmd, help=f"multiview {cmd} over a generated CSV")
        common(p)
        p.add_argument("--input", help="series CSV (generate format)")
        p.add_argument("--p", type=int, help="coordinates per delay map")
        p.add_argument("--count", type=int, help="number of disjoint delay maps")
        p.add_argument("--mode", choices=PARTITION_MODES)
        p.add_argument("--lag-pool", dest="lag_pool", help="comma list or A-B range of lags")
        p.add_argument("--target", help="target observable (name or index)")
        p.add_argument("--horizon", type=int)
        _knob_args(p)
        if cmd == "ensemble":
            p.add_argument("--query-time", dest="query_time", type=int)
            p.add_argument("--thresholds", help="comma list for tail probabilities")
        else:
            p.add_argument("--test-count", dest="test_count", type=int)
            p.add_argument("--spacing", type=int, help="gap between test times")

    return parser


def _knob_args(p) -> None:
    p.add_argument("--c", type=float, help="neighbor schedule scale (k ~ c * n**gamma)")
    p.add_argument("--gamma", type=float, help="neighbor schedule exponent, in (0, 1)")
    p.add_argument("--ridge", type=float, help="slope penalty of the local linear fit")
    p.add_argument("--exclusion", type=int, help="temporal exclusion window (samples)")


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """defaults <- config file <- explicit flags, then per-field checks."""
    cfg = dict(_COMMON_DEFAULTS)
    cfg.update(_DEFAULTS[command])
    known = set(cfg)

    file_path = getattr(args, "config", None)
    if file_path:
        if not Path(file_path).exists():
            raise ConfigError(f"config: file not found: {file_path}")
        try:
            loaded = json.loads(Path(file_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config: top level must be a JSON object")
        for key, value in loaded.items():
            if key not in known:
                raise ConfigError(f"config: unknown field {key!r} for {command}")
            cfg[key] = value

    for key in known:
        value = getattr(args, key, None)
        if value is not None and key != "config":
            cfg[key] = value

    cfg["seed"] = int(cfg["seed"])
    _require(cfg, _REQUIRED[command])
    if command in _NEEDS_INPUT:
        _require_input(cfg)
    out_dir = Path(cfg["out"])
    if not out_dir.exists():
        out_dir.mkdir(parents=True, exist_ok=True)
    cfg["out"] = str(out_dir)
    cfg.pop("config", None)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage problems itself
        return int(exc.code or 0)

    try:
        cfg = resolve_config(args.command, args)
        # Build derived objects early so bad values fail before any work.
        if args.command in ("predict", "ensemble", "calibrate"):
            _prediction_config(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        summary = _RUNNERS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1

    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
