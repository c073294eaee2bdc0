"""Artifact readers and writers shared by the CLI and the service.

CSV artifacts carry a single leading `# {json}` metadata line with the
fully resolved configuration that produced them, then a header row and
data rows at 17 significant digits (exact float round-trip). JSON
artifacts are UTF-8 with sorted keys. Both formats are byte-stable:
identical content writes identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .embedding import DelayMapSpec, EmbeddedDataset
from .systems import MultiSeries


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def dumps_stable(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(", ", ": "))


def _write_table(path: Path, header: list[str], rows, meta: dict | None) -> None:
    lines = []
    if meta is not None:
        lines.append("# " + dumps_stable(meta))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_table(path: Path) -> tuple[list[str], np.ndarray, dict]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta: dict = {}
    if lines and lines[0].startswith("#"):
        meta = json.loads(lines[0].lstrip("#").strip())
        lines = lines[1:]
    if not lines:
        raise ValueError(f"{path}: no header row found")
    header = [h.strip() for h in lines[0].split(",")]
    data = np.array(
        [[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float
    )
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, data, meta


def write_series_csv(path, series: MultiSeries, meta: dict | None = None) -> None:
    full_meta = dict(meta or {})
    full_meta.setdefault("step", series.step)
    _write_table(Path(path), list(series.names), series.values, full_meta)


def read_series_csv(path) -> tuple[MultiSeries, dict]:
    header, data, meta = _read_table(Path(path))
    step = float(meta.get("step", 1.0))
    return MultiSeries(names=tuple(header), values=data, step=step), meta


def write_embedded_csv(path, dataset: EmbeddedDataset, meta: dict | None = None) -> None:
    full_meta = dict(meta or {})
    full_meta["delay_map"] = dataset.spec.describe()
    header = ["t"] + [f"x{j}" for j in range(dataset.p)] + ["y"]
    rows = np.column_stack([dataset.t, dataset.x, dataset.y])
    _write_table(Path(path), header, rows, full_meta)


def read_embedded_csv(path) -> tuple[EmbeddedDataset, dict]:
    header, data, meta = _read_table(Path(path))
    if "delay_map" not in meta:
        raise ValueError(f"{path}: missing delay_map metadata line")
    sm = meta["delay_map"]
    spec = DelayMapSpec(
        coords=tuple((obs, lag) for obs, lag in sm["coords"]),
        target=sm["target"],
        horizon=sm["horizon"],
    )
    t = data[:, 0].astype(int)
    x = data[:, 1:-1]
    y = data[:, -1]
    return EmbeddedDataset(x=x, y=y, t=t, spec=spec), meta


def write_pit_csv(path, pit_values, meta: dict | None = None) -> None:
    _write_table(Path(path), ["pit"], [[float(v)] for v in pit_values], meta)


def write_json_artifact(path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def write_jsonl_artifact(path, rows: list[dict]) -> None:
    lines = [dumps_stable(row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
