"""Deterministic CSV / JSON writers with provenance headers."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x) + 0.0:.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def header_lines(config: dict) -> list:
    return [
        f"# sipgwave {__version__}",
        "# config: " + json.dumps(_jsonable(config), sort_keys=True),
    ]


def write_csv(path, columns: dict, config: dict):
    """Columns of equal length, one header comment block, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = header_lines(config) + [",".join(names)]
    for i in range(n):
        lines.append(",".join(fmt(c[i]) for c in cols))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, payload: dict, config: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"meta": {"tool": "sipgwave", "version": __version__, "config": config}}
    doc.update(payload)
    path.write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")
    return path


def write_table(path_stem, columns: dict, config: dict, format: str = "csv"):
    """CSV or column-oriented JSON, by ``format``."""
    path_stem = Path(path_stem)
    if format == "csv":
        return write_csv(path_stem.with_suffix(".csv"), columns, config)
    if format == "json":
        return write_json(path_stem.with_suffix(".json"), {"columns": columns}, config)
    raise ValueError(f"unknown format {format!r}")
