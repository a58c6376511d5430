"""Deterministic JSON/CSV emission: 17 significant digits, atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .bounds import SweepRow, SweepTable

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ["n", "N", "lambda", "lower", "upper", "slope_prev", "ln_N", "wall_ms", "error"]
PLOT_COLUMNS = ["ln_N", "lambda", "lower", "upper"]


def fmt_float(x: float) -> str:
    """17 significant digits; round-trips every double."""
    return format(float(x), ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with fixed float formatting and a trailing newline."""
    return _encode(obj, indent, 0) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return fmt_float(x)


def csv_text(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def sweep_csv(table: SweepTable, with_timing: bool = True) -> str:
    rows, prev = [], None
    for r in table.rows:
        slope = None
        if prev is not None and not r.error:
            slope = (r.lam - prev.lam) / (math.log(r.N) - math.log(prev.N))
        wall = r.wall_ms if with_timing else None
        rows.append([r.n, r.N, r.lam, r.lower, r.upper, slope, r.ln_N, wall, r.error])
        if not r.error:
            prev = r
    return csv_text(SWEEP_COLUMNS, rows)


def plot_csv(table: SweepTable) -> str:
    return csv_text(PLOT_COLUMNS, [[r.ln_N, r.lam, r.lower, r.upper] for r in table.rows if not r.error])


def _num(s: str) -> float:
    return float(s) if s != "" else float("nan")


def parse_sweep_csv(text: str) -> SweepTable:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != SWEEP_COLUMNS:
        raise ValueError(f"unexpected sweep header {reader.fieldnames}")
    table = SweepTable()
    for rec in reader:
        table.rows.append(
            SweepRow(
                n=int(rec["n"]),
                N=int(rec["N"]),
                lam=_num(rec["lambda"]),
                lower=_num(rec["lower"]),
                upper=_num(rec["upper"]),
                wall_ms=_num(rec["wall_ms"]),
                error=rec["error"],
            )
        )
    return table
