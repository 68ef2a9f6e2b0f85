"""Stream input (CSV or JSON lines) and record output.

Input rows map to observations by family:

* ``bernoulli``: one value, 0 or 1
* ``nig`` / ``niw``: a vector (``d`` inferred from the first row when not given)
* ``linreg``: regressors followed by the response; in JSON either a list
  with the response last or ``{"u": [...], "y": ...}``

Output records are JSON lines with floats written to 17 significant digits
and non-finite values written as ``null``.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from typing import IO, Any, Iterable, Sequence

import numpy as np

from .errors import InputError
from .expfam import Family, SufficientStats


@dataclass(frozen=True)
class Row:
    line: int
    values: Any


def read_text(path: str) -> str:
    """Whole input as text; ``-`` reads (and buffers) stdin."""
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def detect_format(path: str, text: str) -> str:
    if path.endswith((".jsonl", ".json", ".ndjson")):
        return "jsonl"
    if path.endswith((".csv", ".txt")):
        return "csv"
    for line in text.splitlines():
        s = line.strip()
        if s:
            return "jsonl" if s[0] in "[{" else "csv"
    return "csv"


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def parse_rows(text: str, fmt: str) -> list[Row]:
    """Split text into rows; a non-numeric first CSV row is taken as a header."""
    rows = []
    first = True
    for lineno, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s:
            continue
        if fmt == "jsonl":
            try:
                rows.append(Row(lineno, json.loads(s)))
            except json.JSONDecodeError as exc:
                raise InputError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            continue
        toks = [t.strip() for t in s.split(",")]
        if first and not all(_is_number(t) for t in toks):
            first = False
            continue
        first = False
        try:
            rows.append(Row(lineno, [float(t) for t in toks]))
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric value in {s!r}") from None
    return rows


def _numbers(row: Row) -> np.ndarray:
    v = row.values
    if isinstance(v, dict):
        for key in ("x", "value"):
            if key in v:
                v = v[key]
                break
        else:
            raise InputError(f"line {row.line}: expected key 'x' in {row.values!r}")
    try:
        arr = np.atleast_1d(np.asarray(v, dtype=float))
    except (TypeError, ValueError):
        raise InputError(f"line {row.line}: expected numbers, got {row.values!r}") from None
    if arr.ndim != 1:
        raise InputError(f"line {row.line}: expected a flat list of numbers")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"line {row.line}: non-finite value")
    return arr


def infer_dim(family_name: str, rows: Sequence[Row]) -> int | None:
    """Dimension implied by the first row (``None`` when there are no rows)."""
    if not rows or family_name == "bernoulli":
        return None
    first = rows[0]
    if family_name == "linreg":
        if isinstance(first.values, dict) and "u" in first.values:
            return len(np.atleast_1d(first.values["u"]))
        n = _numbers(first).size
        if n < 2:
            raise InputError(f"line {first.line}: regression rows need regressors and a response")
        return n - 1
    return _numbers(first).size


def observation(family: Family, row: Row) -> Any:
    """Raw observation for ``family.suff_stats``; errors name the line."""
    name = family.name
    if name == "linreg":
        v = row.values
        if isinstance(v, dict) and "u" in v:
            u, y = _numbers(Row(row.line, v["u"])), _numbers(Row(row.line, [v.get("y")]))[0]
        else:
            arr = _numbers(row)
            u, y = arr[:-1], arr[-1]
        if u.size != family.dim:
            raise InputError(f"line {row.line}: expected {family.dim} regressors, got {u.size}")
        return (u, y)
    arr = _numbers(row)
    if name == "bernoulli":
        if arr.size != 1 or arr[0] not in (0.0, 1.0):
            raise InputError(f"line {row.line}: binary stream needs a single 0 or 1, got {row.values!r}")
        return arr[0]
    if arr.size != family.dim:
        raise InputError(f"line {row.line}: expected dimension {family.dim}, got {arr.size}")
    return arr


def to_stats(family: Family, rows: Iterable[Row]) -> tuple[list[SufficientStats], list[Any]]:
    stats, raw = [], []
    for row in rows:
        x = observation(family, row)
        try:
            stats.append(family.suff_stats(x))
        except InputError as exc:
            raise InputError(f"line {row.line}: {exc}") from None
        raw.append(x)
    return stats, raw


def read_changes(path: str) -> set[int]:
    """Change trials from a sidecar written by ``generate`` (JSON) or one integer per line."""
    text = read_text(path)
    try:
        data = json.loads(text)
        items = data["changes"] if isinstance(data, dict) else data
        return {int(i) for i in items}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        pass
    try:
        return {int(s) for s in text.split() if s.strip()}
    except ValueError:
        raise InputError(f"{path}: cannot parse change trials") from None


# ---------------------------------------------------------------- output


def _encode(v: Any) -> str:
    if v is None or isinstance(v, bool):
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return format(f, ".17g") if math.isfinite(f) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(x)}" for k, x in v.items()) + "}"
    if isinstance(v, np.ndarray):
        return _encode(v.tolist())
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_encode(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(record: dict[str, Any]) -> str:
    """One JSON line with 17-significant-digit floats."""
    return _encode(record)


def write_records(records: Iterable[dict[str, Any]], out: IO[str]) -> int:
    n = 0
    for rec in records:
        out.write(dumps(rec))
        out.write("\n")
        n += 1
    return n


def diagnostics_fields(diag) -> dict[str, Any]:
    return {
        "e_w": diag.e_w,
        "var_w": diag.var_w,
        "e_b": diag.e_b,
        "eta_eff": diag.eta_eff,
        "eta_asymptote": diag.eta_asymptote,
        "elbo": diag.elbo,
        "log_pred": diag.log_pred,
        "reset_w": diag.reset_w,
        "reset_b": diag.reset_b,
        "iterations": diag.iterations,
        "converged": diag.converged,
    }


def step_record(t: int, family: Family, diag, theta, change: bool | None = None) -> dict[str, Any]:
    rec = {"t": t, "family": family.name}
    rec.update(diagnostics_fields(diag))
    rec["posterior"] = family.summary(theta)
    rec["change"] = change
    return rec
