"""Deterministic JSON/CSV emission for run artifacts.

The JSON writer is deliberately hand-rolled: ``json.dumps`` formats floats
with ``repr`` (shortest round-trip), which is stable for a fixed Python but
not pinned by contract.  Here every float is written with 17 significant
digits and keys keep insertion order, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import math

import numpy as np


def format_float(value: float) -> str:
    """Render a finite float with 17 significant digits."""
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r} cannot be serialized")
    return format(float(value), ".17g")


def to_jsonable(obj):
    """Convert numpy containers/scalars to plain Python recursively."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def _emit(obj, parts, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, str):
        parts.append(f'"{_escape(obj)}"')
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (key, val) in enumerate(obj.items()):
            parts.append(f'{pad_in}"{_escape(str(key))}": ')
            _emit(val, parts, indent, level + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, val in enumerate(obj):
            parts.append(pad_in)
            _emit(val, parts, indent, level + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Serialize ``obj`` to deterministic JSON text (insertion-ordered keys)."""
    parts: list[str] = []
    _emit(to_jsonable(obj), parts, indent, 0)
    parts.append("\n")
    return "".join(parts)


def dump(obj, path, indent: int = 2) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj, indent=indent))


def write_csv(path, header, rows) -> None:
    """Write an RFC-4180-style CSV; floats use the 17-digit format."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        if header:
            writer.writerow(list(header))
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )


def config_hash(config) -> str:
    """SHA-256 of the canonical JSON form of a configuration mapping."""
    return hashlib.sha256(dumps(config).encode("utf-8")).hexdigest()


def wavefunction_to_csv(wf, path) -> None:
    write_csv(path, ("grid", "re", "im"), wf.rows())


def wavefunction_to_json(wf, path) -> None:
    dump({
        "measure": wf.measure,
        "grid": [float(g) for g in wf.grid],
        "re": [float(v) for v in wf.values.real],
        "im": [float(v) for v in wf.values.imag],
    }, path)


def map_to_csv(tmap, path) -> None:
    write_csv(path, ("x", "q", "jacobian"), tmap.rows())


def operator_to_csv(op, path) -> None:
    """Coordinate-list dump (i, j, re, im) for external inspection."""
    write_csv(path, ("i", "j", "re", "im"), op.coo_rows())
