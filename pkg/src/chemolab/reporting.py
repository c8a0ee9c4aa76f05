"""Serialisation helpers shared by the CLI and the sweep atlas.

Floats are written with 17 significant digits everywhere so reruns can be
compared bit for bit.  Non-finite floats use the JSON5-style tokens
``Infinity``/``NaN`` that Python's ``json`` module reads back.
"""

from __future__ import annotations

import json
import math
from importlib import metadata

import numpy as np

NORM_COLUMNS_FIXED = ("t", "mass", "linf", "dt", "int_rho_eta", "int_rho_alpha", "int_rho_beta")


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def fmt_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    s = format(v, ".17g")
    # keep a float marker so readers do not retype integral values
    return s if any(ch in s for ch in ".e") else s + ".0"


def _plain(o):
    if isinstance(o, np.ndarray):
        return [_plain(x) for x in o.tolist()]
    if isinstance(o, np.generic):
        return o.item()
    if hasattr(o, "to_dict"):
        return _plain(o.to_dict())
    if isinstance(o, dict):
        return {str(k): _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(x) for x in o]
    return o


def _encode(o, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(o, bool) or o is None:
        return json.dumps(o)
    if isinstance(o, float):
        return fmt_float(o)
    if isinstance(o, (int, str)):
        return json.dumps(o)
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in o.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(o, list):
        if not o:
            return "[]"
        if all(not isinstance(x, (dict, list)) for x in o):
            return "[" + ", ".join(_encode(x, indent, level + 1) for x in o) + "]"
        items = [pad + _encode(x, indent, level + 1) for x in o]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits."""
    return _encode(_plain(obj), indent, 0) + "\n"


def comment_block(text: str) -> str:
    return "".join(f"# {line}\n" for line in text.splitlines())


def norms_csv(series: dict, header_comment: str = "") -> str:
    """Norm series as CSV; ``header_comment`` is written first as '#' lines."""
    cols = ["t", "mass"] + [c for c in series if c.startswith("lp_")] + [
        c for c in NORM_COLUMNS_FIXED[2:] if c in series
    ]
    rows = [comment_block(header_comment)] if header_comment else []
    rows.append(",".join(cols) + "\n")
    for i in range(len(series["t"])):
        rows.append(",".join(fmt_float(series[c][i]) for c in cols) + "\n")
    return "".join(rows)
