"""Canonical JSON: sorted keys, floats with 17 significant digits.

Non-finite floats are written as the strings ``"NaN"``, ``"Infinity"`` and
``"-Infinity"`` so the output stays strict JSON.
"""
import json
import math
from pathlib import Path

import numpy as np


def _float(x):
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _encode(obj, out, indent, level):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(bool(obj) if obj is not None else None))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out, indent, level)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        pad = "\n" + " " * (indent * (level + 1))
        out.append("{")
        for n, key in enumerate(sorted(obj, key=str)):
            out.append(("," if n else "") + pad + json.dumps(str(key)) + ": ")
            _encode(obj[key], out, indent, level + 1)
        out.append("\n" + " " * (indent * level) + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in obj):
            out.append("[")
            for n, x in enumerate(obj):
                if n:
                    out.append(", ")
                _encode(x, out, indent, level)
            out.append("]")
            return
        pad = "\n" + " " * (indent * (level + 1))
        out.append("[")
        for n, x in enumerate(obj):
            out.append(("," if n else "") + pad)
            _encode(x, out, indent, level + 1)
        out.append("\n" + " " * (indent * level) + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent=2):
    out = []
    _encode(obj, out, indent, 0)
    return "".join(out) + "\n"


def emit_report(report, path):
    """Write ``report`` to ``path`` as canonical JSON."""
    Path(path).write_text(dumps(report), encoding="utf-8")
