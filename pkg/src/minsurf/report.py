"""Deterministic JSON reports.

Floats are written with ``%.12e`` and keys keep insertion order, so equal
inputs give byte-identical files.  Complex numbers become [re, im] pairs,
non-finite floats become null.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

FLOAT_FORMAT = "%.12e"


class Report(dict):
    """Insertion-ordered mapping that serialises deterministically."""

    def to_json(self) -> str:
        return dumps(self)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())


def _float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return FLOAT_FORMAT % (x + 0.0)  # folds −0.0 into 0.0


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [_encode(v, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"
