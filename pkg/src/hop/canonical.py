"""Canonical JSON form: sorted keys, floats at 9 significant digits.

Every document the service or the stores emit goes through this encoder, so
re-serializing a parsed canonical document reproduces it byte for byte.
That property is what lets round-trip tests compare raw bytes.
"""

from __future__ import annotations

import json
import math

from .errors import InvalidArgumentError


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise InvalidArgumentError("non-finite numbers cannot be serialized")
    if x == 0.0:
        return "0"  # folds -0.0 as well
    return format(x, ".9g")


def _encode(value, out: list) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise InvalidArgumentError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    else:
        raise InvalidArgumentError(f"cannot serialize {type(value).__name__}")


def canonical_dumps(doc) -> str:
    """Canonical text of a JSON-able document, newline terminated."""
    out: list = []
    _encode(doc, out)
    out.append("\n")
    return "".join(out)


def canonical_bytes(doc) -> bytes:
    return canonical_dumps(doc).encode("utf-8")
