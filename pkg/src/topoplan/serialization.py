"""Canonical JSON emission for all on-disk document formats.

Every document this package writes must be byte-identical across reruns, so
the writer is deliberately small and predictable: dict keys keep insertion
order (callers emit them in schema order), reals are rendered with 17
significant digits (enough to round-trip any float64 exactly), and the file
ends with a single newline.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any

from .errors import SchemaError


def format_real(x: float) -> str:
    """Render a finite float with 17 significant digits (exact round-trip)."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite real {x!r}")
    return "%.17g" % x


def _render(obj: Any, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (key, value) in enumerate(items):
            out.append(pad + "  " + json.dumps(str(key)) + ": ")
            _render(value, indent + 1, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(seq):
            out.append(pad + "  ")
            _render(value, indent + 1, out)
            out.append(",\n" if i + 1 < len(seq) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append("true" if obj is True else "false" if obj is False else "null")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_real(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


def dumps_canonical(document: dict) -> str:
    out: list[str] = []
    _render(document, 0, out)
    out.append("\n")
    return "".join(out)


def write_document(path: str | Path, document: dict) -> None:
    Path(path).write_text(dumps_canonical(document), encoding="utf-8")


def read_document(path: str | Path, expected_version: str | None = None) -> dict:
    """Load a JSON document, optionally enforcing its ``version`` field."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: top level must be an object")
    if expected_version is not None:
        got = raw.get("version")
        if got != expected_version:
            raise SchemaError(f"{path}: expected version {expected_version!r}, got {got!r}")
    return raw


def content_hash(path: str | Path) -> str:
    """sha256 of a file's bytes, used to stamp outputs with their inputs."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
