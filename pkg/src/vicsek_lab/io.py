"""Artifact emission: CSV tables and JSON reports with config stamps.

Every CSV starts with a comment line carrying the sha256 of the canonical
configuration JSON, then a header row.  Fractions are rendered as 'a/b' so
exact values survive the round trip; floats use repr (shortest faithful).
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_jsonify)


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


def _jsonify(x):
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "to_json_dict"):
        return x.to_json_dict()
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x)}")


def format_cell(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence], meta: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# config={meta}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, obj: Any, meta: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"config": meta, "data": obj}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonify) + "\n")
