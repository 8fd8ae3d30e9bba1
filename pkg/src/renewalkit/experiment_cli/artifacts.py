"""Deterministic serialization of scenario outputs and the artifact sink."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

__all__ = ["to_plain", "json_bytes", "csv_bytes", "sha256_bytes", "sha256_file", "ArtifactSink"]


def to_plain(obj):
    """JSON-ready copy: numpy to Python, non-finite floats to strings, enums to values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def json_bytes(obj) -> bytes:
    return (json.dumps(to_plain(obj), sort_keys=True, indent=2) + "\n").encode()


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(to_plain(v), sort_keys=True, separators=(",", ":"))
    return str(v)


def csv_bytes(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> bytes:
    """CSV with floats written by repr (round-trip exact) and nested values as compact JSON."""
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue().encode()


def sha256_bytes(b: bytes) -> str:
    return hashlib.sha256(b).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class ArtifactSink:
    """Writes artifacts as they are produced, so a budget stop leaves the finished ones on disk."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.written: Dict[str, str] = {}

    def emit(self, name: str, data: bytes) -> None:
        (self.directory / name).write_bytes(data)
        self.written[name] = sha256_bytes(data)

    def emit_json(self, name: str, obj) -> None:
        self.emit(name, json_bytes(obj))

    def emit_csv(self, name: str, rows: List[dict], columns=None) -> None:
        self.emit(name, csv_bytes(rows, columns))
