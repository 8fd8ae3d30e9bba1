"""Experiment specs: schema validation and the typed view used by the runner."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import jsonschema

from ..errors import SpecInvalid

__all__ = ["ExperimentSpec", "Budget", "load_schema", "load_spec", "parse_spec", "spec_digest"]


def load_schema() -> dict:
    text = resources.files("renewalkit").joinpath("schema/experiment.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class Budget:
    max_samples: Optional[int] = None
    max_nodes: Optional[int] = None
    wall_clock_hint: Optional[float] = None

    def to_json(self):
        return {"max_samples": self.max_samples, "max_nodes": self.max_nodes, "wall_clock_hint": self.wall_clock_hint}


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    seed: int
    output_dir: Path
    model: Optional[Dict[str, Any]] = None
    s: Tuple[float, ...] = ()
    delta: Tuple[float, ...] = ()
    n: Tuple[int, ...] = ()
    params: Dict[str, Any] = field(default_factory=dict)
    budget: Budget = Budget()
    raw: Dict[str, Any] = field(default_factory=dict, compare=False)

    def param(self, name: str, default=None):
        return self.params.get(name, default)


def spec_digest(raw: dict) -> str:
    """sha256 of the canonical JSON form (sorted keys, no whitespace)."""
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def parse_spec(raw: dict, base_dir: Path = Path(".")) -> ExperimentSpec:
    """Validate ``raw`` against the schema and build the typed spec."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors]
        raise SpecInvalid("invalid spec:\n  " + "\n  ".join(lines))
    lad = raw.get("ladders", {})
    out = Path(raw["output"]["dir"])
    if not out.is_absolute():
        out = (base_dir / out).resolve()
    b = raw.get("budget", {})
    return ExperimentSpec(
        scenario=raw["scenario"],
        seed=int(raw["seed"]),
        output_dir=out,
        model=raw.get("model"),
        s=tuple(float(v) for v in lad.get("s", ())),
        delta=tuple(float(v) for v in lad.get("delta", ())),
        n=tuple(int(v) for v in lad.get("n", ())),
        params=dict(raw.get("params", {})),
        budget=Budget(b.get("max_samples"), b.get("max_nodes"), b.get("wall_clock_hint")),
        raw=raw,
    )


def load_spec(path) -> ExperimentSpec:
    """Read a JSON (or YAML, by extension) spec file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecInvalid(f"cannot read spec {path}: {exc}") from exc
    try:
        if path.suffix in (".yaml", ".yml"):
            import yaml

            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
    except Exception as exc:
        raise SpecInvalid(f"cannot parse spec {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecInvalid("spec must be a mapping")
    return parse_spec(raw, path.resolve().parent)
