"""Run a spec into an output directory with a manifest, and replay a manifest."""
from __future__ import annotations

import datetime as _dt
import json
import platform
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .. import __version__, kernels
from ..errors import (
    BoxTooSmall,
    BudgetExceeded,
    DegenerateSupport,
    DigestMismatch,
    MonteCarloBudget,
    NotApplicable,
    QuadratureBudgetExceeded,
    SpecInvalid,
    UnknownTail,
)
from .artifacts import ArtifactSink, json_bytes, sha256_file
from .scenarios import is_stochastic, run_scenario
from .spec import ExperimentSpec, parse_spec, spec_digest

__all__ = ["EXIT_OK", "EXIT_SPEC", "EXIT_BUDGET", "EXIT_VERDICT", "RunOutcome", "run_spec", "replay", "ReplayReport", "MANIFEST_NAME"]

EXIT_OK, EXIT_SPEC, EXIT_BUDGET, EXIT_VERDICT = 0, 2, 3, 4
MANIFEST_NAME = "manifest.json"
SPEC_ERRORS = (SpecInvalid, NotApplicable, UnknownTail, DegenerateSupport, ValueError)
BUDGET_ERRORS = (BudgetExceeded, QuadratureBudgetExceeded, MonteCarloBudget, BoxTooSmall)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunOutcome:
    exit_code: int
    status: str
    manifest_path: Optional[Path]
    summary: dict = field(default_factory=dict)
    message: str = ""


def run_spec(spec: ExperimentSpec, workers: int = 1, output_dir: Optional[Path] = None) -> RunOutcome:
    """Execute a validated spec; artifacts and the manifest go to the spec's output directory.

    The manifest is written even when a budget stops the run, listing the
    artifacts finished so far.  ``workers`` affects speed only.
    """
    out_dir = Path(output_dir) if output_dir is not None else spec.output_dir
    sink = ArtifactSink(out_dir)
    started = _now()
    status, code, msg, result = "ok", EXIT_OK, "", None
    try:
        result = run_scenario(spec, sink, workers)
        if not result.ok:
            status, code = "verdict_failure", EXIT_VERDICT
    except BUDGET_ERRORS as exc:
        status, code, msg = "budget_exceeded", EXIT_BUDGET, f"{type(exc).__name__}: {exc}"
    except SPEC_ERRORS as exc:
        status, code, msg = "spec_error", EXIT_SPEC, f"{type(exc).__name__}: {exc}"
    manifest = {
        "spec": spec.raw,
        "spec_sha256": spec_digest(spec.raw),
        "scenario": spec.scenario,
        "seed": spec.seed,
        "stochastic": is_stochastic(spec),
        "code_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "workers": workers,
        "started": started,
        "finished": _now(),
        "status": status,
        "exit_code": code,
        "message": msg,
        "budget": spec.budget.to_json(),
        "budget_consumed": {} if result is None else result.consumed,
        "summary": {} if result is None else result.summary,
        "outputs": [{"path": name, "sha256": digest} for name, digest in sorted(sink.written.items())],
    }
    path = out_dir / MANIFEST_NAME
    path.write_bytes(json_bytes(manifest))
    return RunOutcome(code, status, path, manifest["summary"], msg)


@dataclass
class ReplayReport:
    manifest: str
    digests_ok: bool
    checked: List[str]
    rerun: Optional[str]  # "identical", "different", "non_comparable" or None when skipped
    rerun_differences: List[str] = field(default_factory=list)
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.digests_ok and self.rerun in (None, "identical", "non_comparable")

    def to_json(self):
        return {
            "manifest": self.manifest,
            "digests_ok": self.digests_ok,
            "checked": self.checked,
            "rerun": self.rerun,
            "rerun_differences": self.rerun_differences,
            "note": self.note,
            "ok": self.ok,
        }


def _verify_digests(manifest: dict, directory: Path) -> List[str]:
    checked = []
    for entry in manifest["outputs"]:
        p = directory / entry["path"]
        actual = sha256_file(p) if p.exists() else "<missing>"
        if actual != entry["sha256"]:
            raise DigestMismatch(str(p), entry["sha256"], actual)
        checked.append(entry["path"])
    return checked


def replay(manifest_path, rerun: bool = True, seed: Optional[int] = None, workers: int = 1) -> ReplayReport:
    """Verify the recorded digests, then re-run the spec in a scratch directory and compare outputs.

    A ``seed`` different from the recorded one makes stochastic outputs
    non-comparable (a different stream), which is reported but is not a failure.
    """
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    directory = manifest_path.parent
    checked = _verify_digests(manifest, directory)
    if not rerun:
        return ReplayReport(str(manifest_path), True, checked, None)
    raw = dict(manifest["spec"])
    if seed is not None:
        raw["seed"] = int(seed)
    spec = parse_spec(raw, directory)
    with tempfile.TemporaryDirectory() as tmp:
        outcome = run_spec(spec, workers, Path(tmp))
        new = json.loads(Path(outcome.manifest_path).read_text())
    old = {e["path"]: e["sha256"] for e in manifest["outputs"]}
    fresh = {e["path"]: e["sha256"] for e in new["outputs"]}
    diffs = sorted(k for k in set(old) | set(fresh) if old.get(k) != fresh.get(k))
    if seed is not None and int(seed) != int(manifest["seed"]) and manifest.get("stochastic"):
        return ReplayReport(str(manifest_path), True, checked, "non_comparable", diffs, f"seed {seed} differs from recorded seed {manifest['seed']}: different random stream")
    return ReplayReport(str(manifest_path), True, checked, "identical" if not diffs else "different", diffs)
