"""Command line: ``renewalkit run <spec>``, ``renewalkit replay <manifest>``, ``renewalkit print-schema``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..errors import DigestMismatch, SpecInvalid
from .runner import EXIT_OK, EXIT_SPEC, EXIT_VERDICT, replay, run_spec
from .spec import load_schema, load_spec

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="renewalkit", description="Reproducible renewal-theory experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment spec")
    r.add_argument("spec", type=Path)
    r.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo batches (results do not depend on it)")
    r.add_argument("--out", type=Path, default=None, help="override the spec's output directory")
    rp = sub.add_parser("replay", help="verify a run manifest and re-run it")
    rp.add_argument("manifest", type=Path)
    rp.add_argument("--no-rerun", action="store_true", help="only verify the recorded digests")
    rp.add_argument("--seed", type=int, default=None, help="re-run with another seed")
    rp.add_argument("--workers", type=int, default=1)
    sub.add_parser("print-schema", help="print the JSON schema of experiment specs")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "print-schema":
        print(json.dumps(load_schema(), indent=2))
        return EXIT_OK
    if args.command == "run":
        if args.workers < 1:
            print("error: --workers must be >= 1", file=sys.stderr)
            return EXIT_SPEC
        try:
            spec = load_spec(args.spec)
        except SpecInvalid as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SPEC
        outcome = run_spec(spec, args.workers, args.out)
        print(json.dumps({"status": outcome.status, "exit_code": outcome.exit_code, "manifest": str(outcome.manifest_path), "summary": outcome.summary}, default=str, sort_keys=True))
        if outcome.message:
            print(outcome.message, file=sys.stderr)
        return outcome.exit_code
    if args.command == "replay":
        try:
            rep = replay(args.manifest, rerun=not args.no_rerun, seed=args.seed, workers=args.workers)
        except DigestMismatch as exc:
            print(json.dumps({"ok": False, "error": "digest_mismatch", "path": exc.path, "expected": exc.expected, "actual": exc.actual}))
            return EXIT_VERDICT
        except (OSError, KeyError, ValueError, SpecInvalid) as exc:
            print(f"error: cannot replay {args.manifest}: {exc}", file=sys.stderr)
            return EXIT_SPEC
        print(json.dumps(rep.to_json(), sort_keys=True))
        return EXIT_OK if rep.ok else EXIT_VERDICT
    return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
