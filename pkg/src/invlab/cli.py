"""``lab`` command line: run named experiments from JSON specs.

    lab run --spec path.json [--out dir] [--seed N] [--<key> <json value> ...]
    lab list

A spec is either a single experiment ``{"id": ..., "config": {...}}`` or a
suite ``{"experiments": [...]}``.  Extra ``--key value`` flags override the
matching config keys of every experiment (values are parsed as JSON when
possible).  The exit code is 0 iff every experiment passes its thresholds.
``LAB_THREADS`` sets how many experiments run concurrently; results are
collected in spec order, so output does not depend on it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .experiments import EXPERIMENTS, run_experiment
from .leviflat import CATALOG
from .report import ExperimentRecord, RunManifest, canonical, emit_report

__all__ = ["ExperimentSpec", "load_specs", "run", "run_suite", "write_outputs", "main"]

log = logging.getLogger("invlab")


@dataclass
class ExperimentSpec:
    id: str
    config: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.id not in EXPERIMENTS:
            raise KeyError(f"unknown experiment {self.id!r}")
        if not isinstance(self.config, dict):
            raise ValueError("config must be a JSON object")

    def to_json(self) -> dict:
        return {"id": self.id, "config": self.config, "seed": self.seed}


def load_specs(data: dict) -> list[ExperimentSpec]:
    items = data["experiments"] if "experiments" in data else [data]
    specs = []
    for item in items:
        extra = set(item) - {"id", "config", "seed"}
        if extra:
            raise ValueError(f"unknown spec keys {sorted(extra)}")
        specs.append(ExperimentSpec(item["id"], dict(item.get("config", {})), int(item.get("seed", 0))))
    return specs


def spec_hash(specs: list[ExperimentSpec]) -> str:
    blob = json.dumps(canonical([s.to_json() for s in specs]), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run(spec: ExperimentSpec) -> RunManifest:
    return run_suite([spec])


def run_suite(specs: list[ExperimentSpec], threads: int | None = None) -> RunManifest:
    threads = threads or int(os.environ.get("LAB_THREADS", "1"))

    def one(s: ExperimentSpec) -> ExperimentRecord:
        out = run_experiment(s.id, s.config, s.seed)
        return ExperimentRecord(s.id, s.config, s.seed, out.summary, out.passed, out.tables)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, specs))  # map preserves spec order
    else:
        records = [one(s) for s in specs]
    return RunManifest(spec_hash(specs), __version__, records)


def write_outputs(manifest: RunManifest, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    seen: dict[str, int] = {}
    for rec in manifest.records:
        k = seen.get(rec.id, 0)
        seen[rec.id] = k + 1
        stem = rec.id if k == 0 else f"{rec.id}-{k}"
        single = RunManifest(manifest.spec_hash, manifest.version, [rec])
        p = out / f"{stem}.json"
        p.write_text(emit_report(single, "json"))
        written.append(p)
        for name in sorted(rec.tables):
            p = out / f"{stem}.{name}.csv"
            p.write_text(emit_report(single, "csv", table=name))
            written.append(p)
    for fmt in ("json", "csv"):
        p = out / f"manifest.{fmt}"
        p.write_text(emit_report(manifest, fmt) if fmt == "json" else
                     emit_report(RunManifest(manifest.spec_hash, manifest.version,
                                             [ExperimentRecord(r.id, r.config, r.seed, r.summary, r.passed)
                                              for r in manifest.records]), "csv"))
        written.append(p)
    return written


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _overrides(extra: list[str]) -> dict:
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise SystemExit(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise SystemExit(f"missing value for --{key}")
            val = extra[i + 1]
            i += 2
        out[key.replace("-", "_")] = _coerce(val)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run experiments from a JSON spec")
    p_run.add_argument("--spec", required=True, type=Path)
    p_run.add_argument("--out", type=Path, default=Path("lab-out"))
    p_run.add_argument("--seed", type=int, default=None)
    sub.add_parser("list", help="list experiments and built-in defining functions")
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    if args.command == "list":
        print("experiments:")
        for k, (_, doc) in EXPERIMENTS.items():
            print(f"  {k:18s} {doc}")
        print("defining functions:")
        for k, doc in CATALOG.items():
            print(f"  {k:26s} {doc}")
        return 0 if not extra else 2

    try:
        specs = load_specs(json.loads(args.spec.read_text()))
        ov = _overrides(extra)
        for s in specs:
            s.config.update(ov)
            if args.seed is not None:
                s.seed = args.seed
        manifest = run_suite(specs)
    except (KeyError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_outputs(manifest, args.out)
    for rec in manifest.records:
        log.info("%-18s %s", rec.id, "PASS" if rec.passed else "FAIL")
    log.info("manifest: %s (spec %s)", args.out / "manifest.json", manifest.spec_hash[:12])
    return 0 if manifest.passed else 1


if __name__ == "__main__":
    sys.exit(main())
