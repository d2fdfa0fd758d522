"""Run manifests and their deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ExperimentRecord", "RunManifest", "canonical", "emit_report", "fmt"]

DIGITS = 15


def fmt(x) -> str:
    """Fixed 15-significant-digit rendering used for every emitted number."""
    return f"{float(x):.{DIGITS}g}"


def canonical(obj):
    """Recursively round floats to 15 significant digits and normalize containers."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(fmt(x))
    if isinstance(obj, complex):
        return [canonical(obj.real), canonical(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [canonical(v) for v in obj]
    return obj


@dataclass
class ExperimentRecord:
    id: str
    config: dict
    seed: int
    summary: dict
    passed: bool
    tables: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"id": self.id, "config": self.config, "seed": self.seed,
                "summary": self.summary, "passed": self.passed}


@dataclass
class RunManifest:
    spec_hash: str
    version: str
    records: list[ExperimentRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_json(self) -> dict:
        return {"spec_hash": self.spec_hash, "version": self.version, "passed": self.passed,
                "experiments": [r.to_json() for r in self.records]}


def _table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating, int, np.integer)) and not isinstance(x, bool)
                    else x for x in row])
    return buf.getvalue()


def emit_report(manifest: RunManifest, format: str = "json", table: str | None = None) -> str:
    """Serialize a manifest.

    ``json`` emits the whole manifest.  ``csv`` emits the data table of a
    single-experiment manifest (``table`` selects among several), or one
    summary row per experiment otherwise.
    """
    if format == "json":
        return json.dumps(canonical(manifest.to_json()), sort_keys=True, indent=2) + "\n"
    if format != "csv":
        raise ValueError(f"unknown report format {format!r}")
    if len(manifest.records) == 1 and manifest.records[0].tables:
        tables = manifest.records[0].tables
        name = table or sorted(tables)[0]
        header, rows = tables[name]
        return _table_csv(header, rows)
    rows = [[r.id, r.seed, "pass" if r.passed else "fail", manifest.spec_hash] for r in manifest.records]
    return _table_csv(["experiment", "seed", "result", "spec_hash"], rows)
