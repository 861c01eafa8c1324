"""File output: trajectory CSV/JSON, scan results, plot-ready columns.

CSV files follow RFC 4180 conventions (comma separated, CRLF line ends)
with floats printed to 17 significant digits so values round-trip exactly.
JSON documents carry a ``schema`` tag, the package version and, for scan
results, the SHA-256 of the canonical configuration for provenance; the
``timestamp_utc`` field is the only part of an output that varies between
identical runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .collapse import CollapseScanResult, ScanConfig
from .conserved import trajectory_invariants
from .dynamics import TrajectoryRecord

__all__ = [
    "format_float",
    "canonical_config_hash",
    "trajectory_to_csv",
    "trajectory_to_json",
    "scan_result_to_json",
    "scan_result_to_csv",
    "write_columns",
]


def format_float(value: float) -> str:
    """17 significant digits: enough to reproduce any double exactly."""
    return format(float(value), ".17g")


def canonical_config_hash(config_dict: dict) -> str:
    payload = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _json_safe(value):
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def _state_columns(record: TrajectoryRecord) -> list[str]:
    prefix = "x" if record.kind == "absolute" else "y"
    cols = []
    for idx in range(record.states.shape[1]):
        cols.append(f"{prefix}{idx + 1}_x")
        cols.append(f"{prefix}{idx + 1}_y")
    return cols


def _invariant_log(record: TrajectoryRecord, kernel):
    if record.invariants is not None:
        return record.invariants
    if kernel is None:
        raise ValueError("record carries no invariant log; pass the kernel")
    return trajectory_invariants(record, kernel)


def trajectory_to_csv(record: TrajectoryRecord, path, kernel=None) -> None:
    """Write one row per snapshot with positions, separation and invariants."""
    log = _invariant_log(record, kernel)
    header = ["t", *_state_columns(record), "min_dist", "H", "M_x", "M_y", "I", "C"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(record.n_snapshots):
            row = [format_float(record.times[i])]
            row.extend(format_float(v) for v in record.states[i].ravel())
            row.append(format_float(record.min_pair_distance[i]))
            row.append(format_float(log["hamiltonian"][i]))
            row.append(format_float(log["vorticity_vector"][i][0]))
            row.append(format_float(log["vorticity_vector"][i][1]))
            row.append(format_float(log["moment_of_inertia"][i]))
            row.append(format_float(log["collapse_constraint"][i]))
            writer.writerow(row)


def trajectory_to_json(record: TrajectoryRecord, path, kernel=None) -> dict:
    """Full record including termination metadata; returns the document."""
    log = _invariant_log(record, kernel)
    term = record.termination
    doc = {
        "schema": "vortexlab/trajectory-v1",
        "version": __version__,
        "kind": record.kind,
        "anchor": record.anchor,
        "intensities": [float(v) for v in record.intensities],
        "times": [float(t) for t in record.times],
        "states": record.states.tolist(),
        "min_pair_distance": [_json_safe(float(v))
                              for v in record.min_pair_distance],
        "invariants": {
            "hamiltonian": [float(v) for v in log["hamiltonian"]],
            "vorticity_vector": np.asarray(log["vorticity_vector"]).tolist(),
            "moment_of_inertia": [float(v) for v in log["moment_of_inertia"]],
            "collapse_constraint": [float(v) for v in log["collapse_constraint"]],
        },
        "termination": {
            "cause": term.cause.value,
            "time": float(term.time),
            "pair": list(term.pair) if term.pair is not None else None,
        },
        "stats": dict(record.stats),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return doc


def scan_config_to_dict(config: ScanConfig) -> dict:
    doc = asdict(config)
    doc["intensities"] = list(doc["intensities"])
    doc["epsilons"] = list(doc["epsilons"])
    return doc


def scan_result_to_json(result: CollapseScanResult, path, *,
                        timestamp: str | None = None) -> dict:
    """Result document with config hash, seed and version for provenance."""
    config_doc = scan_config_to_dict(result.config)
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat()
    doc = {
        "schema": "vortexlab/scan-result-v1",
        "version": __version__,
        "timestamp_utc": timestamp,
        "seed": result.config.rng_seed,
        "config": config_doc,
        "config_sha256": canonical_config_hash(config_doc),
        "rate_law": result.rate_law.value,
        "fitted_exponent": result.fitted_exponent,
        "fit_epsilons": list(result.fit_epsilons),
        "fit_min_hits": result.fit_min_hits,
        "bound_constant": result.bound_constant,
        "cells": [
            {
                "epsilon": c.epsilon,
                "sample_count": c.sample_count,
                "hit_count": c.hit_count,
                "initial_overlap_hits": c.initial_overlap_hits,
                "inconclusive_count": c.inconclusive_count,
                "measure_fraction": c.measure_fraction,
                "wilson_low": c.wilson_low,
                "wilson_high": c.wilson_high,
            }
            for c in result.cells
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return doc


def scan_result_to_csv(result: CollapseScanResult, path) -> None:
    header = ["epsilon", "sample_count", "hit_count", "initial_overlap_hits",
              "inconclusive_count", "measure_fraction", "wilson_low", "wilson_high"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for c in result.cells:
            writer.writerow([
                format_float(c.epsilon), c.sample_count, c.hit_count,
                c.initial_overlap_hits, c.inconclusive_count,
                format_float(c.measure_fraction),
                format_float(c.wilson_low), format_float(c.wilson_high),
            ])


def write_columns(path, columns) -> None:
    """Plain whitespace-separated columns for external plotting tools."""
    rows = list(zip(*columns))
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(" ".join(format_float(v) for v in row))
            fh.write("\n")


def _ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
