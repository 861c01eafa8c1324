"""Parsing and validation of JSON configuration documents.

Every document carries a versioned ``schema`` field and is validated
strictly: unknown fields are errors, so a typo cannot silently change an
experiment.  Validation happens entirely before any computation or file
output starts, and failures carry the dotted path of the offending field.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .collapse import ScanConfig
from .dynamics import IntegratorConfig, VortexSystem
from .errors import ConfigError
from .kernels import (
    MAX_EPSILON,
    KernelProfile,
    RegularizedKernel,
    euler_kernel,
    regularize,
    sqg_kernel,
)

__all__ = [
    "load_json",
    "parse_kernel",
    "parse_integrator",
    "parse_simulate",
    "parse_invariants",
    "parse_collapse_scan",
    "parse_kernel_check",
    "parse_collapse_demo",
    "SCHEMAS",
]

SCHEMAS = {
    "simulate": "vortexlab/simulate-v1",
    "invariants": "vortexlab/invariants-v1",
    "collapse-scan": "vortexlab/collapse-scan-v1",
    "kernel-check": "vortexlab/kernel-check-v1",
    "collapse-demo": "vortexlab/collapse-demo-v1",
}


def load_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(str(path), "config file not found")
    try:
        with open(p, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON (line {exc.lineno}): {exc.msg}")
    if not isinstance(doc, dict):
        raise ConfigError(str(path), "top-level config must be a JSON object")
    return doc


def _check_fields(doc: dict, where: str, required: set[str],
                  optional: set[str] = frozenset()) -> None:
    unknown = set(doc) - required - set(optional)
    if unknown:
        raise ConfigError(f"{where}.{sorted(unknown)[0]}", "unknown field")
    for key in sorted(required):
        if key not in doc:
            raise ConfigError(f"{where}.{key}", "missing required field")


def _check_schema(doc: dict, command: str) -> None:
    expected = SCHEMAS[command]
    got = doc.get("schema")
    if got != expected:
        raise ConfigError("schema", f"expected {expected!r}, got {got!r}")


def _number(doc: dict, key: str, where: str) -> float:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", "must be a number")
    return float(v)


def parse_kernel(doc, where: str = "kernel") -> KernelProfile | RegularizedKernel:
    """Build a kernel from ``{"kind": "euler"|"sqg", "s"?, "epsilon"?}``."""
    if not isinstance(doc, dict):
        raise ConfigError(where, "must be an object")
    _check_fields(doc, where, {"kind"}, {"s", "epsilon"})
    kind = doc["kind"]
    if kind == "euler":
        if "s" in doc:
            raise ConfigError(f"{where}.s", "not applicable to the euler kernel")
        profile = euler_kernel()
    elif kind == "sqg":
        if "s" not in doc:
            raise ConfigError(f"{where}.s", "missing required field")
        s = _number(doc, "s", where)
        if s == 1.0:
            profile = euler_kernel()
        else:
            try:
                profile = sqg_kernel(s)
            except ValueError as exc:
                raise ConfigError(f"{where}.s", str(exc))
    else:
        raise ConfigError(f"{where}.kind", f"unknown kernel kind {kind!r}")
    if "epsilon" in doc:
        eps = _number(doc, "epsilon", where)
        try:
            return regularize(profile, eps)
        except ValueError as exc:
            raise ConfigError(f"{where}.epsilon", str(exc))
    return profile


_INTEGRATOR_FIELDS = {"rel_tol", "abs_tol", "max_step", "min_step",
                      "collapse_threshold"}


def parse_integrator(doc, where: str = "integrator",
                     defaults: IntegratorConfig | None = None) -> IntegratorConfig:
    if doc is None:
        return defaults or IntegratorConfig()
    if not isinstance(doc, dict):
        raise ConfigError(where, "must be an object")
    _check_fields(doc, where, set(), _INTEGRATOR_FIELDS)
    base = defaults or IntegratorConfig()
    kwargs = {f: getattr(base, f) for f in _INTEGRATOR_FIELDS}
    for key in doc:
        kwargs[key] = _number(doc, key, where)
    try:
        return IntegratorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(where, str(exc))


def _parse_system(doc: dict, where: str, kernel) -> VortexSystem:
    try:
        system = VortexSystem(doc["intensities"], doc["positions"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}", str(exc))
    if getattr(kernel, "singular_at_zero", True) and system.n > 1:
        x = system.positions
        for i in range(system.n):
            for j in range(i + 1, system.n):
                if np.array_equal(x[i], x[j]):
                    raise ConfigError(
                        f"{where}.positions",
                        f"vortices {i + 1} and {j + 1} coincide under a "
                        "singular kernel")
    return system


def parse_simulate(doc: dict) -> dict:
    _check_fields(doc, "config",
                  {"schema", "intensities", "positions", "kernel", "final_time"},
                  {"integrator"})
    _check_schema(doc, "simulate")
    kernel = parse_kernel(doc["kernel"])
    system = _parse_system(doc, "config", kernel)
    final_time = _number(doc, "final_time", "config")
    if final_time <= 0.0:
        raise ConfigError("config.final_time", "must be positive")
    integrator = parse_integrator(doc.get("integrator"))
    return {"system": system, "kernel": kernel, "final_time": final_time,
            "integrator": integrator}


def parse_invariants(doc: dict) -> dict:
    _check_fields(doc, "config",
                  {"schema", "intensities", "positions", "kernel"})
    _check_schema(doc, "invariants")
    kernel = parse_kernel(doc["kernel"])
    system = _parse_system(doc, "config", kernel)
    return {"system": system, "kernel": kernel}


def parse_collapse_scan(doc: dict, seed_override: int | None = None) -> ScanConfig:
    _check_fields(doc, "config",
                  {"schema", "s", "anchor", "intensities", "rho", "horizon",
                   "epsilons", "samples_per_epsilon", "rng_seed"},
                  {"integrator"})
    _check_schema(doc, "collapse-scan")
    integrator = parse_integrator(doc.get("integrator"),
                                  defaults=ScanConfig.__dataclass_fields__
                                  ["integrator"].default_factory())
    seed = doc["rng_seed"] if seed_override is None else seed_override
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("config.rng_seed", "must be an integer")
    anchor = doc["anchor"]
    if isinstance(anchor, bool) or not isinstance(anchor, int):
        raise ConfigError("config.anchor", "must be an integer")
    if not isinstance(doc["samples_per_epsilon"], int):
        raise ConfigError("config.samples_per_epsilon", "must be an integer")
    try:
        return ScanConfig(
            s=_number(doc, "s", "config"),
            anchor=anchor,
            intensities=tuple(doc["intensities"]),
            rho=_number(doc, "rho", "config"),
            horizon=_number(doc, "horizon", "config"),
            epsilons=tuple(doc["epsilons"]),
            samples_per_epsilon=doc["samples_per_epsilon"],
            rng_seed=seed,
            integrator=integrator,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError("config", str(exc))


def parse_kernel_check(doc: dict) -> dict:
    _check_fields(doc, "config", {"schema", "kernels", "epsilons"},
                  {"grid_points"})
    _check_schema(doc, "kernel-check")
    kernels = doc["kernels"]
    if not isinstance(kernels, list) or not kernels:
        raise ConfigError("config.kernels", "must be a non-empty list")
    profiles = [parse_kernel(k, where=f"kernels[{i}]")
                for i, k in enumerate(kernels)]
    for i, p in enumerate(profiles):
        if isinstance(p, RegularizedKernel):
            raise ConfigError(f"kernels[{i}].epsilon",
                              "kernel-check regularizes internally; "
                              "list bare kernels and set top-level epsilons")
    epsilons = doc["epsilons"]
    if not isinstance(epsilons, list) or not epsilons:
        raise ConfigError("config.epsilons", "must be a non-empty list")
    for i, e in enumerate(epsilons):
        if isinstance(e, bool) or not isinstance(e, (int, float)) \
                or not 0.0 < float(e) <= MAX_EPSILON:
            raise ConfigError(f"config.epsilons[{i}]",
                              f"must be a number in (0, {MAX_EPSILON}]")
    grid_points = doc.get("grid_points", 2000)
    if isinstance(grid_points, bool) or not isinstance(grid_points, int) \
            or grid_points < 100:
        raise ConfigError("config.grid_points", "must be an integer >= 100")
    return {"profiles": profiles,
            "epsilons": [float(e) for e in epsilons],
            "grid_points": grid_points}


def parse_collapse_demo(doc: dict, seed_override: int | None = None) -> dict:
    _check_fields(doc, "config", {"schema", "intensities", "rng_seed"},
                  {"final_time", "integrator", "attempts"})
    _check_schema(doc, "collapse-demo")
    intensities = doc["intensities"]
    if not isinstance(intensities, list) or len(intensities) != 3:
        raise ConfigError("config.intensities", "the demo needs exactly 3 intensities")
    seed = doc["rng_seed"] if seed_override is None else seed_override
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("config.rng_seed", "must be an integer")
    final_time = doc.get("final_time", 50.0)
    if isinstance(final_time, bool) or not isinstance(final_time, (int, float)) \
            or final_time <= 0:
        raise ConfigError("config.final_time", "must be a positive number")
    attempts = doc.get("attempts", 400)
    if isinstance(attempts, bool) or not isinstance(attempts, int) or attempts < 1:
        raise ConfigError("config.attempts", "must be a positive integer")
    integrator = parse_integrator(
        doc.get("integrator"),
        defaults=IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11))
    return {"intensities": [float(v) for v in intensities], "seed": seed,
            "final_time": float(final_time), "attempts": attempts,
            "integrator": integrator}
