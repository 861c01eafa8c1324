"""Command-line front end for batch experiments.

Subcommands bind JSON configuration files to the library:

* ``simulate``       integrate a vortex system, write trajectory CSV+JSON;
* ``invariants``     print the conserved-quantity table of one state;
* ``collapse-scan``  Monte Carlo measure scan, write result JSON+CSV;
* ``kernel-check``   verify the cap conditions of regularized kernels;
* ``collapse-demo``  search a C=0 triple and integrate it into collapse.

Exit codes encode the scientific outcome so shell scripts can branch on
them: 0 = completed, 1 = configuration error, 2 = separation threshold
reached, 3 = step underflow near collapse (for ``kernel-check``, 2 means a
cap condition failed).  The ``VORTEXLAB_SEED`` environment variable
overrides config seeds only when ``--seed`` is absent.  Commands write
only inside their ``--out`` directory, and validation failures never
produce partial output files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, serialize
from .collapse import find_collapse_candidate, scan
from .conserved import drift_audit, invariant_snapshot
from .dynamics import TerminationCause, integrate
from .errors import ConfigError
from .kernels import check_regularization, regularize

_TERMINATION_EXIT = {
    TerminationCause.REACHED_FINAL_TIME: 0,
    TerminationCause.EPS_COLLAPSE: 2,
    TerminationCause.STEP_UNDERFLOW: 3,
}


def _resolve_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("VORTEXLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("VORTEXLAB_SEED", f"not an integer: {env!r}")
    return None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_drifts(drifts: dict[str, float]) -> None:
    label = {"hamiltonian": "H", "vorticity_vector": "M",
             "moment_of_inertia": "I", "collapse_constraint": "C"}
    parts = [f"{label[k]}={v:.3e}" for k, v in drifts.items()]
    print("max relative drift: " + "  ".join(parts))


def cmd_simulate(args) -> int:
    doc = cfgmod.load_json(args.config)
    parsed = cfgmod.parse_simulate(doc)
    out = _out_dir(args)
    rec = integrate(parsed["system"], parsed["kernel"], parsed["final_time"],
                    parsed["integrator"])
    serialize.trajectory_to_csv(rec, out / "trajectory.csv")
    serialize.trajectory_to_json(rec, out / "trajectory.json")
    if args.emit_gnuplot:
        serialize.write_columns(out / "t_vs_min_dist.dat",
                                (rec.times, rec.min_pair_distance))
    term = rec.termination
    print(f"termination: {term.cause.value} at t={term.time:.6g}"
          + (f" pair={term.pair}" if term.pair else ""))
    if rec.n_snapshots >= 2:
        _print_drifts(drift_audit(rec))
    print(f"wrote {out / 'trajectory.csv'} and {out / 'trajectory.json'}")
    return _TERMINATION_EXIT[term.cause]


def cmd_invariants(args) -> int:
    doc = cfgmod.load_json(args.config)
    parsed = cfgmod.parse_invariants(doc)
    snap = invariant_snapshot(parsed["system"], parsed["kernel"])
    rows = [
        ("hamiltonian", f"{snap.hamiltonian:.17g}"),
        ("vorticity_vector", f"({snap.vorticity_vector[0]:.17g}, "
                             f"{snap.vorticity_vector[1]:.17g})"),
        ("moment_of_inertia", f"{snap.moment_of_inertia:.17g}"),
        ("collapse_constraint", f"{snap.collapse_constraint:.17g}"),
        ("identity_residual", f"{snap.identity_residual:.3e}"),
        ("diameter", f"{snap.diameter:.17g}"),
        ("center_of_vorticity",
         "neutral system" if snap.center_of_vorticity is None else
         f"({snap.center_of_vorticity[0]:.17g}, "
         f"{snap.center_of_vorticity[1]:.17g})"),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value}")
    return 0


def cmd_collapse_scan(args) -> int:
    doc = cfgmod.load_json(args.config)
    scan_config = cfgmod.parse_collapse_scan(doc, seed_override=_resolve_seed(args))
    out = _out_dir(args)

    last = {"ei": -1}

    def progress(ei: int, frac: float) -> None:
        if ei != last["ei"]:
            last["ei"] = ei
            eps = scan_config.epsilons[ei]
            print(f"epsilon={eps:g}: ", end="", flush=True)
        print(f"{frac:.0%} ", end="", flush=True)
        if frac >= 1.0:
            print()

    result = scan(scan_config, n_workers=args.threads, progress=progress)
    serialize.scan_result_to_json(result, out / "result.json")
    serialize.scan_result_to_csv(result, out / "result.csv")
    if args.emit_gnuplot:
        serialize.write_columns(
            out / "eps_vs_fraction.dat",
            ([c.epsilon for c in result.cells],
             [c.measure_fraction for c in result.cells]))
    slope = ("n/a (insufficient hits)" if result.fitted_exponent is None
             else f"{result.fitted_exponent:.4f}")
    print(f"rate law: {result.rate_law.value}; fitted log-log slope: {slope}; "
          f"bound constant: {result.bound_constant:.4g}")
    print(f"wrote {out / 'result.json'} and {out / 'result.csv'}")
    return 0


def cmd_kernel_check(args) -> int:
    doc = cfgmod.load_json(args.config)
    parsed = cfgmod.parse_kernel_check(doc)
    out = _out_dir(args) if args.out else None

    any_failed = False
    report_rows = []
    for profile in parsed["profiles"]:
        name = profile.kind if profile.s is None else f"{profile.kind}(s={profile.s})"
        for eps in parsed["epsilons"]:
            rep = check_regularization(regularize(profile, eps),
                                       n=parsed["grid_points"])
            status = "pass" if rep.all_passed else "FAIL"
            any_failed = any_failed or not rep.all_passed
            worst = max(c.worst_margin for c in rep.conditions)
            print(f"{name:<14} eps={eps:<8g} {status}  "
                  f"worst margin {worst:+.3e}  "
                  f"junction residual {rep.junction_residual:.3e}")
            report_rows.append({
                "kernel": name,
                "epsilon": eps,
                "passed": rep.all_passed,
                "junction_residual": rep.junction_residual,
                "conditions": [
                    {"name": c.name, "passed": c.passed,
                     "worst_margin": c.worst_margin, "n_points": c.n_points}
                    for c in rep.conditions
                ],
            })
    if out is not None:
        import json

        with open(out / "kernel_check.json", "w", encoding="utf-8") as fh:
            json.dump({"schema": "vortexlab/kernel-check-report-v1",
                       "version": __version__,
                       "reports": report_rows}, fh, indent=2)
            fh.write("\n")
        print(f"wrote {out / 'kernel_check.json'}")
    return 2 if any_failed else 0


def cmd_collapse_demo(args) -> int:
    doc = cfgmod.load_json(args.config)
    parsed = cfgmod.parse_collapse_demo(doc, seed_override=_resolve_seed(args))
    out = _out_dir(args)

    rng = np.random.default_rng(parsed["seed"])
    candidate = find_collapse_candidate(parsed["intensities"], rng,
                                        attempts=parsed["attempts"])
    if candidate is None:
        print("no C=0 configuration found for these intensities "
              f"within {parsed['attempts']} attempts", file=sys.stderr)
        return 1
    from .conserved import collapse_constraint
    from .kernels import euler_kernel

    c_val = collapse_constraint(candidate)
    print(f"found candidate with C = {c_val:.3e}")
    for i, p in enumerate(candidate.positions):
        print(f"  vortex {i + 1}: a={candidate.intensities[i]:+g} "
              f"at ({p[0]:.6f}, {p[1]:.6f})")

    rec = integrate(candidate, euler_kernel(), parsed["final_time"],
                    parsed["integrator"])
    serialize.trajectory_to_csv(rec, out / "trajectory.csv")
    serialize.trajectory_to_json(rec, out / "trajectory.json")
    term = rec.termination
    print(f"termination: {term.cause.value} at t={term.time:.6g}; "
          f"final min separation {rec.min_pair_distance[-1]:.3e}")
    print(f"wrote {out / 'trajectory.csv'} and {out / 'trajectory.json'}")
    return _TERMINATION_EXIT[term.cause]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortexlab",
        description="Point-vortex dynamics laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *, needs_out=True, out_required=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        if needs_out:
            p.add_argument("--out", required=out_required,
                           help="output directory (all files go here)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config RNG seed")
        p.set_defaults(func=func)
        return p

    p_sim = add("simulate", cmd_simulate, "integrate a vortex system")
    p_sim.add_argument("--emit-gnuplot", action="store_true",
                       help="write plain two-column t vs min-distance data")

    add("invariants", cmd_invariants, "print the conserved-quantity table",
        needs_out=False)

    p_scan = add("collapse-scan", cmd_collapse_scan,
                 "Monte Carlo scan of the near-collapse measure")
    p_scan.add_argument("--threads", type=int, default=1,
                        help="worker pool size for probes")
    p_scan.add_argument("--emit-gnuplot", action="store_true",
                        help="write plain two-column epsilon vs fraction data")

    add("kernel-check", cmd_kernel_check,
        "verify cap conditions of regularized kernels", out_required=False)

    add("collapse-demo", cmd_collapse_demo,
        "find a C=0 triple and integrate it into collapse")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
