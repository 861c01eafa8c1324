"""Command-line behavior: exit codes, validation, idempotence, seeding."""

import json
import math
import os
from pathlib import Path

import pytest

from vortexlab.cli import main

REPO_CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def simulate_config(**overrides):
    doc = {
        "schema": "vortexlab/simulate-v1",
        "intensities": [2 * math.pi, -2 * math.pi],
        "positions": [[0.5, 0.0], [-0.5, 0.0]],
        "kernel": {"kind": "euler"},
        "final_time": 2.0,
        "integrator": {"rel_tol": 1e-9, "abs_tol": 1e-12},
    }
    doc.update(overrides)
    return doc


def scan_config(**overrides):
    doc = {
        "schema": "vortexlab/collapse-scan-v1",
        "s": 0.75,
        "anchor": 0,
        "intensities": [1.0, 1.0, -0.5],
        "rho": 1.0,
        "horizon": 0.5,
        "epsilons": [0.1, 0.05],
        "samples_per_epsilon": 100,
        "rng_seed": 11,
    }
    doc.update(overrides)
    return doc


def test_simulate_completes_with_exit_zero(tmp_path, capsys):
    cfg = write_config(tmp_path, "sim.json", simulate_config())
    out = tmp_path / "out"
    code = main(["simulate", "--config", cfg, "--out", str(out),
                 "--emit-gnuplot"])
    assert code == 0
    assert (out / "trajectory.csv").is_file()
    assert (out / "trajectory.json").is_file()
    assert (out / "t_vs_min_dist.dat").is_file()
    text = capsys.readouterr().out
    assert "reached_final_time" in text
    assert "drift" in text


def test_simulate_is_idempotent(tmp_path):
    cfg = write_config(tmp_path, "sim.json", simulate_config())
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
    assert (out1 / "trajectory.csv").read_bytes() \
        == (out2 / "trajectory.csv").read_bytes()
    assert (out1 / "trajectory.json").read_bytes() \
        == (out2 / "trajectory.json").read_bytes()


def test_simulate_writes_only_inside_out_dir(tmp_path, monkeypatch):
    workdir = tmp_path / "cwd"
    workdir.mkdir()
    monkeypatch.chdir(workdir)
    cfg = write_config(tmp_path, "sim.json", simulate_config())
    out = tmp_path / "results"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert list(workdir.iterdir()) == []


def test_simulate_rejects_coincident_positions(tmp_path, capsys):
    doc = simulate_config(positions=[[0.5, 0.0], [0.5, 0.0]])
    cfg = write_config(tmp_path, "sim.json", doc)
    out = tmp_path / "out"
    code = main(["simulate", "--config", cfg, "--out", str(out)])
    assert code == 1
    err = capsys.readouterr().err
    assert "vortices 1 and 2 coincide" in err
    assert not out.exists()  # validation failures produce no output files


def test_simulate_rejects_unknown_field(tmp_path, capsys):
    doc = simulate_config(final_tim=1.0)
    cfg = write_config(tmp_path, "sim.json", doc)
    code = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 1
    assert "final_tim" in capsys.readouterr().err


def test_simulate_rejects_wrong_schema(tmp_path, capsys):
    doc = simulate_config(schema="vortexlab/simulate-v0")
    cfg = write_config(tmp_path, "sim.json", doc)
    code = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 1
    assert "schema" in capsys.readouterr().err


def test_simulate_exit_code_two_on_separation_event(tmp_path):
    doc = simulate_config(
        intensities=[1.0, 1.0],
        positions=[[0.1, 0.0], [-0.1, 0.0]],
        integrator={"rel_tol": 1e-9, "abs_tol": 1e-12,
                    "collapse_threshold": 0.5},
    )
    cfg = write_config(tmp_path, "sim.json", doc)
    code = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 2


def test_invariants_prints_table(capsys):
    code = main(["invariants", "--config",
                 str(REPO_CONFIGS / "invariants_example.json")])
    assert code == 0
    out = capsys.readouterr().out
    assert "hamiltonian" in out
    assert "center_of_vorticity" in out


def test_collapse_scan_end_to_end(tmp_path):
    cfg = write_config(tmp_path, "scan.json", scan_config())
    out = tmp_path / "scan"
    code = main(["collapse-scan", "--config", cfg, "--out", str(out),
                 "--emit-gnuplot"])
    assert code == 0
    doc = json.load(open(out / "result.json", encoding="utf-8"))
    assert doc["schema"] == "vortexlab/scan-result-v1"
    assert doc["seed"] == 11
    assert (out / "result.csv").is_file()
    assert (out / "eps_vs_fraction.dat").is_file()


def test_collapse_scan_reruns_identical_modulo_timestamp(tmp_path):
    cfg = write_config(tmp_path, "scan.json", scan_config())
    docs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["collapse-scan", "--config", cfg, "--out", str(out)]) == 0
        doc = json.load(open(out / "result.json", encoding="utf-8"))
        doc.pop("timestamp_utc")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_collapse_scan_rejects_small_sample_count(tmp_path, capsys):
    cfg = write_config(tmp_path, "scan.json",
                       scan_config(samples_per_epsilon=50))
    code = main(["collapse-scan", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 1
    assert "samples" in capsys.readouterr().err


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, "scan.json", scan_config())
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["collapse-scan", "--config", cfg, "--out", str(out1),
                 "--seed", "99"]) == 0
    assert main(["collapse-scan", "--config", cfg, "--out", str(out2)]) == 0
    d1 = json.load(open(out1 / "result.json", encoding="utf-8"))
    d2 = json.load(open(out2 / "result.json", encoding="utf-8"))
    assert d1["seed"] == 99 and d2["seed"] == 11


def test_env_seed_used_only_without_flag(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, "scan.json", scan_config())
    monkeypatch.setenv("VORTEXLAB_SEED", "123")
    out1 = tmp_path / "env"
    assert main(["collapse-scan", "--config", cfg, "--out", str(out1)]) == 0
    assert json.load(open(out1 / "result.json"))["seed"] == 123
    out2 = tmp_path / "flag"
    assert main(["collapse-scan", "--config", cfg, "--out", str(out2),
                 "--seed", "7"]) == 0
    assert json.load(open(out2 / "result.json"))["seed"] == 7


def test_kernel_check_passes_reference_grid(tmp_path, capsys):
    code = main(["kernel-check", "--config",
                 str(REPO_CONFIGS / "kernel_check.json"),
                 "--out", str(tmp_path / "kc")])
    assert code == 0
    out = capsys.readouterr().out
    assert "pass" in out and "FAIL" not in out
    doc = json.load(open(tmp_path / "kc" / "kernel_check.json"))
    assert len(doc["reports"]) == 20
    assert all(r["passed"] for r in doc["reports"])
    assert all(r["junction_residual"] <= 1e-6 for r in doc["reports"])


def test_kernel_check_rejects_epsilon_above_cap(tmp_path, capsys):
    doc = {
        "schema": "vortexlab/kernel-check-v1",
        "kernels": [{"kind": "euler"}],
        "epsilons": [0.6],
    }
    cfg = write_config(tmp_path, "kc.json", doc)
    code = main(["kernel-check", "--config", cfg])
    assert code == 1
    assert "epsilons[0]" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")])
    assert code == 1
    assert "not found" in capsys.readouterr().err


def test_collapse_demo_reaches_underflow(tmp_path, capsys):
    doc = {
        "schema": "vortexlab/collapse-demo-v1",
        "intensities": [1.0, 1.0, -0.5],
        "rng_seed": 7,
        "final_time": 50.0,
    }
    cfg = write_config(tmp_path, "demo.json", doc)
    out = tmp_path / "demo"
    code = main(["collapse-demo", "--config", cfg, "--out", str(out)])
    assert code == 3
    text = capsys.readouterr().out
    assert "step_underflow" in text
    assert (out / "trajectory.json").is_file()


def test_collapse_demo_not_found_for_positive_triple(tmp_path, capsys):
    doc = {
        "schema": "vortexlab/collapse-demo-v1",
        "intensities": [1.0, 1.0, 1.0],
        "rng_seed": 0,
        "attempts": 5,
    }
    cfg = write_config(tmp_path, "demo.json", doc)
    code = main(["collapse-demo", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 1
    assert "no C=0 configuration" in capsys.readouterr().err
