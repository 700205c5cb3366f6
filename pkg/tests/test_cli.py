"""End-to-end tests of the command-line driver: exit codes, outputs, determinism."""

import json
import os

import pytest

from dtqm.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return str(path)


def harmonic_evolve_config(outdir):
    return {
        "grid": {"n_points": 256, "x_min": -8.0, "spacing": 0.0625},
        "constants": {"mass": 1.0, "hbar": 1.0, "tau": "magic"},
        "action": {"kind": "standard", "potential": {"name": "harmonic", "omega": 1.0}},
        "run": {"x0": 0.5, "p0": 0.3, "n_steps": 50, "tracking_tolerance": 1e-3, "norm_tolerance": 1e-6},
        "output": {"directory": outdir},
    }


def read_report(outdir):
    with open(os.path.join(outdir, "report.json"), encoding="utf-8") as fh:
        return json.load(fh)


def test_evolve_pass_and_csv_shape(tmp_path):
    out = str(tmp_path / "out")
    cfg = write_config(tmp_path, "evolve.json", harmonic_evolve_config(out))
    assert main(["evolve", "--config", cfg]) == 0
    report = read_report(out)
    assert report["pass"] is True
    assert report["results"]["max_norm_drift"] < 1e-6
    lines = open(os.path.join(out, "evolve.csv"), encoding="utf-8").read().splitlines()
    assert lines[0].startswith("# dtqm-csv-v1")
    assert lines[1] == "step,x_mean,p_mean,x_spread,norm,x_classical,p_classical"
    assert len(lines) == 2 + 51  # header comment + column row + 51 records


def test_evolve_free_packet_100_steps(tmp_path):
    out = str(tmp_path / "out")
    cfg = write_config(
        tmp_path,
        "free.json",
        {
            "grid": {"n_points": 256, "x_min": -8.0, "spacing": 0.0625},
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": "magic"},
            "action": {"kind": "standard", "potential": {"name": "zero"}},
            "run": {"x0": 0.0, "p0": 0.0, "n_steps": 100, "norm_tolerance": 1e-6},
            "output": {"directory": out},
        },
    )
    assert main(["evolve", "--config", cfg]) == 0
    lines = open(os.path.join(out, "evolve.csv"), encoding="utf-8").read().splitlines()
    assert len(lines) == 2 + 101
    norms = [float(line.split(",")[4]) for line in lines[2:]]
    assert max(abs(n - 1.0) for n in norms) < 1e-6


def test_evolve_zero_steps_single_row(tmp_path):
    out = str(tmp_path / "out")
    payload = harmonic_evolve_config(out)
    payload["run"]["n_steps"] = 0
    cfg = write_config(tmp_path, "evolve0.json", payload)
    assert main(["evolve", "--config", cfg]) == 0
    lines = open(os.path.join(out, "evolve.csv"), encoding="utf-8").read().splitlines()
    assert len(lines) == 3


def test_outputs_are_deterministic(tmp_path):
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    cfg = write_config(tmp_path, "evolve.json", harmonic_evolve_config("unused"))
    assert main(["evolve", "--config", cfg, "--out", out_a]) == 0
    assert main(["evolve", "--config", cfg, "--out", out_b]) == 0
    csv_a = open(os.path.join(out_a, "evolve.csv"), "rb").read()
    csv_b = open(os.path.join(out_b, "evolve.csv"), "rb").read()
    assert csv_a == csv_b
    rep_a = read_report(out_a)
    rep_b = read_report(out_b)
    rep_a.pop("wall_time_s")
    rep_b.pop("wall_time_s")
    assert json.dumps(rep_a, sort_keys=True) == json.dumps(rep_b, sort_keys=True)


def test_unknown_key_is_config_error_with_key_name(tmp_path, capsys):
    payload = harmonic_evolve_config("out")
    payload["run"]["typo_key"] = 1
    cfg = write_config(tmp_path, "bad.json", payload)
    assert main(["evolve", "--config", cfg]) == 2
    assert "typo_key" in capsys.readouterr().err


def test_missing_and_invalid_config_files(tmp_path):
    assert main(["evolve", "--config", str(tmp_path / "absent.json")]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert main(["evolve", "--config", str(broken)]) == 2


def test_check_action_admissible_and_probe(tmp_path):
    out = str(tmp_path / "out")
    ok = write_config(
        tmp_path,
        "ok.json",
        {
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.5},
            "action": {"kind": "standard", "potential": {"name": "harmonic", "omega": 1.0}},
            "run": {"domain": [-2.0, 2.0], "expect": "admissible"},
            "output": {"directory": out},
        },
    )
    assert main(["check-action", "--config", ok]) == 0
    report = read_report(out)
    assert report["results"]["criterion"]["is_constant"] is True

    probe = write_config(
        tmp_path,
        "probe.json",
        {
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.5},
            "action": {"kind": "quartic", "potential": {"name": "zero"}, "epsilon": 0.1},
            "run": {"domain": [-0.5, 0.5], "expect": "inadmissible"},
            "output": {"directory": out},
        },
    )
    assert main(["check-action", "--config", probe]) == 0

    mismatch = write_config(
        tmp_path,
        "mismatch.json",
        {
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.5},
            "action": {"kind": "standard", "potential": {"name": "zero"}},
            "run": {"domain": [-2.0, 2.0], "expect": "inadmissible"},
            "output": {"directory": out},
        },
    )
    assert main(["check-action", "--config", mismatch]) == 1


def test_check_action_vector_potential_reports_linearized_trace(tmp_path):
    out = str(tmp_path / "out")
    cfg = write_config(
        tmp_path,
        "vp.json",
        {
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.5},
            "action": {
                "kind": "vector_potential_2d",
                "potential": {"name": "zero"},
                "a1": {"name": "sine", "strength": 0.5},
                "a2": {"name": "bilinear", "strength": 0.3},
            },
            "run": {"domain": [-1.0, 1.0], "expect": "inadmissible", "n_samples": 1296},
            "output": {"directory": out},
        },
    )
    assert main(["check-action", "--config", cfg]) == 0
    report = read_report(out)
    assert report["results"]["linearized_max_trace"] == 0.0


def test_classical_harmonic_and_sine_probe(tmp_path):
    out = str(tmp_path / "out")
    harmonic = write_config(
        tmp_path,
        "harm.json",
        {
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.1},
            "action": {"kind": "standard", "potential": {"name": "harmonic", "omega": 1.0}},
            "run": {"x0": 1.0, "x_minus1": 1.0, "n_steps": 1000},
            "output": {"directory": out},
        },
    )
    assert main(["classical", "--config", harmonic]) == 0
    report = read_report(out)
    assert report["results"]["status"] == "complete"
    assert report["results"]["max_residual"] < 1e-9
    lines = open(os.path.join(out, "classical.csv"), encoding="utf-8").read().splitlines()
    assert lines[1] == "step,x,p,residual"
    assert len(lines) == 2 + 1001

    sine = write_config(
        tmp_path,
        "sine.json",
        {
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.01},
            "action": {"kind": "sine", "strength": 1.0},
            "run": {"x0": 1.45, "x_minus1": 1.4, "n_steps": 50, "expect_status": "no_solution"},
            "output": {"directory": out},
        },
    )
    assert main(["classical", "--config", sine]) == 0
    assert read_report(out)["results"]["status"] == "no_solution_at(1)"

    surprise = write_config(
        tmp_path,
        "surprise.json",
        {
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.01},
            "action": {"kind": "sine", "strength": 1.0},
            "run": {"x0": 1.45, "x_minus1": 1.4, "n_steps": 50},
            "output": {"directory": out},
        },
    )
    assert main(["classical", "--config", surprise]) == 1


def test_classical_seed_requires_exactly_one_of_two_keys(tmp_path):
    base = {
        "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.1},
        "action": {"kind": "standard", "potential": {"name": "zero"}},
        "run": {"x0": 1.0, "n_steps": 10},
        "output": {"directory": "out"},
    }
    cfg = write_config(tmp_path, "noseed.json", base)
    assert main(["classical", "--config", cfg]) == 2
    both = json.loads(json.dumps(base))
    both["run"]["x_minus1"] = 0.9
    both["run"]["p0"] = 0.5
    cfg = write_config(tmp_path, "both.json", both)
    assert main(["classical", "--config", cfg]) == 2


def sweep_config(outdir, hbar_list):
    return {
        "grid": {"n_points": 256},
        "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.1},
        "action": {"kind": "standard", "potential": {"name": "quartic", "strength": 0.1}},
        "run": {"x0": 1.0, "p0": 0.0, "n_steps": 30, "hbar_list": hbar_list},
        "output": {"directory": outdir},
    }


def test_sweep_monotone_pass(tmp_path):
    out = str(tmp_path / "out")
    cfg = write_config(tmp_path, "sweep.json", sweep_config(out, [1.0, 0.5, 0.25, 0.125]))
    assert main(["sweep", "--config", cfg]) == 0
    report = read_report(out)
    assert report["results"]["sweep"]["monotone_flag"] is True
    devs = report["results"]["sweep"]["max_deviation"]
    assert all(b <= a + 1e-6 for a, b in zip(devs, devs[1:]))
    assert os.path.exists(os.path.join(out, "sweep_finest.csv"))


def test_sweep_short_hbar_list_is_config_error(tmp_path):
    cfg = write_config(tmp_path, "sweep2.json", sweep_config("out", [1.0, 0.5]))
    assert main(["sweep", "--config", cfg]) == 2


def test_sweep_rejects_magic_tau(tmp_path):
    payload = sweep_config("out", [1.0, 0.5, 0.25])
    payload["constants"]["tau"] = "magic"
    cfg = write_config(tmp_path, "sweepmagic.json", payload)
    assert main(["sweep", "--config", cfg]) == 2


def test_build_reports_kernel_diagnostics(tmp_path):
    out = str(tmp_path / "out")
    cfg = write_config(
        tmp_path,
        "build.json",
        {
            "grid": {"n_points": 128, "x_min": -8.0, "spacing": 0.125},
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": "magic"},
            "action": {"kind": "standard", "potential": {"name": "zero"}},
            "run": {"max_unitarity_deviation": 1e-8},
            "output": {"directory": out},
        },
    )
    assert main(["build", "--config", cfg]) == 0
    report = read_report(out)
    assert report["results"]["unitarity_deviation"] < 1e-8
    assert report["results"]["tau"] == pytest.approx(report["results"]["magic_tau"])
    # unitary kernel: every eigenvalue sits on the unit circle
    assert report["results"]["eig_magnitude_min"] == pytest.approx(1.0, abs=1e-10)
    assert report["results"]["eig_magnitude_max"] == pytest.approx(1.0, abs=1e-10)


def test_build_probe_kernel_fails_tolerance(tmp_path):
    out = str(tmp_path / "out")
    cfg = write_config(
        tmp_path,
        "buildprobe.json",
        {
            "grid": {"n_points": 128, "x_min": -8.0, "spacing": 0.125},
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": "magic"},
            "action": {"kind": "quartic", "potential": {"name": "zero"}, "epsilon": 0.1},
            "run": {"amplitude_mode": "calibrated", "max_unitarity_deviation": 1e-3},
            "output": {"directory": out},
        },
    )
    assert main(["build", "--config", cfg]) == 1
    assert read_report(out)["results"]["unitarity_deviation"] > 1e-3


def test_build_analytic_mode_rejects_probe_kind(tmp_path):
    cfg = write_config(
        tmp_path,
        "badmode.json",
        {
            "grid": {"n_points": 128, "x_min": -8.0, "spacing": 0.125},
            "constants": {"mass": 1.0, "hbar": 1.0, "tau": "magic"},
            "action": {"kind": "sine", "strength": 1.0},
            "run": {},
            "output": {"directory": "out"},
        },
    )
    assert main(["build", "--config", cfg]) == 2


def test_format_flag_restricts_data_outputs(tmp_path):
    out = str(tmp_path / "json_only")
    cfg = write_config(tmp_path, "evolve.json", harmonic_evolve_config(out))
    assert main(["evolve", "--config", cfg, "--format", "json"]) == 0
    assert not os.path.exists(os.path.join(out, "evolve.csv"))
    assert os.path.exists(os.path.join(out, "report.json"))
    out2 = str(tmp_path / "csv_only")
    assert main(["evolve", "--config", cfg, "--out", out2, "--format", "csv"]) == 0
    assert os.path.exists(os.path.join(out2, "evolve.csv"))


def test_boundary_violation_is_numerical_failure(tmp_path, capsys):
    payload = harmonic_evolve_config(str(tmp_path / "out"))
    payload["action"] = {"kind": "standard", "potential": {"name": "zero"}}
    payload["run"] = {"x0": 0.0, "p0": 1.0, "n_steps": 200}
    cfg = write_config(tmp_path, "wall.json", payload)
    assert main(["evolve", "--config", cfg]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_grid_block_rejected_where_unused(tmp_path):
    payload = {
        "grid": {"n_points": 64, "x_min": -4.0, "spacing": 0.125},
        "constants": {"mass": 1.0, "hbar": 1.0, "tau": 0.1},
        "action": {"kind": "standard", "potential": {"name": "zero"}},
        "run": {"x0": 1.0, "x_minus1": 0.9, "n_steps": 5},
        "output": {"directory": "out"},
    }
    cfg = write_config(tmp_path, "gridded.json", payload)
    assert main(["classical", "--config", cfg]) == 2
