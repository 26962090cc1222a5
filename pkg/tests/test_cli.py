"""Command-line interface tests: artifact layout, exit codes, config
files, seed resolution, and output determinism.

All invocations use tiny --scale values so the whole file runs in
seconds; statistical quality at full scale is the acceptance suite's
job, not this file's.
"""

import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from haarquench.cli import DEFAULT_SEED, PRESET_NAMES, main, preset_curves
from haarquench.distributions import Family
from haarquench.experiment import (
    SEED_SCHEDULE_VERSION,
    ExperimentConfig,
    config_from_dict,
)
from haarquench.gme import SolverFailureError

TINY = ["--scale", "0.0002"]


def run_cli(args):
    return main([str(a) for a in args])


def read_summary(directory, name):
    return json.loads((Path(directory) / f"{name}_summary.json").read_text())


# ---------------------------------------------------------------------------
# run: presets


def test_run_preset_writes_expected_artifacts(tmp_path):
    code = run_cli(["run", "fig1", "--seed", 7, *TINY, "--out", tmp_path])
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [
        "fig1_cauchy_lorentz.csv",
        "fig1_clean.csv",
        "fig1_gaussian.csv",
        "fig1_summary.json",
        "fig1_uniform.csv",
    ]
    for csv_path in tmp_path.glob("*.csv"):
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "bin_lower,bin_upper,percentage"
        assert len(lines) == 51

    summary = read_summary(tmp_path, "fig1")
    assert summary["master_seed"] == 7
    assert summary["seed_schedule_version"] == SEED_SCHEDULE_VERSION
    assert [c["curve"] for c in summary["curves"]] == [
        "clean", "gaussian", "uniform", "cauchy_lorentz"]
    for curve in summary["curves"]:
        assert curve["n_samples"] == 200
        assert 0.0 <= curve["mean"] <= 1.0
        assert curve["csv"] in names


def test_run_summary_config_echo_round_trips(tmp_path):
    run_cli(["run", "fig1", "--seed", 3, *TINY, "--out", tmp_path])
    summary = read_summary(tmp_path, "fig1")
    expected = {curve_id: config for curve_id, config, _
                in preset_curves("fig1", seed=3, scale=0.0002)}
    for curve in summary["curves"]:
        assert config_from_dict(curve["config"]) == expected[curve["curve"]]


def test_run_is_deterministic(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert run_cli(["run", "fig2_noisy2q", "--seed", 5, *TINY,
                        "--out", out]) == 0
    for path in sorted(first.iterdir()):
        assert path.read_bytes() == (second / path.name).read_bytes()


def test_run_scale_floors_ensemble_sizes_at_one(tmp_path):
    code = run_cli(["run", "fig1", "--seed", 1, "--scale", "1e-9",
                    "--out", tmp_path])
    assert code == 0
    summary = read_summary(tmp_path, "fig1")
    quenched = summary["curves"][1]["config"]
    assert quenched["n_states"] == 1
    assert quenched["n_disorder_configs"] == 1


def test_run_invalid_preset_exits_1(tmp_path, capsys):
    assert run_cli(["run", "no_such_preset", "--out", tmp_path]) == 1
    message = capsys.readouterr().err
    assert "no_such_preset" in message
    assert "fig1" in message


def test_run_numerical_failure_exits_2_with_dump_path(tmp_path, capsys,
                                                      monkeypatch):
    def explode(config, n_workers=1, chunk_states=None):
        raise SolverFailureError(
            "witness program stalled; problem dumped to /tmp/w-dump.sdp")

    monkeypatch.setattr("haarquench.cli.run_clean", explode)
    code = run_cli(["run", "fig1", *TINY, "--out", tmp_path])
    assert code == 2
    assert "/tmp/w-dump.sdp" in capsys.readouterr().err


def test_usage_errors_exit_1(tmp_path):
    assert run_cli(["run"]) == 1
    assert run_cli([]) == 1
    assert run_cli(["run", "fig1", "--seed", "not_an_int",
                    "--out", tmp_path]) == 1


def test_three_qubit_preset_flags_reduced_counts(tmp_path):
    code = run_cli(["run", "fig6_3q_pure", "--seed", 2, "--scale", "0.002",
                    "--out", tmp_path])
    assert code == 0
    summary = read_summary(tmp_path, "fig6_3q_pure")
    for curve in summary["curves"]:
        assert "three_qubit_counts_reduced_to_desk_scale" \
            in curve["assumption_flags"]
    for csv_path in tmp_path.glob("*.csv"):
        assert len(csv_path.read_text().splitlines()) == 26


def test_noisy_presets_flag_assumed_dispersion(tmp_path):
    curves = preset_curves("fig2_noisy2q", seed=0, scale=1.0)
    flagged = {curve_id: flags for curve_id, _, flags in curves}
    assert "noisy_quenched_siqr_assumed_0.5" in flagged["p09_cauchy_lorentz"]
    assert "noisy_quenched_siqr_assumed_0.5" in flagged["p08_cauchy_lorentz"]
    assert flagged["p09_clean"] == ()
    curves = preset_curves("fig7_3q_noisy", seed=0, scale=1.0)
    for _, _, flags in curves:
        assert "noisy_three_qubit_counts_reused_from_pure_preset" in flags


def test_every_preset_expands_to_valid_configs():
    for name in PRESET_NAMES:
        for curve_id, config, _ in preset_curves(name, seed=1, scale=1.0):
            assert isinstance(config, ExperimentConfig)
            assert config.master_seed == 1
            assert curve_id


def test_gamma_sweep_preset_covers_strength_grid():
    curves = preset_curves("fig5_gamma_sweep", seed=0, scale=1.0)
    gammas = [config.siqr for curve_id, config, _ in curves
              if curve_id.startswith("gamma_")]
    assert gammas == [0.3, 0.4, 0.5, 0.6, 0.7]
    for curve_id, config, _ in curves[1:]:
        assert config.disorder_family is Family.GAUSSIAN
        assert config.targets == (0,)


# ---------------------------------------------------------------------------
# run: config files


CONFIG_TEXT = """\
# quenched two-qubit run
n_qubits = 2
n_states = 300
n_disorder_configs = 2
disorder_family = cauchy_lorentz
siqr = 0.5
targets = 0,2
bin_width = 0.02
master_seed = 11
"""


def test_run_config_file(tmp_path):
    config_path = tmp_path / "myrun.cfg"
    config_path.write_text(CONFIG_TEXT)
    out = tmp_path / "out"
    assert run_cli(["run", config_path, "--out", out]) == 0
    summary = read_summary(out, "myrun")
    assert (out / "myrun_custom.csv").is_file()
    config = config_from_dict(summary["curves"][0]["config"])
    assert config == ExperimentConfig(
        n_qubits=2, n_states=300, n_disorder_configs=2,
        disorder_family=Family.CAUCHY_LORENTZ, siqr=0.5, targets=(0, 2),
        bin_width=0.02, master_seed=11)


def test_run_config_file_seed_flag_overrides_file(tmp_path):
    config_path = tmp_path / "myrun.cfg"
    config_path.write_text(CONFIG_TEXT)
    out = tmp_path / "out"
    assert run_cli(["run", config_path, "--seed", 5, "--out", out]) == 0
    assert read_summary(out, "myrun")["curves"][0]["config"][
        "master_seed"] == 5


@pytest.mark.parametrize("text, fragment", [
    (CONFIG_TEXT + "typo_key = 3\n", "unknown key"),
    (CONFIG_TEXT + "n_qubits = 2\n", "duplicate"),
    (CONFIG_TEXT.replace("n_states = 300", "n_states = many"), "bad value"),
    (CONFIG_TEXT.replace("bin_width = 0.02", "bin_width = 0.03"),
     "bin_width"),
    (CONFIG_TEXT.replace("targets = 0,2", "targets = 0,9"), "target"),
])
def test_run_config_file_rejects_bad_input(tmp_path, capsys, text, fragment):
    config_path = tmp_path / "bad.cfg"
    config_path.write_text(text)
    assert run_cli(["run", config_path, "--out", tmp_path / "out"]) == 1
    assert fragment in capsys.readouterr().err


def test_run_config_file_requires_core_keys(tmp_path, capsys):
    config_path = tmp_path / "sparse.cfg"
    config_path.write_text("n_qubits = 2\n")
    assert run_cli(["run", config_path, "--out", tmp_path / "out"]) == 1
    assert "n_states" in capsys.readouterr().err


def test_run_clean_config_file_worker_count_does_not_change_output(tmp_path):
    config_path = tmp_path / "clean.cfg"
    config_path.write_text("n_qubits = 2\nn_states = 250000\n"
                           "master_seed = 4\n")
    outputs = []
    for workers in (1, 2):
        out = tmp_path / f"w{workers}"
        assert run_cli(["run", config_path, "--workers", workers,
                        "--out", out]) == 0
        outputs.append((out / "clean_custom.csv").read_bytes()
                       + (out / "clean_summary.json").read_bytes())
    assert outputs[0] == outputs[1]


# ---------------------------------------------------------------------------
# seed resolution


def test_env_seed_used_when_flag_absent(tmp_path, monkeypatch):
    monkeypatch.setenv("HAARQUENCH_SEED", "7")
    run_cli(["run", "fig1", *TINY, "--out", tmp_path])
    assert read_summary(tmp_path, "fig1")["master_seed"] == 7


def test_seed_flag_overrides_env(tmp_path, monkeypatch):
    monkeypatch.setenv("HAARQUENCH_SEED", "7")
    run_cli(["run", "fig1", "--seed", 9, *TINY, "--out", tmp_path])
    assert read_summary(tmp_path, "fig1")["master_seed"] == 9


def test_default_seed_when_nothing_given(tmp_path, monkeypatch):
    monkeypatch.delenv("HAARQUENCH_SEED", raising=False)
    run_cli(["run", "fig1", *TINY, "--out", tmp_path])
    assert read_summary(tmp_path, "fig1")["master_seed"] == DEFAULT_SEED


def test_invalid_env_seed_exits_1(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HAARQUENCH_SEED", "eleven")
    assert run_cli(["run", "fig1", *TINY, "--out", tmp_path]) == 1
    assert "HAARQUENCH_SEED" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# check


def test_check_undersampled_run_exits_3(capsys):
    assert run_cli(["check", "fig1", "--seed", 42, "--scale", "0.001"]) == 3
    out = capsys.readouterr().out
    for curve_id in ("clean", "gaussian", "uniform", "cauchy_lorentz"):
        assert re.search(rf"^{curve_id}\s", out, re.MULTILINE)
    assert "convergence check failed" in out


def test_check_invalid_preset_exits_1(capsys):
    assert run_cli(["check", "no_such_preset"]) == 1
    assert "unknown preset" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# acceptance


def test_acceptance_smoke_run_writes_ten_row_report(tmp_path, capsys):
    report_path = tmp_path / "report.txt"
    code = run_cli(["acceptance", "--seed", 42, "--scale", "0.002",
                    "--out", report_path])
    assert code in (0, 4)
    report = report_path.read_text()
    rows = re.findall(r"^\s*\d+ (?:PASS|FAIL) ", report, re.MULTILINE)
    assert len(rows) == 10
    assert re.search(r"result: \d+/10 criteria passed", report)
    assert report in capsys.readouterr().out


# ---------------------------------------------------------------------------
# console entry point


def test_console_script_runs(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "haarquench.cli", "run", "fig1",
         "--seed", "7", *TINY, "--out", str(tmp_path)],
        capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "fig1_summary.json").is_file()
