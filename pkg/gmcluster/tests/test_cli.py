import json
from pathlib import Path

import pandas as pd
import pydantic
import pytest

from gmcluster import __main__ as cli
from gmcluster.core_processes.ground_state.ground_state_models import GroundStateMoments
from gmcluster.core_processes.verify_all import verification_checks
from gmcluster.core_processes.verify_all.verification_models import below
from gmcluster.data_layer.load_run_config import load_run_config
from gmcluster.system.exceptions import DivergenceError, ValidationError
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    GREEN_KERNEL_TABLE_CSV_FILE_NAME,
    RESOLVED_RUN_CONFIG_JSON_FILE_NAME,
    RUN_METADATA_JSON_FILE_NAME,
    SPIKE_GAPS_CSV_FILE_NAME,
    SPIKE_POSITIONS_JSON_FILE_NAME,
    VERIFICATION_REPORT_JSON_FILE_NAME,
)


@pytest.fixture
def h_double_prime(ground_state_moments: GroundStateMoments) -> str:
    """h'' giving -h'' ν1 / (2 ν2) = 1, the ratio the reduced-system tests use."""
    return repr(-2.0 * ground_state_moments.nu2 / ground_state_moments.nu1)


def _read_json(path: Path) -> dict:
    return json.loads(path.read_text())


def test_stability_prints_matrix_A_eigenvalues(tmp_path, capsys, h_double_prime):
    exit_code = cli.main(
        ["stability", "--k", "5", "--h-double-prime", h_double_prime] + ["--output-folder", str(tmp_path)]
    )
    assert exit_code == 0
    assert "eigenvalues_A: 0 2 6 12 20" in capsys.readouterr().out.splitlines()
    for file_name in ["small_spectrum_report.json", "matrix_A.csv", "matrix_M.csv", RUN_METADATA_JSON_FILE_NAME]:
        assert (tmp_path / file_name).is_file(), f"missing {file_name}"


def test_reduce_writes_positions_and_resolved_config(tmp_path, h_double_prime):
    exit_code = cli.main(
        ["reduce", "--k", "3", "--eps", "1e-3", "--d", "4e-4", "--h-double-prime", h_double_prime]
        + ["--output-folder", str(tmp_path)]
    )
    assert exit_code == 0

    positions = _read_json(tmp_path / SPIKE_POSITIONS_JSON_FILE_NAME)
    assert positions["relative_residual"] < 1e-12
    assert len(positions["configuration"]["offsets"]) == 3
    assert positions["admissibility"]["eta"] == 0.5

    resolved = _read_json(tmp_path / RESOLVED_RUN_CONFIG_JSON_FILE_NAME)
    assert resolved["cluster"]["k"] == 3
    assert resolved["cluster"]["epsilon"] == 1e-3
    assert resolved["simulate"]["n_theta"] == 256, "defaults are filled in"

    gaps = pd.read_csv(tmp_path / SPIKE_GAPS_CSV_FILE_NAME)
    assert list(gaps.columns) == ["left_spike", "right_spike", "gap", "asymptotic_gap", "relative_deviation"]
    assert len(gaps) == 2


def test_identical_configs_give_byte_identical_outputs(tmp_path, h_double_prime):
    arguments = ["reduce", "--k", "4", "--h-double-prime", h_double_prime, "--output-folder", str(tmp_path)]
    assert cli.main(arguments) == 0
    first_run = {path.name: path.read_bytes() for path in tmp_path.iterdir()}
    assert cli.main(arguments) == 0
    second_run = {path.name: path.read_bytes() for path in tmp_path.iterdir()}

    assert sorted(first_run) == sorted(second_run)
    for file_name, contents in first_run.items():
        if file_name != RUN_METADATA_JSON_FILE_NAME:
            assert contents == second_run[file_name], f"{file_name} differs between identical runs"


def test_outputs_default_to_the_data_folder(data_folder_path):
    assert cli.main(["green", "--table-points", "25"]) == 0
    table = pd.read_csv(data_folder_path / "green" / GREEN_KERNEL_TABLE_CSV_FILE_NAME)
    assert list(table.columns) == ["r", "g0", "g0_prime", "g0_double_prime"]
    assert len(table) == 25

    metadata = _read_json(data_folder_path / "green" / RUN_METADATA_JSON_FILE_NAME)
    assert metadata["subcommand"] == "green"
    assert GREEN_KERNEL_TABLE_CSV_FILE_NAME in metadata["output_files"]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["fly"],
        ["reduce", "--no-such-flag", "1"],
        ["reduce", "--k", "three"],
        ["reduce", "--eps", "2.0"],
        ["simulate", "--dt", "1.0", "--t-end", "0.5"],
        ["nlep", "--modes", "-1"],
    ],
)
def test_usage_and_validation_errors_exit_with_one(argv):
    assert cli.main(argv) == 1


def test_circle_without_curvature_override_is_a_validation_error(tmp_path):
    assert cli.main(["reduce", "--curve-kind", "circle", "--output-folder", str(tmp_path)]) == 1


def test_numerical_failure_exits_with_two(tmp_path, monkeypatch):
    def diverging_runner(config):
        raise DivergenceError("no convergence", last_iterate=None, residual_norm=1.0)

    monkeypatch.setitem(cli.SUBCOMMAND_RUNNERS, "green", diverging_runner)
    assert cli.main(["green", "--output-folder", str(tmp_path)]) == 2


def test_config_file_sits_between_defaults_and_flags(tmp_path):
    config_path = tmp_path / "run.toml"
    config_path.write_text('verbosity = "debug"\n\n[cluster]\nk = 2\nepsilon = 5e-4\n\n[curve]\nkind = "circle"\n')

    from_file = load_run_config(config_path)
    assert from_file.cluster.k == 2
    assert from_file.cluster.epsilon == 5e-4
    assert from_file.cluster.diffusivity == 4e-4
    assert from_file.curve.kind == "circle"
    assert from_file.verbosity == "DEBUG"

    overridden = load_run_config(config_path, {"cluster": {"k": 4}})
    assert overridden.cluster.k == 4
    assert overridden.cluster.epsilon == 5e-4


def test_bad_config_files_are_rejected(tmp_path):
    with pytest.raises(ValidationError, match="not found"):
        load_run_config(tmp_path / "missing.toml")

    broken = tmp_path / "broken.toml"
    broken.write_text("[cluster\nk = 2\n")
    with pytest.raises(ValidationError, match="Could not parse"):
        load_run_config(broken)

    unknown_key = tmp_path / "unknown.toml"
    unknown_key.write_text("[cluster]\nspikes = 2\n")
    with pytest.raises(pydantic.ValidationError):
        load_run_config(unknown_key)


def test_config_file_flag_reaches_the_run(tmp_path, h_double_prime):
    config_path = tmp_path / "run.toml"
    config_path.write_text(f"[cluster]\nk = 2\nh_double_prime = {h_double_prime}\n")
    output_folder = tmp_path / "out"
    assert cli.main(["reduce", "--config", str(config_path), "--output-folder", str(output_folder)]) == 0
    assert _read_json(output_folder / RESOLVED_RUN_CONFIG_JSON_FILE_NAME)["cluster"]["k"] == 2


def test_failed_verification_writes_report_and_exits_with_two(tmp_path, monkeypatch):
    def failing_check(context):
        return [below("always_fails", "matrix_spectrum", 1.0, 0.5)]

    monkeypatch.setattr(verification_checks, "VERIFICATION_SUITE", {"matrix_spectrum": failing_check})
    assert cli.main(["verify-all", "--output-folder", str(tmp_path)]) == 2

    report = _read_json(tmp_path / VERIFICATION_REPORT_JSON_FILE_NAME)
    assert report["passed"] is False
    assert report["failed_checks"] == ["always_fails"]
    assert report["checks"][0]["measured"] == 1.0


def test_verification_area_raising_library_error_still_writes_report(tmp_path, monkeypatch):
    def bracket_lost(context):
        raise ValueError("f(a) and f(b) must have different signs")

    def passing_check(context):
        return [below("always_passes", "ground_state", 0.0, 1.0)]

    monkeypatch.setattr(
        verification_checks, "VERIFICATION_SUITE", {"matrix_spectrum": bracket_lost, "ground_state": passing_check}
    )
    assert cli.main(["verify-all", "--output-folder", str(tmp_path)]) == 2

    report = _read_json(tmp_path / VERIFICATION_REPORT_JSON_FILE_NAME)
    assert report["failed_checks"] == ["matrix_spectrum_completed"]
    assert "ValueError" in report["checks"][0]["detail"]
    assert report["checks"][1]["name"] == "always_passes"


@pytest.mark.slow
def test_verify_all_without_simulator_passes(tmp_path):
    assert cli.main(["verify-all", "--no-include-simulator", "--output-folder", str(tmp_path)]) == 0
    report = _read_json(tmp_path / VERIFICATION_REPORT_JSON_FILE_NAME)
    assert report["passed"], f"failed: {report['failed_checks']}"
    assert {check["group"] for check in report["checks"]} == {
        "matrix_spectrum",
        "ground_state",
        "green_kernel",
        "reduced_cluster",
        "spectral_stability",
        "nlep_solver",
    }
