"""Tests for fock_hilbert_lab/cli.py."""

import io
import json
from pathlib import Path
from unittest.mock import patch

import pandas as pd
import pytest

from fock_hilbert_lab.cli import (
    EXIT_CONFIG,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    EXIT_VIOLATION,
    main,
    parse_run_config,
    run,
)
from fock_hilbert_lab.errors import NonConvergenceError

LEBESGUE = '{"type": "power", "c": 1, "s": 1}'
DIRAC_AT_ZERO = '{"type": "atoms", "atoms": [[0.0, 1.0]]}'


def _csv(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text))


# ---------------------------------------------------------------------------
# Successful commands
# ---------------------------------------------------------------------------


def test_moments_command(capsys):
    assert run(["moments", "--measure", LEBESGUE, "--n", "3"]) == EXIT_OK
    captured = capsys.readouterr()
    frame = _csv(captured.out)
    assert frame.columns.tolist() == ["n", "moment"]
    assert frame["moment"].tolist() == pytest.approx([1.0, 0.5, 1.0 / 3.0, 0.25], rel=1e-15)
    assert "moments: 4 cells" in captured.err


def test_moments_measure_from_file(tmp_path: Path, capsys):
    measure_file = tmp_path / "delta.json"
    measure_file.write_text('{"type": "atoms", "atoms": [[0.5, 1.0]]}', encoding="utf-8")
    assert run(["moments", "--measure", str(measure_file), "--n", "3"]) == EXIT_OK
    frame = _csv(capsys.readouterr().out)
    assert frame["moment"].iloc[3] == pytest.approx(0.125)


def test_opnorm_point_mass(capsys):
    argv = ["opnorm", "--op", "hmu", "--measure", DIRAC_AT_ZERO]
    argv += ["--theta", "4", "--beta", "1", "--N", "8"]
    assert run(argv) == EXIT_OK
    frame = _csv(capsys.readouterr().out)
    assert frame["value"].iloc[0] == pytest.approx(2.0, rel=1e-12)
    assert frame["N"].iloc[0] == 8


def test_opnorm_json_output(tmp_path: Path):
    out = tmp_path / "report.json"
    argv = ["opnorm", "--lambda", "1", "--N", "2", "--format", "json", "--out", str(out)]
    assert run(argv) == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["config"]["command"] == "opnorm"
    assert payload["metadata"]["op"] == "hlambda"
    assert payload["cells"][0]["value"] == pytest.approx((4.0 + 13.0**0.5) / 6.0, rel=1e-10)


def test_apply_command(tmp_path: Path, capsys):
    coeffs = tmp_path / "f.txt"
    coeffs.write_text("1 0\n# second coefficient\n0.5 0\n", encoding="utf-8")
    assert run(["apply", "--lambda", "1", "--coeffs", str(coeffs)]) == EXIT_OK
    frame = _csv(capsys.readouterr().out)
    assert frame.columns.tolist() == ["n", "re", "im"]
    assert frame["re"].tolist() == pytest.approx([1.25, 0.5 + 0.5 / 3.0])
    assert frame["im"].tolist() == [0.0, 0.0]


def test_carleson_command_xlsx(tmp_path: Path):
    out = tmp_path / "carleson.xlsx"
    argv = ["carleson", "--measure", LEBESGUE, "--grid-s", "0.5,1"]
    argv += ["--format", "xlsx", "--out", str(out)]
    assert run(argv) == EXIT_OK
    assert out.exists()


def test_scan_threshold_csv_independent_of_jobs(capsys, in_process_executor):
    base = ["scan-threshold", "--beta", "0.5", "--grid-lambda", "1,1.25", "--grid-N", "16,32"]
    assert run(base + ["--jobs", "1"]) == EXIT_OK
    serial = capsys.readouterr().out
    assert run(base + ["--jobs", "2"]) == EXIT_OK
    parallel = capsys.readouterr().out
    assert serial == parallel
    assert serial.startswith("series,parameter,N,value,ratio\n")


def test_main_exits_with_status():
    with pytest.raises(SystemExit) as exc_info:
        main(["moments", "--measure", LEBESGUE, "--n", "1"])
    assert exc_info.value.code == EXIT_OK


def test_log_file_receives_debug_output(tmp_path: Path):
    log_file = tmp_path / "logs" / "run.log"
    argv = ["moments", "--measure", LEBESGUE, "--n", "1", "--log-file", str(log_file)]
    assert run(argv) == EXIT_OK
    assert "run config" in log_file.read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# Exit statuses
# ---------------------------------------------------------------------------


def test_verify_lemmas_violation_exit(capsys):
    argv = ["verify-lemmas", "--n", "4", "--grid-N", "16", "--grid-w", "0.5"]
    argv += ["--bound-scale", "0.5"]
    assert run(argv) == EXIT_VIOLATION
    assert "violated" in capsys.readouterr().err


def test_verify_lemmas_passes(capsys):
    argv = ["verify-lemmas", "--beta", "0.5", "--n", "4", "--grid-N", "16", "--grid-w", "0.5"]
    assert run(argv) == EXIT_OK


def test_unknown_config_key(tmp_path: Path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"theta": 2.0, "bogus": 1}), encoding="utf-8")
    argv = ["moments", "--config", str(config), "--measure", LEBESGUE, "--n", "2"]
    assert run(argv) == EXIT_CONFIG
    assert "bogus" in capsys.readouterr().err


def test_flags_override_config_file(tmp_path: Path, monkeypatch):
    monkeypatch.setenv("FHL_DEFAULT_JOBS", "3")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"theta": 2.0, "alpha": 0.5}), encoding="utf-8")
    parsed = parse_run_config(
        ["opnorm", "--config", str(config), "--theta", "3", "--lambda", "1", "--N", "4"]
    )
    assert parsed.theta == 3.0
    assert parsed.alpha == 0.5
    assert parsed.jobs == 3
    assert parsed.dim == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["moments", "--n", "3"],
        ["opnorm", "--N", "4"],
        ["opnorm", "--lambda", "1", "--N", "4", "--theta", "0"],
        ["opnorm", "--lambda", "1", "--N", "4", "--format", "xlsx"],
        ["opnorm", "--lambda", "1", "--N", "4", "--jobs", "0"],
        ["moments", "--measure", '{"type": "cantor"}', "--n", "3"],
        ["moments", "--measure", "/no/such/measure.json", "--n", "3"],
        ["hardy-scan", "--model", "dirichlet", "--grid-lambda", "1", "--grid-N", "8"],
        [
            "scan-lambda-mu",
            "--measure",
            '{"type": "power", "c": 1, "s": 0.5}',
            "--lambda",
            "0.25",
            "--grid-N",
            "8",
        ],
    ],
)
def test_config_errors_exit_two(argv, capsys):
    assert run(argv) == EXIT_CONFIG
    assert "Error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [["opnorm", "--no-such-flag"], ["opnorm", "--lambda", "1", "--N", "abc"], ["no-such-command"]],
)
def test_parse_errors_exit_two(argv, capsys):
    assert run(argv) == EXIT_CONFIG
    assert "usage:" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert run(["opnorm", "--help"]) == EXIT_OK
    assert "usage:" in capsys.readouterr().out


def test_unwritable_output_exits_two(tmp_path: Path, capsys):
    blocker = tmp_path / "file.txt"
    blocker.write_text("not a directory", encoding="utf-8")
    out = blocker / "report.csv"
    assert run(["opnorm", "--lambda", "1", "--N", "2", "--out", str(out)]) == EXIT_CONFIG
    assert "Error:" in capsys.readouterr().err


def test_nonconvergence_exit(capsys):
    with patch(
        "fock_hilbert_lab.cli.op_norm",
        side_effect=NonConvergenceError("hilbert_ops.op_norm", "power iteration did not converge"),
    ):
        assert run(["opnorm", "--lambda", "1", "--N", "4"]) == EXIT_NONCONVERGENCE
    assert "hilbert_ops.op_norm" in capsys.readouterr().err
