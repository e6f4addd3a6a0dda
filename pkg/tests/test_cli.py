import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cvteleport import cli
from cvteleport.conditioning import tmsv_entropy
from cvteleport.states import DensityMatrix, from_json

SMALL = [
    "--order", "80",
    "--wigner-points", "11",
    "--surface-points", "7",
    "--x-points", "401",
]


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_entangle_defaults(tmp_path):
    assert cli.main(["entangle", "--out", str(tmp_path)]) == cli.EXIT_OK
    rows = _read_csv(tmp_path / "entangle_sweep.csv")
    assert len(rows) == 81 and float(rows[0]["r"]) == 0.0
    assert math.isnan(float(rows[0]["entropy_bits"]))
    summary = json.loads((tmp_path / "entangle_summary.json").read_text())
    assert summary["max_entropy_gain_bits"] > 1.0
    assert summary["tmsv_entropy_bits_analytic"] == pytest.approx(tmsv_entropy(0.8178))


def test_entangle_without_detection(tmp_path):
    code = cli.main(["entangle", "--out", str(tmp_path), "--n1", "0", "--n2", "0", "--r-values", "0"])
    assert code == cli.EXIT_OK
    (row,) = _read_csv(tmp_path / "entangle_sweep.csv")
    assert float(row["entropy_bits"]) == pytest.approx(tmsv_entropy(0.8178), abs=1e-6)


def test_entangle_three_photons(tmp_path):
    cli.main(["entangle", "--out", str(tmp_path), "--n1", "3", "--n2", "3", "--r-values", "0.15", "--dim", "96"])
    (row,) = _read_csv(tmp_path / "entangle_sweep.csv")
    assert float(row["success_probability"]) < 1e-4


def test_entangle_truncation_exit_code(tmp_path):
    assert cli.main(["entangle", "--out", str(tmp_path), "--dim", "16"]) == cli.EXIT_CONVERGENCE


@pytest.mark.parametrize(
    "argv",
    [
        ["entangle", "--q", "1.2"],
        ["entangle", "--dim", "4"],
        ["entangle", "--r-values", "0.1,1.5"],
        ["teleport", "--r1", "-0.1"],
        ["teleport", "--alpha-re", "0", "--alpha-im", "0"],
        ["--threads", "0", "entangle"],
    ],
)
def test_config_errors(argv, tmp_path):
    assert cli.main(argv + ["--out", str(tmp_path)] if argv[0] != "--threads" else argv) == cli.EXIT_CONFIG


def test_config_file_and_override(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"q": 0.5, "r_values": [0.1, 0.2], "out": str(tmp_path / "a")}))
    assert cli.main(["entangle", "--config", str(cfg_path), "--q", "0.6"]) == cli.EXIT_OK
    summary = json.loads((tmp_path / "a" / "entangle_summary.json").read_text())
    assert summary["q"] == 0.6
    cfg_path.write_text(json.dumps({"bogus": 1}))
    assert cli.main(["entangle", "--config", str(cfg_path)]) == cli.EXIT_CONFIG
    assert cli.main(["entangle", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG


def test_teleport_outputs_round_trip(tmp_path):
    assert cli.main(["teleport", "--out", str(tmp_path)] + SMALL) == cli.EXIT_OK
    summary = json.loads((tmp_path / "teleport_summary.json").read_text())
    assert set(summary["cases"]) == {"tmsv", "subtracted"}
    sub = summary["cases"]["subtracted"]
    assert abs(sub["success_probability"] - 0.0039) < 2e-4
    assert sub["averaged_fidelity"] > summary["cases"]["tmsv"]["averaged_fidelity"]
    for name in ("tmsv", "subtracted"):
        rho = from_json((tmp_path / f"rho_{name}.json").read_text())
        assert isinstance(rho, DensityMatrix)
        assert rho.trace == pytest.approx(summary["cases"][name]["trace"])
        surface = _read_csv(tmp_path / f"surface_{name}.csv")
        assert len(surface) == 49 and list(surface[0]) == ["X0", "P1", "probability_density", "fidelity"]
        wig = _read_csv(tmp_path / f"wigner_{name}.csv")
        meta = json.loads((tmp_path / f"wigner_{name}.json").read_text())
        assert len(wig) == meta["nx"] * meta["np"] == 121
        pr = np.loadtxt(tmp_path / f"quadrature_{name}.csv", delimiter=",", skiprows=1)
        assert pr.shape == (401, 2)
    assert summary["input_visibility"] == pytest.approx(1.0, abs=1e-3)


def test_teleport_single_outcome(tmp_path):
    argv = ["teleport", "--out", str(tmp_path), "--outcome", "0.1", "0.2", "--entangled", "tmsv"] + SMALL
    assert cli.main(argv) == cli.EXIT_OK
    summary = json.loads((tmp_path / "teleport_summary.json").read_text())
    assert summary["outcome"] == [0.1, 0.2]
    case = summary["cases"]["tmsv"]
    assert 0.0 < case["conditional_fidelity"] <= 1.0
    assert (tmp_path / "wigner_outcome_tmsv.csv").exists()
    assert not (tmp_path / "rho_tmsv.json").exists()


def test_teleport_narrow_grid_exit_code(tmp_path):
    argv = ["teleport", "--out", str(tmp_path), "--bound", "2", "--entangled", "tmsv"] + SMALL
    assert cli.main(argv) == cli.EXIT_CONVERGENCE


@pytest.fixture
def restore_threads():
    try:
        import numba
    except ImportError:
        yield
        return
    before = numba.get_num_threads()
    yield
    numba.set_num_threads(before)


def test_outputs_are_byte_identical_across_runs_and_threads(tmp_path, restore_threads):
    argv = ["teleport", "--entangled", "subtracted"] + SMALL
    assert cli.main(argv + ["--out", str(tmp_path / "a")]) == cli.EXIT_OK
    assert cli.main(["--threads", "1"] + argv + ["--out", str(tmp_path / "b")]) == cli.EXIT_OK
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_selftest_passes():
    out = io.StringIO()
    assert cli.cmd_selftest(stream=out) == cli.EXIT_OK
    assert "FAIL" not in out.getvalue()


def test_selftest_small_dim_fails_truncation():
    out = io.StringIO()
    assert cli.cmd_selftest(dim=8, stream=out) == cli.EXIT_SELFTEST
    text = out.getvalue()
    assert "FAIL  squeezed-vacuum truncation weight" in text
    assert "FAIL  cat-state truncation weight" in text


def test_selftest_narrow_grid_fails_normalization():
    out = io.StringIO()
    assert cli.cmd_selftest(bound=2.0, stream=out) == cli.EXIT_SELFTEST
    assert "FAIL  integrated outcome probability" in out.getvalue()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cvteleport.cli", "entangle", "--out", str(tmp_path), "--r-values", "0.15"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "entangle_sweep.csv").exists()
