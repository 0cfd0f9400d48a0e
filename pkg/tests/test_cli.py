import json

import numpy as np
import pytest

from manyscat import cli, io
from manyscat.geometry import DomainBox, GridField


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_zero_impedance_reproduces_incident(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--h", "0", "--a", "0.04", "--run-dir", str(tmp_path / "r"), "--no-figures")
    assert code == 0 and json.loads(out)["status"] == "ok"
    with open(tmp_path / "r" / "probes.csv") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",")
    u = data[:, header.index("re_u")] + 1j * data[:, header.index("im_u")]
    u0 = data[:, header.index("re_u0")] + 1j * data[:, header.index("im_u0")]
    assert np.max(np.abs(u - u0)) <= 1e-12
    summary = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert summary["M"] == 128 and summary["validity_ratio"] == pytest.approx(0.2)
    assert (tmp_path / "r" / "config.json").exists() and (tmp_path / "r" / "solution.csv").exists()


def test_simulate_writes_figures(tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", "--a", "0.04", "--run-dir", str(tmp_path / "r"))
    assert code == 0
    assert (tmp_path / "r" / "ensemble.png").stat().st_size > 0
    assert (tmp_path / "r" / "probes.png").stat().st_size > 0


def test_rerun_is_byte_identical(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MANYSCAT_OUTPUT_DIR", str(tmp_path / "runs"))
    dirs = []
    for sub in ("a", "b"):
        monkeypatch.setenv("MANYSCAT_OUTPUT_DIR", str(tmp_path / sub))
        code, out, _ = run(capsys, "simulate", "--a", "0.03", "--seed", "5", "--deterministic", "--no-figures")
        assert code == 0
        dirs.append(tmp_path / sub / json.loads(out)["run_dir"].split("/")[-1])
    assert dirs[0].name == dirs[1].name and dirs[0].name.startswith("simulate-seed5-")
    for name in ("ensemble.csv", "solution.csv", "summary.json", "probes.csv"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"a": 0.04, "h": [2.0, -1.0], "seed": 3}))
    code, _, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "4", "--run-dir", str(tmp_path / "r"), "--no-figures")
    assert code == 0
    echo = json.loads((tmp_path / "r" / "config.json").read_text())
    assert echo["seed"] == 4 and echo["h"] == [2.0, -1.0]
    header, _, zeta = io.read_manifest(tmp_path / "r" / "ensemble.csv")
    assert np.allclose(zeta * 0.04**0.5, 2 - 1j)


def test_unknown_config_key_refused(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"wavenumber": 1.0}))
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--run-dir", str(tmp_path / "r"))
    assert code == 2 and json.loads(err)["error"] == "ConfigError"


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--kappa1", "1.0"],
        ["simulate", "--h", "1+0.5j"],
        ["converge", "--kappa1", "0.4"],
        ["homogenize", "--kappa", "2", "--kappa1", "0.5"],
        ["design", "--nsq", "0.8-0.1j"],
        ["simulate", "--alpha", "1", "1", "0"],
        ["simulate", "--k", "-1"],
    ],
)
def test_refusals_exit_2_with_error_record(tmp_path, capsys, argv):
    code, _, err = run(capsys, *argv, "--run-dir", str(tmp_path / "r"))
    assert code == 2
    record = json.loads(err.strip().splitlines()[-1])
    assert record["exit_code"] == 2 and record["status"] == "error" and record["message"]
    assert json.loads((tmp_path / "r" / "error.json").read_text()) == record


def test_regime_refusal_cites_classifier(tmp_path, capsys):
    _, _, err = run(capsys, "converge", "--kappa1", "0.4", "--run-dir", str(tmp_path / "r"))
    msg = json.loads(err)["message"]
    assert "limit_exists=false" in msg and "Case1" in msg


def test_missing_input_file_exits_4(tmp_path, capsys):
    code, _, err = run(capsys, "homogenize", "--p", str(tmp_path / "nope.vox"), "--run-dir", str(tmp_path / "r"))
    assert code == 4 and json.loads(err)["exit_code"] == 4


def test_solver_failure_exits_3(tmp_path, capsys, monkeypatch):
    from manyscat.manybody import SolverError

    def boom(*a, **k):
        raise SolverError("no convergence", [1.0, 0.5])

    monkeypatch.setattr(cli, "solve_effective_field", boom)
    code, _, err = run(capsys, "simulate", "--a", "0.04", "--run-dir", str(tmp_path / "r"))
    assert code == 3 and json.loads(err)["error"] == "SolverError"


def test_homogenize_from_voxel_file(tmp_path, capsys):
    p = GridField.from_function(DomainBox.unit(), 16, lambda x: 4 * np.pi * np.exp(-8 * np.sum((x - 0.5) ** 2, 1)))
    io.write_grid(tmp_path / "p.vox", p)
    code, _, _ = run(capsys, "homogenize", "--p", str(tmp_path / "p.vox"), "--run-dir", str(tmp_path / "r"))
    assert code == 0
    s = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert s["residual"] <= 1e-9 and "pde_residual" in s
    field, _ = io.read_grid(tmp_path / "r" / "field.vox")
    assert field.resolution == (16, 16, 16)
    assert (tmp_path / "r" / "slice_z.csv").exists() and (tmp_path / "r" / "slice_z.png").exists()


def test_design_uniform_target(tmp_path, capsys):
    code, _, _ = run(capsys, "design", "--nsq", "0.8", "--grid", "8", "--a-sweep", "0.04", "0.02",
                     "--reference-resolution", "16", "--run-dir", str(tmp_path / "r"), "--no-figures")
    assert code == 0
    h1, _ = io.read_grid(tmp_path / "r" / "design_h1.vox")
    N, _ = io.read_grid(tmp_path / "r" / "design_N.vox")
    assert np.allclose(h1.values, 0.0159155, atol=1e-7) and np.all(N.values == 1)
    s = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert s["round_trip"]["non_increasing"]
    assert (tmp_path / "r" / "round_trip.csv").exists()
    assert (tmp_path / "r" / "ensemble_a0.02.csv").exists()


def test_design_from_voxel_file_matching_background_is_empty(tmp_path, capsys):
    g = GridField.constant(DomainBox.unit(), 4, 1.0)
    io.write_grid(tmp_path / "n.vox", g)
    code, _, _ = run(capsys, "design", "--nsq", str(tmp_path / "n.vox"), "--run-dir", str(tmp_path / "r"))
    assert code == 0
    s = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert s["empty"] and all(v == 0 for v in s["particles"].values())


def test_converge_zero_impedance(tmp_path, capsys):
    code, _, _ = run(capsys, "converge", "--h", "0", "--a-sweep", "0.04", "0.02",
                     "--reference-resolution", "8", "--run-dir", str(tmp_path / "r"))
    assert code == 0
    s = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert all(r["discrepancy"] <= 1e-10 for r in s["rows"])
    assert (tmp_path / "r" / "convergence.png").exists()


def test_validate_passes(tmp_path, capsys):
    code, _, _ = run(capsys, "validate", "--run-dir", str(tmp_path / "r"), "--no-figures")
    assert code == 0
    s = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert s["passed"] and len(s["checks"]) == 9
