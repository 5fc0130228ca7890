import json
import subprocess
import sys

import numpy as np
import pytest

from privalg import gallery, io
from privalg.algebra import diagonal_algebra
from privalg.cli import main


@pytest.fixture
def files(tmp_path):
    pf = gallery.phase_flip(1)
    out = {
        "phase_flip1": pf.channel,
        "id2": gallery.group_average([np.eye(2)]).channel,
        "deletion": gallery.deletion(np.diag([1.0, 0.0])).channel,
        "bit_flip1": gallery.bit_flip(1).channel,
    }
    paths = {}
    for name, ch in out.items():
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(io.dump_json(io.encode_channel(ch)))
    for name, alg in (("delta2", diagonal_algebra(2)), ("m2", gallery.deletion(np.eye(2) / 2).algebra)):
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(io.dump_json(io.encode_algebra(alg)))
    paths["bad"] = tmp_path / "bad.json"
    paths["bad"].write_text('{"kind": "action", "data": [[1, 2],')
    return paths


def run(argv, capsys):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, (json.loads(captured.out) if captured.out else None), captured.err


def test_check_private_example(files, capsys):
    code, rep, _ = run(["check-private", "--channel", files["phase_flip1"], "--algebra", files["delta2"]], capsys)
    assert code == 0
    assert rep["verdict"] is True and rep["residual"] < 1e-12 and rep["seed"] == 0


def test_check_private_false_exits_one(files, capsys):
    code, rep, _ = run(["check-private", "--channel", files["id2"], "--algebra", files["m2"]], capsys)
    assert code == 1 and rep["verdict"] is False and rep["witness_index"] == 1


def test_complement_example(files, capsys):
    code, rep, _ = run(["complement", "--channel", files["id2"]], capsys)
    assert code == 0
    comp = io.decode_channel(rep["channel"])
    assert comp.domain.dim == 1 and rep["dilation_dim"] == 2


def test_symplectic_example(capsys):
    code, rep, _ = run(["symplectic", "a2", "--N0", "0", "--verify-recovery"], capsys)
    assert code == 0 and rep["verdict"] is True
    assert len(rep["coefficients"]) == 7 and rep["max_deviation"] < 1e-12
    assert rep["purification"]["marginal_deviation"] < 1e-12


def test_symplectic_private_from_descriptor(tmp_path, capsys):
    from privalg.symplectic import a2_channel
    p = tmp_path / "a2.json"
    p.write_text(io.dump_json(io.encode_descriptor(a2_channel(1))))
    code, rep, _ = run(["symplectic", "private", "--channel", p], capsys)
    assert code == 0 and len(rep["private_subspace"][0]) == 1


def test_correctable_and_recovery(files, capsys):
    code, rep, _ = run(["check-correctable", "--channel", files["bit_flip1"], "--algebra", files["m2"]], capsys)
    assert code == 1 and rep["verdict"] is False
    code, rep, _ = run(["recovery", "--channel", files["phase_flip1"], "--algebra", files["delta2"]], capsys)
    assert code == 0 and rep["achieved"] < 1e-9
    r = io.decode_channel(rep["channel"])
    assert r.unitality_residual < 1e-9


def test_analyze(files, capsys):
    code, rep, _ = run(["analyze", "--channel", files["phase_flip1"], "--algebra", files["delta2"]], capsys)
    assert code == 0 and rep["verdict"] == "both"
    code, rep, _ = run(["analyze", "--channel", files["deletion"], "--algebra", files["m2"]], capsys)
    assert code == 0 and rep["verdict"] == "private"
    code, rep, _ = run(["analyze", "--channel", files["id2"], "--algebra", files["m2"]], capsys)
    assert code == 0 and rep["verdict"] == "correctable"


def test_eps_bound(files, capsys):
    code, rep, _ = run(["eps-bound", "--channel", files["phase_flip1"], "--algebra", files["delta2"],
                        "--t", "0.01"], capsys)
    assert code == 0 and rep["achieved"] <= rep["bound"] + 1e-6


def test_gallery_command(capsys):
    code, rep, _ = run(["gallery", "group-average", "--group", "quaternion"], capsys)
    assert code == 0 and rep["expected"] == "private"
    assert io.decode_channel(rep["channel"]).domain.dim == 4
    code, rep, err = run(["gallery", "nope"], capsys)
    assert code == 2 and "name must be one of" in err


def test_malformed_json_exits_two(files, capsys):
    code, rep, err = run(["check-private", "--channel", files["bad"], "--algebra", files["delta2"]], capsys)
    assert code == 2 and "line 1, column" in err and "error" in rep


def test_missing_field_exits_two(tmp_path, files, capsys):
    p = tmp_path / "nofield.json"
    p.write_text('{"data": []}')
    code, _, err = run(["check-private", "--channel", p, "--algebra", files["delta2"]], capsys)
    assert code == 2 and "missing field 'kind'" in err
    code, _, err = run(["check-private", "--channel", files["phase_flip1"]], capsys)
    assert code == 2 and "--algebra" in err


def test_reports_are_byte_identical(files, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        main(["recovery", "--channel", str(files["phase_flip1"]), "--algebra", str(files["delta2"]),
              "--seed", "5", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["seed"] == 5


def test_seed_from_environment(files, capsys, monkeypatch):
    monkeypatch.setenv("PRIVALG_SEED", "17")
    _, rep, _ = run(["check-private", "--channel", files["phase_flip1"], "--algebra", files["delta2"]], capsys)
    assert rep["seed"] == 17
    monkeypatch.setenv("PRIVALG_SEED", "x")
    code, _, _ = run(["check-private", "--channel", files["phase_flip1"], "--algebra", files["delta2"]], capsys)
    assert code == 2


def test_tolerance_override_is_recorded(files, capsys):
    _, rep, _ = run(["check-private", "--channel", files["phase_flip1"], "--algebra", files["delta2"],
                     "--tol-membership", "1e-6"], capsys)
    assert rep["tolerances"]["membership_tol"] == 1e-6


def test_console_script_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "privalg.cli", "check-private", "--channel", str(files["phase_flip1"]),
                          "--algebra", str(files["delta2"])], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["verdict"] is True
