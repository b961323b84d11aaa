"""Command-line surface: reports, exit codes, determinism, file handling."""

import json
import math
import os

import pytest

from coisolab.cli import main
from coisolab.contact import contact_space
from coisolab.fields import Field

SECTIONS = os.path.join(os.path.dirname(__file__), os.pardir, "sections")
TWO_PI = 2 * math.pi


def sect(name):
    return os.path.join(SECTIONS, name)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- residual ----------------------------------------------------------------

def test_residual_of_family_member(capsys):
    code, out, _ = run(capsys, "residual", sect("st_sin.json"))
    assert code == 0
    data = json.loads(out)
    assert data["residual_norm"] == 0.0
    assert data["truncation_loss"] == 0.0


def test_residual_of_zero_section(capsys):
    code, out, _ = run(capsys, "residual", sect("zero.json"))
    assert code == 0 and json.loads(out)["residual_norm"] == 0.0


def test_residual_of_obstructed_section(capsys):
    code, out, _ = run(capsys, "residual", sect("obstructed.json"))
    assert code == 0
    norm = json.loads(out)["residual_norm"]
    assert norm == pytest.approx(TWO_PI ** 2.5 / math.sqrt(2), rel=1e-12)


# -- kuranishi ------------------------------------------------------------------

def test_kuranishi_obstructed(capsys):
    code, out, _ = run(capsys, "kuranishi", sect("obstructed.json"))
    assert code == 0
    data = json.loads(out)
    assert data["nonzero"] is True
    field = Field.from_json_dict(data["field"])
    assert field.space.torus_dim == 3
    amp = TWO_PI ** 2 / 2
    assert field.coeffs[((1, 0, 0), ())] == pytest.approx(-1j * amp, abs=1e-10)


def test_kuranishi_constants(capsys):
    code, out, _ = run(capsys, "kuranishi", sect("constants.json"))
    data = json.loads(out)
    assert code == 0 and data["nonzero"] is False and data["norm"] == 0.0


def test_kuranishi_family(capsys):
    code, out, _ = run(capsys, "kuranishi", sect("st_sin.json"))
    assert code == 0 and json.loads(out)["nonzero"] is False


# -- prolong ----------------------------------------------------------------------

def test_prolong_family_direction_exit_zero(capsys):
    code, out, _ = run(capsys, "prolong", sect("st_sin.json"), "--eps", "0.25")
    assert code == 0
    assert json.loads(out)["status"] == "converged"


def test_prolong_obstructed_exit_three(capsys):
    code, out, _ = run(capsys, "prolong", sect("obstructed.json"), "--eps", "0.1")
    assert code == 3
    data = json.loads(out)
    assert data["status"] == "obstructed"
    assert data["residual_norm_history"][-1] > 1e-4


def test_prolong_invalid_direction_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad_direction.json"
    from coisolab.coisotropy import Section, base_space
    sp = base_space(8)
    bad.write_text(json.dumps(
        Section(Field.zero(sp), Field.cos(sp, 3)).to_json_dict()))
    code, _, err = run(capsys, "prolong", str(bad), "--eps", "0.1")
    assert code == 2
    assert "infinitesimal" in err


# -- leaves / scan ------------------------------------------------------------------

def test_leaves_rational(capsys):
    code, out, _ = run(capsys, "leaves", "--t", "0.5")
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "torus"
    assert data["periods"][0] == pytest.approx(2 * TWO_PI)


def test_leaves_irrational(capsys):
    code, out, _ = run(capsys, "leaves", "--t", repr(math.sqrt(2)))
    assert code == 0
    assert json.loads(out)["verdict"] == "cylinder"


def test_leaves_trace_csv(capsys, tmp_path):
    csv_path = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "leaves", "--t", "0.5", "--trace",
                       "--csv", str(csv_path), "--step", "0.01")
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "step,x1,x2,x3,x4,x5,u1,u2,u3,u4,u5"
    assert len(lines) > 100


def test_leaves_section_trace(capsys, tmp_path):
    code, out, _ = run(capsys, "leaves", "--section", sect("zero.json"),
                       "--duration", "3.0", "--step", "0.01")
    assert code == 0
    assert json.loads(out)["verdict"] == "unknown"


def test_leaves_requires_exactly_one_input(capsys):
    code, _, err = run(capsys, "leaves")
    assert code == 2 and "exactly one" in err


def test_scan(capsys):
    code, out, _ = run(capsys, "scan", "0", "0.5", "1.4142135623730951")
    assert code == 0
    data = json.loads(out)
    assert data["torus_count"] >= 2


# -- verify -------------------------------------------------------------------------

def test_verify_small_pass(capsys):
    code, out, _ = run(capsys, "verify", "jacobi", "--n", "3", "--seed", "7")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_verify_vacuous_warns(capsys):
    code, out, err = run(capsys, "verify", "cartan", "--n", "0")
    assert code == 0
    assert "vacuous" in err
    assert json.loads(out)["suites"][0]["warning"]


def test_verify_deterministic_bytes(capsys):
    _, out1, _ = run(capsys, "verify", "reduction", "--n", "5", "--seed", "11")
    _, out2, _ = run(capsys, "verify", "reduction", "--n", "5", "--seed", "11")
    assert out1 == out2


# -- flow ---------------------------------------------------------------------------

def test_flow_unit_hamiltonian(capsys, tmp_path):
    lam_path = tmp_path / "unit.json"
    lam_path.write_text(json.dumps(
        Field.constant(contact_space(), 1.0).to_json_dict()))
    code, out, _ = run(capsys, "flow", str(lam_path),
                       "--point", "0.5,1,2,3,4,0.1,-0.2",
                       "--duration", "0.2", "--step", "0.01")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "step,t,x1,x2,x3,x4,x5,y4,y5"
    last = [float(v) for v in lines[-1].split(",")]
    # unit Hamiltonian flows along minus the Reeb field
    assert last[3] == pytest.approx(1 - 0.2 * math.sin(0.5), abs=1e-8)


# -- input handling -----------------------------------------------------------------

def test_missing_file_exit_two(capsys):
    code, _, err = run(capsys, "residual", "no_such_file.json")
    assert code == 2 and "not found" in err


def test_invalid_json_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code, _, err = run(capsys, "residual", str(bad))
    assert code == 2 and "invalid JSON" in err


def test_bad_payload_exit_two(capsys, tmp_path):
    bad = tmp_path / "payload.json"
    bad.write_text(json.dumps({"f": {"oops": 1}}))
    code, _, err = run(capsys, "residual", str(bad))
    assert code == 2 and "bad section payload" in err


def test_out_flag_writes_file(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "--out", str(out_path),
                       "residual", sect("zero.json"))
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["residual_norm"] == 0.0


def test_config_file_and_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trunc_order": 6, "seed": 3}))
    monkeypatch.setenv("COISOLAB_CONFIG", str(cfg))
    code, out, _ = run(capsys, "verify", "reduction", "--n", "2")
    assert code == 0
    assert json.loads(out)["seed"] == 3
    monkeypatch.delenv("COISOLAB_CONFIG")


def test_unknown_config_key_rejected(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "--config", str(cfg),
                       "residual", sect("zero.json"))
    assert code == 2 and "unknown config key" in err
