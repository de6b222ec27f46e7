import json

import numpy as np
import pytest

from khinchine.cli import main, parse_norm_spec, parse_p_grid, parse_weights
from khinchine.entropy import FiniteMetricSpace


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, argv):
    code, out = run(capsys, argv)
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# spec parsing
# ---------------------------------------------------------------------------

def test_parse_weights():
    assert parse_weights("equal:4").n == 4
    assert parse_weights("onehot:3").entries[0] == 1.0
    assert parse_weights("onehot:3:2").entries[2] == 1.0
    tl = parse_weights("twolevel:4:1:0.5")
    assert tl.entries[0] ** 2 == pytest.approx(0.5)
    lst = parse_weights("list:3,4")
    assert lst.entries == pytest.approx([0.6, 0.8])
    with pytest.raises(Exception):
        parse_weights("diag:3")


def test_parse_norm_spec():
    grid = parse_p_grid("2:8")
    assert parse_norm_spec("lp:4", grid).kind == "lp"
    assert parse_norm_spec("gls:sqrtp", grid).kind == "gls"
    assert parse_norm_spec("bphi:subgaussian", grid).kind == "bphi"


# ---------------------------------------------------------------------------
# spec'd command examples
# ---------------------------------------------------------------------------

def test_phi_legendre_example(capsys):
    code, rep = run_json(capsys, ["phi", "legendre", "--family", "subgaussian", "--u", "3"])
    assert code == 0
    assert rep["report"]["value"] == pytest.approx(4.5, abs=1e-9)


def test_phi_convclass_example(capsys):
    code, rep = run_json(capsys, ["phi", "convclass", "--family", "subgaussian", "--r", "2"])
    assert code == 0 and rep["report"]["member"] is True


def test_phi_overline_example(capsys):
    code, rep = run_json(capsys, ["phi", "overline", "--family", "subgaussian",
                                  "--lambda", "1.7"])
    assert code == 0
    assert rep["report"]["value"] == pytest.approx(1.445, rel=1e-12)


def test_norm_bphi_example(capsys):
    code, rep = run_json(capsys, ["norm", "bphi", "--law", "gaussian:1",
                                  "--phi", "subgaussian"])
    assert code == 0
    assert rep["report"]["value"] == pytest.approx(1.0, abs=1e-9)
    assert rep["report"]["method"] == "grid_sup"


def test_verify_thm31_exit_zero(capsys):
    code, rep = run_json(capsys, ["verify", "thm31", "--law", "rademacher",
                                  "--phi", "subgaussian", "--seed", "7",
                                  "--trials", "60"])
    assert code == 0 and rep["report"]["pass"]


def test_verify_rosenthal_example(capsys):
    code, rep = run_json(capsys, ["verify", "rosenthal", "--law", "centered-poisson:1",
                                  "--p", "4", "--weights", "equal:16"])
    assert code == 0
    assert rep["report"]["lhs"] == pytest.approx((3 + 1 / 16) ** 0.25, rel=1e-9)


def test_verify_bad_phi_spec_exit_two(capsys):
    code = main(["verify", "thm41", "--laws", "rademacher,rademacher",
                 "--phis", "bad-spec"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_verify_precondition_exit_two(capsys):
    code = main(["verify", "thm31", "--law", "rademacher",
                 "--phi", "natural:rademacher", "--trials", "5"])
    assert code == 2


def test_verify_failure_exit_one(capsys, monkeypatch):
    import khinchine.cli as cli
    monkeypatch.setattr(cli, "verify_thm31",
                        lambda *a, **k: {"suite": "thm31", "pass": False})
    code = main(["verify", "thm31", "--law", "rademacher", "--phi", "subgaussian"])
    assert code == 1
    assert json.loads(capsys.readouterr().out)["report"]["pass"] is False


def test_khinchine_sup_example(capsys):
    code, rep = run_json(capsys, ["khinchine", "sup", "--law", "rademacher",
                                  "--norm", "lp:4", "--nmax", "16", "--seed", "1",
                                  "--restarts", "1"])
    assert code == 0
    assert rep["report"]["value"] >= 1.2574
    assert rep["report"]["witness"]
    assert rep["seed"] == 1


def test_entropy_dudley_csv_space(capsys, tmp_path):
    sp = FiniteMetricSpace.from_points(np.linspace(0, 1, 11)[:, None])
    path = tmp_path / "grid11.csv"
    lines = [",".join(str(l) for l in sp.labels)]
    lines += [",".join(repr(float(x)) for x in row) for row in sp.rho]
    path.write_text("\n".join(lines) + "\n")
    code, rep = run_json(capsys, ["entropy", "dudley", "--space", str(path)])
    assert code == 0
    assert 0.5 < rep["report"]["value"] < 0.6


def test_entropy_cover(capsys, tmp_path):
    path = tmp_path / "sp.json"
    path.write_text('{"labels": ["a", "b"], "rho": [[0.0, 1.0], [1.0, 0.0]]}')
    code, rep = run_json(capsys, ["entropy", "cover", "--space", str(path),
                                  "--eps", "1.0"])
    assert code == 0 and rep["report"]["count"] == 1


def test_entropy_fieldsim(capsys, tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"features": np.eye(3).tolist(), "driver": "gaussian"}))
    code, rep = run_json(capsys, ["entropy", "fieldsim", "--model", str(path),
                                  "--weights", "equal:2", "--copies", "5000"])
    assert code == 0
    assert rep["report"]["sigma"] == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# report contract
# ---------------------------------------------------------------------------

def test_report_embeds_version_config_seed(capsys):
    _, rep = run_json(capsys, ["phi", "eval", "--family", "power:3",
                               "--lambda", "2", "--seed", "5"])
    assert rep["tool"] == "khinchine"
    assert rep["version"]
    assert rep["seed"] == 5
    assert rep["config"]["family"] == "power:3"


def test_byte_identical_across_runs_and_threads(capsys):
    cmds = [
        ["phi", "legendre", "--family", "natural:rademacher", "--u", "0.5"],
        ["norm", "lp", "--law", "rademacher", "--weights", "equal:4", "--p", "4",
         "--engine", "monte_carlo", "--samples", "20000", "--seed", "9"],
        ["khinchine", "sup", "--law", "rademacher", "--norm", "lp:4",
         "--nmax", "6", "--restarts", "1", "--seed", "2"],
        ["verify", "pythagoras", "--phi", "subgaussian", "--trials", "20",
         "--seed", "5"],
        ["entropy", "fieldsim", "--model", "MODEL", "--copies", "4000", "--seed", "3"],
    ]
    import tempfile, os
    with tempfile.TemporaryDirectory() as td:
        mp = os.path.join(td, "m.json")
        with open(mp, "w") as fh:
            json.dump({"features": [[1.0, 0.0], [0.0, 1.0]], "driver": "rademacher"}, fh)
        for cmd in cmds:
            cmd = [mp if c == "MODEL" else c for c in cmd]
            outs = []
            for threads in ("1", "4", "1"):
                code, out = run(capsys, cmd + ["--threads", threads])
                assert code == 0
                outs.append(out)
            assert outs[0] == outs[1] == outs[2], f"nondeterministic: {cmd}"


def test_csv_format(capsys):
    code, out = run(capsys, ["phi", "legendre", "--family", "subgaussian",
                             "--u", "2", "--format", "csv"])
    assert code == 0
    assert out.startswith("key,value")
    assert "report.value,2.0" in out


def test_out_writes_same_bytes(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out = run(capsys, ["phi", "eval", "--family", "subgaussian",
                             "--lambda", "1", "--out", str(path)])
    assert code == 0
    assert path.read_text() == out


def test_nonfinite_floats_serialized_as_strings(capsys):
    _, rep = run_json(capsys, ["phi", "orlicz", "--family", "subgaussian",
                               "--u", "40"])
    assert rep["report"]["value"] == "inf"


def test_unknown_law_exit_two(capsys):
    assert main(["norm", "bphi", "--law", "cauchy:1", "--phi", "subgaussian"]) == 2
