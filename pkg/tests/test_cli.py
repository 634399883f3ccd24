import glob
import json
import os

import pytest

from nlsdelta import cli
from nlsdelta.errors import InstabilityError
from nlsdelta.scenarios import SCHEMAS, eval_number, normalize_params

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for kind in SCHEMAS:
        assert kind + ":" in out


def test_unknown_kind(tmp_path, capsys):
    cfg = write(tmp_path, "a.txt", "kind = fig9\n")
    assert cli.main(["validate", cfg]) == 1
    assert "unknown scenario kind 'fig9'" in capsys.readouterr().err
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_empty_config_lists_required_keys(tmp_path, capsys):
    cfg = write(tmp_path, "empty.txt", "# nothing here\n")
    assert cli.main(["validate", cfg]) == 1
    err = capsys.readouterr().err
    for kind in SCHEMAS:
        assert kind in err
    assert "fig1_breathing: kind, q" in err
    assert "fig6_free_breathing: kind, h" in err
    assert "fig2_fastslow: kind, q_magnitude" in err


def test_missing_q_is_single_error(tmp_path, capsys):
    cfg = write(tmp_path, "f1.txt", "kind = fig1_breathing\ndt = 0.005\n")
    assert cli.main(["validate", cfg]) == 1
    lines = [ln for ln in capsys.readouterr().err.splitlines() if ln.strip()]
    assert len(lines) == 1 and lines[0].startswith("q: required")


def test_valid_config_echo(tmp_path, capsys):
    cfg = write(tmp_path, "f1.txt", "kind = fig1_breathing  # comment\nq = 1/20\n")
    assert cli.main(["validate", cfg]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "ok"
    echo = json.loads(out.split("\n", 1)[1])
    assert echo["kind"] == "fig1_breathing"
    assert echo["parameters"]["q"] == 0.05 and echo["parameters"]["n"] == 4001


def test_errors_listed_exhaustively():
    _, errs = normalize_params("fig1_breathing", {"q": 0.5, "dt": "fast", "n": 4000, "bogus": 1})
    text = "\n".join(errs)
    for key in ("q:", "dt:", "n:", "bogus:"):
        assert key in text
    _, errs = normalize_params("fig1_breathing", {"q": 0})
    assert any("nonzero" in e for e in errs)
    _, errs = normalize_params("scattering_sweep", {"k_min": 3, "k_max": 2})
    assert errs == ["k_min: must be smaller than k_max"]


def test_expressions():
    assert eval_number("sqrt(2)/4") == pytest.approx(2**0.5 / 4)
    assert eval_number("-1/40") == -0.025
    assert eval_number("2*pi") == pytest.approx(6.283185307179586)
    for bad in ("__import__('os')", "a+1", "1/"):
        with pytest.raises((ValueError, SyntaxError)):
            eval_number(bad)


def test_missing_file(tmp_path, capsys):
    assert cli.main(["validate", str(tmp_path / "nope.txt")]) == 2
    assert "not found" in capsys.readouterr().err


def test_json_config(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", json.dumps({"name": "v", "kind": "volterra", "params": {"n_terms": 9}}))
    assert cli.main(["validate", cfg]) == 0
    assert json.loads(capsys.readouterr().out.split("\n", 1)[1])["parameters"]["n_terms"] == 9
    bad = write(tmp_path, "bad.json", "{not json")
    assert cli.main(["validate", bad]) == 2


def test_shipped_configs_validate(capsys):
    paths = sorted(glob.glob(os.path.join(ROOT, "configs", "*")))
    assert paths
    for p in paths:
        assert cli.main(["validate", p]) == 0, p


@pytest.fixture
def volterra_cfg(tmp_path):
    return write(tmp_path, "v.txt", "name = volterra_small\nkind = volterra\nn = 4000\nsamples = 50\n")


def test_run_manifest_and_determinism(tmp_path, volterra_cfg, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", volterra_cfg, "--out", str(a)]) == 0
    assert cli.main(["run", volterra_cfg, "--out", str(b), "--quiet"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] limit_at_left_end" in out
    man = json.loads((a / "manifest.json").read_text())
    for key in ("scenario", "kind", "parameters", "code_version", "environment", "tolerance_scale",
                "checks", "files", "notes", "passed", "elapsed_seconds"):
        assert key in man
    assert man["scenario"] == "volterra_small" and man["passed"] is True
    for c in man["checks"]:
        assert {"name", "measured", "expected", "tolerance", "passed"} <= set(c)
    for f in man["files"]:
        assert (a / f).read_bytes() == (b / f).read_bytes()
    header = (a / "volterra.csv").read_text().splitlines()[0]
    assert header == "x,v1,v2,exact_v1,exact_v2"


def test_tol_scale(tmp_path, volterra_cfg, capsys):
    assert cli.main(["run", volterra_cfg, "--out", str(tmp_path / "t"), "--tol-scale", "1e-6"]) == 1
    man = json.loads((tmp_path / "t" / "manifest.json").read_text())
    assert man["tolerance_scale"] == 1e-6 and not man["passed"]
    assert cli.main(["run", volterra_cfg, "--tol-scale", "0"]) == 2


def test_instability_exit_code(tmp_path, volterra_cfg, monkeypatch, capsys):
    def boom(p, out, tol_scale):
        raise InstabilityError("solution blew up", 42)
    monkeypatch.setitem(cli.RUNNERS, "volterra", boom)
    assert cli.main(["run", volterra_cfg, "--out", str(tmp_path / "x")]) == 3
    assert "step 42" in capsys.readouterr().err


def test_timeseries_columns(tmp_path, capsys):
    cfg = write(tmp_path, "f6.txt", "kind = fig6_free_breathing\nh = 0.1\nxmin = -20\nxmax = 20\n"
                                    "n = 801\ndt = 0.01\nt_max = 60\nrecord_stride = 5\n")
    code = cli.main(["run", cfg, "--out", str(tmp_path / "f6"), "--quiet"])
    man = json.loads((tmp_path / "f6" / "manifest.json").read_text())
    assert code == (0 if man["passed"] else 1)
    lines = (tmp_path / "f6" / "series.csv").read_text().splitlines()
    assert lines[0] == "t,abs_u0,re_u0,im_u0,abs_prediction,mass,energy"
    assert len(lines) == 1 + 1201


@pytest.mark.parametrize("jobs", ["1", "2"])
def test_sweep(tmp_path, capsys, jobs):
    cfg = write(tmp_path, "s.json", json.dumps({"kind": "volterra", "n": 3000, "sweep": {"n_terms": [10, 12]}}))
    out = tmp_path / "sw"
    assert cli.main(["sweep", cfg, "--out", str(out), "--jobs", jobs]) == 0
    summary = json.loads((out / "sweep_manifest.json").read_text())
    assert [p["parameters"]["n_terms"] for p in summary["points"]] == [10, 12]
    for p in summary["points"]:
        assert (out / p["directory"] / "manifest.json").exists()


def test_sweep_validation(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", json.dumps({"kind": "volterra", "sweep": {"n_terms": [0]}}))
    assert cli.main(["validate", cfg]) == 1
    assert "sweep.n_terms" in capsys.readouterr().err
    cfg = write(tmp_path, "s2.json", json.dumps({"kind": "volterra"}))
    assert cli.main(["sweep", cfg, "--out", str(tmp_path / "z")]) == 2
