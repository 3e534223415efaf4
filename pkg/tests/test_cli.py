import json
import math

import pytest

from dfindex import cli


def run(argv):
    return cli.main(argv)


def load_without_stamp(path):
    data = json.loads(path.read_text())
    data.pop("timestamp", None)
    return data


# -- analyze ---------------------------------------------------------------------

def test_analyze_worm_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["analyze", "--t", "0", "--budget", "40", "--annulus-count", "5",
            "--seed", "3", "--output"]
    assert run(argv + [str(out1)]) == cli.EXIT_OK
    assert run(argv + [str(out2)]) == cli.EXIT_OK
    assert load_without_stamp(out1) == load_without_stamp(out2)
    data = load_without_stamp(out1)
    assert data["domain"] == "worm"
    assert 0.0 < data["df_lower"] < 1.0
    assert data["ground_truth"]["df"] == pytest.approx(2.0 / 3.0)


def test_analyze_deformed_worm_is_spc(tmp_path):
    out = tmp_path / "r.json"
    assert run(["analyze", "--t", "0.3", "--spc-count", "60",
                "--output", str(out)]) == cli.EXIT_OK
    data = load_without_stamp(out)
    assert data["spc"] is True
    assert data["df_lower"] == 1.0 and data["s_upper"] == 1.0


def test_analyze_ball(tmp_path):
    out = tmp_path / "r.json"
    assert run(["analyze", "--domain", "ball", "--count", "25",
                "--output", str(out)]) == cli.EXIT_OK
    data = load_without_stamp(out)
    assert data["spc"] is True and data["null_count"] == 0


def test_analyze_expression(tmp_path):
    out = tmp_path / "r.json"
    assert run(["analyze", "--expr", "abs2(z1) + abs2(z2) - 1",
                "--count", "25", "--output", str(out)]) == cli.EXIT_OK
    data = load_without_stamp(out)
    assert data["domain"] == "abs2(z1) + abs2(z2) - 1"
    assert data["spc"] is True


def test_threads_flag_does_not_change_results(tmp_path, monkeypatch):
    argv = ["analyze", "--t", "0", "--budget", "40", "--annulus-count", "5"]
    out1, out2, out3 = (tmp_path / n for n in ("a.json", "b.json", "c.json"))
    assert run(argv + ["--output", str(out1)]) == cli.EXIT_OK
    assert run(argv + ["--threads", "8", "--output", str(out2)]) == cli.EXIT_OK
    monkeypatch.setenv("DFINDEX_THREADS", "4")
    assert run(argv + ["--output", str(out3)]) == cli.EXIT_OK
    a, b, c = (load_without_stamp(p) for p in (out1, out2, out3))
    for d in (a, b, c):
        d.pop("threads")
    assert a == b == c


# -- sample and sweep ---------------------------------------------------------------

def test_sample_csv(tmp_path):
    out = tmp_path / "pts.csv"
    assert run(["sample", "--domain", "ball", "--count", "7",
                "--output", str(out)]) == cli.EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 8
    assert lines[0].startswith("re(z1),im(z1)")


def test_sweep_csv_and_json(tmp_path):
    csv_out, json_out = tmp_path / "s.csv", tmp_path / "s.json"
    assert run(["sweep", "--t", "0,0.2", "--budget", "30",
                "--annulus-count", "5", "--spc-count", "40",
                "--output", str(csv_out), "--json", str(json_out)]) == cli.EXIT_OK
    lines = csv_out.read_text().strip().splitlines()
    assert lines[0] == "t,df_lower,s_upper,null_count,spc"
    assert len(lines) == 3
    data = json.loads(json_out.read_text())
    assert len(data["reports"]) == 2
    assert data["reports"][1]["spc"] is True


# -- verification subcommands -----------------------------------------------------------

def test_verify_levi_passes(tmp_path):
    out = tmp_path / "v.json"
    assert run(["verify-levi", "--count", "40", "--t", "0,0.3",
                "--output", str(out)]) == cli.EXIT_OK
    data = json.loads(out.read_text())
    assert all(r["passed"] for r in data["results"])
    assert max(r["max_rel_error"] for r in data["results"]) < cli.LEVI_VERIFY_TOL


def test_schur_suite_passes(tmp_path):
    out = tmp_path / "s.json"
    assert run(["schur-test", "--count", "60", "--output", str(out)]) == cli.EXIT_OK
    assert json.loads(out.read_text())["passed"] is True


def test_phi_check_passes(tmp_path):
    out = tmp_path / "p.json"
    assert run(["phi-check", "--output", str(out)]) == cli.EXIT_OK
    data = json.loads(out.read_text())
    assert data["passed"] is True
    assert data["r"] == pytest.approx(3 * math.pi / 4 - math.pi / 2)


# -- config file -------------------------------------------------------------------------

def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("domain = ball\ncount = 4  # small run\nseed = 3\n")
    out = tmp_path / "pts.csv"
    assert run(["sample", "--config", str(cfg),
                "--output", str(out)]) == cli.EXIT_OK
    assert len(out.read_text().strip().splitlines()) == 5

    # explicit flag beats the config value
    assert run(["sample", "--config", str(cfg), "--count", "6",
                "--output", str(out)]) == cli.EXIT_OK
    assert len(out.read_text().strip().splitlines()) == 7


def test_config_file_bad_line(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("count 4\n")
    assert run(["sample", "--config", str(cfg)]) == cli.EXIT_INPUT


def test_config_file_missing(tmp_path):
    assert run(["sample", "--config", str(tmp_path / "nope.cfg")]) == cli.EXIT_INPUT


# -- exit codes ---------------------------------------------------------------------------

def test_bad_expression_is_input_error(tmp_path):
    assert run(["analyze", "--expr", "abs2(z1", "--count", "5",
                "--output", str(tmp_path / "r.json")]) == cli.EXIT_INPUT


def test_complex_expression_is_input_error(tmp_path):
    assert run(["analyze", "--expr", "z1 + abs2(z2) - 1", "--count", "5",
                "--output", str(tmp_path / "r.json")]) == cli.EXIT_INPUT


def test_ellipsoid_requires_coeffs(tmp_path):
    assert run(["analyze", "--domain", "ellipsoid",
                "--output", str(tmp_path / "r.json")]) == cli.EXIT_INPUT


def test_unknown_option_exits_two():
    with pytest.raises(SystemExit) as err:
        run(["analyze", "--no-such-flag"])
    assert err.value.code == 2


def test_invalid_beta_is_input_error(tmp_path):
    assert run(["analyze", "--beta", "1.0", "--t", "0.1", "--spc-count", "10",
                "--output", str(tmp_path / "r.json")]) == cli.EXIT_INPUT
