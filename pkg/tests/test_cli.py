import csv
import io
import json

import pytest

from lcqft.cli import ConfigParse, export, load_config, load_scenario, main, report_to_csv, report_to_json
from lcqft.suites import SuiteReport, UnknownSuite, metric_preset, run_suite

SMALL = """\
[run]
seed = 3

[clifford]
trials = 5
conjugated_reps = 2

[spin]
samples = 20

[geometry]
points = 3
metrics = minkowski; bump(0, 0, 0, 0, 1.5, 0.05)

[semt-var]
bumps = 1
n = 10
n_onshell = 11

[ccr]
max_n = 4
cumulant_n = 4
N = 32

[car]
trials = 3

[minkowski]
gaussians = 3
nodes = 24

[lattice-kg]
nx = 40
nt = 96
cfl = 0.5

[cones]
samples = 100
product_samples = 20
hadamard_samples = 20
"""


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return p


def test_clifford_suite_passes():
    rep = run_suite("clifford")
    assert rep.passed and len(rep.checks) >= 6


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        run_suite("nope")
    assert main(["--suite", "nope"]) == 2


def test_all_with_injected_failure_exits_nonzero(tmp_path, small_config):
    cfg = tmp_path / "inject.ini"
    cfg.write_text(SMALL + "\n[wf-scan]\ntol.gaussian_all_regular = -1\n")
    out = tmp_path / "all.json"
    assert main(["--suite", "all", "--config", str(cfg), "--out", str(out)]) == 1
    failed = [c["name"] for c in json.loads(out.read_text())["checks"] if c["status"] == "fail"]
    assert "wf-scan.gaussian_all_regular" in failed


def test_json_roundtrip_and_csv_rows(tmp_path):
    rep = run_suite("ccr")
    back = SuiteReport.from_dict(json.loads(report_to_json(rep)))
    assert back == rep
    rows = list(csv.reader(io.StringIO(report_to_csv(rep))))
    assert len(rows) - 1 == len(rep.checks)
    export(rep, "csv", str(tmp_path / "r.csv"))
    assert (tmp_path / "r.csv").read_text() == report_to_csv(rep)


def test_seeded_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["--suite", "cones", "--seed", "7", "--no-timing", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_env_var_supplies_config(tmp_path, monkeypatch):
    cfg = tmp_path / "env.ini"
    cfg.write_text("[clifford]\ntol.trace_identities = -1\n")
    monkeypatch.setenv("LCQFT_CONFIG", str(cfg))
    assert main(["--suite", "clifford", "--out", str(tmp_path / "o.json")]) == 1


def test_config_values_and_seed(small_config):
    params, seed = load_config(small_config)
    assert seed == 3
    assert params["spin"]["samples"] == 20.0
    assert params["lattice-kg"]["cfl"] == 0.5


@pytest.mark.parametrize(
    "text, line",
    [
        ("[clifford]\ntrials = 5\nnot a pair\n", 3),
        ("[clifford]\ntrals = 5\n", 2),
        ("[spin]\nsamples = many\n", 2),
        ("\n[bogus]\n", 2),
        ("trials = 5\n", 1),
        ("[geometry]\n\nmetrics = frw(1)\n", 3),
        ("[clifford]\ntrials = 5\ntrials = 6\n", 3),
    ],
)
def test_config_errors_name_the_line(tmp_path, text, line):
    p = tmp_path / "bad.ini"
    p.write_text(text)
    with pytest.raises(ConfigParse) as exc:
        load_config(p)
    assert exc.value.line == line
    assert main(["--suite", "clifford", "--config", str(p)]) == 2


def test_metric_presets():
    assert metric_preset("minkowski").name == "minkowski"
    assert metric_preset("frw(1.0, 0.2)").name.startswith("frw")
    with pytest.raises(ValueError):
        metric_preset("schwarzschild(1)")


def test_cone_check_subcommand(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps([
        [[[0, 0, 0, 0], [1, 0, 0, 1]], [[0, 1, 0, 0], [-1, 0, 0, -1]]],
        [[[0, 0, 0, 0], [0, 1, 0, 0]], [[0, 1, 0, 0], [0, -1, 0, 0]]],
    ]))
    assert main(["cone-check", str(p)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [r["member"] for r in out] == [True, False]


def test_wf_scan_subcommand(capsys):
    assert main(["wf-scan", "--dist", "step"]) == 0
    out = json.loads(capsys.readouterr().out)
    sing = [d["xi"] for d in out["directions"] if d["singular"]]
    assert sorted(abs(x[0]) for x in sing) == [1.0, 1.0]


def test_deform_subcommand(tmp_path, capsys):
    scen = {
        "grid": {"nt": 60, "nx": 101, "dt": 0.05, "dx": 0.1},
        "g2": {"h": {"bump": {"center": 5.0, "half_width": 2.0, "height": 0.5}}},
        "slab": [20, 40],
        "K1": {"rows": [20, 20], "cols": [47, 53]},
        "K2": {"rows": [40, 40], "cols": [45, 55]},
    }
    p = tmp_path / "s.json"
    p.write_text(json.dumps(scen))
    deformation, K1, K2, _ = load_scenario(scen)
    assert len(K1) == 7 and deformation.slab == (20, 40)
    assert main(["deform", str(p)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["certified"] and 0 < out["beta_scale"] <= 1


def test_missing_arguments_is_usage_error():
    assert main([]) == 2
