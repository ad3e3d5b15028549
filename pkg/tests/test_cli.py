import csv
import io as _io
import json

import pytest

from hmsplace import io
from hmsplace.cli import main, sweep_machine

from conftest import rotation_machine, rotation_trace, small_machine


def run(*argv):
    out, err = _io.StringIO(), _io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    trace, machine = tmp_path / "trace.json", tmp_path / "machine.json"
    io.save_trace(rotation_trace(), trace)
    io.save_machine(rotation_machine(), machine)
    return tmp_path, trace, machine


def test_plan_auto_picks_global_on_rotation(files):
    tmp, trace, machine = files
    code, out, err = run("plan", trace, machine, "--policy", "auto", "-o", tmp / "plan.json")
    assert code == 0, err
    lines = out.splitlines()
    assert lines[0] == "chosen: global"
    assert "migrations=8" in lines[1] and lines[1].startswith("local:")
    assert "migrations=2" in lines[2] and lines[2].startswith("global:")
    plan = io.load_plan(tmp / "plan.json")
    assert len(plan.migrations) == 2


def test_plan_then_simulate(files):
    tmp, trace, machine = files
    run("plan", trace, machine, "--policy", "local", "-o", tmp / "plan.json")
    code, out, err = run("simulate", trace, machine, "--plan", tmp / "plan.json",
                         "--json", tmp / "rep.json", "--csv", tmp / "rep.csv")
    assert code == 0, err
    assert out.startswith("policy")
    rep = io.load_report(tmp / "rep.json")
    assert rep.policy == "StaticPlan"
    rows = list(csv.reader((tmp / "rep.csv").open()))
    assert len(rows) == 1 + 10 * 5


def test_simulate_all_policies_writes_list(files):
    tmp, trace, machine = files
    code, out, _ = run("simulate", trace, machine, "--policy", "all", "--json", tmp / "r.json")
    assert code == 0
    doc = json.loads((tmp / "r.json").read_text())
    assert [r["policy"] for r in doc["reports"]] == \
        ["NvmOnly", "DramOnly", "Unimem", "LocalOnly", "GlobalOnly"]


def test_seeded_noise_is_reproducible(files):
    _, trace, machine = files
    args = ("simulate", trace, machine, "--policy", "unimem", "--csv",
            "--seed-noise", 4, "--noise-sigma", 0.1)
    assert run(*args)[1] == run(*args)[1]


def test_empty_trace_is_an_error(files):
    tmp, _, machine = files
    doc = io.trace_to_dict(rotation_trace())
    doc["phases"] = []
    for o in doc["objects"]:
        o.pop("static_ref_estimate", None)
    (tmp / "empty.json").write_text(json.dumps(doc))
    code, out, err = run("plan", tmp / "empty.json", machine)
    assert code == 1 and out == ""
    assert err.startswith("hmsplace: error[validation]:") and "no phases" in err


def test_missing_file_is_an_error(files):
    _, trace, _ = files
    code, _, err = run("simulate", trace, "/nonexistent/machine.json")
    assert code == 1 and err.startswith("hmsplace: error[io]:")


def test_compare_bandwidth_sweep(files):
    _, trace, machine = files
    code, out, err = run("compare", trace, machine, "--sweep", "bw=1.0,0.5,0.25")
    assert code == 0, err
    rows = list(csv.DictReader(_io.StringIO(out)))
    assert len(rows) == 9
    first = [r for r in rows if r["value"] == "1.0"]
    # NVM as fast as DRAM: every policy matches DRAM.
    assert all(float(r["normalized"]) == pytest.approx(1.0) for r in first)
    nvm = [float(r["normalized"]) for r in rows if r["policy"] == "NvmOnly"]
    assert nvm == sorted(nvm)


def test_compare_rejects_bad_sweep(files):
    _, trace, machine = files
    code, _, err = run("compare", trace, machine, "--sweep", "bw=2.0")
    assert code == 1 and "error[validation]" in err
    code, _, err = run("compare", trace, machine, "--sweep", "speed=1")
    assert code == 1


def test_sweep_machine_axes():
    cfg = small_machine()
    bw = sweep_machine(cfg, "bw", 0.25)
    assert (bw.nvm_bw, bw.nvm_lat, bw.bw_peak_nvm) == (3.2e9, cfg.dram_lat, 3.2e9)
    lat = sweep_machine(cfg, "lat", 4)
    assert (lat.nvm_bw, lat.nvm_lat) == (cfg.dram_bw, 4 * cfg.dram_lat)


def test_calibrate(tmp_path):
    (tmp_path / "pairs.json").write_text(json.dumps([[1.0, 1.2], [2.0, 2.2]]))
    code, out, _ = run("calibrate", tmp_path / "pairs.json")
    assert code == 0 and float(out) == pytest.approx(1.15)
    (tmp_path / "pairs.csv").write_text("predicted,measured\n1.0,2.0\n")
    assert float(run("calibrate", tmp_path / "pairs.csv")[1]) == 2.0
    (tmp_path / "empty.json").write_text("[]")
    code, _, err = run("calibrate", tmp_path / "empty.json")
    assert code == 1 and "error[invalid-calibration]" in err


def test_gen_is_deterministic(tmp_path):
    (tmp_path / "spec.json").write_text(json.dumps({"n_phases": 4, "iterations": 3}))
    run("gen", tmp_path / "spec.json", "--seed", 9, "-o", tmp_path / "a.json")
    run("gen", tmp_path / "spec.json", "--seed", 9, "-o", tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert io.load_trace(tmp_path / "a.json").n_phases == 4
