import json
import subprocess
import sys
from pathlib import Path

import pytest

from squeezecomm.cli import run

PLANS = Path(__file__).resolve().parents[1] / "plans"

# small but representative argument sets, one or more per subcommand
CASES = {
    "capacity": ["capacity", "--points", "4", "--smin", "0.5", "--smax", "4"],
    "snr": ["snr"],
    "loss": ["loss", "--points", "6"],
    "holevo-number": ["holevo", "--S", "0.5,1"],
    "holevo-random": ["holevo", "--ensemble", "random", "--trials", "15", "--seed", "4"],
    "ampchain": ["ampchain", "--nmax", "25"],
    "rdlimit": ["rdlimit", "--m", "1,2,4"],
    "rdlimit-phase": ["rdlimit", "--source", "phase"],
    "fmsim": ["fmsim", "--S", "50", "--m", "8,16", "--trials", "2000", "--seed", "5"],
    "monitor": ["monitor", "--plan", str(PLANS / "contractive.json")],
    "monitor-trials": ["monitor", "--plan", str(PLANS / "force_step.json"), "--trials", "200"],
}


def invoke(tmp_path, argv, tag="out"):
    out, svg = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.svg"
    code = run(list(argv) + ["-o", str(out), "--plot", str(svg)])
    assert code == 0
    return out.read_bytes(), svg.read_bytes()


@pytest.mark.parametrize("case", sorted(CASES))
def test_byte_identical_across_runs_and_workers(tmp_path, case):
    argv = CASES[case]
    first = invoke(tmp_path, argv, "a")
    assert invoke(tmp_path, argv, "b") == first
    assert invoke(tmp_path, argv + ["--workers", "3"], "c") == first
    assert first[0].startswith(b"# command=")


def test_metadata_excludes_plumbing(tmp_path):
    csv, _ = invoke(tmp_path, ["snr", "--workers", "2"])
    meta = csv.split(b"\n")[0].decode()
    assert "seed=0" in meta and "S=0.5,1,2,10" in meta
    assert "workers" not in meta and "output" not in meta and "plot" not in meta


def test_json_output(tmp_path):
    out = tmp_path / "o.json"
    assert run(["ampchain", "--nmax", "3", "--format", "json", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [c["name"] for c in doc["columns"]] == ["n", "PIA", "PNA", "POA"]
    assert doc["metadata"]["command"] == "ampchain"
    assert len(doc["rows"]) == 3


def test_monitor_seed_override(tmp_path):
    plan = str(PLANS / "contractive.json")
    a, _ = invoke(tmp_path, ["monitor", "--plan", plan], "a")
    b, _ = invoke(tmp_path, ["monitor", "--plan", plan, "--seed", "7"], "b")
    c, _ = invoke(tmp_path, ["monitor", "--plan", plan, "--seed", "8"], "c")
    assert a == b      # the plan itself carries seed 7
    assert a.split(b"\n", 1)[1] != c.split(b"\n", 1)[1]


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this run\nS = 3\nG=5\nnmax=4\n")
    out = tmp_path / "o.csv"
    assert run(["ampchain", "--config", str(cfg), "--G", "2", "-o", str(out)]) == 0
    meta = out.read_text().split("\n")[0]
    assert "G=2.0" in meta and "S=3.0" in meta and "nmax=4" in meta
    assert len(out.read_text().strip().split("\n")) == 2 + 4


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("S=3\nbogus=1\n")
    assert run(["ampchain", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "bogus" in err and "nmax" in err


def test_validation_exit_codes(capsys):
    assert run(["snr", "--S", "-1"]) == 2
    assert run(["capacity", "--eta", "2"]) == 2
    assert run(["ampchain", "--G", "0.5"]) == 2
    assert run(["monitor", "--plan", "/nonexistent/plan.json"]) == 2
    assert run(["snr", "--workers", "0"]) == 2
    assert run(["nosuchcommand"]) == 2
    assert "error:" in capsys.readouterr().err


def test_nonconvergence_exit_code(capsys):
    code = run(["capacity", "--kinds", "ph", "--points", "1", "--smin", "1", "--smax", "1",
                "--max-iters", "2"])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "squeezecomm", "snr", "--S", "1"],
                          capture_output=True, text=True, check=True)
    lines = proc.stdout.splitlines()
    assert lines[1] == "S(photons),nu_opt(1),snr_tcs(1),snr_coherent(1)"
    assert lines[2] == "1,0.57735026919,8,4"
