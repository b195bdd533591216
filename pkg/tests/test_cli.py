import csv
import datetime as dt
import json
import subprocess
import sys
from pathlib import Path

import pytest

from oracles import sl2_brute
from discordant.cli import SpecError, default_output, main, parse_spec, run_experiment

ROOT = Path(__file__).resolve().parents[1]
EXPERIMENTS = ROOT / "experiments"


def write(tmp_path, obj, name="spec.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return p


def test_parse_error_reports_position():
    with pytest.raises(SpecError) as e:
        parse_spec('{"command": "density",\n  "params": {,}}')
    assert "line 2, column 14" in e.value.messages[0]


def test_validation_lists_every_violation():
    with pytest.raises(SpecError) as e:
        parse_spec((EXPERIMENTS / "bad.json").read_text())
    msgs = e.value.messages
    assert len(msgs) == 4
    joined = "\n".join(msgs)
    for needle in ("junk", "extra", "primes", "params/windows/0"):
        assert needle in joined


def test_unknown_command_rejected():
    with pytest.raises(SpecError):
        parse_spec('{"command": "plot", "params": {}}')


def test_default_output_prefix():
    assert default_output("sl2", dt.datetime(2026, 1, 2, 3, 4, 5)) == "out/sl2-20260102-030405"
    spec = parse_spec('{"command": "sl2", "params": {"n_min": 1, "n_max": 2}}')
    assert spec.output.startswith("out/sl2-")


def test_density_csv_format(tmp_path):
    spec = parse_spec(json.dumps({"command": "density", "params": {"set": "evens", "windows": [10, 100]},
                                  "output": "out/evens"}))
    res = run_experiment(spec, str(tmp_path))
    assert res.status == 0
    raw = res.artifacts[0].read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(raw.decode().splitlines()))
    assert rows[0] == ["n", "count", "ratio", "known_density", "abs_diff"]
    assert rows[1][:2] == ["10", "11"]
    assert float(rows[2][2]) == pytest.approx(101 / 201)


def test_exit_codes(tmp_path, capsys):
    ok = write(tmp_path, {"command": "sl2", "params": {"n_min": 1, "n_max": 12, "k": [2, 3]}, "output": "x/sl2"})
    assert main(["run", str(ok), "--out", str(tmp_path)]) == 0
    failing = write(tmp_path, {"command": "witness", "params": {"shifts": [0, 1], "moduli": [4, 9],
                                                                "expect": {"x": 9}}}, "w.json")
    assert main(["run", str(failing), "--out", str(tmp_path)]) == 2
    assert "expected 9" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    bad = write(tmp_path, {"command": "density", "params": {"set": "kfree", "k": 1, "windows": [5]}}, "b.json")
    assert main(["run", str(bad)]) == 1


def test_witness_json(tmp_path):
    res = run_experiment(parse_spec((EXPERIMENTS / "crt.json").read_text()), str(tmp_path))
    assert res.status == 0
    data = json.loads(res.artifacts[0].read_text())
    assert data == {"shifts": [0, 1, 2], "moduli": [4, 9, 25], "x": 548, "N": 900, "verifiedRange": [0, 10]}


def test_sl2_output(tmp_path):
    spec = parse_spec(json.dumps({"command": "sl2", "params": {"n_min": 1, "n_max": 3, "k": [2]}, "output": "s"}))
    res = run_experiment(spec, str(tmp_path))
    rows = list(csv.DictReader(res.artifacts[0].open()))
    assert [r["ball_size"] for r in rows] == [str(len(sl2_brute(n))) for n in (1, 2, 3)]


@pytest.mark.parametrize("name,status", [
    ("ie.json", 0), ("orbit.json", 0), ("squarefree-syndetic.json", 0), ("straus-ps.json", 0),
])
def test_shipped_experiments(tmp_path, name, status):
    res = run_experiment(parse_spec((EXPERIMENTS / name).read_text()), str(tmp_path))
    assert res.status == status, res.messages


def test_orbit_experiment_finds_crt_candidate(tmp_path):
    res = run_experiment(parse_spec((EXPERIMENTS / "orbit.json").read_text()), str(tmp_path))
    rows = list(csv.DictReader(res.artifacts[0].open()))
    assert rows[0]["witness"] == "548"


def test_reruns_are_byte_identical(tmp_path):
    spec = parse_spec(json.dumps({"command": "density", "params": {"set": "squarefree", "windows": [100, 5000]},
                                  "output": "sq"}))
    a = run_experiment(spec, str(tmp_path / "a"), threads=1).artifacts[0].read_bytes()
    b = run_experiment(spec, str(tmp_path / "b"), threads=4).artifacts[0].read_bytes()
    assert a == b


def test_module_entry_point(tmp_path):
    p = write(tmp_path, {"command": "ie", "params": {"moduli": [2, 3], "window": 50}, "output": "ie"})
    r = subprocess.run([sys.executable, "-m", "discordant", "run", str(p), "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "ie.csv").exists()
