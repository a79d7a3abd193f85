import csv
import io
import json
import subprocess
import sys

import pytest

from sicqta.cli import main
from sicqta.io import trace_summary_from_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_resolve_worked_example(capsys):
    code, out, _ = run(capsys, "resolve", "--algorithm", "sicqta", "--u", "3", "--ids", "000,001,100,101")
    assert code == 0
    data = json.loads(out)
    assert data["latency"] == 6
    assert [s["query"] for s in data["slots"]] == ["", "0", "00", "000", "10", "100"]
    assert [s["outcome"] for s in data["slots"]] == list("CCCSCS")
    assert data["slots"][3]["decoded_by_cancellation"] == ["001"]
    assert data["decoded"] == {"000": 4, "001": 4, "100": 6, "101": 6}
    params, ids, decoded = trace_summary_from_json(out)
    assert params.u == 3 and ids == [0, 1, 4, 5] and decoded[5] == 6


def test_resolve_single_and_random(capsys):
    code, out, _ = run(capsys, "resolve", "--algorithm", "qta", "--u", "3", "--ids", "010")
    assert code == 0 and json.loads(out)["latency"] == 1
    code, out, _ = run(capsys, "resolve", "--u", "5", "--random", "7", "--seed", "3")
    assert code == 0 and len(json.loads(out)["participants"]) == 7


@pytest.mark.parametrize(
    "argv",
    [
        ["resolve", "--algorithm", "qta", "--u", "3", "--ids", "000,000"],
        ["resolve", "--u", "3", "--ids", "8"],
        ["resolve", "--u", "3"],
        ["bounds", "--u", "3", "--m-range", "1..4"],
        ["bounds", "--u", "3", "--m-range", "2..9"],
        ["batch", "--u", "3", "--m", "9", "--seed", "1"],
        ["batch", "--u", "3", "--m", "2"],
        ["arrivals", "--u", "3", "--lambda", "-1", "--seed", "1"],
        ["sweep", "--axis", "m=1..4", "--seed", "1"],
        ["sweep", "--axis", "q=1..4", "--u", "3", "--seed", "1"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--u", "6", "--m-range", "2..64")
    assert code == 0
    r = rows(out)
    assert len(r) == 63
    assert list(r[0]) == [
        "M", "u", "qta_lower", "qta_upper_loose", "qta_upper",
        "sic_lower", "sic_upper", "skip_total", "skip_idle", "skip_cancel",
    ]
    assert r[-1]["sic_upper"] == "64"
    code, out, _ = run(capsys, "bounds", "--u", "3", "--m-range", "4..4")
    assert rows(out)[0]["sic_upper"] == "6"


def test_batch_summary_and_manifest(capsys, tmp_path):
    out_path = tmp_path / "b.csv"
    code, _, err = run(capsys, "batch", "--u", "6", "--m", "32", "--trials", "500", "--seed", "7",
                       "--out", str(out_path))
    assert code == 0 and "violations=0" in err
    r = rows(out_path.read_text())
    assert len(r) == 500 and list(r[0]) == ["u", "M", "trial", "latency", "throughput"]
    assert r[0]["throughput"].count(".") == 1 and len(r[0]["throughput"].split(".")[1]) == 6
    man = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert man["subcommand"] == "batch" and man["seed"] == 7
    assert man["parameters"]["m"] == 32 and man["outputs"] == [str(out_path)]
    # rerunning from the manifest parameters reproduces the file
    again = tmp_path / "c.csv"
    p = man["parameters"]
    run(capsys, "batch", "--u", str(p["u"]), "--m", str(p["m"]), "--trials", str(p["trials"]),
        "--seed", str(p["seed"]), "--out", str(again))
    assert again.read_bytes() == out_path.read_bytes()
    code, out, _ = run(capsys, "batch", "--u", "4", "--m", "5", "--trials", "50", "--seed", "1", "--summary")
    assert rows(out)[0]["violations"] == "0"


def test_arrivals_csv(capsys):
    code, out, _ = run(capsys, "arrivals", "--u", "4", "--lambda", "0.5", "--horizon", "5000", "--seed", "7")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["u", "lambda", "mean_delay", "throughput", "mean_cri", "stable_flag"]
    assert r[0]["stable_flag"] == "true" and r[0]["lambda"] == "0.500000"


def test_sweep_m_row_count(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "m=1..64", "--u", "6", "--trials", "20", "--seed", "7")
    assert code == 0
    r = rows(out)
    assert len(r) == 64 and r[-1]["mean_latency"] == "64.000000"


def test_sweep_lambda_multiple_u(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "lambda=0.2..0.4:0.1", "--us", "4,6",
                       "--horizon", "2000", "--seed", "1")
    assert code == 0
    assert [(x["u"], x["lambda"]) for x in rows(out)] == [
        ("4", "0.200000"), ("4", "0.300000"), ("4", "0.400000"),
        ("6", "0.200000"), ("6", "0.300000"), ("6", "0.400000"),
    ]


def test_table1(capsys):
    code, out, _ = run(capsys, "table1", "--mode", "formula")
    assert code == 0
    r = rows(out)
    assert list(r[0])[:6] == ["M", "L", "algorithm", "mode", "N_supported", "paper_reference_value"]
    sic = {(x["M"], x["L"]): x for x in r if x["algorithm"] == "SICQTA"}
    assert [sic["3", str(L)]["N_supported"] for L in range(4, 8)] == ["8", "16", "32", "64"]
    assert sic["4", "4"]["N_supported"] == "4"
    assert sic["4", "5"]["N_supported"] == "4"
    assert sic["4", "5"]["paper_reference_value"] == "8"
    assert sic["4", "5"]["mismatch"] == "true"


def test_sweep_worker_env_bytes(tmp_path):
    outs = []
    for w in ("1", "4"):
        path = tmp_path / f"w{w}.csv"
        subprocess.run(
            [sys.executable, "-m", "sicqta.cli", "sweep", "--axis", "m=2..12", "--u", "4",
             "--trials", "1500", "--seed", "3", "--per-trial", "--out", str(path)],
            check=True, env={"SICQTA_WORKERS": w, "PATH": ""},
        )
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
