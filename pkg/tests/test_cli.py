import csv
import json

import pytest

from prodcode.cli import main
from prodcode.de import TransferModel
from prodcode.sim import config_hash

SIM_SET = ["--set", "code=[8,3,76]", "--set", "ebn0_db=[3.0,3.5]",
           "--set", 'decoders=["ibdd",{"kind":"ibdd-sr","weights":[1,1,1,1,1,1],"sr_iters":3,"final_ibdd_iters":1}]',
           "--set", "stop.max_frames=4", "--set", "stop.round_frames=2"]


def body(path):
    lines = path.read_text().splitlines(keepends=True)
    assert lines[0].startswith("# schema: prodcode-")
    return lines[0], "".join(lines[1:])


def test_optimize_single_target(tmp_path):
    assert main(["optimize", "--out", str(tmp_path), "--set", "targets=[4]"]) == 0
    rows = list(csv.DictReader(body(tmp_path / "optimize.csv")[1].splitlines()))
    assert len(rows) == 2
    assert {(r["v"], r["t"], r["s"]) for r in rows} == {("8", "3", "28")}


def test_optimize_empty_targets_exit_2(tmp_path):
    assert main(["optimize", "--out", str(tmp_path), "--set", "targets=[]"]) == 2


def test_threshold_two_records(tmp_path):
    assert main(["threshold", "--out", str(tmp_path)]) == 0
    docs = json.loads((tmp_path / "threshold.json").read_text())
    assert [d["decoder"] for d in docs] == ["ibdd-sr", "ibdd"]
    assert float(docs[0]["threshold_p"]) > float(docs[1]["threshold_p"])


def test_threshold_shortening_factor(tmp_path):
    assert main(["threshold", "--out", str(tmp_path), "--set", "codes=[[9,3,0],[9,3,93]]",
                 "--set", 'decoders=["ibdd"]']) == 0
    a, b = json.loads((tmp_path / "threshold.json").read_text())
    assert float(b["threshold_p"]) == pytest.approx(
        float(a["threshold_p"]) * 511 / (511 - 93), rel=1e-5)


@pytest.mark.parametrize("codes", ["[[7,3,0]]", "[[9,5,0]]", "[[9,3,-1]]"])
def test_threshold_invalid_code_exit_2(tmp_path, codes):
    assert main(["threshold", "--out", str(tmp_path), "--set", f"codes={codes}"]) == 2


def test_simulate_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--out", str(a), "--seed", "5", *SIM_SET]) == 0
    assert main(["simulate", "--out", str(b), "--config", str(a / "simulate.config.json"),
                 "--workers", "3"]) == 0
    assert body(a / "simulate.csv") == body(b / "simulate.csv")
    rows = list(csv.DictReader(body(a / "simulate.csv")[1].splitlines()))
    assert [r["decoder"] for r in rows] == ["ibdd", "ibdd-sr"] * 2


def test_simulate_config_hash_in_outputs(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), *SIM_SET]) == 0
    echo = json.loads((tmp_path / "simulate.config.json").read_text())
    h = config_hash(echo)
    assert body(tmp_path / "simulate.csv")[0].strip().endswith(h)
    assert json.loads((tmp_path / "simulate.manifest.json").read_text())["config_hash"] == h


def test_simulate_missing_sr_weights_exit_2(tmp_path):
    assert main(["simulate", "--out", str(tmp_path),
                 "--set", 'decoders=[{"kind":"ibdd-sr"}]']) == 2


def test_floor_curve(tmp_path):
    assert main(["floor", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(body(tmp_path / "floor.csv")[1].splitlines()))
    vals = [float(r["floor_ber"]) for r in rows]
    assert len(vals) == 19 and vals == sorted(vals)


def test_reach_default(tmp_path):
    assert main(["reach", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "reach.json").read_text())
    assert abs(doc["gain_km"] - 560) <= 80


def test_reach_unknown_link_field_exit_2(tmp_path):
    assert main(["reach", "--out", str(tmp_path), "--set", "link.span=70"]) == 2


def test_transfer_estimate_toy(tmp_path):
    assert main(["transfer-estimate", "--out", str(tmp_path), "--set", "code=[4,3]",
                 "--set", "strict=false", "--set", "x_grid=[0.1,0.3]",
                 "--set", "trials=300", "--seed", "1"]) == 0
    m = TransferModel.load(tmp_path / "transfer_v4_t3.json")
    assert (m.v, m.t, m.trials) == (4, 3, 300)


@pytest.mark.parametrize("argv", [
    ["reach", "--workers", "0"],
    ["reach", "--seed", "-1"],
    ["reach", "--set", "delta_db"],
])
def test_bad_flags_exit_2(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path)]) == 2
