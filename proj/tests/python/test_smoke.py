import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import fde_sic

ROOT = Path(__file__).resolve().parents[2]


def schema(name):
    return json.loads((ROOT / "schemas" / f"{name}.schema.json").read_text())


def test_throughput_worked_examples():
    r = fde_sic.uldl_throughputs(10.0, 10.0, 0.0, 1.0, 20e6)
    assert r["r_hd"] / 1e6 == pytest.approx(69.189, rel=1e-4)
    assert r["r_fd"] / 1e6 == pytest.approx(120.888, rel=1e-4)
    assert r["gain"] == pytest.approx(1.747, rel=1e-3)
    t = fde_sic.three_node_throughputs(100.0, 100.0)
    assert t["gain_both_fd"] == pytest.approx(1.704, rel=1e-3)
    assert fde_sic.jains_fairness([1.0, 0.0]) == 0.5
    with pytest.raises(ValueError):
        fde_sic.jains_fairness([])


def test_benchmark_channel_and_optimize():
    f, h = fde_sic.benchmark_channel()
    assert f.shape == (257,) and h.dtype == np.complex128
    band = (f >= 890e6) & (f <= 910e6)
    rep = fde_sic.optimize("pcb", 2, f[band], h[band], quantized=True, restarts=4)
    assert [s["name"] for s in rep["stages"]] == ["ideal", "rounded", "local-search"]
    assert rep["stages"][0]["mean_rf_sic_db"] >= 45.0
    fc, hc = fde_sic.canceller_response("pcb", rep["params"], f[band])
    m = fde_sic.sic_metrics(fc, h[band], hc)
    assert m["mean_rf_sic_db"] == pytest.approx(rep["mean_rf_sic_db"], abs=1e-9)


def test_digital_fit_on_scaled_ofdm():
    tx = fde_sic.gen_ofdm(20, seed=3)
    assert tx.shape == (1600,)
    assert np.mean(np.abs(tx) ** 2) == pytest.approx(1.0, abs=1e-9)
    fit = fde_sic.fit_digital_canceller(tx, 0.01j * tx, max_odd_order=1, memory_depth=1)
    assert fit["digital_sic_db"] > 100.0


def test_invalid_inputs_raise():
    with pytest.raises(ValueError):
        fde_sic.canceller_response("ferrite", [0.0], np.array([9e8]))
    with pytest.raises(ValueError):
        fde_sic.shannon_rate(20e6, -1.0)


def test_cli_outputs_match_schemas(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"solver": {"restarts": 2}, "digsic": {"n_symbols": 20}}))
    out = tmp_path / "out"
    assert fde_sic.main(["optimize", "--config", str(cfg), "--out", str(out)]) == 0
    assert fde_sic.main(["digsic", "--config", str(cfg), "--out", str(out)]) == 0
    assert fde_sic.main(["network", "--config", str(cfg), "--out", str(out)]) == 0
    jsonschema.validate(json.loads((out / "optimize_report.json").read_text()), schema("optimize_report"))
    jsonschema.validate(json.loads((out / "digsic_report.json").read_text()), schema("digsic_report"))
    jsonschema.validate(json.loads((out / "network_summary.json").read_text()), schema("network_summary"))
    assert fde_sic.main(["optimize", "--config", str(tmp_path / "missing.json")]) == 1


def test_shipped_configs_match_schema():
    s = schema("config")
    for p in sorted((ROOT / "configs").glob("*.json")):
        jsonschema.validate(json.loads(p.read_text()), s)
