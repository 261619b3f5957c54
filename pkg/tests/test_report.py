import json

import numpy as np
import pytest

from gkcascade import cascade_det, report
from gkcascade.cascade_mc import McConfig, ShockScenario, monte_carlo
from gkcascade.marketdata import Region
from gkcascade.netbuild import apply_threshold, build_network, clustering_coefficients
from gkcascade.risk import AssetRisk, RiskReport

from fixtures_det import STUDY_TICKERS, cited_rho


def test_risk_csv_layout():
    rr = RiskReport(0.95, {"A": AssetRisk(-0.0635, -0.1044), "B": AssetRisk(-0.02, -0.03)})
    assert report.risk_csv(rr) == b"asset,var,cvar\nA,-0.063500,-0.104400\nB,-0.020000,-0.030000\n"


def test_empty_table_is_header_only():
    assert report.emit_csv(["a", "b"], []) == b"a,b\n"


def test_ragged_rows_rejected():
    with pytest.raises(ValueError):
        report.emit_csv(["a", "b"], [[1]])


def test_value_formatting():
    assert report.format_value(True) == "1"
    assert report.format_value(np.int64(3)) == "3"
    assert report.format_value(-0.0) == "0.000000"
    assert report.format_value(np.float32(0.5)) == "0.500000"
    assert report.format_value(Region.ASIA) == "Asia"


def test_trace_csv_heatmap_shape():
    rho = np.full((20, 20), 0.4)
    np.fill_diagonal(rho, 0)
    tickers = [f"T{i:02d}" for i in range(20)]
    # 1 seed -> influence 0.4; 2 seeds -> 0.8 > 0.5 everywhere
    tr = cascade_det.run(tickers, rho, ["T00", "T01"])
    data = report.trace_csv(tr).decode()
    lines = data.splitlines()
    assert len(lines) == len(tr.states) + 1 == 4
    assert lines[0] == "iteration," + ",".join(tickers)
    assert all(set(l.split(",", 1)[1]) <= {"0", "1", ","} for l in lines[1:])


def test_trace_json():
    tr = cascade_det.run(STUDY_TICKERS, apply_threshold(cited_rho(), 0.3), ["GOLL4.SA", "BBAS3.SA"], theta=0.3)
    doc = json.loads(report.to_json_bytes(report.trace_json(tr)))
    assert doc["converged"] is True and doc["theta"] == 0.3
    assert [it["newly_defaulted"] for it in doc["iterations"]] == [["BBAS3.SA", "GOLL4.SA"], ["BOVA11.SA"], []]
    assert doc["iterations"][1]["state"] == [0, 1, 1, 1, 0]


def test_matrix_round_trip(rng):
    m = rng.normal(size=(5, 5))
    tickers = list("VWXYZ")
    rows, cols, back = report.read_matrix_csv(report.matrix_csv(m, tickers))
    assert rows == cols == tickers
    np.testing.assert_allclose(back, m, atol=5e-7, rtol=0)


def _dot(weights, tickers, regions):
    return report.emit_dot(weights, tickers, clustering_coefficients(weights > 0), regions).decode()


def test_dot_single_edge():
    w = np.array([[0.0, 0.7712], [0.7712, 0.0]])
    text = _dot(w, ["B", "A"], {"A": Region.BRAZIL, "B": "US"})
    assert text.splitlines() == [
        'graph "network" {',
        '  "A" [region="Brazil", clustering="0.000000"];',
        '  "B" [region="US", clustering="0.000000"];',
        '  "A" -- "B" [weight="0.771200"];',
        "}",
    ]


def test_dot_isolated_nodes():
    tickers = [f"N{i:02d}" for i in range(20)]
    text = _dot(np.zeros((20, 20)), tickers, {t: Region.ASIA for t in tickers})
    assert text.count("[region=") == 20
    assert "--" not in text and "->" not in text


def test_dot_directed_and_deterministic(returns20, panel20):
    net = build_network(returns20, 0.3, "exposure")
    regions = {a.ticker: a.region for a in panel20.assets}
    a = _dot(net.exposures, list(net.tickers), regions)
    b = _dot(net.exposures, list(net.tickers), regions)
    assert a == b
    assert a.startswith("digraph") and "->" in a
    assert a.count("->") == int(net.adjacency.sum())


def test_mc_tables(returns20, panel20):
    net = build_network(returns20, 0.5, "correlation")
    rep = monte_carlo(McConfig(20), ShockScenario.parse("single:GOLL4.SA"), net, panel20.assets)
    table = report.mc_csv([rep]).decode().splitlines()
    assert table[0] == "scenario,theta,failure_probability,avg_failed"
    assert table[1].startswith('Single Shock (GOLL4.SA),0.500000,')
    regions = report.region_csv(rep).decode().splitlines()
    assert [l.split(",")[0] for l in regions] == ["region", "Brazil", "US", "Europe", "Asia"]


def test_atomic_write(tmp_path):
    target = tmp_path / "sub" / "x.csv"
    report.atomic_write(target, b"abc")
    report.atomic_write(target, b"def")
    assert target.read_bytes() == b"def"
    assert [p.name for p in target.parent.iterdir()] == ["x.csv"]


def test_manifest(tmp_path):
    f = tmp_path / "p.csv"
    f.write_bytes(b"hello")
    m = report.build_manifest({"prices": f, "regions": None}, {"theta": 0.5}, ["risk.csv"])
    assert m["inputs"]["prices"]["sha256"] == "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
    assert "regions" not in m["inputs"]
    assert m["config"] == {"theta": 0.5}
