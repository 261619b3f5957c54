import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gkcascade.errors import (
    DuplicateDate,
    EmptyPanel,
    InsufficientData,
    MalformedHeader,
    MalformedRow,
    UnknownTicker,
)
from gkcascade.marketdata import (
    DEFAULT_REGIONS,
    Region,
    compute_log_returns,
    descriptive_stats,
    load_prices,
    load_region_map,
    normalize_prices,
    panel_from_arrays,
)

REGIONS = {"A": "Brazil", "B": "US"}


def csv_bytes(text):
    return text.strip().encode() + b"\n"


def test_blank_cell_drops_whole_row():
    data = csv_bytes("""
date,A,B
2020-01-01,100,50
2020-01-02,101,51
2020-01-03,,52
2020-01-04,103,53
""")
    panel = load_prices(io.BytesIO(data), REGIONS)
    assert len(panel.dates) == 3
    assert [d.isoformat() for d in panel.dates] == ["2020-01-01", "2020-01-02", "2020-01-04"]
    assert panel.prices.shape == (3, 2)


@pytest.mark.parametrize("bad", ["", "abc", "0", "-3", "nan", "inf"])
def test_unusable_cells_are_dropped(bad):
    data = csv_bytes(f"date,A,B\n2020-01-01,100,50\n2020-01-02,{bad},51\n2020-01-03,102,52\n2020-01-04,103,53")
    panel = load_prices(data, REGIONS)
    assert len(panel.dates) == 3


def test_final_price_is_last_retained_row():
    panel = load_prices(csv_bytes("date,A,B\n2020-01-01,100,5\n2020-01-02,110,6\n2020-01-03,,7"), REGIONS)
    assert panel.assets[0].final_price == 110
    assert panel.assets[1].final_price == 6


def test_rows_are_sorted_by_date():
    panel = load_prices(csv_bytes("date,A,B\n2020-01-03,3,3\n2020-01-01,1,1\n2020-01-02,2,2"), REGIONS)
    assert panel.prices[:, 0].tolist() == [1, 2, 3]
    assert panel.assets[0].final_price == 3


def test_regions_attached():
    panel = load_prices(csv_bytes("date,A,B\n2020-01-01,1,1\n2020-01-02,2,2"), REGIONS)
    assert [a.region for a in panel.assets] == [Region.BRAZIL, Region.US]


@pytest.mark.parametrize(
    "text, exc",
    [
        ("date,A,B\n2020-01-01,1,1", EmptyPanel),
        ("date,A,B\n2020-01-01,1,\n2020-01-02,2,2", EmptyPanel),
        ("date,A,C\n2020-01-01,1,1\n2020-01-02,2,2", UnknownTicker),
        ("date,A,B\n2020-01-01,1,1\n2020-01-01,2,2", DuplicateDate),
        ("day,A,B\n2020-01-01,1,1\n2020-01-02,2,2", MalformedHeader),
        ("date,A,A\n2020-01-01,1,1\n2020-01-02,2,2", MalformedHeader),
        ("date\n2020-01-01\n2020-01-02", MalformedHeader),
        ("date,A,B\n01/02/2020,1,1\n2020-01-02,2,2", MalformedRow),
    ],
)
def test_load_errors(text, exc):
    with pytest.raises(exc):
        load_prices(csv_bytes(text), REGIONS)


def test_default_universe_composition():
    counts = {}
    for r in DEFAULT_REGIONS.values():
        counts[r] = counts.get(r, 0) + 1
    assert len(DEFAULT_REGIONS) == 20
    assert counts[Region.BRAZIL] == 13
    assert sum(v for k, v in counts.items() if k is not Region.BRAZIL) == 7


def test_region_map_json():
    m = load_region_map(io.StringIO('{"GOLL4.SA": "Brazil", "AAPL": "US"}'))
    assert m == {"GOLL4.SA": Region.BRAZIL, "AAPL": Region.US}
    with pytest.raises(MalformedRow):
        load_region_map(io.StringIO('{"X": "Mars"}'))


def single(prices):
    return panel_from_arrays(np.array(prices, dtype=float)[:, None], ["A"])


def test_log_return_examples():
    assert compute_log_returns(single([100, 100])).returns[0, 0] == 0.0
    assert compute_log_returns(single([100, 100 * math.e])).returns[0, 0] == pytest.approx(1.0, abs=1e-15)
    r = compute_log_returns(single([100, 90])).returns[0, 0]
    assert r == pytest.approx(-0.10536, abs=1e-5)
    assert r == pytest.approx(math.log(0.9), rel=1e-15)


def test_return_panel_drops_first_date():
    p = single([1, 2, 3, 4])
    r = compute_log_returns(p)
    assert r.returns.shape == (3, 1)
    assert r.dates == p.dates[1:]


def test_normalize_examples():
    assert normalize_prices(single([50, 25])).ravel().tolist() == [1.0, 0.5]


prices_strategy = st.lists(
    st.floats(min_value=1e-3, max_value=1e6, allow_nan=False, allow_infinity=False), min_size=2, max_size=50
)


@given(prices_strategy)
def test_normalized_first_row_ones_and_inverse(prices):
    p = single(prices)
    norm = normalize_prices(p)
    assert np.all(norm[0] == 1.0)
    np.testing.assert_allclose(norm * p.prices[0], p.prices, rtol=1e-12)


@given(prices_strategy, st.floats(min_value=1e-3, max_value=1e3))
def test_returns_scale_invariant(prices, c):
    a = compute_log_returns(single(prices)).returns
    b = compute_log_returns(single([c * x for x in prices])).returns
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e6), st.integers(min_value=2, max_value=40))
def test_constant_series_has_zero_returns(price, n):
    assert np.all(compute_log_returns(single([price] * n)).returns == 0.0)


def test_descriptive_examples():
    r = compute_log_returns(single([100, 100 * math.exp(0.01), 100])).returns
    s = descriptive_stats(compute_log_returns(single([100, 100 * math.exp(0.01), 100])))["A"]
    assert s.mean == pytest.approx(0.0, abs=1e-15)
    assert s.min == pytest.approx(-0.01) and s.max == pytest.approx(0.01)
    assert r.shape == (2, 1)
    c = descriptive_stats(compute_log_returns(single([1.0, 1.0, 1.0, 1.0])))["A"]
    assert c.std_dev == 0.0


def test_descriptive_needs_two_returns():
    with pytest.raises(InsufficientData):
        descriptive_stats(compute_log_returns(single([1.0, 2.0])))


def test_descriptive_uses_sample_std(returns20):
    stats = descriptive_stats(returns20)
    for i, t in enumerate(returns20.tickers):
        col = returns20.returns[:, i]
        assert stats[t].std_dev == pytest.approx(np.std(col, ddof=1), rel=1e-12)
        assert stats[t].min <= stats[t].mean <= stats[t].max


def test_constant_drift_gives_zero_std():
    p = single([100 * math.exp(0.02 * k) for k in range(4)])
    s = descriptive_stats(compute_log_returns(p))["A"]
    assert s.std_dev == pytest.approx(0.0, abs=1e-15)
    assert s.mean == pytest.approx(0.02)
