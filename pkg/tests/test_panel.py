"""Ingestion, calendar alignment, and excess-return behavior."""

from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from premiaroll.panel import (
    AlignedPanel,
    CalendarPolicy,
    CsvSchema,
    RawSeries,
    align,
    align_calendars,
    excess,
    load_csv,
    to_returns,
)

D = date.fromisoformat


def _csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_three_row_single_column(self, tmp_path):
        path = _csv(tmp_path, "date,px\n2020-01-06,100\n2020-01-07,101\n2020-01-08,99.5\n")
        series, rejected = load_csv(path)
        assert rejected == []
        assert len(series) == 1
        assert series[0].id == "px"
        assert series[0].dates == (D("2020-01-06"), D("2020-01-07"), D("2020-01-08"))
        assert_array_equal(series[0].values, [100.0, 101.0, 99.5])

    def test_duplicate_date_names_it(self, tmp_path):
        path = _csv(tmp_path, "date,px\n2020-01-06,1\n2020-01-06,2\n")
        with pytest.raises(ValueError, match="2020-01-06"):
            load_csv(path)

    def test_blank_cell_names_row_and_column(self, tmp_path):
        path = _csv(tmp_path, "date,px\n2020-01-06,1\n2020-01-07,\n")
        with pytest.raises(ValueError, match=r"row 3.*'px'"):
            load_csv(path)

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        path = _csv(tmp_path, "date,px,qty\n2020-01-06,1,2\n2020-01-07,1,abc\n")
        with pytest.raises(ValueError, match=r"row 3.*'qty'.*'abc'"):
            load_csv(path)

    def test_unparseable_dates_rejected_with_row_numbers(self, tmp_path):
        path = _csv(
            tmp_path,
            "date,px\n2020-01-06,1\nnot-a-date,2\n2020-01-08,3\n01/09/2020,4\n",
        )
        series, rejected = load_csv(path)
        assert rejected == [3, 5]
        assert len(series[0]) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nope.csv"):
            load_csv(tmp_path / "nope.csv")

    def test_missing_date_column(self, tmp_path):
        path = _csv(tmp_path, "stamp,px\n2020-01-06,1\n")
        with pytest.raises(ValueError, match="'date'"):
            load_csv(path)

    def test_missing_value_column(self, tmp_path):
        path = _csv(tmp_path, "date,px\n2020-01-06,1\n")
        with pytest.raises(ValueError, match="qty"):
            load_csv(path, CsvSchema(value_columns=("qty",)))

    def test_custom_delimiter_and_multiple_columns(self, tmp_path):
        path = _csv(tmp_path, "date;a;b\n2020-01-06;1;10\n2020-01-07;2;20\n")
        series, _ = load_csv(path, CsvSchema(delimiter=";"))
        assert [s.id for s in series] == ["a", "b"]
        assert_array_equal(series[1].values, [10.0, 20.0])

    def test_unsorted_rows_are_sorted(self, tmp_path):
        path = _csv(tmp_path, "date,px\n2020-01-08,3\n2020-01-06,1\n2020-01-07,2\n")
        series, _ = load_csv(path)
        assert_array_equal(series[0].values, [1.0, 2.0, 3.0])


class TestRawSeries:
    def test_duplicate_dates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            RawSeries("x", (D("2020-01-06"), D("2020-01-06")), [1.0, 2.0])

    def test_decreasing_dates_rejected(self):
        with pytest.raises(ValueError, match="not increasing"):
            RawSeries("x", (D("2020-01-07"), D("2020-01-06")), [1.0, 2.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            RawSeries("x", (D("2020-01-06"), D("2020-01-07")), [1.0, np.nan])

    def test_values_are_readonly(self):
        s = RawSeries("x", (D("2020-01-06"),), [1.0])
        with pytest.raises(ValueError):
            s.values[0] = 2.0


def _series(values, start="2020-01-06"):
    dates = []
    d = D(start)
    while len(dates) < len(values):
        if d.weekday() < 5:
            dates.append(d)
        d = d.fromordinal(d.toordinal() + 1)
    return RawSeries("s", tuple(dates), np.asarray(values, dtype=float))


class TestToReturns:
    def test_constant_price_gives_zero(self):
        out = to_returns(_series([100.0, 100.0]))
        assert out.values[0] == 0.0

    def test_simple_return(self):
        out = to_returns(_series([100.0, 110.0]), kind="simple")
        assert_allclose(out.values[0], 0.10, rtol=1e-12)

    def test_log_return_against_log_oracle(self):
        out = to_returns(_series([100.0, 110.0]), kind="log")
        # frozen from math.log(1.1)
        assert_allclose(out.values[0], 0.09531017980432493, atol=1e-15)

    def test_first_date_drops_out(self):
        src = _series([1.0, 2.0, 3.0])
        out = to_returns(src)
        assert out.dates == src.dates[1:]
        assert len(out) == len(src) - 1

    @settings(max_examples=50, deadline=None)
    @given(scale=st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
    def test_log_returns_scale_invariant(self, scale):
        src = _series([100.0, 103.0, 99.0, 101.5])
        scaled = RawSeries(src.id, src.dates, src.values * scale)
        assert_allclose(to_returns(scaled).values, to_returns(src).values, atol=1e-12)

    def test_nonpositive_level_under_log(self):
        with pytest.raises(ValueError, match="nonpositive"):
            to_returns(_series([100.0, -1.0]))

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least 2"):
            to_returns(_series([100.0]))


class TestAlignCalendars:
    def test_identical_calendars_untouched(self):
        a = _series([1.0, 2.0, 3.0])
        b = _series([4.0, 5.0, 6.0])
        b = RawSeries("b", a.dates, b.values)
        aligned, actions = align_calendars([a, b])
        assert actions == []
        assert aligned[0].dates == a.dates
        assert len(aligned[0]) == 3

    def test_intersection_drops_missing_date(self):
        a = _series([1.0, 2.0, 3.0])
        b = RawSeries("b", (a.dates[0], a.dates[2]), [4.0, 6.0])
        aligned, actions = align_calendars([a, b])
        assert aligned[0].dates == (a.dates[0], a.dates[2])
        assert [(x.date, x.series, x.action) for x in actions] == [(a.dates[1], "b", "dropped")]

    def test_forward_fill_carries_value(self):
        a = _series([1.0, 2.0, 3.0])
        b = RawSeries("b", (a.dates[0], a.dates[2]), [4.0, 6.0])
        policy = CalendarPolicy("union_with_forward_fill", max_fill_gap=3)
        aligned, actions = align_calendars([a, b], policy)
        assert aligned[1].dates == a.dates
        assert_array_equal(aligned[1].values, [4.0, 4.0, 6.0])
        assert [(x.series, x.action) for x in actions] == [("b", "filled")]

    def test_fill_gap_exceeded(self):
        a = _series([1.0] * 10)
        b = RawSeries("b", (a.dates[0], a.dates[-1]), [1.0, 2.0])
        policy = CalendarPolicy("union_with_forward_fill", max_fill_gap=3)
        with pytest.raises(ValueError, match="fill gap exceeded"):
            align_calendars([a, b], policy)

    def test_empty_intersection(self):
        a = _series([1.0, 2.0], start="2020-01-06")
        b = _series([1.0, 2.0], start="2021-01-06")
        with pytest.raises(ValueError, match="empty intersection"):
            align_calendars([a, b])


class TestAlign:
    def _panel_inputs(self):
        rng = np.random.default_rng(3)
        base = _series(rng.normal(0, 0.01, size=40))
        assets = [RawSeries(f"a{i}", base.dates, rng.normal(0, 0.01, 40)) for i in range(3)]
        factors = [RawSeries("f0", base.dates, rng.normal(0, 0.01, 40))]
        return assets, factors

    def test_roundtrip_panel(self):
        assets, factors = self._panel_inputs()
        panel, actions = align(assets, factors)
        assert panel.n_periods == 40
        assert panel.asset_ids == ("a0", "a1", "a2")
        assert panel.factor_ids == ("f0",)
        assert actions == []

    def test_align_is_idempotent(self):
        assets, factors = self._panel_inputs()
        panel, _ = align(assets, factors)
        assets2 = [
            RawSeries(sid, panel.dates, panel.excess_returns[:, i])
            for i, sid in enumerate(panel.asset_ids)
        ]
        factors2 = [
            RawSeries(fid, panel.dates, panel.factor_matrix[:, j])
            for j, fid in enumerate(panel.factor_ids)
        ]
        panel2, actions = align(assets2, factors2)
        assert actions == []
        assert panel2.dates == panel.dates
        assert_array_equal(panel2.excess_returns, panel.excess_returns)
        assert_array_equal(panel2.factor_matrix, panel.factor_matrix)

    def test_m_must_stay_below_n(self):
        assets, factors = self._panel_inputs()
        too_many = factors * 3
        too_many = [RawSeries(f"f{j}", f.dates, f.values) for j, f in enumerate(too_many)]
        with pytest.raises(ValueError, match="m=3 must stay below asset count n=3"):
            align(assets, too_many)


class TestExcess:
    def test_identical_subtraction_is_zero(self):
        out = excess(np.full((4, 2), 0.001), np.full(4, 0.001))
        assert_array_equal(out, np.zeros((4, 2)))

    def test_zero_risk_free_is_identity(self):
        returns = np.arange(8, dtype=float).reshape(4, 2) / 100
        assert_array_equal(excess(returns, np.zeros(4)), returns)

    def test_arithmetic(self):
        out = excess(np.full((1, 1), 0.002), np.array([0.0005]))
        assert_allclose(out[0, 0], 0.0015, rtol=1e-12)

    def test_idempotent_with_zero_vector(self):
        rng = np.random.default_rng(0)
        returns = rng.normal(0, 0.01, size=(6, 3))
        rf = rng.normal(0, 0.001, size=6)
        once = excess(returns, rf)
        assert_array_equal(excess(once, np.zeros(6)), once)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            excess(np.zeros((4, 2)), np.zeros(5))


class TestAlignedPanel:
    def test_mismatched_lengths_rejected(self):
        dates = _series([0.0] * 5).dates
        with pytest.raises(ValueError, match="same length"):
            AlignedPanel(dates, np.zeros((4, 2)), ("a", "b"), np.zeros((5, 1)), ("f",))

    def test_duplicate_ids_rejected(self):
        dates = _series([0.0] * 4).dates
        with pytest.raises(ValueError, match="unique"):
            AlignedPanel(dates, np.zeros((4, 2)), ("a", "a"), np.zeros((4, 1)), ("f",))

    def test_matrices_are_readonly(self):
        dates = _series([0.0] * 4).dates
        panel = AlignedPanel(dates, np.zeros((4, 2)), ("a", "b"), np.zeros((4, 1)), ("f",))
        with pytest.raises(ValueError):
            panel.excess_returns[0, 0] = 1.0
