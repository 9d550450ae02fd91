import math
from datetime import date

import numpy as np
import pytest

from quantfolio import (
    PricePanel,
    ReturnPanel,
    SplitSpec,
    load_csv,
    split,
    synth_panel,
    to_returns,
    write_csv,
)


def _write(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_full_panel_passthrough(self, tmp_path):
        path = _write(tmp_path, (
            "date,AAA,BBB\n"
            "2024-01-02,100.0,50.0\n"
            "2024-01-03,101.0,49.5\n"
            "2024-01-04,102.5,50.5\n"
        ))
        panel = load_csv(path)
        assert panel.n_days == 3
        assert panel.n_assets == 2
        assert panel.tickers == ("AAA", "BBB")
        assert panel.dropped == ()
        assert panel.prices[0, 0] == 100.0
        assert panel.dates[0] == date(2024, 1, 2)

    def test_blank_cell_drops_ticker_and_reports_it(self, tmp_path):
        path = _write(tmp_path, (
            "date,AAA,BBB\n"
            "2024-01-02,100.0,50.0\n"
            "2024-01-03,101.0,\n"
            "2024-01-04,102.5,50.5\n"
        ))
        panel = load_csv(path)
        assert panel.tickers == ("AAA",)
        assert panel.dropped == ("BBB",)

    def test_zero_price_drops_ticker(self, tmp_path):
        path = _write(tmp_path, (
            "date,AAA,BBB\n"
            "2024-01-02,100.0,0.0\n"
            "2024-01-03,101.0,49.5\n"
        ))
        panel = load_csv(path)
        assert panel.tickers == ("AAA",)
        assert panel.dropped == ("BBB",)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv")

    def test_too_few_rows(self, tmp_path):
        path = _write(tmp_path, "date,AAA\n2024-01-02,100.0\n")
        with pytest.raises(ValueError, match="at least 2"):
            load_csv(path)

    def test_zero_surviving_tickers(self, tmp_path):
        path = _write(tmp_path, (
            "date,AAA\n"
            "2024-01-02,\n"
            "2024-01-03,101.0\n"
        ))
        with pytest.raises(ValueError, match="no ticker"):
            load_csv(path)

    def test_roundtrip_via_write_csv(self, tmp_path):
        panel = synth_panel(seed=3, T=40, M=4)
        path = tmp_path / "out.csv"
        write_csv(panel, path)
        back = load_csv(path)
        assert back.tickers == panel.tickers
        assert back.dates == panel.dates
        np.testing.assert_array_equal(back.prices, panel.prices)


class TestPanelInvariants:
    def test_non_increasing_dates_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            PricePanel(
                (date(2024, 1, 3), date(2024, 1, 2)),
                ("AAA",),
                [[100.0], [101.0]],
            )

    def test_non_positive_price_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            PricePanel(
                (date(2024, 1, 2), date(2024, 1, 3)),
                ("AAA",),
                [[100.0], [-1.0]],
            )

    def test_arrays_are_read_only(self):
        panel = synth_panel(seed=0, T=10, M=2)
        with pytest.raises(ValueError):
            panel.prices[0, 0] = 1.0

    def test_log_gross_consistency_enforced(self):
        dates = (date(2024, 1, 2), date(2024, 1, 3))
        with pytest.raises(ValueError, match="ln"):
            ReturnPanel(dates, ("AAA",), [[0.5], [0.5]], [[1.01], [1.01]])


class TestToReturns:
    def test_hand_values(self):
        panel = PricePanel(
            (date(2024, 1, 2), date(2024, 1, 3)), ("AAA",), [[100.0], [101.0]]
        )
        r = to_returns(panel)
        assert r.gross_returns[0, 0] == pytest.approx(1.01, abs=1e-15)
        assert r.log_returns[0, 0] == pytest.approx(math.log(1.01), abs=1e-15)

    def test_constant_prices(self):
        panel = PricePanel(
            (date(2024, 1, 2), date(2024, 1, 3), date(2024, 1, 4)),
            ("AAA",),
            [[100.0], [100.0], [100.0]],
        )
        r = to_returns(panel)
        np.testing.assert_array_equal(r.gross_returns, np.ones((2, 1)))
        np.testing.assert_array_equal(r.log_returns, np.zeros((2, 1)))

    def test_halving(self):
        panel = PricePanel(
            (date(2024, 1, 2), date(2024, 1, 3)), ("AAA",), [[100.0], [50.0]]
        )
        r = to_returns(panel)
        assert r.gross_returns[0, 0] == pytest.approx(0.5, abs=1e-15)
        assert r.log_returns[0, 0] == pytest.approx(math.log(0.5), abs=1e-15)

    def test_roundtrip_rebuilds_prices(self):
        panel = synth_panel(seed=5, T=200, M=7)
        r = to_returns(panel)
        rebuilt = panel.prices[0] * np.vstack(
            [np.ones(panel.n_assets), np.cumprod(r.gross_returns, axis=0)]
        )
        np.testing.assert_allclose(rebuilt, panel.prices, rtol=1e-10)


class TestSplit:
    def _panel(self, T=11):
        return to_returns(synth_panel(seed=9, T=T, M=2))

    def test_row_split(self):
        r = self._panel()  # 10 return rows
        spec = SplitSpec(r.dates[6], r.dates[-1])
        train, test = split(r, spec)
        assert train.n_days == 7
        assert test.n_days == 3
        assert train.dates + test.dates == r.dates

    def test_row_count_preserved(self):
        r = self._panel(T=30)
        spec = SplitSpec(r.dates[13], r.dates[-1])
        train, test = split(r, spec)
        assert train.n_days + test.n_days == r.n_days

    def test_empty_test(self):
        r = self._panel()
        with pytest.raises(ValueError, match="empty test"):
            split(r, SplitSpec(r.dates[-1], r.dates[-1].replace(year=2099)))

    def test_empty_train(self):
        r = self._panel()
        early = r.dates[0].replace(year=2000)
        with pytest.raises(ValueError, match="empty train"):
            split(r, SplitSpec(early, early.replace(year=2001)))

    def test_bad_spec(self):
        with pytest.raises(ValueError, match="precede"):
            SplitSpec(date(2024, 1, 5), date(2024, 1, 5))


class TestSynthPanel:
    def test_deterministic(self):
        a = synth_panel(seed=42, T=100, M=3)
        b = synth_panel(seed=42, T=100, M=3)
        np.testing.assert_array_equal(a.prices, b.prices)
        assert a.dates == b.dates

    def test_uncorrelated_sample_correlation(self):
        panel = synth_panel(seed=1, T=50_000, M=2)
        r = to_returns(panel)
        rho = np.corrcoef(r.log_returns.T)[0, 1]
        assert abs(rho) < 0.02

    def test_target_correlation_recovered(self):
        corr = np.array([[1.0, 0.7], [0.7, 1.0]])
        panel = synth_panel(seed=2, T=50_000, M=2, target_corr=corr)
        r = to_returns(panel)
        rho = np.corrcoef(r.log_returns.T)[0, 1]
        assert abs(rho - 0.7) < 0.02

    def test_non_pd_correlation_rejected(self):
        corr = np.array([[1.0, 1.1], [1.1, 1.0]])  # eigenvalue -0.1
        with pytest.raises(ValueError, match="positive-definite"):
            synth_panel(seed=0, T=10, M=2, target_corr=corr)

    def test_asymmetric_correlation_rejected(self):
        corr = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            synth_panel(seed=0, T=10, M=2, target_corr=corr)

    def test_weekday_dates(self):
        panel = synth_panel(seed=0, T=30, M=1)
        assert all(d.weekday() < 5 for d in panel.dates)
