"""Price and return panels: CSV ingestion, return math, train/test splits,
and a seeded synthetic panel generator.

All panel types are immutable after construction (their arrays are marked
read-only), so they can be shared freely across threads. Every operation in
this module is a pure function of its arguments.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

log = logging.getLogger(__name__)

TRADING_DAYS_PER_YEAR = 252
ANNUALISATION = math.sqrt(TRADING_DAYS_PER_YEAR)


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Daily adjusted close prices for a fixed asset universe.

    ``prices[t, i]`` is the price of ``tickers[i]`` on ``dates[t]``. No gaps:
    ingestion drops incomplete tickers before a panel is built. ``dropped``
    records tickers removed by :func:`load_csv`.
    """

    dates: tuple[date, ...]
    tickers: tuple[str, ...]
    prices: np.ndarray
    dropped: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        object.__setattr__(self, "dropped", tuple(self.dropped))
        prices = np.atleast_2d(np.asarray(self.prices, dtype=float))
        t, m = prices.shape
        if t < 2:
            raise ValueError("price panel needs at least 2 rows")
        if m < 1:
            raise ValueError("price panel needs at least 1 ticker")
        if len(self.dates) != t:
            raise ValueError(f"{len(self.dates)} dates for {t} price rows")
        if len(self.tickers) != m:
            raise ValueError(f"{len(self.tickers)} tickers for {m} price columns")
        if len(set(self.tickers)) != m:
            raise ValueError("duplicate tickers in panel")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise ValueError("prices must be finite and strictly positive")
        object.__setattr__(self, "prices", _frozen_array(prices))

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.tickers)


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Daily gross and log returns derived from a price panel.

    Row ``t`` holds the return accruing on ``dates[t]`` (one row fewer than
    the source price panel). ``log_returns == ln(gross_returns)`` elementwise.
    """

    dates: tuple[date, ...]
    tickers: tuple[str, ...]
    log_returns: np.ndarray
    gross_returns: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        logr = np.atleast_2d(np.asarray(self.log_returns, dtype=float))
        gross = np.atleast_2d(np.asarray(self.gross_returns, dtype=float))
        if logr.shape != gross.shape:
            raise ValueError("log and gross return shapes differ")
        t, m = gross.shape
        if len(self.dates) != t or len(self.tickers) != m:
            raise ValueError("dates/tickers do not match return matrix shape")
        if len(set(self.tickers)) != m:
            raise ValueError("duplicate tickers in panel")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if not np.all(np.isfinite(gross)) or np.any(gross <= 0.0):
            raise ValueError("gross returns must be finite and strictly positive")
        if not np.allclose(logr, np.log(gross), rtol=0.0, atol=1e-9):
            raise ValueError("log_returns must equal ln(gross_returns)")
        object.__setattr__(self, "log_returns", _frozen_array(logr))
        object.__setattr__(self, "gross_returns", _frozen_array(gross))

    @classmethod
    def from_gross(cls, dates, tickers, gross_returns) -> "ReturnPanel":
        gross = np.asarray(gross_returns, dtype=float)
        return cls(tuple(dates), tuple(tickers), np.log(gross), gross)

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.tickers)

    def slice_rows(self, start: int, stop: int) -> "ReturnPanel":
        """Contiguous row slice ``[start, stop)`` as a new panel."""
        if not 0 <= start < stop <= self.n_days:
            raise ValueError(f"bad row slice [{start}, {stop}) for {self.n_days} rows")
        return ReturnPanel(
            self.dates[start:stop],
            self.tickers,
            self.log_returns[start:stop],
            self.gross_returns[start:stop],
        )

    def restrict(self, tickers) -> "ReturnPanel":
        """Column subset, in the order given."""
        index = {t: i for i, t in enumerate(self.tickers)}
        missing = [t for t in tickers if t not in index]
        if missing:
            raise ValueError(f"unknown tickers: {', '.join(missing)}")
        cols = [index[t] for t in tickers]
        return ReturnPanel(
            self.dates,
            tuple(tickers),
            self.log_returns[:, cols],
            self.gross_returns[:, cols],
        )


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/test boundary dates (both inclusive ends)."""

    train_end: date
    test_end: date

    def __post_init__(self) -> None:
        if self.train_end >= self.test_end:
            raise ValueError("train_end must precede test_end")


def load_csv(path) -> PricePanel:
    """Read a wide price CSV: first column ``date`` (ISO-8601), one column per
    ticker, numeric cells or blank.

    Tickers with any blank, unparseable, or non-positive cell are dropped and
    reported (warning log plus the panel's ``dropped`` field).
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if header[0].lower() != "date":
        raise ValueError(f"{path}: first column must be 'date'")
    tickers = header[1:]
    if not tickers:
        raise ValueError(f"{path}: no ticker columns")
    body = rows[1:]
    if len(body) < 2:
        raise ValueError(f"{path}: need at least 2 data rows")

    dates: list[date] = []
    raw = np.full((len(body), len(tickers)), np.nan)
    for t, row in enumerate(body):
        if len(row) != len(header):
            raise ValueError(
                f"{path}: row {t + 2} has {len(row)} cells, expected {len(header)}"
            )
        dates.append(date.fromisoformat(row[0].strip()))
        for i, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                continue
            try:
                raw[t, i] = float(cell)
            except ValueError:
                pass  # unparseable cell == gap: the ticker is dropped below

    complete = np.all(np.isfinite(raw) & (raw > 0.0), axis=0)
    dropped = tuple(tk for tk, ok in zip(tickers, complete) if not ok)
    if dropped:
        log.warning(
            "%s: dropped %d ticker(s) with missing or non-positive cells: %s",
            path, len(dropped), ", ".join(dropped),
        )
    if not np.any(complete):
        raise ValueError(f"{path}: no ticker has a complete positive price history")
    keep = tuple(tk for tk, ok in zip(tickers, complete) if ok)
    return PricePanel(tuple(dates), keep, raw[:, complete], dropped=dropped)


def write_csv(panel: PricePanel, path) -> None:
    """Write a panel in the wide CSV format accepted by :func:`load_csv`."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *panel.tickers])
        for t, d in enumerate(panel.dates):
            writer.writerow([d.isoformat(), *[repr(float(p)) for p in panel.prices[t]]])


def to_returns(panel: PricePanel) -> ReturnPanel:
    """Daily gross ratios ``P[t+1]/P[t]`` and their logs."""
    gross = panel.prices[1:] / panel.prices[:-1]
    return ReturnPanel(panel.dates[1:], panel.tickers, np.log(gross), gross)


def split(panel: ReturnPanel, spec: SplitSpec) -> tuple[ReturnPanel, ReturnPanel]:
    """Chronological split: train rows have date <= train_end, test rows fall
    in (train_end, test_end]."""
    train_idx = [i for i, d in enumerate(panel.dates) if d <= spec.train_end]
    test_idx = [
        i for i, d in enumerate(panel.dates) if spec.train_end < d <= spec.test_end
    ]
    if not train_idx:
        raise ValueError(f"empty train: no rows on or before {spec.train_end}")
    if not test_idx:
        raise ValueError(
            f"empty test: no rows in ({spec.train_end}, {spec.test_end}]"
        )
    def take(idx):
        return ReturnPanel(
            tuple(panel.dates[i] for i in idx),
            panel.tickers,
            panel.log_returns[idx],
            panel.gross_returns[idx],
        )
    return take(train_idx), take(test_idx)


def _business_days(start: date, count: int) -> tuple[date, ...]:
    out = []
    d = start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return tuple(out)


def synth_panel(
    seed: int,
    T: int,
    M: int,
    target_corr=None,
    ann_vol=0.20,
    ann_drift=0.05,
    *,
    start: date = date(2015, 1, 1),
    start_price: float = 100.0,
    tickers=None,
) -> PricePanel:
    """Seeded geometric-Brownian-style price panel with a target return
    correlation.

    Daily log returns are correlated Gaussians (Cholesky factor of
    ``target_corr``) scaled to the requested annualised vol and drift under a
    252-day year; the sample correlation converges to the target as ``T``
    grows. Pure function of its arguments: the same call is bit-identical.

    ``target_corr`` defaults to the identity; ``ann_vol``/``ann_drift``
    broadcast to per-asset vectors.
    """
    if T < 2:
        raise ValueError("T must be at least 2")
    if M < 1:
        raise ValueError("M must be at least 1")
    corr = np.eye(M) if target_corr is None else np.asarray(target_corr, dtype=float)
    if corr.shape != (M, M):
        raise ValueError(f"target_corr must be {M}x{M}")
    if not np.allclose(corr, corr.T, rtol=0.0, atol=1e-12):
        raise ValueError("target_corr must be symmetric")
    if not np.allclose(np.diag(corr), 1.0, rtol=0.0, atol=1e-12):
        raise ValueError("target_corr must have a unit diagonal")
    try:
        chol = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        raise ValueError("target_corr must be positive-definite") from None

    vol = np.broadcast_to(np.asarray(ann_vol, dtype=float), (M,)) / ANNUALISATION
    drift = np.broadcast_to(np.asarray(ann_drift, dtype=float), (M,)) / TRADING_DAYS_PER_YEAR
    if np.any(vol < 0):
        raise ValueError("ann_vol must be non-negative")

    rng = np.random.default_rng(seed)
    shocks = rng.standard_normal((T - 1, M))
    log_r = drift + (shocks @ chol.T) * vol
    log_price = np.vstack([np.zeros(M), np.cumsum(log_r, axis=0)])
    prices = start_price * np.exp(log_price)

    if tickers is None:
        tickers = tuple(f"A{i:03d}" for i in range(M))
    return PricePanel(_business_days(start, T), tuple(tickers), prices)
