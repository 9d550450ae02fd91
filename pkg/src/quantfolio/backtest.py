"""Net-of-cost backtest engine and the strategy comparison grid.

Daily sequencing on a rebalance day follows the accounting identity
``V_t = V_{t-1} * (w_t . R_t)`` with drifted weights, then the cost deduction
``V_t *= 1 - c * ||w_drift - w_target||_1``, then the reset to target. Day 0's
initial allocation is free and uncounted; periodic(N) therefore fires on day
indices t >= 1 with t % N == 0.

Undefined metrics (zero volatility, zero drawdown) are reported as ``None``,
never as silent infinities. Equity-curve returns are log returns.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .allocation import WeightVector
from .market_data import ANNUALISATION, ReturnPanel


@dataclass(frozen=True)
class BuyAndHold:
    def describe(self) -> str:
        return "Buy&Hold"


@dataclass(frozen=True)
class Periodic:
    every: int

    def __post_init__(self) -> None:
        if self.every < 1:
            raise ValueError("periodic interval must be >= 1 day")

    def describe(self) -> str:
        return f"Rebal/{self.every}d"


@dataclass(frozen=True)
class Threshold:
    fraction: float

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("threshold fraction must be in (0, 1)")

    def describe(self) -> str:
        return f"Threshold ({self.fraction:.0%})"


@dataclass(frozen=True, eq=False)
class Explicit:
    """Fires exactly on the days whose global schedule bit is 1."""

    bits: np.ndarray
    name: str = "QAOA"

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits).astype(np.uint8)
        if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
            raise ValueError("schedule bits must be a 0/1 vector")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def describe(self) -> str:
        return self.name


Scheduler = Union[BuyAndHold, Periodic, Threshold, Explicit]


@dataclass(frozen=True, eq=False)
class Strategy:
    weights: WeightVector
    scheduler: Scheduler
    label: str | None = None

    def describe(self) -> str:
        prefix = self.weights.method
        sched = self.scheduler.describe()
        if isinstance(self.scheduler, BuyAndHold):
            return f"{prefix} {sched}"
        if isinstance(self.scheduler, Explicit):
            return f"{prefix} + {sched}"
        return f"{prefix} {sched}"


@dataclass(frozen=True)
class Metrics:
    total_return: float
    sharpe: float | None
    sortino: float | None
    mdd: float
    calmar: float | None


@dataclass(frozen=True, eq=False)
class BacktestReport:
    label: str
    equity_curve: np.ndarray  # length T+1, starts at 1.0
    total_return: float
    sharpe: float | None
    sortino: float | None
    mdd: float
    calmar: float | None
    rebalance_count: int
    total_cost_bp: float
    rebalance_days: tuple[int, ...]

    def __post_init__(self) -> None:
        curve = np.asarray(self.equity_curve, dtype=float)
        curve.flags.writeable = False
        object.__setattr__(self, "equity_curve", curve)


def metrics(equity_curve) -> Metrics:
    """Performance summary of an equity curve.

    Sharpe/Sortino use daily log returns of the curve with sqrt(252)
    annualisation; Sortino's downside deviation is sqrt(mean(min(r, 0)^2)).
    MDD is min(V_t / running_peak - 1); Calmar is total return over |MDD|.
    Degenerate cases (zero vol, no drawdown) yield None.
    """
    curve = np.asarray(equity_curve, dtype=float).ravel()
    if curve.size < 2:
        raise ValueError("equity curve needs at least 2 points")
    if np.any(curve <= 0.0):
        raise ValueError("equity curve must be strictly positive")

    r = np.diff(np.log(curve))
    mu = r.mean()
    sd = r.std(ddof=1)
    sharpe = float(mu / sd * ANNUALISATION) if sd > 0.0 else None
    downside = float(np.sqrt(np.mean(np.minimum(r, 0.0) ** 2)))
    sortino = float(mu / downside * ANNUALISATION) if downside > 0.0 else None

    peak = np.maximum.accumulate(curve)
    mdd = float(np.min(curve / peak - 1.0))
    total_return = float(curve[-1] / curve[0] - 1.0)
    calmar = float(total_return / abs(mdd)) if mdd < 0.0 else None
    return Metrics(total_return, sharpe, sortino, mdd, calmar)


def _fires(scheduler: Scheduler, t: int, drifted: np.ndarray, target: np.ndarray) -> bool:
    if isinstance(scheduler, BuyAndHold):
        return False
    if isinstance(scheduler, Periodic):
        return t >= 1 and t % scheduler.every == 0
    if isinstance(scheduler, Threshold):
        return float(np.max(np.abs(drifted - target))) > scheduler.fraction
    if isinstance(scheduler, Explicit):
        return bool(scheduler.bits[t])
    raise TypeError(f"unknown scheduler {scheduler!r}")


def run(test: ReturnPanel, strat: Strategy, cost_c: float) -> BacktestReport:
    """Simulate one strategy on the test panel, net of proportional costs.

    Holdings drift with returns between rebalances. On a scheduled day the
    day's return is applied with the drifted weights first, then the L1
    rebalancing cost is deducted and weights reset to target.
    """
    if strat.weights.tickers != test.tickers:
        raise ValueError("strategy weights do not match test panel tickers")
    if isinstance(strat.scheduler, Explicit) and strat.scheduler.bits.size != test.n_days:
        raise ValueError(
            f"explicit schedule of {strat.scheduler.bits.size} bits for "
            f"{test.n_days} test days"
        )
    gross = test.gross_returns
    target = strat.weights.weights
    t_total = test.n_days

    value = 1.0
    w = target.copy()
    curve = np.empty(t_total + 1)
    curve[0] = 1.0
    total_cost = 0.0
    rebalance_days: list[int] = []

    for t in range(t_total):
        day = gross[t]
        port = float(w @ day)
        value *= port
        drifted = w * day / port
        if _fires(strat.scheduler, t, drifted, target):
            cost = cost_c * float(np.abs(drifted - target).sum())
            assert cost < 1.0, "rebalancing cost cannot wipe out the portfolio"
            value *= 1.0 - cost
            total_cost += cost
            rebalance_days.append(t)
            w = target.copy()
        else:
            w = drifted
        curve[t + 1] = value

    m = metrics(curve)
    return BacktestReport(
        label=strat.label or strat.describe(),
        equity_curve=curve,
        total_return=m.total_return,
        sharpe=m.sharpe,
        sortino=m.sortino,
        mdd=m.mdd,
        calmar=m.calmar,
        rebalance_count=len(rebalance_days),
        total_cost_bp=1e4 * total_cost,
        rebalance_days=tuple(rebalance_days),
    )


def run_grid(
    test: ReturnPanel,
    weight_sets: Mapping[str, WeightVector],
    qaoa_schedules: Mapping[str, np.ndarray],
    cost_c: float,
    periodic: tuple[int, ...] = (1, 5, 10, 21),
    threshold: float = 0.05,
) -> list[BacktestReport]:
    """The full strategy cross: buy-and-hold for every weight method, periodic
    and threshold scheduling for the GA weights, and the externally supplied
    (QAOA walk-forward) schedule for every weight method.

    ``weight_sets`` and ``qaoa_schedules`` are keyed by method name
    (GA/MinVar/Equal/Ensemble). Reports come back labelled, in grid order.
    """
    order = ("GA", "MinVar", "Equal", "Ensemble")
    missing = [m for m in order if m not in weight_sets]
    if missing:
        raise ValueError(f"weight_sets missing methods: {', '.join(missing)}")
    missing = [m for m in order if m not in qaoa_schedules]
    if missing:
        raise ValueError(f"qaoa_schedules missing methods: {', '.join(missing)}")

    strategies: list[Strategy] = []
    for method in order:
        strategies.append(Strategy(weight_sets[method], BuyAndHold()))
    for every in periodic:
        strategies.append(Strategy(weight_sets["GA"], Periodic(every)))
    strategies.append(Strategy(weight_sets["GA"], Threshold(threshold)))
    for method in order:
        strategies.append(Strategy(weight_sets[method], Explicit(np.asarray(qaoa_schedules[method]))))

    return [run(test, strat, cost_c) for strat in strategies]
