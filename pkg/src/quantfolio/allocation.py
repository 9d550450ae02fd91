"""Portfolio weight construction: entropy-regularised genetic search,
closed-form minimum variance, equal weights, and their three-way blend.

All four methods are deterministic given identical seeds and inputs. GA
fitness is evaluated for a whole generation at once with vectorised numpy, so
results cannot depend on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .clustering import ZeroVolatilityError, annualised_sharpe
from .market_data import ANNUALISATION, ReturnPanel
from .shrinkage import ShrunkCovariance

METHODS = ("GA", "MinVar", "Equal", "Ensemble")

_TOURNAMENT = 3  # selection pressure; standard default, elitism of 1 alongside


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Long-only weights on the simplex with method provenance."""

    tickers: tuple[str, ...]
    weights: np.ndarray
    method: str
    train_sharpe: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != len(self.tickers) or w.size < 1:
            raise ValueError("weights length must match tickers")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if np.any(w < 0.0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n_assets(self) -> int:
        return len(self.tickers)

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "tickers": list(self.tickers),
            "weights": [float(x) for x in self.weights],
            "train_sharpe": self.train_sharpe,
        }


@dataclass(frozen=True)
class GaConfig:
    population: int = 300
    generations: int = 200
    mutation_rate: float = 0.15
    gene_low: float = 0.01
    gene_high: float = 1.0
    lambda_ent: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.gene_low < self.gene_high:
            raise ValueError("need 0 < gene_low < gene_high")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        if self.population < 2 or self.generations < 1:
            raise ValueError("population >= 2 and generations >= 1 required")


def normalised_entropy(weights) -> float:
    """H(w) = -sum(w ln w) / ln n, in [0, 1]. 0 ln 0 := 0; H := 0 for n = 1."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size <= 1:
        return 0.0
    p = w[w > 0.0]
    return float(-(p * np.log(p)).sum() / math.log(w.size))


def portfolio_log_returns(weights, panel: ReturnPanel) -> np.ndarray:
    """ln(w . R_t) per day for fixed weights on the panel's gross returns."""
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, float)
    if w.shape != (panel.n_assets,):
        raise ValueError(f"{w.size} weights for {panel.n_assets} assets")
    port = panel.gross_returns @ w
    # long-only weights on strictly positive gross returns cannot go <= 0
    assert np.all(port > 0.0), "non-positive portfolio gross return"
    return np.log(port)


def fitness(weights, train: ReturnPanel, lambda_ent: float = 0.05) -> float:
    """Annualised portfolio Sharpe plus ``lambda_ent`` times normalised entropy."""
    if isinstance(weights, WeightVector) and weights.tickers != train.tickers:
        raise ValueError("weight tickers do not match panel tickers")
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, float)
    r = portfolio_log_returns(w, train)
    sd = r.std(ddof=1)
    if sd == 0.0:
        raise ZeroVolatilityError("zero portfolio volatility: fitness undefined")
    return float(r.mean() / sd * ANNUALISATION + lambda_ent * normalised_entropy(w))


def with_train_sharpe(wv: WeightVector, train: ReturnPanel) -> WeightVector:
    """Copy of ``wv`` with its annualised train Sharpe filled in."""
    s = annualised_sharpe(portfolio_log_returns(wv, train.restrict(wv.tickers)))
    return replace(wv, train_sharpe=s)


def _population_fitness(genes: np.ndarray, gross: np.ndarray, lambda_ent: float) -> np.ndarray:
    wts = genes / genes.sum(axis=1, keepdims=True)
    port = wts @ gross.T  # (pop, T)
    r = np.log(port)
    mu = r.mean(axis=1)
    sd = r.std(axis=1, ddof=1)
    if np.any(sd == 0.0):
        raise ZeroVolatilityError("degenerate training panel: zero portfolio volatility")
    n = genes.shape[1]
    ent = -(wts * np.log(wts)).sum(axis=1) / math.log(n)
    return mu / sd * ANNUALISATION + lambda_ent * ent


def ga_optimise(
    train: ReturnPanel, cfg: GaConfig = GaConfig(), *, return_history: bool = False
):
    """Evolve simplex weights maximising the entropy-regularised Sharpe.

    Genes live in [gene_low, gene_high] and are normalised by their sum before
    evaluation. Tournament selection (size 3), uniform crossover, per-gene
    mutation, elitism of 1. The equal-weight individual is seeded into the
    initial population, so the result never scores below equal weights. The
    best-ever individual is returned, normalised.

    With ``return_history=True`` also returns the best-so-far fitness after
    each generation (length ``generations + 1``, non-decreasing).
    """
    n = train.n_assets
    if n < 2:
        raise ValueError("GA needs at least 2 assets")
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.gene_low, cfg.gene_high
    pop = cfg.population
    gross = train.gross_returns

    genes = rng.uniform(lo, hi, size=(pop, n))
    genes[0] = 0.5 * (lo + hi)  # constant genes normalise to equal weights

    fit = _population_fitness(genes, gross, cfg.lambda_ent)
    best = int(np.argmax(fit))
    best_fit = float(fit[best])
    best_genes = genes[best].copy()
    history = [best_fit]

    for _ in range(cfg.generations):
        elite = genes[best].copy()
        k = pop - 1
        contenders = rng.integers(0, pop, size=(k, 2, _TOURNAMENT))
        winners = np.take_along_axis(
            contenders, np.argmax(fit[contenders], axis=2)[..., None], axis=2
        )[..., 0]
        pa = genes[winners[:, 0]]
        pb = genes[winners[:, 1]]
        cross = rng.random((k, n)) < 0.5
        children = np.where(cross, pa, pb)
        mutate = rng.random((k, n)) < cfg.mutation_rate
        children = np.where(mutate, rng.uniform(lo, hi, size=(k, n)), children)

        genes = np.vstack([elite[None, :], children])
        fit = _population_fitness(genes, gross, cfg.lambda_ent)
        best = int(np.argmax(fit))
        if fit[best] > best_fit:
            best_fit = float(fit[best])
            best_genes = genes[best].copy()
        history.append(best_fit)

    w = best_genes / best_genes.sum()
    result = WeightVector(
        train.tickers,
        w,
        "GA",
        train_sharpe=annualised_sharpe(portfolio_log_returns(w, train)),
    )
    if return_history:
        return result, np.asarray(history)
    return result


def minvar(cov, tickers=None) -> WeightVector:
    """Closed-form minimum-variance weights with long-only projection.

    ``w = pinv(sigma) 1 / (1' pinv(sigma) 1)``; negative entries are projected
    to zero and the rest renormalised to sum to 1.
    """
    if isinstance(cov, ShrunkCovariance):
        sigma = cov.sigma
        if tickers is None:
            tickers = cov.tickers
    else:
        sigma = np.atleast_2d(np.asarray(cov, dtype=float))
    n = sigma.shape[0]
    if sigma.shape != (n, n):
        raise ValueError("covariance must be square")
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-10):
        raise ValueError("covariance must be symmetric")
    if tickers is None:
        tickers = tuple(f"A{i:03d}" for i in range(n))

    ones = np.ones(n)
    raw = np.linalg.pinv(sigma, hermitian=True) @ ones
    denom = raw.sum()
    if denom == 0.0:
        raise ValueError("cannot normalise minimum-variance weights (1' pinv(sigma) 1 = 0)")
    w = raw / denom
    w = np.where(w > 0.0, w, 0.0)
    total = w.sum()
    if total <= 0.0:
        # unreachable for real input (w sums to 1 before clipping) but guarded
        raise ValueError("all minimum-variance weights clipped to zero")
    return WeightVector(tuple(tickers), w / total, "MinVar")


def equal_weights(tickers) -> WeightVector:
    tickers = tuple(tickers)
    w = np.full(len(tickers), 1.0 / len(tickers))
    return WeightVector(tickers, w / w.sum(), "Equal")


def ensemble(ga: WeightVector, mv: WeightVector, eq: WeightVector) -> WeightVector:
    """Arithmetic mean of the three weight vectors."""
    if not (ga.tickers == mv.tickers == eq.tickers):
        raise ValueError("ensemble inputs must share the same tickers in the same order")
    w = (ga.weights + mv.weights + eq.weights) / 3.0
    return WeightVector(ga.tickers, w, "Ensemble")
