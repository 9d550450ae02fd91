"""Shrinkage covariance estimation and the correlation / angular-distance
matrices derived from it.

The estimator blends the sample covariance with a scaled identity target,
``sigma = (1 - alpha) * sample + alpha * mu * I``, where ``mu`` is the average
sample eigenvalue (trace/M) and ``alpha`` is the analytic intensity of the
well-conditioned estimator: ``alpha = min(b2, d2) / d2`` with ``d2`` the
dispersion of the sample covariance around ``mu * I`` and ``b2`` the average
squared error of single-observation covariance estimates. All functions here
are pure and thread-safe.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import ReturnPanel, _frozen_array


@dataclass(frozen=True, eq=False)
class ShrunkCovariance:
    """Shrunk covariance with its intensity and derived matrices.

    ``corr`` is exactly the correlation of ``sigma`` (diagonal 1, entries
    clamped to [-1, 1]); ``dist`` is the angular distance
    ``sqrt((1 - corr) / 2)`` (diagonal 0, entries in [0, 1]).
    """

    tickers: tuple[str, ...]
    sigma: np.ndarray
    alpha: float
    mu_target: float
    corr: np.ndarray
    dist: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        corr = np.atleast_2d(np.asarray(self.corr, dtype=float))
        dist = np.atleast_2d(np.asarray(self.dist, dtype=float))
        m = sigma.shape[0]
        if sigma.shape != (m, m) or corr.shape != (m, m) or dist.shape != (m, m):
            raise ValueError("sigma/corr/dist must be square and same size")
        if len(self.tickers) != m:
            raise ValueError(f"{len(self.tickers)} tickers for {m}x{m} matrices")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-10):
            raise ValueError("sigma must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("corr diagonal must be 1")
        if np.any(np.abs(corr) > 1.0):
            raise ValueError("corr entries must lie in [-1, 1]")
        if not np.allclose(np.diag(dist), 0.0, rtol=0.0, atol=1e-12):
            raise ValueError("dist diagonal must be 0")
        if np.any(dist < 0.0) or np.any(dist > 1.0):
            raise ValueError("dist entries must lie in [0, 1]")
        if not np.allclose(dist, dist.T, rtol=0.0, atol=1e-12):
            raise ValueError("dist must be symmetric")
        object.__setattr__(self, "sigma", _frozen_array(sigma))
        object.__setattr__(self, "corr", _frozen_array(corr))
        object.__setattr__(self, "dist", _frozen_array(dist))

    @property
    def n_assets(self) -> int:
        return len(self.tickers)

    @classmethod
    def from_sigma(cls, sigma, tickers=None, alpha: float = 0.0) -> "ShrunkCovariance":
        """Wrap a raw covariance matrix, deriving corr/dist from it."""
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        m = sigma.shape[0]
        if tickers is None:
            tickers = tuple(f"A{i:03d}" for i in range(m))
        corr, dist = _corr_and_dist(sigma)
        mu = float(np.trace(sigma) / m)
        return cls(tuple(tickers), sigma, alpha, mu, corr, dist)

    def restrict(self, tickers) -> "ShrunkCovariance":
        """Sub-estimate for a ticker subset, in the order given."""
        index = {t: i for i, t in enumerate(self.tickers)}
        missing = [t for t in tickers if t not in index]
        if missing:
            raise ValueError(f"unknown tickers: {', '.join(missing)}")
        idx = np.array([index[t] for t in tickers], dtype=int)
        return ShrunkCovariance(
            tuple(tickers),
            self.sigma[np.ix_(idx, idx)],
            self.alpha,
            self.mu_target,
            self.corr[np.ix_(idx, idx)],
            self.dist[np.ix_(idx, idx)],
        )


def _corr_and_dist(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    std = np.sqrt(np.diag(sigma))
    if np.any(std <= 0.0):
        raise ValueError("sigma has a non-positive diagonal entry")
    corr = sigma / np.outer(std, std)
    corr = np.clip(corr, -1.0, 1.0)  # absorb 1-ulp overshoot from the division
    np.fill_diagonal(corr, 1.0)
    corr = (corr + corr.T) / 2.0
    dist = np.sqrt((1.0 - corr) / 2.0)
    np.fill_diagonal(dist, 0.0)
    return corr, dist


def ledoit_wolf(returns: ReturnPanel) -> ShrunkCovariance:
    """Analytic shrinkage estimate of the covariance of a panel's log returns.

    The sample covariance uses the T-1 denominator; the intensity is computed
    from the biased (1/T) moments of the centred data, as in the original
    recipe. Constant (zero-variance) assets are rejected by name.
    """
    x = returns.log_returns
    t, m = x.shape
    if t < 2:
        raise ValueError("need at least 2 return rows")

    variances = x.var(axis=0, ddof=1)
    flat = [returns.tickers[i] for i in np.flatnonzero(variances == 0.0)]
    if flat:
        raise ValueError(f"constant asset(s) with zero variance: {', '.join(flat)}")

    xc = x - x.mean(axis=0)
    sample = (xc.T @ xc) / (t - 1)

    # intensity from biased moments: alpha = min(b2, d2) / d2
    biased = (xc.T @ xc) / t
    mu_biased = float(np.trace(biased) / m)
    d2 = float(((biased - mu_biased * np.eye(m)) ** 2).sum() / m)
    sq_norms = (xc ** 2).sum(axis=1)
    b2_bar = float((np.sum(sq_norms ** 2) - t * (biased ** 2).sum()) / (t ** 2 * m))
    if d2 <= 0.0:
        alpha = 0.0  # sample already equals the target (e.g. a single asset)
    else:
        alpha = min(b2_bar, d2) / d2

    mu_target = float(np.trace(sample) / m)
    sigma = (1.0 - alpha) * sample + alpha * mu_target * np.eye(m)
    sigma = (sigma + sigma.T) / 2.0
    corr, dist = _corr_and_dist(sigma)
    return ShrunkCovariance(returns.tickers, sigma, float(alpha), mu_target, corr, dist)


def angular_distance(rho):
    """Map correlation to the metric distance ``sqrt((1 - rho) / 2)``.

    Accepts scalars or arrays. Overshoot beyond |rho| = 1 up to 1e-12 is
    clamped; anything larger is rejected.
    """
    r = np.asarray(rho, dtype=float)
    if np.any(np.abs(r) > 1.0 + 1e-12):
        raise ValueError("correlation outside [-1, 1]")
    r = np.clip(r, -1.0, 1.0)
    d = np.sqrt((1.0 - r) / 2.0)
    return float(d) if np.ndim(rho) == 0 else d
