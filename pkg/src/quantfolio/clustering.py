"""Hierarchical asset clustering on angular distances and Sharpe-maximising
representative selection.

Ward linkage is run directly on the precomputed distance matrix via the
Lance-Williams recurrence (naive O(M^3) agglomeration, fine for M up to a few
hundred). All tie-breaking is deterministic: merges prefer the lexicographically
smallest slot pair, cluster ids are ordered by smallest member index, and
representative ties go to the lexicographically first ticker.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import ANNUALISATION, ReturnPanel


class ZeroVolatilityError(ValueError):
    """A return series has zero standard deviation, so its Sharpe ratio is
    undefined."""


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Per-asset cluster labels in 0..n_clusters-1, every id non-empty."""

    labels: np.ndarray
    n_clusters: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1:
            raise ValueError("labels must be a vector")
        present = set(labels.tolist())
        if present != set(range(self.n_clusters)):
            raise ValueError(
                f"labels must cover exactly 0..{self.n_clusters - 1}, got {sorted(present)}"
            )
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)


@dataclass(frozen=True)
class SelectionResult:
    """One representative ticker per cluster with its annualised train Sharpe,
    ordered by cluster id."""

    tickers: tuple[str, ...]
    per_cluster_sharpe: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.tickers) != len(self.per_cluster_sharpe):
            raise ValueError("tickers and per_cluster_sharpe lengths differ")
        if len(set(self.tickers)) != len(self.tickers):
            raise ValueError("representatives must be distinct")


def annualised_sharpe(series) -> float:
    """Mean over sample standard deviation (T-1 denominator) times sqrt(252)."""
    r = np.asarray(series, dtype=float).ravel()
    if r.size < 2:
        raise ValueError("need at least 2 observations")
    sd = r.std(ddof=1)
    if sd == 0.0:
        raise ZeroVolatilityError("zero volatility: Sharpe ratio undefined")
    return float(r.mean() / sd * ANNUALISATION)


def ward_cluster(dist, n: int) -> ClusterAssignment:
    """Cut the Ward-linkage merge tree of a distance matrix at ``n`` clusters.

    Implements the Lance-Williams update on squared distances:
    d2(ij,k) = ((si+sk) d2(i,k) + (sj+sk) d2(j,k) - sk d2(i,j)) / (si+sj+sk).
    Deterministic for a given input; relabelling-invariant to input order.
    """
    d = np.atleast_2d(np.asarray(dist, dtype=float))
    m = d.shape[0]
    if d.shape != (m, m):
        raise ValueError("distance matrix must be square")
    if not np.allclose(d, d.T, rtol=0.0, atol=1e-10):
        raise ValueError("distance matrix must be symmetric")
    if not np.allclose(np.diag(d), 0.0, rtol=0.0, atol=1e-12):
        raise ValueError("distance matrix diagonal must be 0")
    if np.any(d < 0.0) or not np.all(np.isfinite(d)):
        raise ValueError("distances must be finite and non-negative")
    if not 1 <= n <= m:
        raise ValueError(f"n must be in 1..{m}, got {n}")

    d2 = d.astype(float) ** 2
    np.fill_diagonal(d2, np.inf)
    size = np.ones(m)
    alive = np.ones(m, dtype=bool)
    members: list[list[int]] = [[i] for i in range(m)]

    for _ in range(m - n):
        # active upper-triangle pair with minimal distance; argmin's first hit
        # is the lexicographically smallest (i, j)
        masked = np.where(alive[:, None] & alive[None, :], d2, np.inf)
        masked[np.tril_indices(m)] = np.inf
        i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)

        si, sj, sk = size[i], size[j], size
        dij = d2[i, j]
        merged = ((si + sk) * d2[i] + (sj + sk) * d2[j] - sk * dij) / (si + sj + sk)
        d2[i, :] = merged
        d2[:, i] = merged
        d2[i, i] = np.inf
        size[i] = si + sj
        alive[j] = False
        members[i].extend(members[j])
        members[j] = []

    clusters = sorted((members[s] for s in np.flatnonzero(alive)), key=min)
    labels = np.empty(m, dtype=int)
    for cid, idx in enumerate(clusters):
        labels[idx] = cid
    return ClusterAssignment(labels, n)


def select_representatives(
    assign: ClusterAssignment, train: ReturnPanel
) -> SelectionResult:
    """Pick each cluster's highest-Sharpe member on the training panel.

    Ties break lexicographically by ticker. Members with zero volatility are
    skipped; a cluster whose every member is flat is an error.
    """
    if assign.labels.shape != (train.n_assets,):
        raise ValueError(
            f"{assign.labels.size} labels for {train.n_assets} train tickers"
        )
    reps: list[str] = []
    sharpes: list[float] = []
    for cid in range(assign.n_clusters):
        scored: list[tuple[float, str]] = []
        for i in assign.members(cid):
            try:
                s = annualised_sharpe(train.log_returns[:, i])
            except ZeroVolatilityError:
                continue
            scored.append((s, train.tickers[i]))
        if not scored:
            raise ZeroVolatilityError(
                f"cluster {cid}: every member has zero volatility"
            )
        scored.sort(key=lambda item: (-item[0], item[1]))
        best_sharpe, best_ticker = scored[0]
        reps.append(best_ticker)
        sharpes.append(best_sharpe)
    return SelectionResult(tuple(reps), tuple(sharpes))
