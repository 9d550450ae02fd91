"""Rebalancing-schedule QUBO: candidate date placement, weight drift, marginal
Sharpe gains, the cost matrix itself, and an exhaustive classical solver.

Bit-order convention used throughout the package: bit ``k`` of a schedule maps
to candidate date ``t_k``; rendered bitstrings list bit 0 leftmost, so a
bitstring's integer value is ``sum(b_k * 2^(W-1-k))`` and enumeration by value
matches enumeration by rendered string.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import WeightVector
from .market_data import ANNUALISATION, ReturnPanel

BRUTE_FORCE_LIMIT = 24  # 2^W energies; memory guard


@dataclass(frozen=True, eq=False)
class CandidateDates:
    """Strictly increasing interior row offsets into a return window."""

    indices: np.ndarray
    window_len: int

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=int)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("need at least one candidate index")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("candidate indices must be strictly increasing")
        if idx[0] < 1 or idx[-1] > self.window_len - 2:
            raise ValueError("candidate indices must be interior to the window")
        idx = idx.copy()
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @property
    def w(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class QuboParams:
    """Penalty weights of the schedule objective and the per-unit trade cost."""

    lambda1: float = 1.0
    lambda2: float = 0.5
    lambda3: float = 0.3
    cost_c: float = 0.001


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """Normalised symmetric cost matrix with its provenance.

    ``q`` has max |entry| = 1 unless the raw matrix was all zeros;
    ``raw_max_abs`` is the divisor, so ``q * raw_max_abs`` recovers the raw
    matrix. ``params`` records lambda1/2/3, cost_c, n_assets and delta_t.
    """

    q: np.ndarray
    raw_max_abs: float
    candidates: CandidateDates
    gains: np.ndarray
    params: dict

    def __post_init__(self) -> None:
        q = np.atleast_2d(np.asarray(self.q, dtype=float))
        w = q.shape[0]
        if q.shape != (w, w):
            raise ValueError("q must be square")
        if w != self.candidates.w:
            raise ValueError(f"{w}x{w} matrix for {self.candidates.w} candidates")
        if not np.allclose(q, q.T, rtol=0.0, atol=1e-12):
            raise ValueError("q must be symmetric")
        if self.raw_max_abs <= 0.0:
            raise ValueError("raw_max_abs must be positive")
        gains = np.asarray(self.gains, dtype=float)
        if gains.shape != (w,):
            raise ValueError("gains must have one entry per candidate")
        q = q.copy()
        q.flags.writeable = False
        gains = gains.copy()
        gains.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def w(self) -> int:
        return int(self.q.shape[0])

    def to_json_dict(self) -> dict:
        return {
            "q": [float(v) for v in self.q.ravel()],  # row-major
            "size": self.w,
            "raw_max_abs": float(self.raw_max_abs),
            "candidates": [int(i) for i in self.candidates.indices],
            "window_len": int(self.candidates.window_len),
            "gains": [float(g) for g in self.gains],
            "params": {k: (float(v) if isinstance(v, float) else v) for k, v in self.params.items()},
        }


@dataclass(frozen=True, eq=False)
class BitSchedule:
    """A binary schedule with its quadratic-form energy x' Q x."""

    bits: np.ndarray
    energy: float

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits).astype(np.uint8)
        if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
            raise ValueError("bits must be a 0/1 vector")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def __str__(self) -> str:
        return bits_to_str(self.bits)


def bits_to_str(bits) -> str:
    """Render with bit 0 leftmost."""
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())


def value_to_bits(value: int, w: int) -> np.ndarray:
    """Integer to bit vector under the package convention (bit 0 = MSB)."""
    return np.array([(value >> (w - 1 - k)) & 1 for k in range(w)], dtype=np.uint8)


def candidate_dates(window_len: int, w: int) -> CandidateDates:
    """Place ``w`` equally spaced interior candidate dates in a window.

    Raw positions are round((k+1) * window_len / (w+1)), ties-to-even. They
    are then clipped into [1, window_len-2], forward-incremented to stay
    strictly increasing, and capped from the back so none lands on day 0 or
    the final day. Any window with window_len >= w + 2 can host w dates.
    """
    if w < 1:
        raise ValueError("need at least one candidate date")
    if window_len <= w:
        raise ValueError(f"window of {window_len} days cannot host {w} candidates")
    if window_len < w + 2:
        raise ValueError(
            f"window too short: {window_len} days cannot host {w} distinct interior dates"
        )
    hi = window_len - 2
    out: list[int] = []
    prev = 0
    for k in range(w):
        v = round((k + 1) * window_len / (w + 1))
        v = min(max(v, 1), hi)
        v = max(v, prev + 1)
        out.append(v)
        prev = v
    for k in range(w - 1, -1, -1):  # pull back anything the increments pushed out
        cap = hi - (w - 1 - k)
        if out[k] > cap:
            out[k] = cap
    return CandidateDates(np.array(out, dtype=int), window_len)


def drift_weights(target, window: ReturnPanel, upto: int) -> np.ndarray:
    """Weights after ``upto`` days of pure drift from the window start.

    ``w_drift = (w * pi) / sum(w * pi)`` with ``pi`` the cumulative gross
    return of each asset over rows ``[0, upto)``; no intermediate rebalances.
    """
    w = target.weights if isinstance(target, WeightVector) else np.asarray(target, float)
    if w.shape != (window.n_assets,):
        raise ValueError(f"{w.size} weights for {window.n_assets} assets")
    if not 0 <= upto <= window.n_days:
        raise ValueError(f"upto must be in [0, {window.n_days}]")
    pi = np.prod(window.gross_returns[:upto], axis=0)  # empty product -> ones
    v = w * pi
    return v / v.sum()


def _sharpe_or_zero(gross_series: np.ndarray) -> float:
    r = np.log(gross_series)
    sd = r.std(ddof=1)
    if sd == 0.0:
        return 0.0  # degenerate forward window: no Sharpe contribution
    return float(r.mean() / sd * ANNUALISATION)


def marginal_gain(
    target, window: ReturnPanel, candidates: CandidateDates, k: int, cost_c: float
) -> float:
    """Net benefit of rebalancing at candidate ``k``.

    Sharpe of the target weights minus Sharpe of the drifted weights, both on
    the forward window [t_k, t_{k+1}) (the last candidate's window runs to the
    segment end), minus the annualised L1 trading cost of resetting the drift.
    Weights are held fixed within the forward window for both legs.
    """
    if not 0 <= k < candidates.w:
        raise ValueError(f"candidate index {k} out of range")
    w = target.weights if isinstance(target, WeightVector) else np.asarray(target, float)
    idx = candidates.indices
    start = int(idx[k])
    end = int(idx[k + 1]) if k + 1 < candidates.w else window.n_days
    if end - start < 2:
        raise ValueError(f"forward window [{start}, {end}) shorter than 2 days")
    fwd = window.gross_returns[start:end]
    w_drift = drift_weights(w, window, start)
    sr_target = _sharpe_or_zero(fwd @ w)
    sr_drift = _sharpe_or_zero(fwd @ w_drift)
    l1 = float(np.abs(w_drift - w).sum())
    return sr_target - sr_drift - cost_c * l1 * ANNUALISATION


def build_qubo(
    target, window: ReturnPanel, w_count: int, params: QuboParams = QuboParams()
) -> QuboProblem:
    """Assemble and normalise the schedule QUBO for one return window.

    Diagonal: ``-lambda1 * g_k + lambda2 * cost_c * n_assets``. Off-diagonal:
    ``lambda3 * exp(-|t_k - t_l| / delta_t)`` with ``delta_t`` the mean spacing
    of the candidate indices. The matrix is symmetrised and divided by its max
    absolute entry (recorded in ``raw_max_abs``).
    """
    cand = candidate_dates(window.n_days, w_count)
    gains = np.array(
        [marginal_gain(target, window, cand, k, params.cost_c) for k in range(w_count)]
    )
    n = window.n_assets
    idx = cand.indices.astype(float)
    delta_t = float(np.mean(np.diff(idx))) if w_count >= 2 else float(window.n_days)

    gaps = np.abs(idx[:, None] - idx[None, :])
    raw = params.lambda3 * np.exp(-gaps / delta_t)
    np.fill_diagonal(raw, -params.lambda1 * gains + params.lambda2 * params.cost_c * n)
    raw = (raw + raw.T) / 2.0

    max_abs = float(np.max(np.abs(raw)))
    raw_max_abs = max_abs if max_abs > 0.0 else 1.0
    return QuboProblem(
        q=raw / raw_max_abs,
        raw_max_abs=raw_max_abs,
        candidates=cand,
        gains=gains,
        params={
            "lambda1": params.lambda1,
            "lambda2": params.lambda2,
            "lambda3": params.lambda3,
            "cost_c": params.cost_c,
            "n_assets": n,
            "delta_t": delta_t,
        },
    )


def enumerate_energies(q) -> np.ndarray:
    """x' Q x for every bitstring, indexed by bitstring value.

    Broadcast accumulation over the (2,)*W grid: O(W^2 2^W) flops but only one
    2^W array of memory.
    """
    mat = q.q if isinstance(q, QuboProblem) else np.atleast_2d(np.asarray(q, float))
    w = mat.shape[0]
    if mat.shape != (w, w):
        raise ValueError("Q must be square")
    if w > BRUTE_FORCE_LIMIT:
        raise ValueError(f"W = {w} exceeds the enumeration guard ({BRUTE_FORCE_LIMIT})")
    sym = (mat + mat.T) / 2.0
    x_axis = np.array([0.0, 1.0])
    energies = np.zeros((2,) * w)

    def axis_view(i: int) -> np.ndarray:
        shape = [1] * w
        shape[i] = 2
        return x_axis.reshape(shape)

    for i in range(w):
        if sym[i, i] != 0.0:
            energies += sym[i, i] * axis_view(i)
        for j in range(i + 1, w):
            if sym[i, j] != 0.0:
                energies += 2.0 * sym[i, j] * (axis_view(i) * axis_view(j))
    return energies.reshape(-1)


def brute_force(q) -> BitSchedule:
    """Exact global minimiser of x' Q x over all 2^W bitstrings.

    Ties break toward the smallest bitstring value under the package bit-order
    convention (all-zeros wins a tie with anything).
    """
    mat = q.q if isinstance(q, QuboProblem) else np.atleast_2d(np.asarray(q, float))
    w = mat.shape[0]
    energies = enumerate_energies(mat)
    best = int(np.argmin(energies))  # first hit == smallest bitstring value
    return BitSchedule(value_to_bits(best, w), float(energies[best]))
