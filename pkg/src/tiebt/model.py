"""Closed-form probabilities and likelihoods for the Bradley-Terry model with ties.

The tied variant assigns, for wards i and j with qualities lambda_i, lambda_j
and tie parameter delta >= 0:

    P(i beats j) = sigmoid(lambda_i - lambda_j - delta)
    P(i ties j)  = (e^{2 delta} - 1) * sigmoid(lambda_i - lambda_j - delta)
                                     * sigmoid(lambda_j - lambda_i - delta)

which sum with P(j beats i) to one.  All evaluations go through log-sigmoid
forms so quality differences up to ~700 do not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidPairError(ValueError):
    """A pair operation was requested with i == j."""


def _check_pair(i: int, j: int) -> None:
    if i == j:
        raise InvalidPairError(f"ward compared with itself: i == j == {i}")


def _check_delta(delta: float) -> None:
    if delta < 0:
        raise ValueError(f"tie parameter must be non-negative, got {delta}")


def log_sigmoid(x):
    """Numerically stable log(1 / (1 + e^{-x}))."""
    return -np.logaddexp(0.0, -np.asarray(x, dtype=float))


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    return np.exp(log_sigmoid(x))


@dataclass
class ComparisonDataset:
    """Aggregated pairwise judgement counts over N wards.

    ``wins[i, j]`` counts the times ward i was judged higher than ward j;
    ``ties`` is symmetric with ``ties[i, j]`` the number of tied judgements of
    the unordered pair.  Skips are retained as a count only; they never enter
    the likelihood.
    """

    wins: np.ndarray
    ties: np.ndarray
    skips: int = 0

    def __post_init__(self):
        self.wins = np.asarray(self.wins, dtype=np.int64)
        self.ties = np.asarray(self.ties, dtype=np.int64)
        if self.wins.ndim != 2 or self.wins.shape[0] != self.wins.shape[1]:
            raise ValueError("wins must be a square matrix")
        if self.ties.shape != self.wins.shape:
            raise ValueError("ties must have the same shape as wins")
        if (self.wins < 0).any() or (self.ties < 0).any() or self.skips < 0:
            raise ValueError("counts must be non-negative")
        if np.diagonal(self.wins).any() or np.diagonal(self.ties).any():
            raise ValueError("wins and ties must have zero diagonal")
        if not np.array_equal(self.ties, self.ties.T):
            raise ValueError("ties must be symmetric")

    @property
    def n_wards(self) -> int:
        return self.wins.shape[0]

    @property
    def n_tie_events(self) -> int:
        """Number of tied judgement events (each tie counted once)."""
        return int(self.ties.sum() // 2)

    @property
    def n_comparisons(self) -> int:
        """Total judgement events excluding skips."""
        return int(self.wins.sum()) + self.n_tie_events

    def pair_totals(self) -> np.ndarray:
        """n[i, j] = y[i, j] + y[j, i] + t[i, j], the unordered-pair totals."""
        return self.wins + self.wins.T + self.ties

    def observed_pairs(self):
        """Ordered pairs (i, j) with y[i, j] + t[i, j] >= 1, plus their counts."""
        m = self.wins + self.ties
        idx_i, idx_j = np.nonzero(m)
        return idx_i, idx_j, m[idx_i, idx_j]


def win_probability(lam: np.ndarray, i: int, j: int, delta: float = 0.0) -> float:
    """P(ward i judged higher than ward j), tie model."""
    _check_pair(i, j)
    _check_delta(delta)
    return float(np.exp(log_sigmoid(lam[i] - lam[j] - delta)))


def tie_probability(lam: np.ndarray, i: int, j: int, delta: float) -> float:
    """P(wards i and j judged tied)."""
    _check_pair(i, j)
    _check_delta(delta)
    if delta == 0.0:
        return 0.0
    d = lam[i] - lam[j]
    log_p = (
        np.log(np.expm1(2.0 * delta))
        + log_sigmoid(d - delta)
        + log_sigmoid(-d - delta)
    )
    return float(np.exp(log_p))


def log_likelihood_ties(
    dataset: ComparisonDataset, lam: np.ndarray, delta: float
) -> float:
    """Log-likelihood of the tie model, combinatorial constants dropped.

    Equals T * log(e^{2 delta} - 1) + sum over ordered pairs of
    (y_ij + t_ij) * log-sigmoid(lambda_i - lambda_j - delta), with T the
    number of tied events.  -inf when delta == 0 but ties are present.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (dataset.n_wards,):
        raise ValueError(
            f"quality vector length {lam.shape} does not match "
            f"{dataset.n_wards} wards"
        )
    _check_delta(delta)
    m = dataset.wins + dataset.ties
    idx_i, idx_j = np.nonzero(m)
    diffs = lam[idx_i] - lam[idx_j]
    ll = float(np.sum(m[idx_i, idx_j] * log_sigmoid(diffs - delta)))
    t_events = dataset.n_tie_events
    if t_events:
        if delta == 0.0:
            return -np.inf
        ll += t_events * float(np.log(np.expm1(2.0 * delta)))
    return ll


def log_likelihood_standard(dataset: ComparisonDataset, lam: np.ndarray) -> float:
    """Log-likelihood of the standard (tie-free) model, constants dropped."""
    if dataset.ties.any():
        raise ValueError(
            "dataset contains ties; use log_likelihood_ties for the tie model"
        )
    return log_likelihood_ties(dataset, lam, 0.0)
