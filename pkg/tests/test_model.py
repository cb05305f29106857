"""Closed-form probability and likelihood checks for the tie model."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiebt.model import (
    ComparisonDataset,
    InvalidPairError,
    log_likelihood_standard,
    log_likelihood_ties,
    log_sigmoid,
    tie_probability,
    win_probability,
)

finite_quality = st.floats(-30.0, 30.0, allow_nan=False)
tie_param = st.floats(0.0, 10.0, allow_nan=False)


def test_win_probability_matches_logistic():
    lam = np.array([0.5, 0.0])
    assert win_probability(lam, 0, 1) == pytest.approx(0.6224593312018546, abs=1e-12)
    assert win_probability(lam, 1, 0) == pytest.approx(1 - 0.6224593312018546, abs=1e-12)


def test_win_probability_shifts_by_tie_parameter():
    lam = np.array([1.0, 0.0])
    # Only the difference minus delta matters.
    assert win_probability(lam, 0, 1, delta=0.5) == pytest.approx(
        0.6224593312018546, abs=1e-12
    )


def test_tie_probability_closed_form():
    lam = np.array([1.0, 0.0])
    assert tie_probability(lam, 0, 1, 0.5) == pytest.approx(
        0.1951151449917891, abs=1e-12
    )
    # Symmetric in the pair.
    assert tie_probability(lam, 1, 0, 0.5) == pytest.approx(
        tie_probability(lam, 0, 1, 0.5), abs=1e-15
    )


def test_tie_probability_equal_qualities_is_tanh_half_delta():
    lam = np.zeros(2)
    assert tie_probability(lam, 0, 1, 0.468) == pytest.approx(
        0.22982054821431688, abs=1e-12
    )
    for delta in (0.1, 0.5, 1.0, 3.0):
        assert tie_probability(lam, 0, 1, delta) == pytest.approx(
            math.tanh(delta / 2.0), abs=1e-12
        )


def test_tie_probability_zero_when_delta_zero():
    assert tie_probability(np.array([0.3, -0.2]), 0, 1, 0.0) == 0.0


@given(finite_quality, finite_quality, tie_param)
@settings(max_examples=300)
def test_outcomes_sum_to_one(li, lj, delta):
    lam = np.array([li, lj])
    total = (
        win_probability(lam, 0, 1, delta)
        + win_probability(lam, 1, 0, delta)
        + tie_probability(lam, 0, 1, delta)
    )
    assert abs(total - 1.0) < 1e-12


@given(finite_quality, finite_quality, tie_param, st.floats(-50.0, 50.0))
@settings(max_examples=200)
def test_probabilities_translation_invariant(li, lj, delta, shift):
    lam = np.array([li, lj])
    shifted = lam + shift
    assert win_probability(shifted, 0, 1, delta) == pytest.approx(
        win_probability(lam, 0, 1, delta), abs=1e-10
    )
    assert tie_probability(shifted, 0, 1, delta) == pytest.approx(
        tie_probability(lam, 0, 1, delta), abs=1e-10
    )


def test_win_probability_monotone_in_quality_gap():
    probs = [
        win_probability(np.array([d, 0.0]), 0, 1, 0.3) for d in np.linspace(-5, 5, 41)
    ]
    assert all(b > a for a, b in zip(probs, probs[1:]))


def test_extreme_quality_gaps_do_not_overflow():
    lam = np.array([700.0, -700.0])
    assert win_probability(lam, 0, 1, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert win_probability(lam, 1, 0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert tie_probability(lam, 0, 1, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert np.isfinite(log_sigmoid(-700.0))


def test_self_pair_rejected():
    with pytest.raises(InvalidPairError):
        win_probability(np.zeros(3), 1, 1)
    with pytest.raises(InvalidPairError):
        tie_probability(np.zeros(3), 2, 2, 0.5)


def test_negative_delta_rejected():
    with pytest.raises(ValueError):
        win_probability(np.zeros(2), 0, 1, -0.1)
    with pytest.raises(ValueError):
        tie_probability(np.zeros(2), 0, 1, -0.1)


# ---------------------------------------------------------------------------
# Dataset container


def test_dataset_counts():
    wins = np.array([[0, 2, 0], [1, 0, 3], [0, 0, 0]])
    ties = np.array([[0, 1, 0], [1, 0, 2], [0, 2, 0]])
    ds = ComparisonDataset(wins=wins, ties=ties, skips=4)
    assert ds.n_wards == 3
    assert ds.n_tie_events == 3
    assert ds.n_comparisons == 9
    assert ds.skips == 4
    totals = ds.pair_totals()
    assert totals[0, 1] == totals[1, 0] == 4
    assert totals[1, 2] == 5


def test_dataset_validation():
    with pytest.raises(ValueError):
        ComparisonDataset(wins=np.zeros((2, 3)), ties=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        ComparisonDataset(wins=np.eye(2), ties=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        ComparisonDataset(wins=np.zeros((2, 2)), ties=np.array([[0, 1], [2, 0]]))
    with pytest.raises(ValueError):
        ComparisonDataset(
            wins=np.array([[0, -1], [0, 0]]), ties=np.zeros((2, 2))
        )


# ---------------------------------------------------------------------------
# Likelihoods


def _oracle_log_likelihood(ds: ComparisonDataset, lam, delta):
    """Event-by-event product of the closed-form outcome pmf, written directly."""
    total = 0.0
    n = ds.n_wards
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            p_win = 1.0 / (1.0 + math.exp(-(lam[i] - lam[j] - delta)))
            total += ds.wins[i, j] * math.log(p_win)
            if i < j and ds.ties[i, j]:
                p_tie = (
                    math.expm1(2.0 * delta)
                    / (1.0 + math.exp(-(lam[i] - lam[j] - delta)))
                    / (1.0 + math.exp(-(lam[j] - lam[i] - delta)))
                )
                total += ds.ties[i, j] * math.log(p_tie)
    return total


def test_log_likelihood_matches_event_enumeration():
    wins = np.array([[0, 3, 1], [2, 0, 0], [4, 1, 0]])
    ties = np.array([[0, 2, 1], [2, 0, 0], [1, 0, 0]])
    ds = ComparisonDataset(wins=wins, ties=ties)
    lam = np.array([0.4, -0.3, 0.9])
    for delta in (0.1, 0.468, 1.5):
        assert log_likelihood_ties(ds, lam, delta) == pytest.approx(
            _oracle_log_likelihood(ds, lam, delta), abs=1e-10
        )


@given(
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.floats(-20, 20),
)
@settings(max_examples=100)
def test_log_likelihood_translation_invariant(l0, l1, l2, shift):
    wins = np.array([[0, 3, 1], [2, 0, 0], [4, 1, 0]])
    ties = np.array([[0, 2, 1], [2, 0, 0], [1, 0, 0]])
    ds = ComparisonDataset(wins=wins, ties=ties)
    lam = np.array([l0, l1, l2])
    base = log_likelihood_ties(ds, lam, 0.7)
    assert log_likelihood_ties(ds, lam + shift, 0.7) == pytest.approx(base, abs=1e-8)


def test_tie_model_reduces_to_standard_at_zero_delta():
    wins = np.array([[0, 5, 2], [3, 0, 1], [0, 4, 0]])
    ds = ComparisonDataset(wins=wins, ties=np.zeros((3, 3)))
    lam = np.array([0.2, -0.1, 0.5])
    assert log_likelihood_ties(ds, lam, 0.0) == pytest.approx(
        log_likelihood_standard(ds, lam), abs=1e-14
    )


def test_zero_delta_with_ties_is_impossible():
    ties = np.array([[0, 1], [1, 0]])
    ds = ComparisonDataset(wins=np.zeros((2, 2)), ties=ties)
    assert log_likelihood_ties(ds, np.zeros(2), 0.0) == -np.inf


def test_standard_likelihood_rejects_tied_data():
    ties = np.array([[0, 1], [1, 0]])
    ds = ComparisonDataset(wins=np.zeros((2, 2)), ties=ties)
    with pytest.raises(ValueError):
        log_likelihood_standard(ds, np.zeros(2))


def test_likelihood_rejects_mismatched_quality_vector():
    ds = ComparisonDataset(wins=np.array([[0, 1], [0, 0]]), ties=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        log_likelihood_ties(ds, np.zeros(3), 0.5)
