"""Pólya-Gamma augmented Gibbs sampler for the tied Bradley-Terry model.

One iteration redraws, in order: the per-pair latent variables z from their
PG full conditionals, the quality vector lambda from its Gaussian full
conditional, the tie parameter delta by a random-walk Metropolis step, the
signal variance alpha2 from its conjugate inverse-gamma conditional, and then
recentres lambda so its mean equals a fresh draw of the prior level, the
identifiability device for the translation-invariant likelihood.

A component-wise Metropolis-Hastings random-walk sampler targeting the same
posterior is included as the benchmark baseline.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .model import ComparisonDataset, log_sigmoid
from .polya_gamma import sample_pg_batch
from .spatial import SpatialPrior, sample_alpha2

DELTA_TARGET_ACCEPTANCE = 0.44


@dataclass
class SamplerConfig:
    n_iterations: int = 5000
    burn_in: int = 100
    delta_prior_rate: float = 0.01
    alpha2_prior: tuple[float, float] = (0.01, 0.01)
    delta_step: float = 0.1
    lambda_step: float = 0.5
    learn_alpha2: bool = True
    fixed_delta: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if not 0 <= self.burn_in < self.n_iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_iterations")
        if self.delta_prior_rate <= 0:
            raise ValueError("delta prior rate must be positive")
        if self.delta_step <= 0 or self.lambda_step <= 0:
            raise ValueError("proposal step sizes must be positive")
        if self.fixed_delta is not None and self.fixed_delta < 0:
            raise ValueError("fixed_delta must be non-negative")


@dataclass
class ObservedPairs:
    """Ordered pairs (i, j) with y_ij + t_ij >= 1, in fixed row-major order."""

    i: np.ndarray
    j: np.ndarray
    m: np.ndarray  # y_ij + t_ij per ordered pair

    @classmethod
    def from_dataset(cls, dataset: ComparisonDataset) -> "ObservedPairs":
        idx_i, idx_j, m = dataset.observed_pairs()
        return cls(i=idx_i, j=idx_j, m=m.astype(np.int64))

    @property
    def kappa(self) -> np.ndarray:
        """Linear-term weights (y_ij + t_ij) / 2 of the augmented likelihood."""
        return self.m / 2.0

    def __len__(self) -> int:
        return len(self.m)


@dataclass
class SamplerState:
    lam: np.ndarray
    z: np.ndarray  # aligned with an ObservedPairs ordering
    delta: float
    alpha2: float
    iteration: int = 0

    def z_map(self, pairs: ObservedPairs) -> dict[tuple[int, int], float]:
        return {
            (int(a), int(b)): float(v)
            for a, b, v in zip(pairs.i, pairs.j, self.z)
        }


@dataclass
class PosteriorSamples:
    lambda_draws: np.ndarray  # (retained, N)
    delta_draws: np.ndarray
    alpha2_draws: np.ndarray
    level_draws: np.ndarray  # the recentring target drawn each iteration
    acceptance_rate_delta: float
    acceptance_rate_lambda: float | None = None
    sampling_time: float = 0.0

    @property
    def n_retained(self) -> int:
        return self.lambda_draws.shape[0]

    @property
    def n_wards(self) -> int:
        return self.lambda_draws.shape[1]

    def summary(self) -> dict:
        """Per-ward posterior medians/variances/quantiles plus delta and alpha2."""
        lam = self.lambda_draws
        wards = [
            {
                "median": float(np.median(lam[:, k])),
                "variance": float(np.var(lam[:, k])),
                "q2.5": float(np.quantile(lam[:, k], 0.025)),
                "q97.5": float(np.quantile(lam[:, k], 0.975)),
            }
            for k in range(self.n_wards)
        ]
        return {
            "wards": wards,
            "delta": _scalar_summary(self.delta_draws),
            "alpha2": _scalar_summary(self.alpha2_draws),
        }


def _scalar_summary(draws: np.ndarray) -> dict:
    med = float(np.median(draws))
    lo = float(np.quantile(draws, 0.025))
    hi = float(np.quantile(draws, 0.975))
    return {
        "median": med,
        "q2.5": lo,
        "q97.5": hi,
        "formatted": format_estimate(med, lo, hi),
    }


def format_estimate(median: float, lo: float, hi: float) -> str:
    return f"{median:.3f} (95% CI ({lo:.3f}, {hi:.3f}))"


# ---------------------------------------------------------------------------
# Conditional samplers


def sample_z(pairs: ObservedPairs, lam: np.ndarray, delta: float, rng) -> np.ndarray:
    """Redraw every observed pair's latent variable from PG(y+t, x.lam - delta)."""
    c = lam[pairs.i] - lam[pairs.j] - delta
    return sample_pg_batch(pairs.m, c, rng)


@njit(cache=True)
def _lambda_draw_kernel(prior_prec, prior_lin, pi, pj, m, z, delta, rng):
    """Assemble the conditional precision pair-by-pair and draw by Cholesky."""
    n = prior_prec.shape[0]
    prec = prior_prec.copy()
    b = prior_lin.copy()
    for k in range(pi.shape[0]):
        i = pi[k]
        j = pj[k]
        zk = z[k]
        prec[i, i] += zk
        prec[j, j] += zk
        prec[i, j] -= zk
        prec[j, i] -= zk
        w = 0.5 * m[k] + delta * zk
        b[i] += w
        b[j] -= w
    chol = np.linalg.cholesky(prec)
    # Forward then backward substitution for the conditional mean.
    y = np.empty(n)
    for i in range(n):
        acc = b[i]
        for k in range(i):
            acc -= chol[i, k] * y[k]
        y[i] = acc / chol[i, i]
    lam = np.empty(n)
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= chol[k, i] * lam[k]
        lam[i] = acc / chol[i, i]
    # Correlated noise: solve chol^T v = eta for eta ~ N(0, I).
    eta = np.empty(n)
    for i in range(n):
        eta[i] = rng.standard_normal()
    for i in range(n - 1, -1, -1):
        acc = eta[i]
        for k in range(i + 1, n):
            acc -= chol[k, i] * eta[k]
        eta[i] = acc / chol[i, i]
    return lam + eta


def sample_lambda(
    pairs: ObservedPairs,
    z: np.ndarray,
    delta: float,
    prior: SpatialPrior,
    rng,
    alpha2: float | None = None,
    prior_precision: np.ndarray | None = None,
) -> np.ndarray:
    """Draw lambda from its Gaussian full conditional.

    Precision is assembled pair-by-pair on top of the prior precision; the
    linear term per ordered pair is (kappa + delta * z) on the i entry and its
    negation on the j entry, where kappa = (y + t) / 2.
    """
    if prior_precision is None:
        a2 = prior.alpha2 if alpha2 is None else alpha2
        prior_precision = prior.corr_inverse() / a2
    n = prior_precision.shape[0]
    prior_lin = prior_precision @ prior.mean if prior.mean.any() else np.zeros(n)
    z = np.ascontiguousarray(z, dtype=np.float64)
    if not np.isfinite(prior_precision).all():
        raise np.linalg.LinAlgError("prior precision contains non-finite entries")
    try:
        return _lambda_draw_kernel(
            np.ascontiguousarray(prior_precision),
            prior_lin,
            pairs.i,
            pairs.j,
            pairs.m,
            z,
            delta,
            rng,
        )
    except Exception as exc:
        raise np.linalg.LinAlgError(
            "conditional precision matrix is not positive-definite"
        ) from exc


def delta_log_conditional(
    delta: float,
    diffs: np.ndarray,
    m: np.ndarray,
    n_tie_events: int,
    prior_rate: float,
) -> float:
    """Log full conditional of delta up to a constant; -inf outside support."""
    if delta < 0:
        return -np.inf
    ll = -prior_rate * delta
    if n_tie_events:
        if delta == 0.0:
            return -np.inf
        ll += n_tie_events * math.log(math.expm1(2.0 * delta))
    ll += float(np.sum(m * log_sigmoid(diffs - delta)))
    return ll


def mh_step_delta(
    pairs: ObservedPairs,
    lam: np.ndarray,
    delta: float,
    n_tie_events: int,
    prior_rate: float,
    step: float,
    rng,
) -> tuple[float, bool, float]:
    """One Metropolis random-walk update of delta against the current lambda.

    Returns (new delta, accepted flag, acceptance probability).  Proposals
    below zero fall outside the prior support and are rejected outright.
    """
    proposal = delta + step * rng.normal()
    if proposal < 0:
        return delta, False, 0.0
    diffs = lam[pairs.i] - lam[pairs.j]
    log_ratio = delta_log_conditional(
        proposal, diffs, pairs.m, n_tie_events, prior_rate
    ) - delta_log_conditional(delta, diffs, pairs.m, n_tie_events, prior_rate)
    alpha = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
    if rng.random() < alpha:
        return proposal, True, alpha
    return delta, False, alpha


def recentre(
    lam: np.ndarray, prior: SpatialPrior, rng, alpha2: float | None = None
) -> tuple[np.ndarray, float]:
    """Translate lambda so its mean equals a fresh draw of the prior level.

    The level is N(mean of the prior mean, 1' Sigma 1 / N^2); the returned
    vector has arithmetic mean exactly equal to the drawn level.
    """
    a2 = prior.alpha2 if alpha2 is None else alpha2
    n = lam.size
    level_sd = math.sqrt(a2 * float(prior.base_corr.sum())) / n
    level = rng.normal(float(prior.mean.mean()), level_sd)
    return lam + (level - lam.mean()), level


# ---------------------------------------------------------------------------
# Full samplers


def run_gibbs(
    dataset: ComparisonDataset, prior: SpatialPrior, config: SamplerConfig
) -> PosteriorSamples:
    """Run the PG-augmented Gibbs sampler; deterministic given config.seed."""
    if dataset.n_wards != prior.n_wards:
        raise ValueError("dataset and prior disagree on the number of wards")
    rng = np.random.default_rng(config.seed)
    pairs = ObservedPairs.from_dataset(dataset)
    n = dataset.n_wards
    n_ties = dataset.n_tie_events
    k_inv = prior.corr_inverse()
    corr_sum = float(prior.base_corr.sum())
    prior_mean_avg = float(prior.mean.mean())

    lam = np.zeros(n)
    delta = 0.5 if config.fixed_delta is None else config.fixed_delta
    alpha2 = prior.alpha2
    z = sample_pg_batch(pairs.m, np.zeros(len(pairs)), rng)

    retained = config.n_iterations - config.burn_in
    lambda_draws = np.empty((retained, n))
    delta_draws = np.empty(retained)
    alpha2_draws = np.empty(retained)
    level_draws = np.empty(retained)
    log_step = math.log(config.delta_step)
    n_accept = 0
    n_attempt = 0

    t_start = time.perf_counter()
    for it in range(config.n_iterations):
        try:
            z = sample_z(pairs, lam, delta, rng)
            lam = sample_lambda(
                pairs, z, delta, prior, rng, prior_precision=k_inv / alpha2
            )
            if config.fixed_delta is None:
                delta, accepted, alpha_prob = mh_step_delta(
                    pairs,
                    lam,
                    delta,
                    n_ties,
                    config.delta_prior_rate,
                    math.exp(log_step),
                    rng,
                )
                if it < config.burn_in:
                    log_step += (it + 1) ** -0.6 * (
                        alpha_prob - DELTA_TARGET_ACCEPTANCE
                    )
                else:
                    n_attempt += 1
                    n_accept += accepted
            if config.learn_alpha2:
                alpha2 = sample_alpha2(lam, prior, rng, config.alpha2_prior)
            level_sd = math.sqrt(alpha2 * corr_sum) / n
            level = rng.normal(prior_mean_avg, level_sd)
            lam = lam + (level - lam.mean())
        except Exception as exc:
            raise RuntimeError(f"sampler failed at iteration {it}") from exc
        if it >= config.burn_in:
            k = it - config.burn_in
            lambda_draws[k] = lam
            delta_draws[k] = delta
            alpha2_draws[k] = alpha2
            level_draws[k] = level
    sampling_time = time.perf_counter() - t_start

    return PosteriorSamples(
        lambda_draws=lambda_draws,
        delta_draws=delta_draws,
        alpha2_draws=alpha2_draws,
        level_draws=level_draws,
        acceptance_rate_delta=(n_accept / n_attempt) if n_attempt else 0.0,
        sampling_time=sampling_time,
    )


@njit(cache=True, inline="always")
def _logsig(x):
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@njit(cache=True)
def _mhrw_lambda_sweep(
    lam,
    centred,
    k_inv,
    inv_alpha2,
    delta,
    nbr_ptr,
    nbr_idx,
    nbr_out,
    nbr_in,
    log_steps,
    gamma,
    target,
    rng,
):
    """One component-wise random-walk sweep over lambda; returns acceptances.

    ``centred`` must equal lam - prior mean on entry and is kept in sync.
    """
    n = lam.shape[0]
    accepted = 0
    for i in range(n):
        cur = lam[i]
        prop = cur + math.exp(log_steps[i]) * rng.normal()
        d_loglik = 0.0
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_idx[p]
            lj = lam[j]
            if nbr_out[p] > 0:
                d_loglik += nbr_out[p] * (
                    _logsig(prop - lj - delta) - _logsig(cur - lj - delta)
                )
            if nbr_in[p] > 0:
                d_loglik += nbr_in[p] * (
                    _logsig(lj - prop - delta) - _logsig(lj - cur - delta)
                )
        cross = 0.0
        for k in range(n):
            cross += k_inv[i, k] * centred[k]
        cross -= k_inv[i, i] * centred[i]
        dc = prop - cur
        d_logprior = -0.5 * inv_alpha2 * (
            (2.0 * centred[i] + dc) * dc * k_inv[i, i] + 2.0 * dc * cross
        )
        log_alpha = d_loglik + d_logprior
        alpha = 1.0 if log_alpha >= 0.0 else math.exp(log_alpha)
        if rng.random() < alpha:
            lam[i] = prop
            centred[i] += dc
            accepted += 1
        if gamma > 0.0:
            log_steps[i] += gamma * (alpha - target)
    return accepted


def _neighbour_csr(dataset: ComparisonDataset):
    """Per-ward CSR arrays of opposing wards with (y+t) counts both ways."""
    m = (dataset.wins + dataset.ties).astype(np.int64)
    touched = (m + m.T) > 0
    ptr = np.zeros(dataset.n_wards + 1, dtype=np.int64)
    idx_rows = []
    for i in range(dataset.n_wards):
        js = np.nonzero(touched[i])[0]
        idx_rows.append(js)
        ptr[i + 1] = ptr[i] + len(js)
    idx = np.concatenate(idx_rows) if idx_rows else np.empty(0, dtype=np.int64)
    rows = np.repeat(np.arange(dataset.n_wards), np.diff(ptr))
    return ptr, idx.astype(np.int64), m[rows, idx], m[idx, rows]


def run_mhrw_baseline(
    dataset: ComparisonDataset, prior: SpatialPrior, config: SamplerConfig
) -> PosteriorSamples:
    """Component-wise Metropolis random walk targeting the same posterior.

    Shares the delta step, alpha2 update and recentring with the Gibbs
    sampler; used for efficiency and scalability benchmarks only.
    """
    if dataset.n_wards != prior.n_wards:
        raise ValueError("dataset and prior disagree on the number of wards")
    rng = np.random.default_rng(config.seed)
    pairs = ObservedPairs.from_dataset(dataset)
    n = dataset.n_wards
    n_ties = dataset.n_tie_events
    k_inv = np.ascontiguousarray(prior.corr_inverse())
    corr_sum = float(prior.base_corr.sum())
    prior_mean = prior.mean
    prior_mean_avg = float(prior_mean.mean())
    nbr_ptr, nbr_idx, nbr_out, nbr_in = _neighbour_csr(dataset)

    lam = np.zeros(n)
    centred = lam - prior_mean
    delta = 0.5 if config.fixed_delta is None else config.fixed_delta
    alpha2 = prior.alpha2
    lam_log_steps = np.full(n, math.log(config.lambda_step))
    log_step = math.log(config.delta_step)

    retained = config.n_iterations - config.burn_in
    lambda_draws = np.empty((retained, n))
    delta_draws = np.empty(retained)
    alpha2_draws = np.empty(retained)
    level_draws = np.empty(retained)
    d_accept = d_attempt = 0
    l_accept = l_attempt = 0

    t_start = time.perf_counter()
    for it in range(config.n_iterations):
        gamma = (it + 1) ** -0.6 if it < config.burn_in else 0.0
        acc = _mhrw_lambda_sweep(
            lam,
            centred,
            k_inv,
            1.0 / alpha2,
            delta,
            nbr_ptr,
            nbr_idx,
            nbr_out,
            nbr_in,
            lam_log_steps,
            gamma,
            DELTA_TARGET_ACCEPTANCE,
            rng,
        )
        if it >= config.burn_in:
            l_accept += acc
            l_attempt += n
        if config.fixed_delta is None:
            delta, accepted, alpha_prob = mh_step_delta(
                pairs,
                lam,
                delta,
                n_ties,
                config.delta_prior_rate,
                math.exp(log_step),
                rng,
            )
            if it < config.burn_in:
                log_step += (it + 1) ** -0.6 * (alpha_prob - DELTA_TARGET_ACCEPTANCE)
            else:
                d_attempt += 1
                d_accept += accepted
        if config.learn_alpha2:
            alpha2 = sample_alpha2(lam, prior, rng, config.alpha2_prior)
        level_sd = math.sqrt(alpha2 * corr_sum) / n
        level = rng.normal(prior_mean_avg, level_sd)
        shift = level - lam.mean()
        lam = lam + shift
        centred = lam - prior_mean
        if it >= config.burn_in:
            k = it - config.burn_in
            lambda_draws[k] = lam
            delta_draws[k] = delta
            alpha2_draws[k] = alpha2
            level_draws[k] = level
    sampling_time = time.perf_counter() - t_start

    return PosteriorSamples(
        lambda_draws=lambda_draws,
        delta_draws=delta_draws,
        alpha2_draws=alpha2_draws,
        level_draws=level_draws,
        acceptance_rate_delta=(d_accept / d_attempt) if d_attempt else 0.0,
        acceptance_rate_lambda=(l_accept / l_attempt) if l_attempt else None,
        sampling_time=sampling_time,
    )
