"""Synthetic data generation and the efficiency / scalability / sensitivity studies.

Benchmarks pit the PG-augmented Gibbs sampler against the Metropolis-Hastings
random-walk baseline on data simulated from the tie model itself, reporting
effective sample size per second, wall time and recovery quality.  Wall time
covers the sampler loop only, never simulation or I/O.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields, asdict

import numpy as np
from scipy import stats

from .model import ComparisonDataset, log_sigmoid
from .gibbs import PosteriorSamples, SamplerConfig, run_gibbs, run_mhrw_baseline
from .spatial import SpatialPrior, WardGraph, build_spatial_covariance, surrogate_county_graph


@dataclass
class SimulationScenario:
    """One synthetic study design.

    ``n_comparisons`` defaults to ten times the ward count, the usual
    comparative-judgement data budget.
    """

    n_wards: int
    n_comparisons: int | None = None
    true_delta: float = 0.5
    prior: str = "graph"  # "graph" or "wishart"
    alpha2: float = 1.0
    n_iterations: int = 5000
    burn_in: int = 100
    seeds: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.n_comparisons is None:
            self.n_comparisons = 10 * self.n_wards
        if self.n_comparisons < 1:
            raise ValueError("n_comparisons must be >= 1")
        if self.true_delta < 0:
            raise ValueError("true_delta must be non-negative")
        if self.prior not in ("graph", "wishart"):
            raise ValueError("prior must be 'graph' or 'wishart'")


@dataclass
class BenchRow:
    """One (scenario, run, sampler) record of a benchmark report."""

    study: str
    scenario: str
    run: int
    sampler: str
    n_wards: int
    n_comparisons: int
    wall_time: float
    ess_delta: float | None = None
    ess_per_sec_delta: float | None = None
    ess_lambda_mean: float | None = None
    ess_per_sec_lambda: float | None = None
    tie_fraction: float | None = None
    kendall_tau: float | None = None
    coverage: float | None = None
    mae: float | None = None
    delta_median: float | None = None
    alpha2_median: float | None = None


def simulate_comparisons(
    lambda_true: np.ndarray,
    delta: float,
    n_comparisons: int,
    rng,
    skips: int = 0,
) -> ComparisonDataset:
    """Simulate judgements: uniform unordered pairs, trinomial outcomes."""
    lam = np.asarray(lambda_true, dtype=float)
    n = lam.size
    if n < 2:
        raise ValueError("need at least two wards")
    iu, ju = np.triu_indices(n, k=1)
    pick = rng.integers(0, iu.size, size=n_comparisons)
    a, b = iu[pick], ju[pick]
    d = lam[a] - lam[b]
    p_win_a = np.exp(log_sigmoid(d - delta))
    p_win_b = np.exp(log_sigmoid(-d - delta))
    u = rng.random(n_comparisons)
    wins = np.zeros((n, n), dtype=np.int64)
    ties = np.zeros((n, n), dtype=np.int64)
    a_wins = u < p_win_a
    b_wins = (~a_wins) & (u < p_win_a + p_win_b)
    tied = ~(a_wins | b_wins)
    np.add.at(wins, (a[a_wins], b[a_wins]), 1)
    np.add.at(wins, (b[b_wins], a[b_wins]), 1)
    np.add.at(ties, (a[tied], b[tied]), 1)
    np.add.at(ties, (b[tied], a[tied]), 1)
    return ComparisonDataset(wins=wins, ties=ties, skips=skips)


def calibrate_delta_for_tie_fraction(fraction: float) -> float:
    """Tie parameter giving the target tie probability at equal qualities.

    Inverts tanh(delta / 2) = fraction.
    """
    if not 0 <= fraction < 1:
        raise ValueError("tie fraction must lie in [0, 1)")
    return 2.0 * math.atanh(fraction)


def simulate_prior_covariance_wishart(
    n_wards: int, rng, alpha2: float = 1.0, max_retries: int = 10
) -> SpatialPrior:
    """Unit-diagonal-normalised Wishart(I, df = N) draw as a synthetic prior."""
    if n_wards < 2:
        raise ValueError("need at least two wards")
    for _ in range(max_retries):
        w = stats.wishart.rvs(df=n_wards, scale=np.eye(n_wards), random_state=rng)
        d = np.sqrt(np.diagonal(w))
        if (d <= 0).any():
            continue
        corr = w / np.outer(d, d)
        corr = (corr + corr.T) / 2.0
        np.fill_diagonal(corr, 1.0)
        if np.linalg.eigvalsh(corr)[0] > 1e-10:
            return SpatialPrior(
                mean=np.zeros(n_wards), base_corr=corr, alpha2=float(alpha2)
            )
    raise RuntimeError(f"no positive-definite Wishart draw in {max_retries} tries")


def sample_from_prior(prior: SpatialPrior, rng) -> np.ndarray:
    """One quality vector drawn from N(mean, alpha2 * K)."""
    chol = np.linalg.cholesky(prior.covariance)
    return prior.mean + chol @ rng.standard_normal(prior.n_wards)


def effective_sample_size(chain) -> float:
    """ESS via Geyer's initial-positive-sequence autocorrelation truncation.

    Returns n / (1 + 2 * sum of the retained autocorrelations), clipped to
    [1, n]; a constant chain degenerates to 1.
    """
    x = np.asarray(chain, dtype=float)
    if x.ndim != 1 or x.size < 10:
        raise ValueError("chain must be one-dimensional with length >= 10")
    n = x.size
    sd = x.std()
    if sd == 0:
        return 1.0
    x = (x - x.mean()) / sd
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n] / n
    rho = acov / acov[0]
    tail = 0.0
    k = 1
    while k + 1 < n:
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tail += pair
        k += 2
    return float(np.clip(n / (1.0 + 2.0 * tail), 1.0, n))


def _recovery_metrics(samples: PosteriorSamples, lambda_true: np.ndarray):
    medians = np.median(samples.lambda_draws, axis=0)
    tau = stats.kendalltau(medians, lambda_true).statistic
    lo = np.quantile(samples.lambda_draws, 0.025, axis=0)
    hi = np.quantile(samples.lambda_draws, 0.975, axis=0)
    coverage = float(np.mean((lambda_true >= lo) & (lambda_true <= hi)))
    # Centre both before the absolute error so the free level does not count.
    mae = float(np.mean(np.abs(
        (medians - medians.mean()) - (lambda_true - lambda_true.mean())
    )))
    return float(tau), coverage, mae


def _ess_rates(samples: PosteriorSamples):
    t = samples.sampling_time
    ess_delta = effective_sample_size(samples.delta_draws)
    ess_lambda = float(np.mean([
        effective_sample_size(samples.lambda_draws[:, k])
        for k in range(samples.n_wards)
    ]))
    return ess_delta, ess_delta / t, ess_lambda, ess_lambda / t


def _bench_row(
    study, scenario, run, sampler, dataset, samples, lambda_true
) -> BenchRow:
    ess_d, rate_d, ess_l, rate_l = _ess_rates(samples)
    tau, coverage, mae = _recovery_metrics(samples, lambda_true)
    return BenchRow(
        study=study,
        scenario=scenario,
        run=run,
        sampler=sampler,
        n_wards=dataset.n_wards,
        n_comparisons=dataset.n_comparisons,
        wall_time=samples.sampling_time,
        ess_delta=ess_d,
        ess_per_sec_delta=rate_d,
        ess_lambda_mean=ess_l,
        ess_per_sec_lambda=rate_l,
        tie_fraction=dataset.n_tie_events / dataset.n_comparisons,
        kendall_tau=tau,
        coverage=coverage,
        mae=mae,
        delta_median=float(np.median(samples.delta_draws)),
        alpha2_median=float(np.median(samples.alpha2_draws)),
    )


def run_efficiency_study(
    n_replicates: int = 25,
    graph: WardGraph | None = None,
    n_comparisons: int = 800,
    gibbs_iterations: int = 5000,
    gibbs_burn_in: int = 100,
    mhrw_iterations: int = 100_000,
    mhrw_burn_in: int = 1000,
    base_seed: int = 0,
) -> list[BenchRow]:
    """Replicated PG-vs-MHRW comparison on a county-scale graph prior.

    Per replicate: qualities drawn from the graph prior with alpha2 = 1, the
    tie parameter drawn U[0, 1], comparisons simulated, both samplers fitted.
    """
    if graph is None:
        graph = surrogate_county_graph()
    prior = build_spatial_covariance(graph, alpha2=1.0)
    rows = []
    for r in range(n_replicates):
        rng = np.random.default_rng(base_seed + 1000 * r)
        lam_true = sample_from_prior(prior, rng)
        delta_true = rng.uniform(0.0, 1.0)
        dataset = simulate_comparisons(lam_true, delta_true, n_comparisons, rng)
        g = run_gibbs(
            dataset,
            prior,
            SamplerConfig(
                n_iterations=gibbs_iterations,
                burn_in=gibbs_burn_in,
                seed=base_seed + 1000 * r + 1,
            ),
        )
        m = run_mhrw_baseline(
            dataset,
            prior,
            SamplerConfig(
                n_iterations=mhrw_iterations,
                burn_in=mhrw_burn_in,
                seed=base_seed + 1000 * r + 2,
            ),
        )
        rows.append(_bench_row("efficiency", "county", r, "pg_gibbs", dataset, g, lam_true))
        rows.append(_bench_row("efficiency", "county", r, "mhrw", dataset, m, lam_true))
    return rows


def run_scalability_study(
    sizes: tuple[int, ...] = (16, 32, 64, 128, 256, 512, 1024),
    runs_per_size: int = 10,
    true_delta: float = 0.5,
    gibbs_iterations: int = 5000,
    gibbs_burn_in: int = 100,
    mhrw_iterations: int = 100_000,
    mhrw_burn_in: int = 1000,
    mhrw_max_wards: int | None = 512,
    base_seed: int = 0,
) -> list[BenchRow]:
    """Wall-time ladder over ward counts with Wishart-simulated priors.

    The MHRW baseline is skipped above ``mhrw_max_wards`` (pass None to skip
    it entirely, or a large value to always include it).
    """
    rows = []
    for n_wards in sizes:
        for r in range(runs_per_size):
            rng = np.random.default_rng(base_seed + 7919 * n_wards + r)
            prior = simulate_prior_covariance_wishart(n_wards, rng)
            lam_true = sample_from_prior(prior, rng)
            dataset = simulate_comparisons(lam_true, true_delta, 10 * n_wards, rng)
            g = run_gibbs(
                dataset,
                prior,
                SamplerConfig(
                    n_iterations=gibbs_iterations,
                    burn_in=gibbs_burn_in,
                    seed=base_seed + 7919 * n_wards + r + 1,
                ),
            )
            rows.append(
                _bench_row("scalability", f"N={n_wards}", r, "pg_gibbs", dataset, g, lam_true)
            )
            if mhrw_max_wards is not None and n_wards <= mhrw_max_wards:
                m = run_mhrw_baseline(
                    dataset,
                    prior,
                    SamplerConfig(
                        n_iterations=mhrw_iterations,
                        burn_in=mhrw_burn_in,
                        seed=base_seed + 7919 * n_wards + r + 2,
                    ),
                )
                rows.append(
                    _bench_row("scalability", f"N={n_wards}", r, "mhrw", dataset, m, lam_true)
                )
    return rows


def run_sensitivity_study(
    graph: WardGraph | None = None,
    n_comparisons: int = 800,
    tie_fractions: tuple[float, ...] = (0.05, 0.20, 0.50, 0.75),
    n_seeds: int = 3,
    n_iterations: int = 5000,
    burn_in: int = 100,
    base_seed: int = 0,
) -> list[BenchRow]:
    """Tie-fraction and alpha2-fixing sensitivity scenarios.

    Family (a): one dataset fitted with alpha2 learned and then fixed at very
    strong / strong / weak correlation levels taken from the learned 95%
    credible interval.  Family (b): matched-seed datasets simulated at tie
    parameters calibrated to hit the target tie fractions.
    """
    if graph is None:
        graph = surrogate_county_graph()
    prior = build_spatial_covariance(graph, alpha2=1.0)
    rows = []

    # (b) tie-fraction ladder on matched seeds
    for s in range(n_seeds):
        lam_rng = np.random.default_rng(base_seed + 31 * s)
        lam_true = sample_from_prior(prior, lam_rng)
        for frac in tie_fractions:
            delta = calibrate_delta_for_tie_fraction(frac)
            data_rng = np.random.default_rng(base_seed + 31 * s + 7)
            dataset = simulate_comparisons(lam_true, delta, n_comparisons, data_rng)
            g = run_gibbs(
                dataset,
                prior,
                SamplerConfig(
                    n_iterations=n_iterations,
                    burn_in=burn_in,
                    seed=base_seed + 31 * s + 11,
                ),
            )
            rows.append(
                _bench_row(
                    "sensitivity", f"ties={frac:.2f}", s, "pg_gibbs", dataset, g, lam_true
                )
            )

    # (a) fixed vs learned alpha2 on one dataset
    rng = np.random.default_rng(base_seed + 101)
    lam_true = sample_from_prior(prior, rng)
    dataset = simulate_comparisons(lam_true, 0.5, n_comparisons, rng)
    learned = run_gibbs(
        dataset,
        prior,
        SamplerConfig(n_iterations=n_iterations, burn_in=burn_in, seed=base_seed + 103),
    )
    rows.append(
        _bench_row("sensitivity", "alpha2=learned", 0, "pg_gibbs", dataset, learned, lam_true)
    )
    lo = float(np.quantile(learned.alpha2_draws, 0.025))
    hi = float(np.quantile(learned.alpha2_draws, 0.975))
    for label, value in (
        ("very_strong", lo / 10.0),
        ("strong", lo),
        ("weak", hi),
    ):
        fixed_prior = SpatialPrior(
            mean=prior.mean, base_corr=prior.base_corr, alpha2=value
        )
        fit = run_gibbs(
            dataset,
            fixed_prior,
            SamplerConfig(
                n_iterations=n_iterations,
                burn_in=burn_in,
                learn_alpha2=False,
                seed=base_seed + 103,
            ),
        )
        rows.append(
            _bench_row(
                "sensitivity", f"alpha2={label}", 0, "pg_gibbs", dataset, fit, lam_true
            )
        )
    return rows


def write_bench_csv(rows: list[BenchRow], path) -> None:
    names = [f.name for f in fields(BenchRow)]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=names)
        writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))


def load_scenario(path) -> SimulationScenario:
    """Parse a key-value scenario file (``key = value`` or ``key: value`` lines)."""
    keys = {
        "wards": ("n_wards", int),
        "comparisons": ("n_comparisons", int),
        "delta": ("true_delta", float),
        "alpha2": ("alpha2", float),
        "prior": ("prior", str),
        "iterations": ("n_iterations", int),
        "burn_in": ("burn_in", int),
        "seeds": ("seeds", lambda s: tuple(int(v) for v in s.split(","))),
    }
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            if sep not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition(sep)
            key = key.strip().lower()
            if key not in keys:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            name, cast = keys[key]
            values[name] = cast(value.strip())
    if "n_wards" not in values:
        raise ValueError(f"{path}: missing required key 'wards'")
    return SimulationScenario(**values)
