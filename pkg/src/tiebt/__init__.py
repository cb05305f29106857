"""Bayesian inference for the Bradley-Terry model with tied comparisons.

Core pieces: closed-form tie-model probabilities (:mod:`tiebt.model`), exact
Pólya-Gamma sampling (:mod:`tiebt.polya_gamma`), graph-based spatial priors
(:mod:`tiebt.spatial`), the augmented Gibbs sampler and its random-walk
baseline (:mod:`tiebt.gibbs`), benchmark studies (:mod:`tiebt.bench`) and a
comparative-judgement study service (:mod:`tiebt.service`).
"""

from .model import (
    ComparisonDataset,
    InvalidPairError,
    log_likelihood_standard,
    log_likelihood_ties,
    tie_probability,
    win_probability,
)
from .polya_gamma import PGParams, draw_pg, pg_identity_check, sample_pg, sample_pg_batch
from .spatial import (
    SpatialPrior,
    WardGraph,
    build_spatial_covariance,
    sample_alpha2,
    surrogate_county_graph,
)
from .gibbs import (
    ObservedPairs,
    PosteriorSamples,
    SamplerConfig,
    SamplerState,
    mh_step_delta,
    recentre,
    run_gibbs,
    run_mhrw_baseline,
    sample_lambda,
    sample_z,
)
from .bench import (
    BenchRow,
    SimulationScenario,
    calibrate_delta_for_tie_fraction,
    effective_sample_size,
    run_efficiency_study,
    run_scalability_study,
    run_sensitivity_study,
    simulate_comparisons,
    simulate_prior_covariance_wishart,
)

__version__ = "0.1.0"
