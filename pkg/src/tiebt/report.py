"""Matplotlib figure rendering for fit results and benchmark reports.

Figures are written next to the delimited outputs; everything uses the Agg
backend so reports render headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .gibbs import PosteriorSamples
from .model import tie_probability


def save_fit_figures(
    samples: PosteriorSamples, labels: list[str], outdir
) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    medians = np.median(samples.lambda_draws, axis=0)
    lo = np.quantile(samples.lambda_draws, 0.025, axis=0)
    hi = np.quantile(samples.lambda_draws, 0.975, axis=0)
    order = np.argsort(medians)
    fig, ax = plt.subplots(figsize=(max(6, len(labels) * 0.12), 4.5))
    xs = np.arange(len(labels))
    ax.errorbar(
        xs,
        medians[order],
        yerr=[medians[order] - lo[order], hi[order] - medians[order]],
        fmt="o",
        ms=3,
        lw=0.8,
        capsize=0,
        color="tab:blue",
        ecolor="lightsteelblue",
    )
    ax.set_xticks(xs)
    ax.set_xticklabels([labels[k] for k in order], rotation=90, fontsize=5)
    ax.set_ylabel("quality (posterior median, 95% CI)")
    ax.set_title("Ward quality estimates")
    fig.tight_layout()
    path = outdir / "ward_qualities.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(samples.delta_draws, lw=0.5, color="tab:blue")
    ax1.set_xlabel("retained iteration")
    ax1.set_ylabel("tie parameter")
    ax1.set_title("Trace")
    ax2.hist(samples.delta_draws, bins=40, color="tab:blue", alpha=0.8)
    ax2.set_xlabel("tie parameter")
    ax2.set_title("Posterior")
    fig.tight_layout()
    path = outdir / "delta_posterior.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    delta_med = float(np.median(samples.delta_draws))
    diffs = np.linspace(-6, 6, 241)
    probs = [tie_probability(np.array([d, 0.0]), 0, 1, delta_med) for d in diffs]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(diffs, probs, color="tab:blue")
    ax.set_xlabel("quality difference")
    ax.set_ylabel("P(tie)")
    ax.set_title(f"Tie probability at the posterior median (delta = {delta_med:.3f})")
    fig.tight_layout()
    path = outdir / "tie_probability_curve.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def _rows_by_sampler(rows, value):
    out = {}
    for row in rows:
        v = getattr(row, value)
        if v is not None:
            out.setdefault(row.sampler, []).append(v)
    return out


def save_efficiency_figures(rows, outdir) -> list[Path]:
    """ESS-per-second histograms, one panel per (sampler, parameter block)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    delta_rates = _rows_by_sampler(rows, "ess_per_sec_delta")
    lambda_rates = _rows_by_sampler(rows, "ess_per_sec_lambda")
    samplers = sorted(delta_rates)
    fig, axes = plt.subplots(len(samplers), 2, figsize=(9, 3.2 * len(samplers)), squeeze=False)
    for r, sampler in enumerate(samplers):
        axes[r][0].hist(delta_rates[sampler], bins=12, color="tab:blue", alpha=0.8)
        axes[r][0].set_title(f"{sampler}: ESS/sec, tie parameter")
        axes[r][1].hist(lambda_rates[sampler], bins=12, color="tab:orange", alpha=0.8)
        axes[r][1].set_title(f"{sampler}: mean ESS/sec, qualities")
        for ax in axes[r]:
            ax.set_xlabel("ESS per second")
    fig.tight_layout()
    path = outdir / "efficiency_ess_per_sec.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def save_scalability_figure(rows, outdir) -> list[Path]:
    """Mean sampler wall time against ward count, log-log, per sampler."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    by_sampler: dict[str, dict[int, list[float]]] = {}
    for row in rows:
        by_sampler.setdefault(row.sampler, {}).setdefault(row.n_wards, []).append(
            row.wall_time
        )
    fig, ax = plt.subplots(figsize=(6, 4))
    markers = {"pg_gibbs": "o", "mhrw": "s"}
    for sampler, per_n in sorted(by_sampler.items()):
        ns = sorted(per_n)
        means = [float(np.mean(per_n[n])) for n in ns]
        ax.loglog(ns, means, marker=markers.get(sampler, "x"), label=sampler)
    ax.set_xlabel("number of wards")
    ax.set_ylabel("mean wall time (s)")
    ax.legend()
    ax.set_title("Sampler scalability")
    fig.tight_layout()
    path = outdir / "scalability_wall_time.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def save_sensitivity_figures(rows, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    tie_rows = [r for r in rows if r.scenario.startswith("ties=")]
    if tie_rows:
        by_frac: dict[float, list[float]] = {}
        for row in tie_rows:
            by_frac.setdefault(float(row.scenario.split("=")[1]), []).append(row.mae)
        fracs = sorted(by_frac)
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        ax.errorbar(
            fracs,
            [float(np.mean(by_frac[f])) for f in fracs],
            yerr=[float(np.std(by_frac[f])) for f in fracs],
            marker="o",
            color="tab:blue",
        )
        ax.set_xlabel("target tie fraction")
        ax.set_ylabel("mean absolute quality error")
        ax.set_title("Recovery vs tie fraction")
        fig.tight_layout()
        path = outdir / "sensitivity_tie_fraction.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    alpha_rows = [r for r in rows if r.scenario.startswith("alpha2=")]
    if alpha_rows:
        names = [r.scenario.split("=")[1] for r in alpha_rows]
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        ax.bar(names, [r.kendall_tau for r in alpha_rows], color="tab:orange", alpha=0.85)
        ax.set_ylabel("Kendall tau vs truth")
        ax.set_title("Recovery under fixed vs learned signal variance")
        fig.tight_layout()
        path = outdir / "sensitivity_alpha2.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
