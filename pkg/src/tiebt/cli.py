"""Command-line entry points: fit, simulate, bench, ess, serve."""

from __future__ import annotations

import os
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from . import io as io_mod
from . import report
from .gibbs import SamplerConfig, run_gibbs
from .spatial import build_spatial_covariance, load_adjacency_csv, surrogate_county_graph


@click.group()
def main():
    """Bayesian Bradley-Terry inference with tied comparisons."""


@main.command()
@click.argument("comparisons_csv", type=click.Path(exists=True))
@click.argument("adjacency_csv", type=click.Path(exists=True))
@click.option("-o", "--output-dir", type=click.Path(), default="fit_output", show_default=True)
@click.option("--iterations", default=5000, show_default=True)
@click.option("--burn-in", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--alpha2", default=1.0, show_default=True, help="Initial signal variance.")
@click.option("--fixed-alpha2", is_flag=True, help="Fix alpha2 instead of learning it.")
@click.option("--fixed-delta", type=float, default=None, help="Fix the tie parameter.")
@click.option("--figures/--no-figures", default=True, show_default=True)
def fit(
    comparisons_csv,
    adjacency_csv,
    output_dir,
    iterations,
    burn_in,
    seed,
    alpha2,
    fixed_alpha2,
    fixed_delta,
    figures,
):
    """Fit the tie model to a judgement CSV with a ward adjacency CSV."""
    graph = load_adjacency_csv(adjacency_csv)
    dataset, labels, _ = io_mod.load_comparisons_csv(comparisons_csv, graph.labels)
    prior = build_spatial_covariance(graph, alpha2=alpha2)
    config = SamplerConfig(
        n_iterations=iterations,
        burn_in=burn_in,
        seed=seed,
        learn_alpha2=not fixed_alpha2,
        fixed_delta=fixed_delta,
    )
    click.echo(
        f"Fitting {dataset.n_comparisons} comparisons "
        f"({dataset.n_tie_events} ties) over {dataset.n_wards} wards..."
    )
    samples = run_gibbs(dataset, prior, config)
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    io_mod.write_posterior_draws(samples, labels, outdir / "draws.csv")
    summary = samples.summary()
    io_mod.write_summary_csv(summary, labels, outdir / "summary.csv")
    if figures:
        for path in report.save_fit_figures(samples, labels, outdir):
            click.echo(f"wrote {path}")
    click.echo(f"delta: {summary['delta']['formatted']}")
    click.echo(f"alpha2: {summary['alpha2']['formatted']}")
    click.echo(f"sampler loop: {samples.sampling_time:.1f}s; outputs in {outdir}/")


@main.command()
@click.option("--wards", default=16, show_default=True)
@click.option("--comparisons", type=int, default=None, help="Defaults to 10x wards.")
@click.option("--delta", default=0.5, show_default=True)
@click.option("--alpha2", default=1.0, show_default=True)
@click.option(
    "--prior",
    type=click.Choice(["graph", "wishart"]),
    default="graph",
    show_default=True,
)
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(), default="simulated.csv", show_default=True)
def simulate(wards, comparisons, delta, alpha2, prior, seed, output):
    """Simulate a synthetic judgement CSV from the tie model."""
    rng = np.random.default_rng(seed)
    if prior == "wishart":
        spatial = bench_mod.simulate_prior_covariance_wishart(wards, rng, alpha2)
        labels = [f"Ward {k + 1:02d}" for k in range(wards)]
    else:
        graph = surrogate_county_graph()
        if wards > graph.n_wards:
            raise click.UsageError(
                f"graph prior supports up to {graph.n_wards} wards; use --prior wishart"
            )
        labels = graph.labels[:wards]
        sub = graph.adjacency[:wards, :wards]
        from .spatial import WardGraph

        spatial = build_spatial_covariance(
            WardGraph(labels=labels, adjacency=sub), alpha2
        )
    lam_true = bench_mod.sample_from_prior(spatial, rng)
    n_comparisons = comparisons if comparisons is not None else 10 * wards
    dataset = bench_mod.simulate_comparisons(lam_true, delta, n_comparisons, rng)
    events = []
    seq = 0
    for i in range(wards):
        for j in range(wards):
            for _ in range(int(dataset.wins[i, j])):
                events.append(
                    {
                        "judge_id": "sim",
                        "ward_i": labels[i],
                        "ward_j": labels[j],
                        "outcome": "i",
                        "timestamp": seq,
                    }
                )
                seq += 1
            if i < j:
                for _ in range(int(dataset.ties[i, j])):
                    events.append(
                        {
                            "judge_id": "sim",
                            "ward_i": labels[i],
                            "ward_j": labels[j],
                            "outcome": "tie",
                            "timestamp": seq,
                        }
                    )
                    seq += 1
    io_mod.write_comparisons_csv(events, output)
    truth_path = Path(output).with_suffix(".truth.csv")
    with open(truth_path, "w") as fh:
        fh.write("ward,lambda_true\n")
        for label, value in zip(labels, lam_true):
            fh.write(f"{label},{value:.8g}\n")
    click.echo(
        f"wrote {len(events)} comparisons ({dataset.n_tie_events} ties) to {output}; "
        f"truth in {truth_path}"
    )


@main.command()
@click.argument("study", type=click.Choice(["efficiency", "scalability", "sensitivity"]))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Scenario key-value file overriding the defaults.")
@click.option("--replicates", type=int, default=None, help="Replicates / runs per size.")
@click.option("--sizes", default=None, help="Comma-separated ward counts (scalability).")
@click.option("--mhrw-iterations", default=100_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "--output-dir", type=click.Path(), default="bench_output", show_default=True)
def bench(study, config_path, replicates, sizes, mhrw_iterations, seed, output_dir):
    """Run a benchmark study and write its CSV report plus figures."""
    scenario = bench_mod.load_scenario(config_path) if config_path else None
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    mhrw_burn_in = min(1000, mhrw_iterations // 10)
    if study == "efficiency":
        rows = bench_mod.run_efficiency_study(
            n_replicates=replicates or 25,
            n_comparisons=scenario.n_comparisons if scenario else 800,
            gibbs_iterations=scenario.n_iterations if scenario else 5000,
            gibbs_burn_in=scenario.burn_in if scenario else 100,
            mhrw_iterations=mhrw_iterations,
            mhrw_burn_in=mhrw_burn_in,
            base_seed=seed,
        )
        figures = report.save_efficiency_figures(rows, outdir)
    elif study == "scalability":
        size_list = (
            tuple(int(s) for s in sizes.split(","))
            if sizes
            else (16, 32, 64, 128, 256, 512, 1024)
        )
        rows = bench_mod.run_scalability_study(
            sizes=size_list,
            runs_per_size=replicates or 10,
            gibbs_iterations=scenario.n_iterations if scenario else 5000,
            gibbs_burn_in=scenario.burn_in if scenario else 100,
            mhrw_iterations=mhrw_iterations,
            mhrw_burn_in=mhrw_burn_in,
            base_seed=seed,
        )
        figures = report.save_scalability_figure(rows, outdir)
    else:
        rows = bench_mod.run_sensitivity_study(
            n_seeds=replicates or 3,
            n_iterations=scenario.n_iterations if scenario else 5000,
            burn_in=scenario.burn_in if scenario else 100,
            base_seed=seed,
        )
        figures = report.save_sensitivity_figures(rows, outdir)
    csv_path = outdir / f"{study}_report.csv"
    bench_mod.write_bench_csv(rows, csv_path)
    click.echo(f"wrote {csv_path} and {len(figures)} figure(s) to {outdir}/")


@main.command()
@click.argument("chain_file", type=click.Path(exists=True))
@click.option("--column", default=None, help="Column name or index (default: last).")
def ess(chain_file, column):
    """Effective sample size of a chain stored in a delimited file."""
    chain = io_mod.load_chain_csv(chain_file, column)
    value = bench_mod.effective_sample_size(chain)
    click.echo(f"n = {chain.size}, ESS = {value:.1f}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--data-dir", default="study_data", show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, data_dir, seed, host):
    """Host the study HTTP API (DATA_DIR and PORT env vars override flags)."""
    import uvicorn

    from .service import create_app

    data_dir = os.environ.get("DATA_DIR", data_dir)
    port = int(os.environ.get("PORT", port))
    app = create_app(data_dir, seed=seed)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
