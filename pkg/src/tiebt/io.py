"""File formats: judgement CSVs, posterior draw files and summary tables."""

from __future__ import annotations

import csv

import numpy as np

from .model import ComparisonDataset
from .gibbs import PosteriorSamples

COMPARISON_FIELDS = ["judge_id", "ward_i", "ward_j", "outcome", "timestamp"]
OUTCOMES = ("i", "j", "tie", "skip")


def events_to_dataset(events, label_index: dict[str, int]) -> ComparisonDataset:
    """Fold raw judgement events into aggregated win/tie counts.

    Each event is a mapping with ward labels and an outcome in
    {i, j, tie, skip}; skips only bump the skip counter.
    """
    n = len(label_index)
    wins = np.zeros((n, n), dtype=np.int64)
    ties = np.zeros((n, n), dtype=np.int64)
    skips = 0
    for event in events:
        a = label_index[event["ward_i"]]
        b = label_index[event["ward_j"]]
        outcome = event["outcome"]
        if outcome == "i":
            wins[a, b] += 1
        elif outcome == "j":
            wins[b, a] += 1
        elif outcome == "tie":
            ties[a, b] += 1
            ties[b, a] += 1
        elif outcome == "skip":
            skips += 1
        else:
            raise ValueError(f"unknown outcome {outcome!r}")
    return ComparisonDataset(wins=wins, ties=ties, skips=skips)


def load_comparisons_csv(path, labels: list[str] | None = None):
    """Read a judgement CSV; returns (dataset, labels, raw events)."""
    events = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(COMPARISON_FIELDS) - set(reader.fieldnames):
            raise ValueError(
                f"comparison CSV must have header {','.join(COMPARISON_FIELDS)}"
            )
        for row in reader:
            if row["outcome"] not in OUTCOMES:
                raise ValueError(f"unknown outcome {row['outcome']!r}")
            events.append({k: row[k] for k in COMPARISON_FIELDS})
    if labels is None:
        labels = sorted({e["ward_i"] for e in events} | {e["ward_j"] for e in events})
    index = {label: k for k, label in enumerate(labels)}
    return events_to_dataset(events, index), labels, events


def write_comparisons_csv(events, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COMPARISON_FIELDS)
        writer.writeheader()
        for event in events:
            writer.writerow({k: event.get(k, "") for k in COMPARISON_FIELDS})


def write_posterior_draws(samples: PosteriorSamples, labels: list[str], path) -> None:
    """Newline-delimited draw records: iteration, lambda vector, delta, alpha2."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", *labels, "delta", "alpha2"])
        for k in range(samples.n_retained):
            writer.writerow(
                [
                    k,
                    *(f"{v:.8g}" for v in samples.lambda_draws[k]),
                    f"{samples.delta_draws[k]:.8g}",
                    f"{samples.alpha2_draws[k]:.8g}",
                ]
            )


def write_summary_csv(summary: dict, labels: list[str], path) -> None:
    """Per-ward medians/variances/quantiles plus delta and alpha2 rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "median", "variance", "q2.5", "q97.5", "formatted"])
        for label, ward in zip(labels, summary["wards"]):
            writer.writerow(
                [
                    label,
                    f"{ward['median']:.6g}",
                    f"{ward['variance']:.6g}",
                    f"{ward['q2.5']:.6g}",
                    f"{ward['q97.5']:.6g}",
                    "",
                ]
            )
        for name in ("delta", "alpha2"):
            entry = summary[name]
            writer.writerow(
                [
                    name,
                    f"{entry['median']:.6g}",
                    "",
                    f"{entry['q2.5']:.6g}",
                    f"{entry['q97.5']:.6g}",
                    entry["formatted"],
                ]
            )


def load_chain_csv(path, column: str | None = None) -> np.ndarray:
    """Read one numeric column (default: the last) from a delimited chain file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: empty chain file")
    header = rows[0]
    try:
        [float(v) for v in header]
        start, names = 0, None
    except ValueError:
        start, names = 1, header
    if column is None:
        idx = len(rows[start]) - 1
    elif names and column in names:
        idx = names.index(column)
    else:
        idx = int(column)
    return np.array([float(row[idx]) for row in rows[start:]])
