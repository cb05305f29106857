"""Correlated Gaussian priors on ward qualities from an adjacency graph.

The base correlation matrix is the normalised matrix exponential of the
adjacency matrix, K = D^{-1/2} e^A D^{-1/2} with D = diag(e^A), so adjacent
wards get high prior correlation and K has unit diagonal.  The full prior
covariance is alpha^2 * K with an inverse-gamma hyperprior on alpha^2.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh


@dataclass
class WardGraph:
    """Ward labels plus a symmetric 0/1 adjacency matrix (zero diagonal)."""

    labels: list[str]
    adjacency: np.ndarray
    regions: list[str] | None = None
    geometry: list | None = None

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=float)
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise ValueError("ward labels must be unique")
        if self.adjacency.shape != (n, n):
            raise ValueError("adjacency shape does not match label count")
        if not np.array_equal(self.adjacency, self.adjacency.T):
            raise ValueError("adjacency must be symmetric")
        if np.diagonal(self.adjacency).any():
            raise ValueError("adjacency must have zero diagonal")
        if not np.isin(self.adjacency, (0.0, 1.0)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if self.regions is not None and len(self.regions) != n:
            raise ValueError("regions must assign every ward exactly one region")

    @property
    def n_wards(self) -> int:
        return len(self.labels)

    def label_index(self) -> dict[str, int]:
        return {label: k for k, label in enumerate(self.labels)}


@dataclass
class SpatialPrior:
    """Gaussian prior N(mean, alpha2 * base_corr) on the quality vector."""

    mean: np.ndarray
    base_corr: np.ndarray
    alpha2: float
    alpha2_prior: tuple[float, float] = (0.01, 0.01)
    _corr_cho: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.base_corr = np.asarray(self.base_corr, dtype=float)
        n = self.base_corr.shape[0]
        if self.base_corr.shape != (n, n) or self.mean.shape != (n,):
            raise ValueError("mean/base_corr shapes are inconsistent")
        if self.alpha2 <= 0:
            raise ValueError("alpha2 must be positive")
        if np.abs(np.diagonal(self.base_corr) - 1.0).max() > 1e-10:
            raise ValueError("base correlation must have unit diagonal")
        if not np.allclose(self.base_corr, self.base_corr.T):
            raise ValueError("base correlation must be symmetric")

    @property
    def n_wards(self) -> int:
        return self.base_corr.shape[0]

    @property
    def covariance(self) -> np.ndarray:
        return self.alpha2 * self.base_corr

    def corr_cholesky(self):
        """Cached Cholesky factorisation of the base correlation."""
        if self._corr_cho is None:
            try:
                self._corr_cho = cho_factor(self.base_corr, lower=True)
            except np.linalg.LinAlgError as exc:
                raise np.linalg.LinAlgError(
                    "base correlation is not positive-definite"
                ) from exc
        return self._corr_cho

    def corr_inverse(self) -> np.ndarray:
        cho = self.corr_cholesky()
        return cho_solve(cho, np.eye(self.n_wards))

    def corr_quad_form(self, v: np.ndarray) -> float:
        """v^T K^{-1} v for the base correlation K."""
        return float(v @ cho_solve(self.corr_cholesky(), v))


def build_spatial_covariance(graph: WardGraph, alpha2: float) -> SpatialPrior:
    """Prior from the normalised matrix exponential of the graph adjacency."""
    if alpha2 <= 0:
        raise ValueError("alpha2 must be positive")
    a = graph.adjacency
    # A is symmetric, so e^A comes exactly from the eigendecomposition.
    w, v = eigh(a)
    exp_a = (v * np.exp(w)) @ v.T
    d = np.sqrt(np.diagonal(exp_a))
    corr = exp_a / np.outer(d, d)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return SpatialPrior(
        mean=np.zeros(graph.n_wards), base_corr=corr, alpha2=float(alpha2)
    )


def sample_alpha2(
    lam: np.ndarray,
    prior: SpatialPrior,
    rng,
    alpha2_prior: tuple[float, float] | None = None,
) -> float:
    """Conjugate inverse-gamma draw of the signal variance given lambda.

    With lambda ~ N(0, alpha2 K) and alpha2 ~ InvGamma(shape, scale), the
    full conditional is InvGamma(shape + N/2, scale + lambda^T K^{-1} lambda / 2).
    """
    lam = np.asarray(lam, dtype=float)
    shape, scale = alpha2_prior if alpha2_prior is not None else prior.alpha2_prior
    post_shape = shape + lam.size / 2.0
    post_scale = scale + prior.corr_quad_form(lam - prior.mean) / 2.0
    return 1.0 / rng.gamma(post_shape, 1.0 / post_scale)


def load_adjacency_csv(path, labels: list[str] | None = None) -> WardGraph:
    """Edge-list CSV with header ``ward_a,ward_b``.

    When ``labels`` is omitted the ward set is the sorted union of endpoint
    labels; pass the full table explicitly if isolated wards exist.
    """
    edges = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"ward_a", "ward_b"} - set(reader.fieldnames):
            raise ValueError("adjacency CSV must have header ward_a,ward_b")
        for row in reader:
            edges.append((row["ward_a"].strip(), row["ward_b"].strip()))
    if labels is None:
        labels = sorted({w for edge in edges for w in edge})
    index = {label: k for k, label in enumerate(labels)}
    adjacency = np.zeros((len(labels), len(labels)))
    for a, b in edges:
        if a not in index or b not in index:
            raise ValueError(f"edge ({a}, {b}) references an unknown ward")
        if a == b:
            raise ValueError(f"self-edge on ward {a}")
        adjacency[index[a], index[b]] = 1.0
        adjacency[index[b], index[a]] = 1.0
    return WardGraph(labels=list(labels), adjacency=adjacency)


def load_geojson_geometry(path, labels: list[str]) -> list:
    """Per-ward geometry from a FeatureCollection keyed by the ``name`` property."""
    with open(path) as fh:
        collection = json.load(fh)
    by_name = {}
    for feature in collection.get("features", []):
        name = feature.get("properties", {}).get("name")
        if name is not None:
            by_name[name] = feature.get("geometry")
    return [by_name.get(label) for label in labels]


#: Region names of the bundled benchmark graph.
SURROGATE_REGIONS = ("Ashworth", "Brindle", "Calder", "Derwent")


def surrogate_county_graph() -> WardGraph:
    """Bundled 95-ward planar benchmark graph: a 5 x 19 lattice in four blocks.

    Stands in for a real county ward map so the benchmark studies run without
    any shapefile; real graphs load through :func:`load_adjacency_csv`.
    """
    rows, cols = 5, 19
    n = rows * cols
    adjacency = np.zeros((n, n))
    labels, regions = [], []
    bands = (5, 5, 5, 4)  # column count per region block
    band_of_col = np.repeat(np.arange(len(bands)), bands)
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            labels.append(f"Ward {k + 1:02d}")
            regions.append(SURROGATE_REGIONS[band_of_col[c]])
            if c + 1 < cols:
                adjacency[k, k + 1] = adjacency[k + 1, k] = 1.0
            if r + 1 < rows:
                adjacency[k, k + cols] = adjacency[k + cols, k] = 1.0
    return WardGraph(labels=labels, adjacency=adjacency, regions=regions)
