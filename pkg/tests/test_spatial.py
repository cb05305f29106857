"""Graph-based prior construction and signal-variance conditional checks."""

import numpy as np
import pytest
from scipy.stats import invgamma, kstest

from tiebt.spatial import (
    SURROGATE_REGIONS,
    SpatialPrior,
    WardGraph,
    build_spatial_covariance,
    load_adjacency_csv,
    load_geojson_geometry,
    sample_alpha2,
    surrogate_county_graph,
)


def _graph(adjacency):
    n = adjacency.shape[0]
    return WardGraph(labels=[f"w{k}" for k in range(n)], adjacency=adjacency)


def path_graph(n):
    a = np.zeros((n, n))
    for k in range(n - 1):
        a[k, k + 1] = a[k + 1, k] = 1.0
    return _graph(a)


def test_empty_graph_gives_identity_correlation():
    prior = build_spatial_covariance(_graph(np.zeros((4, 4))), alpha2=1.0)
    assert np.allclose(prior.base_corr, np.eye(4), atol=1e-12)


def test_single_edge_correlation_is_tanh_one():
    # e^A for one edge has cosh(1) on the diagonal and sinh(1) off it.
    prior = build_spatial_covariance(path_graph(2), alpha2=1.0)
    assert prior.base_corr[0, 1] == pytest.approx(0.7615941559557649, abs=1e-12)
    assert prior.base_corr[1, 0] == pytest.approx(0.7615941559557649, abs=1e-12)


@pytest.mark.parametrize("n", [3, 8])
def test_unit_diagonal_exact(n):
    rng = np.random.default_rng(n)
    a = (rng.random((n, n)) < 0.4).astype(float)
    a = np.triu(a, 1)
    a = a + a.T
    prior = build_spatial_covariance(_graph(a), alpha2=2.0)
    assert np.array_equal(np.diagonal(prior.base_corr), np.ones(n))


def cycle_graph(n):
    g = path_graph(n)
    a = g.adjacency.copy()
    a[0, n - 1] = a[n - 1, 0] = 1.0
    return _graph(a)


def star_graph(n):
    a = np.zeros((n, n))
    a[0, 1:] = a[1:, 0] = 1.0
    return _graph(a)


@pytest.mark.parametrize(
    "graph",
    [path_graph(6), cycle_graph(7), star_graph(8), surrogate_county_graph()],
    ids=["path", "cycle", "star", "surrogate"],
)
def test_correlation_positive_definite(graph):
    prior = build_spatial_covariance(graph, alpha2=1.0)
    eigenvalues = np.linalg.eigvalsh(prior.base_corr)
    assert eigenvalues.min() > 0


def test_correlation_decays_with_path_distance():
    prior = build_spatial_covariance(path_graph(7), alpha2=1.0)
    row = prior.base_corr[0]
    assert all(row[k] > row[k + 1] for k in range(6))
    assert row[1] > 0.5


def test_covariance_scales_with_alpha2():
    graph = cycle_graph(5)
    p1 = build_spatial_covariance(graph, alpha2=1.0)
    p3 = build_spatial_covariance(graph, alpha2=3.0)
    assert np.allclose(p3.covariance, 3.0 * p1.covariance, atol=1e-12)
    assert np.allclose(p3.base_corr, p1.base_corr, atol=1e-12)


def test_corr_inverse_and_quad_form():
    prior = build_spatial_covariance(path_graph(4), alpha2=1.0)
    k_inv = prior.corr_inverse()
    assert np.allclose(k_inv @ prior.base_corr, np.eye(4), atol=1e-10)
    v = np.array([0.5, -1.0, 2.0, 0.1])
    assert prior.corr_quad_form(v) == pytest.approx(v @ k_inv @ v, abs=1e-10)


def test_build_rejects_nonpositive_alpha2():
    with pytest.raises(ValueError):
        build_spatial_covariance(path_graph(3), alpha2=0.0)


# ---------------------------------------------------------------------------
# Signal-variance conditional


def test_alpha2_conditional_single_ward():
    # N = 1, K = [1], lambda = [2]: InvGamma(shape + 1/2, scale + 2).
    prior = SpatialPrior(mean=np.zeros(1), base_corr=np.eye(1), alpha2=1.0)
    rng = np.random.default_rng(31)
    draws = np.array(
        [sample_alpha2(np.array([2.0]), prior, rng, (0.01, 0.01)) for _ in range(4000)]
    )
    target = invgamma(a=0.51, scale=2.01)
    assert kstest(draws, target.cdf).pvalue > 0.01


def test_alpha2_conditional_correlated_prior():
    graph = path_graph(3)
    prior = build_spatial_covariance(graph, alpha2=1.0)
    lam = np.array([0.8, -0.4, 1.1])
    # Independent quadratic form via a plain matrix inverse.
    quad = float(lam @ np.linalg.inv(prior.base_corr) @ lam)
    rng = np.random.default_rng(37)
    draws = np.array([sample_alpha2(lam, prior, rng) for _ in range(4000)])
    target = invgamma(a=0.01 + 1.5, scale=0.01 + quad / 2.0)
    assert kstest(draws, target.cdf).pvalue > 0.01
    assert (draws > 0).all()


def test_alpha2_prior_override():
    prior = SpatialPrior(mean=np.zeros(1), base_corr=np.eye(1), alpha2=1.0)
    rng = np.random.default_rng(41)
    strong = np.array(
        [sample_alpha2(np.zeros(1), prior, rng, (50.0, 50.0)) for _ in range(2000)]
    )
    # InvGamma(50.5, 50) concentrates near 1.
    assert abs(np.median(strong) - 1.0) < 0.1


# ---------------------------------------------------------------------------
# Containers and loaders


def test_ward_graph_validation():
    with pytest.raises(ValueError):
        WardGraph(labels=["a", "a"], adjacency=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        WardGraph(labels=["a", "b"], adjacency=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        WardGraph(labels=["a", "b"], adjacency=np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        WardGraph(labels=["a", "b"], adjacency=np.array([[1, 0], [0, 0]]))
    with pytest.raises(ValueError):
        WardGraph(labels=["a", "b"], adjacency=np.array([[0, 2], [2, 0]]))
    with pytest.raises(ValueError):
        WardGraph(labels=["a", "b"], adjacency=np.zeros((2, 2)), regions=["x"])


def test_spatial_prior_validation():
    with pytest.raises(ValueError):
        SpatialPrior(mean=np.zeros(2), base_corr=np.eye(2), alpha2=-1.0)
    bad = np.array([[2.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        SpatialPrior(mean=np.zeros(2), base_corr=bad, alpha2=1.0)


def test_load_adjacency_csv(tmp_path):
    path = tmp_path / "adj.csv"
    path.write_text("ward_a,ward_b\nAlpha,Beta\nBeta,Gamma\n")
    graph = load_adjacency_csv(path)
    assert graph.labels == ["Alpha", "Beta", "Gamma"]
    assert graph.adjacency[0, 1] == 1.0 and graph.adjacency[1, 2] == 1.0
    assert graph.adjacency[0, 2] == 0.0

    isolated = load_adjacency_csv(path, labels=["Alpha", "Beta", "Gamma", "Delta"])
    assert isolated.n_wards == 4
    assert isolated.adjacency[3].sum() == 0


def test_load_adjacency_csv_errors(tmp_path):
    bad_header = tmp_path / "bad.csv"
    bad_header.write_text("from,to\nA,B\n")
    with pytest.raises(ValueError):
        load_adjacency_csv(bad_header)
    self_edge = tmp_path / "self.csv"
    self_edge.write_text("ward_a,ward_b\nA,A\n")
    with pytest.raises(ValueError):
        load_adjacency_csv(self_edge)
    unknown = tmp_path / "unknown.csv"
    unknown.write_text("ward_a,ward_b\nA,B\n")
    with pytest.raises(ValueError):
        load_adjacency_csv(unknown, labels=["A"])


def test_load_geojson_geometry(tmp_path):
    path = tmp_path / "wards.geojson"
    path.write_text(
        '{"type": "FeatureCollection", "features": ['
        '{"type": "Feature", "properties": {"name": "A"},'
        ' "geometry": {"type": "Point", "coordinates": [0, 1]}}]}'
    )
    geoms = load_geojson_geometry(path, ["A", "B"])
    assert geoms[0] == {"type": "Point", "coordinates": [0, 1]}
    assert geoms[1] is None


def test_surrogate_county_graph_shape():
    graph = surrogate_county_graph()
    assert graph.n_wards == 95
    assert len(set(graph.labels)) == 95
    assert sorted(set(graph.regions)) == sorted(SURROGATE_REGIONS)
    degrees = graph.adjacency.sum(axis=1)
    assert degrees.max() <= 4
    assert degrees.min() >= 2
    # Connected: the walk matrix (I + A)^{N} has no zero entries.
    reach = np.linalg.matrix_power(np.eye(95) + graph.adjacency, 95)
    assert (reach > 0).all()
