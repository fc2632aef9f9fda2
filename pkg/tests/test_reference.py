from __future__ import annotations

import numpy as np
import pytest

from geospectra.graph import check_constraints, identifiability_scale, laplacian
from geospectra.motifs import greedy_tiling
from geospectra.reference import REFERENCE_EPSILON, VARIANTS, asymmetric_motif, build_reference_graph
from geospectra.repair import detect_violations


def test_heterogeneous_counts(heterogeneous):
    assert (heterogeneous.n, heterogeneous.m) == (28, 27)


def test_heterogeneous_clean(heterogeneous):
    rep = check_constraints(heterogeneous, REFERENCE_EPSILON, k_min=identifiability_scale(45.0, REFERENCE_EPSILON))
    assert rep.clean


def test_heterogeneous_motifs(heterogeneous):
    assert sorted(m.degree for m in greedy_tiling(heterogeneous)) == [1, 2, 3, 4, 5, 6]


def test_connected(heterogeneous, uniform_graph):
    for g in (heterogeneous, uniform_graph):
        ev = np.linalg.eigvalsh(laplacian(g))
        assert ev[1] > 1e-9 * ev[-1]


def test_uniform(uniform_graph):
    assert uniform_graph.n == 30
    deg = uniform_graph.degrees()
    hubs = [m for m in greedy_tiling(uniform_graph) if m.degree == 4]
    assert len(hubs) == 6 and np.sum(deg == 4) >= 6
    assert check_constraints(uniform_graph, REFERENCE_EPSILON).thick


def test_unconstrained(unconstrained):
    kinds = [v.kind for v in detect_violations(unconstrained, REFERENCE_EPSILON)]
    assert kinds and "crossing" in kinds


def test_unknown_variant():
    with pytest.raises(ValueError):
        build_reference_graph("hexagonal")


def test_variants_deterministic():
    for v in VARIANTS:
        a, b = build_reference_graph(v), build_reference_graph(v)
        assert a.to_json() == b.to_json()


def test_asymmetric_motif():
    g = asymmetric_motif(100.0)
    assert g.n == 4 and g.m == 3
    ang = sorted(np.degrees(np.arctan2(*(g.coords[1:] - g.coords[0]).T[::-1])) % 360)
    np.testing.assert_allclose(ang, [0, 60, 210], atol=1e-9)
    np.testing.assert_allclose(g.edge_lengths(), 100.0)
