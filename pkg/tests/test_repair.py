from __future__ import annotations

import json

import numpy as np
import pytest

from geospectra.ctpl import CtplParams
from geospectra.errors import DenseViolationError
from geospectra.graph import EmbeddedGraph, apply_vertex_noise
from geospectra.repair import RepairLog, detect_violations, repair, repair_distortion
from oracles import sparse_violation_graph


def x_graph(scale=1.0):
    verts = [(0, (0.0, 0.0)), (1, (scale, scale)), (2, (0.0, scale)), (3, (scale, 0.0))]
    return EmbeddedGraph.from_ids(verts, [(0, 1), (2, 3)])


def assert_weights_from_geometry(g: EmbeddedGraph):
    lengths = np.array([np.linalg.norm(g.coords[i] - g.coords[j]) for i, j in g.edges])
    np.testing.assert_allclose(g.edge_weights(), g.kernel(lengths), rtol=1e-14)


class TestDetect:
    def test_thick_graph(self, heterogeneous):
        assert detect_violations(heterogeneous, 10.0) == []

    def test_x_crossing(self):
        v = detect_violations(x_graph(), 0.1)
        assert len(v) == 1 and v[0].kind == "crossing"

    def test_reference_unconstrained(self, unconstrained):
        kinds = [v.kind for v in detect_violations(unconstrained, 10.0)]
        assert "crossing" in kinds

    def test_severity_positive(self, unconstrained):
        assert all(v.severity > 0 for v in detect_violations(unconstrained, 10.0))

    def test_planar_only(self):
        g = EmbeddedGraph.from_ids([(0, (0, 0, 0)), (1, (1, 0, 0))], [(0, 1)])
        with pytest.raises(ValueError):
            detect_violations(g, 0.1)


class TestRepair:
    def test_identity_on_thick_graph(self, heterogeneous):
        out, log = repair(heterogeneous, 10.0)
        assert out.ids == heterogeneous.ids and out.edges == heterogeneous.edges
        assert log.edits == [] and len(log.phi_trace) == 1
        d = repair_distortion(heterogeneous, out, log)
        assert d.spectral_distance == 0 and d.edit_count == 0 and d.rows_touched == 0

    def test_x_crossing(self):
        g = x_graph()
        out, log = repair(g, 0.1)
        assert out.n == 5 and out.m == 4
        assert out.subdivision == {4}
        np.testing.assert_allclose(out.coords[out.index(4)], (0.5, 0.5))
        assert log.phi_trace[-1] <= log.phi_trace[0] - 1
        assert detect_violations(out, 0.1) == []

    def test_collision_fusion(self):
        eps = 1.0
        verts = [(0, (0.0, 0.0)), (1, (0.5, 0.0)), (2, (-10.0, 0.0)), (3, (10.0, 5.0))]
        g = EmbeddedGraph.from_ids(verts, [(0, 2), (1, 3)])
        out, log = repair(g, eps)
        assert out.n == g.n - 1
        assert [e.kind for e in log.edits] == ["fuse"]
        np.testing.assert_allclose(out.coords[out.index(0)], (0.25, 0.0))
        assert set(out.edge_ids()) == {(0, 2), (0, 3)}
        assert detect_violations(out, eps) == []

    def test_fusion_drops_self_loop_and_parallel(self):
        verts = [(0, (0.0, 0.0)), (1, (0.3, 0.0)), (2, (10.0, 10.0))]
        g = EmbeddedGraph.from_ids(verts, [(0, 1), (0, 2), (1, 2)])
        out, _ = repair(g, 1.0)
        assert out.edge_ids() == [(0, 2)]

    def test_contact_split_rows(self):
        verts = [(0, (0.0, 0.0)), (1, (10.0, 0.0)), (2, (5.0, 0.3))]
        g = EmbeddedGraph.from_ids(verts, [(0, 1)])
        out, log = repair(g, 1.0)
        assert [e.kind for e in log.edits] == ["split_contact"]
        assert set(out.edge_ids()) == {(0, 2), (1, 2)}
        assert repair_distortion(g, out, log).rows_touched <= 3

    def test_contact_near_endpoint_fuses(self):
        # vertex 2 grazes edge (0, 1) right beside endpoint 0; splitting would
        # only reroute the edge through 2, so the pair is fused instead
        verts = [(0, (0.0, 0.0)), (1, (10.0, 0.0)), (2, (0.6, 0.2)), (3, (0.6, 20.0))]
        g = EmbeddedGraph.from_ids(verts, [(0, 1), (2, 3)])
        assert detect_violations(g, 1.0)[0].kind == "contact"
        out, log = repair(g, 1.0)
        assert [(e.kind, e.before) for e in log.edits] == [("fuse", (0, 2))]
        assert set(out.edge_ids()) == {(0, 1), (0, 3)}
        assert log.monotone and detect_violations(out, 1.0) == []

    def test_crossing_split_rows(self):
        out, log = repair(x_graph(10.0), 0.5)
        # the crossing edit rewires two edges; each endpoint row and the new row change
        assert repair_distortion(x_graph(10.0), out, log).rows_touched == 5

    def test_reference_repair(self, unconstrained):
        out, log = repair(unconstrained, 10.0)
        assert detect_violations(out, 10.0) == []
        assert log.monotone
        assert len(log.phi_trace) <= log.phi_trace[0]
        assert out.subdivision
        d = repair_distortion(unconstrained, out, log)
        assert np.isfinite(d.spectral_distance) and d.spectral_distance > 0
        assert_weights_from_geometry(out)

    def test_noise_exemption(self, unconstrained, rng):
        out, _ = repair(unconstrained, 10.0)
        p = CtplParams(c=1.0, lam=0.006151, r_max=40.0)
        moved = apply_vertex_noise(out, p, rng)
        for v in out.ids:
            i = out.index(v)
            same = np.array_equal(moved.coords[i], out.coords[i])
            assert same == (v in out.subdivision)

    def test_dense_guard(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(0, 0.5, (12, 2))
        g = EmbeddedGraph.from_ids([(i, tuple(p)) for i, p in enumerate(pts)], [(i, i + 1) for i in range(11)])
        with pytest.raises(DenseViolationError):
            repair(g, 1.0)

    def test_edit_budget(self):
        with pytest.raises(DenseViolationError):
            repair(x_graph(), 0.1, max_edits=0)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_sparse(self, seed):
        r = np.random.default_rng(seed)
        verts, edges = sparse_violation_graph(r)
        g = EmbeddedGraph.from_ids(verts, edges)
        assert detect_violations(g, 5.0)
        out, log = repair(g, 5.0)
        assert detect_violations(out, 5.0) == [] and log.monotone
        assert_weights_from_geometry(out)

    def test_log_json(self, unconstrained):
        _, log = repair(unconstrained, 10.0)
        d = json.loads(log.to_json())
        assert len(d["edits"]) == len(log.edits)
        assert d["phi_trace"] == log.phi_trace
        assert {e["kind"] for e in d["edits"]} <= {"split_crossing", "split_contact", "fuse"}

    def test_repaired_graph_json(self, unconstrained):
        out, _ = repair(unconstrained, 10.0)
        d = json.loads(out.to_json())
        flagged = {v["id"] for v in d["vertices"] if v.get("subdivision")}
        assert flagged == set(out.subdivision)

    def test_monotone_definition(self):
        log = RepairLog()
        for v0, c in [(5, 3), (5, 2), (4, 4), (4, 4)]:
            log.record(v0, c)
        assert not log.monotone
        log.component_trace.pop()
        assert log.monotone

    def test_distortion_without_log(self):
        g = x_graph()
        out, _ = repair(g, 0.1)
        assert repair_distortion(g, out).edit_count == 1
