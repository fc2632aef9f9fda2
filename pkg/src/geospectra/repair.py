"""Local repair of epsilon-thickness defects.

Three edits are used: a crossing is split at its intersection point by a
new subdivision vertex, a vertex too close to an edge interior becomes an
interior vertex of that edge, and two colliding vertices are fused at
their midpoint.  Progress is tracked by ``Phi = |V0| + C`` where ``V0``
are original (non-subdivision) vertices and ``C`` the violation count.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DenseViolationError
from .graph import EmbeddedGraph, Violation, check_constraints
from .spectral import graph_spectrum, spectral_distance

EDIT_BUDGET_FACTOR = 10


def detect_violations(graph: EmbeddedGraph, epsilon: float) -> list:
    """All thickness defects, ordered by severity (desc) then ids (asc)."""
    if graph.d != 2:
        raise ValueError("violation detection is planar only")
    return list(check_constraints(graph, epsilon).violations)


@dataclass(frozen=True)
class RepairEdit:
    kind: str  # "split_crossing" | "split_contact" | "fuse"
    before: tuple
    after: tuple
    v0: int  # original vertices after the edit
    violations: int  # violation count after the edit


@dataclass
class RepairLog:
    edits: list = field(default_factory=list)
    phi_trace: list = field(default_factory=list)
    component_trace: list = field(default_factory=list)  # (|V0|, C) pairs

    def record(self, v0: int, c: int):
        self.phi_trace.append(v0 + c)
        self.component_trace.append((v0, c))

    @property
    def monotone(self) -> bool:
        """Each edit lowers ``|V0|`` or ``C`` without raising ``|V0|``."""
        for (v_prev, c_prev), (v, c) in zip(self.component_trace, self.component_trace[1:]):
            if v > v_prev or (v == v_prev and c >= c_prev):
                return False
        return True

    def to_json(self, **kw) -> str:
        return json.dumps(
            {
                "edits": [asdict(e) for e in self.edits],
                "phi_trace": self.phi_trace,
                "component_trace": self.component_trace,
            },
            **kw,
        )


class _Workspace:
    """Mutable id-keyed copy of a graph used during repair."""

    def __init__(self, graph: EmbeddedGraph):
        self.kernel = graph.kernel
        self.pos = {v: np.array(x, dtype=float) for v, x in zip(graph.ids, graph.coords)}
        self.edges = {frozenset(e) for e in graph.edge_ids()}
        self.sub = set(graph.subdivision)
        self.next_id = max(graph.ids, default=-1) + 1

    def graph(self) -> EmbeddedGraph:
        ids = sorted(self.pos)
        verts = [(v, self.pos[v]) for v in ids]
        edges = sorted(tuple(sorted(e)) for e in self.edges)
        return EmbeddedGraph.from_ids(verts, edges, self.kernel, self.sub)

    def v0(self) -> int:
        return len(self.pos) - len(self.sub)

    def _add(self, u, v):
        if u != v:
            self.edges.add(frozenset((u, v)))

    def split_crossing(self, a, b, c, d, point) -> int:
        s = self.next_id
        self.next_id += 1
        self.pos[s] = np.asarray(point, dtype=float)
        self.sub.add(s)
        self.edges.discard(frozenset((a, b)))
        self.edges.discard(frozenset((c, d)))
        for u in (a, b, c, d):
            self._add(u, s)
        return s

    def split_contact(self, v, a, b):
        self.edges.discard(frozenset((a, b)))
        self._add(a, v)
        self._add(v, b)

    def fuse(self, u, v) -> int:
        keep, drop = min(u, v), max(u, v)
        self.pos[keep] = 0.5 * (self.pos[keep] + self.pos[drop])
        if keep in self.sub and drop not in self.sub:
            self.sub.discard(keep)
        self.sub.discard(drop)
        del self.pos[drop]
        moved = [e for e in self.edges if drop in e]
        for e in moved:
            self.edges.discard(e)
            (other,) = e - {drop}
            self._add(keep, other)
        return keep


def _colliding_endpoint(ws: _Workspace, contact: tuple, epsilon: float):
    """Nearest endpoint of the contacted edge lying within ``epsilon`` of the vertex."""
    v, a, b = contact
    d = {u: float(np.linalg.norm(ws.pos[v] - ws.pos[u])) for u in (a, b)}
    u = min((a, b), key=lambda w: (d[w], w))
    return u if d[u] < epsilon else None


def repair(graph: EmbeddedGraph, epsilon: float, max_edits: int | None = None):
    """Repair ``graph`` until it is epsilon-thick.

    The most severe violation is handled first and violations are
    re-detected after every edit, so cascades caused by an edit are picked
    up immediately.

    Returns
    -------
    (EmbeddedGraph, RepairLog)

    Raises
    ------
    DenseViolationError
        If more than ``10 * (|V| + |E|)`` edits are needed, or fusion would
        collapse the whole graph onto a single vertex.
    """
    budget = EDIT_BUDGET_FACTOR * (graph.n + graph.m) if max_edits is None else max_edits
    ws = _Workspace(graph)
    log = RepairLog()
    current = graph
    viols = detect_violations(current, epsilon)
    log.record(ws.v0(), len(viols))
    while viols:
        if len(log.edits) >= budget:
            raise DenseViolationError(f"repair exceeded {budget} edits; violations are not sparse")
        top: Violation = viols[0]
        p = top.primitives
        if top.kind == "crossing":
            s = ws.split_crossing(*p, top.point)
            edit = ("split_crossing", p, (p[0], s, p[1], p[2], s, p[3]))
        elif top.kind == "contact" and _colliding_endpoint(ws, p, epsilon) is None:
            ws.split_contact(*p)
            edit = ("split_contact", p, (p[1], p[0], p[2]))
        else:
            if top.kind == "contact":
                # the vertex also collides with an endpoint; splitting would
                # just reroute the edge past it, so fuse the pair instead
                p = tuple(sorted((p[0], _colliding_endpoint(ws, p, epsilon))))
            if len(ws.pos) <= 2:
                raise DenseViolationError("fusion would collapse the graph to a single vertex")
            keep = ws.fuse(*p)
            edit = ("fuse", p, (keep,))
        current = ws.graph()
        viols = detect_violations(current, epsilon)
        log.edits.append(RepairEdit(*edit, ws.v0(), len(viols)))
        log.record(ws.v0(), len(viols))
    return current, log


@dataclass(frozen=True)
class RepairDistortion:
    spectral_distance: float
    edit_count: int
    rows_touched: int


def _rows(graph: EmbeddedGraph) -> dict:
    w = graph.edge_weights()
    rows = {v: {} for v in graph.ids}
    for (u, v), wk in zip(graph.edge_ids(), w):
        rows[u][v] = wk
        rows[v][u] = wk
    return rows


def repair_distortion(original: EmbeddedGraph, repaired: EmbeddedGraph, log: RepairLog | None = None,
                      rtol: float = 1e-12) -> RepairDistortion:
    """Spectral distance between the two graphs and the Laplacian rows that differ.

    Without a log, the edit count is estimated as the number of vertices
    added plus removed.
    """
    a, b = _rows(original), _rows(repaired)
    touched = 0
    for v in set(a) | set(b):
        if v not in a or v not in b:
            touched += 1
            continue
        ra, rb = a[v], b[v]
        if ra.keys() != rb.keys() or any(abs(ra[u] - rb[u]) > rtol * max(1.0, abs(ra[u])) for u in ra):
            touched += 1
    if log is not None:
        edits = len(log.edits)
    else:
        edits = len(set(a) ^ set(b))
    if original.m == 0 and repaired.m == 0:
        dist = 0.0
    else:
        dist = spectral_distance(graph_spectrum(original), graph_spectrum(repaired))
    return RepairDistortion(dist, edits, touched)
