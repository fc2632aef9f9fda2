"""Reference scaffolds built from canonical witness motifs.

Motif ``M_i`` has its hub at ``(spacing * i, 0)`` and spokes at
``60 deg, 120 deg, ...`` so every motif owns a spoke at 60 degrees (except
that with a single spoke, which owns only that one) and every motif of
degree >= 2 owns one at 120 degrees.  Consecutive motifs are chained by a
horizontal connector from the 60 degree spoke of ``M_i`` to the 120 degree
spoke of ``M_{i+1}``.

Vertex ids: hubs ``0..5`` first, then spokes motif by motif in angle order,
then any extra vertices.
"""
from __future__ import annotations

import math

import numpy as np

from .graph import IDENTITY, EmbeddedGraph, WeightKernel
from .motifs import canonical_motif

VARIANTS = ("heterogeneous", "unconstrained", "uniform")
REFERENCE_EPSILON = 10.0


def _scaffold(degrees, k: float, spacing: float):
    hubs, spokes, edges = [], [], []
    spoke_of = []  # per motif: angle index -> vertex id
    n_hubs = len(degrees)
    next_id = n_hubs
    for i, n in enumerate(degrees):
        m = canonical_motif(n, k, k / 2, rotation=math.pi / 3, center=(spacing * i, 0.0))
        hubs.append((i, m.hub))
        ids = {}
        for j, x in enumerate(m.spokes):
            spokes.append((next_id, x))
            edges.append((i, next_id))
            ids[j] = next_id
            next_id += 1
        spoke_of.append(ids)
    connectors = [(spoke_of[i][0], spoke_of[i + 1][1]) for i in range(n_hubs - 1)]
    return hubs, spokes, edges, spoke_of, connectors, next_id


def build_reference_graph(variant: str = "heterogeneous", k: float = 100.0, spacing: float = 300.0,
                          kernel: WeightKernel = IDENTITY) -> EmbeddedGraph:
    """Reference scaffold.

    ``heterogeneous``
        Motifs of degree 1..6 plus one extra vertex splitting the connector
        between the degree-3 and degree-4 motifs: 28 vertices, 27 edges.
    ``unconstrained``
        The heterogeneous scaffold with the degree-6 hub removed and its
        three antipodal spoke pairs joined by diameters, which cross at the
        removed hub's position.
    ``uniform``
        Six degree-4 motifs: 30 vertices, 29 edges.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    degrees = (4,) * 6 if variant == "uniform" else (1, 2, 3, 4, 5, 6)
    hubs, spokes, edges, spoke_of, connectors, next_id = _scaffold(degrees, k, spacing)
    verts = hubs + spokes
    if variant == "uniform":
        return EmbeddedGraph.from_ids(verts, edges + connectors, kernel)

    # split the M3-M4 connector at its midpoint
    a, b = connectors[2]
    pos = dict(verts)
    x_id = next_id
    verts.append((x_id, 0.5 * (np.asarray(pos[a]) + np.asarray(pos[b]))))
    connectors = connectors[:2] + [(a, x_id), (x_id, b)] + connectors[3:]
    if variant == "heterogeneous":
        return EmbeddedGraph.from_ids(verts, edges + connectors, kernel)

    hub6 = len(degrees) - 1
    verts = [(v, x) for v, x in verts if v != hub6]
    edges = [e for e in edges if hub6 not in e]
    ring = spoke_of[hub6]
    diameters = [(ring[j], ring[j + 3]) for j in range(3)]
    return EmbeddedGraph.from_ids(verts, edges + connectors + diameters, kernel)


def asymmetric_motif(k: float = 100.0, angles_deg=(0.0, 60.0, 210.0),
                     kernel: WeightKernel = IDENTITY) -> EmbeddedGraph:
    """Hub (id 0) with spokes (ids 1..) at the given angles and length ``k``."""
    th = np.radians(np.asarray(angles_deg, dtype=float))
    verts = [(0, (0.0, 0.0))] + [(i + 1, (k * math.cos(t), k * math.sin(t))) for i, t in enumerate(th)]
    return EmbeddedGraph.from_ids(verts, [(0, i + 1) for i in range(len(th))], kernel)
