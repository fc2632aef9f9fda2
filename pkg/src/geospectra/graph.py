"""Straight-line embedded weighted graphs and their Laplacians.

Edge weights are never stored: they are always recomputed from vertex
coordinates through a radial :class:`WeightKernel`, so a perturbed
embedding automatically carries perturbed weights.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import ctpl
from .errors import GraphError, ParameterError
from .segments import proper_intersection, scene_diameter

# ---------------------------------------------------------------------------
# kernels


def _identity(rho):
    return rho


def _power(rho, p):
    return np.power(rho, p)


def _affine(rho, a, b):
    return a * rho + b


def _gaussian(rho, sigma):
    return np.exp(-0.5 * (rho / sigma) ** 2)


# name -> (fn, w_max(rho_max, *p), lipschitz(rho_max, *p), nondecreasing, convex)
_KERNELS = {
    "identity": (_identity, lambda R: R, lambda R: 1.0, True, True),
    "power": (_power, lambda R, p: R**p, lambda R, p: p * R ** (p - 1), True, True),
    "affine": (_affine, lambda R, a, b: a * R + b, lambda R, a, b: a, True, True),
    "gaussian": (
        _gaussian,
        lambda R, s: 1.0,
        lambda R, s: 1.0 / (s * math.sqrt(math.e)),
        False,
        False,
    ),
}


@dataclass(frozen=True)
class WeightKernel:
    """Radial edge-weight kernel ``w = phi(rho)``.

    ``w_max`` and ``lipschitz`` are bounds on the operating range
    ``[0, rho_max]``; kernels such as the identity are unbounded globally.
    """

    name: str = "identity"
    params: tuple = ()

    def __post_init__(self):
        if self.name not in _KERNELS:
            raise ParameterError(f"unknown kernel {self.name!r}")
        if self.name == "power" and not (len(self.params) == 1 and self.params[0] >= 1):
            raise ParameterError("power kernel needs a single exponent p >= 1")
        if self.name == "affine" and not (len(self.params) == 2 and self.params[0] >= 0 and self.params[1] >= 0):
            raise ParameterError("affine kernel needs slope >= 0 and offset >= 0")
        if self.name == "gaussian" and not (len(self.params) == 1 and self.params[0] > 0):
            raise ParameterError("gaussian kernel needs a bandwidth > 0")

    def __call__(self, rho):
        return _KERNELS[self.name][0](np.asarray(rho, dtype=float), *self.params)

    def w_max(self, rho_max: float) -> float:
        return float(_KERNELS[self.name][1](rho_max, *self.params))

    def lipschitz(self, rho_max: float) -> float:
        return float(_KERNELS[self.name][2](rho_max, *self.params))

    @property
    def nondecreasing(self) -> bool:
        return _KERNELS[self.name][3]

    @property
    def convex(self) -> bool:
        return _KERNELS[self.name][4]

    def to_dict(self) -> dict:
        return {"name": self.name, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d) -> "WeightKernel":
        return cls(d["name"], tuple(d.get("params", ())))


IDENTITY = WeightKernel()


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True, eq=False)
class EmbeddedGraph:
    """Undirected graph with vertex coordinates in R^d.

    ``edges`` holds index pairs ``(i, j)`` with ``i < j`` into ``ids`` /
    ``coords``.  ``subdivision`` lists ids of vertices inserted by repair;
    noise is not applied to them by default.
    """

    ids: tuple
    coords: np.ndarray
    edges: tuple
    kernel: WeightKernel = IDENTITY
    subdivision: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        ids = tuple(int(i) for i in self.ids)
        coords = np.array(self.coords, dtype=float)
        if not ids:
            coords = coords.reshape(0, coords.shape[-1] if coords.ndim == 2 else 2)
        elif coords.ndim == 1:
            coords = coords.reshape(len(ids), -1)
        if coords.shape[0] != len(ids):
            raise GraphError("one coordinate row per vertex required")
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate vertex id")
        if not np.all(np.isfinite(coords)):
            raise GraphError("coordinates must be finite")
        n = len(ids)
        seen = set()
        edges = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise GraphError(f"self-loop at vertex {ids[i]}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError("edge index out of range")
            e = (i, j) if i < j else (j, i)
            if e in seen:
                raise GraphError(f"parallel edge {ids[e[0]]}-{ids[e[1]]}")
            seen.add(e)
            edges.append(e)
        coords.setflags(write=False)
        sub = frozenset(int(s) for s in self.subdivision)
        if not sub <= set(ids):
            raise GraphError("subdivision ids must be vertices")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "subdivision", sub)
        object.__setattr__(self, "_index", {v: k for k, v in enumerate(ids)})
        if edges and np.any(self.edge_weights() <= 0):
            raise GraphError("edge weights must be strictly positive")

    @classmethod
    def from_ids(cls, vertices, edges, kernel: WeightKernel = IDENTITY, subdivision=()):
        """Build from ``[(id, coords), ...]`` and id-pair edges."""
        vertices = list(vertices.items()) if isinstance(vertices, dict) else list(vertices)
        ids = [v for v, _ in vertices]
        coords = [list(map(float, x)) for _, x in vertices]
        index = {v: k for k, v in enumerate(ids)}
        try:
            idx_edges = [(index[u], index[v]) for u, v in edges]
        except KeyError as exc:
            raise GraphError(f"edge references unknown vertex {exc.args[0]}") from None
        arr = np.array(coords, dtype=float).reshape(len(ids), -1) if ids else np.zeros((0, 2))
        return cls(tuple(ids), arr, tuple(idx_edges), kernel, frozenset(subdivision))

    # basic shape -------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    @property
    def m(self) -> int:
        return len(self.edges)

    def index(self, vid) -> int:
        try:
            return self._index[vid]
        except KeyError:
            raise KeyError(f"unknown vertex {vid!r}") from None

    def edge_ids(self) -> list:
        return [(self.ids[i], self.ids[j]) for i, j in self.edges]

    def edge_index_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    def neighbors(self, i: int) -> list:
        """Neighbour indices of vertex index ``i`` (ascending)."""
        return sorted({b if a == i else a for a, b in self.edges if i in (a, b)})

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def noisy_mask(self) -> np.ndarray:
        """Boolean mask of original (non-subdivision) vertices."""
        return np.array([v not in self.subdivision for v in self.ids], dtype=bool)

    # geometry ----------------------------------------------------------
    def edge_lengths(self, coords=None) -> np.ndarray:
        x = self.coords if coords is None else np.asarray(coords, dtype=float)
        e = self.edge_index_array()
        return np.linalg.norm(x[..., e[:, 0], :] - x[..., e[:, 1], :], axis=-1)

    def edge_weights(self, coords=None) -> np.ndarray:
        return np.asarray(self.kernel(self.edge_lengths(coords)), dtype=float)

    def with_coords(self, coords) -> "EmbeddedGraph":
        return EmbeddedGraph(self.ids, coords, self.edges, self.kernel, self.subdivision)

    def diameter(self) -> float:
        return scene_diameter(self.coords)

    # serialisation -----------------------------------------------------
    def to_dict(self) -> dict:
        verts = []
        for v, x in zip(self.ids, self.coords):
            rec = {"id": v, "coords": [float(t) for t in x]}
            if v in self.subdivision:
                rec["subdivision"] = True
            verts.append(rec)
        return {
            "vertices": verts,
            "edges": [[u, v] for u, v in self.edge_ids()],
            "kernel": self.kernel.to_dict(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d) -> "EmbeddedGraph":
        verts = [(rec["id"], rec["coords"]) for rec in d["vertices"]]
        sub = [rec["id"] for rec in d["vertices"] if rec.get("subdivision")]
        kernel = WeightKernel.from_dict(d["kernel"]) if "kernel" in d else IDENTITY
        return cls.from_ids(verts, [tuple(e) for e in d["edges"]], kernel, sub)

    @classmethod
    def from_json(cls, text: str) -> "EmbeddedGraph":
        return cls.from_dict(json.loads(text))

    def edge_rows(self) -> list:
        """``(u, v, length, weight)`` per edge, for CSV export."""
        lengths = self.edge_lengths()
        weights = self.edge_weights()
        return [(u, v, float(l), float(w)) for (u, v), l, w in zip(self.edge_ids(), lengths, weights)]


# ---------------------------------------------------------------------------
# Laplacians


def laplacian_batch(n: int, edges: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Stack of combinatorial Laplacians from per-edge weights ``(..., m)``."""
    weights = np.asarray(weights, dtype=float)
    lead = weights.shape[:-1]
    L = np.zeros(lead + (n, n))
    if len(edges) == 0:
        return L
    i, j = edges[:, 0], edges[:, 1]
    L[..., i, j] = -weights
    L[..., j, i] = -weights
    inc = np.zeros((len(edges), n))
    inc[np.arange(len(edges)), i] = 1.0
    inc[np.arange(len(edges)), j] = 1.0
    diag = weights @ inc
    idx = np.arange(n)
    L[..., idx, idx] = diag
    return L


def laplacian(graph: EmbeddedGraph, coords=None) -> np.ndarray:
    """``L = D - A`` with ``A_ij = phi(|x_i - x_j|)`` on edges."""
    return laplacian_batch(graph.n, graph.edge_index_array(), graph.edge_weights(coords))


def weighted_degree(graph: EmbeddedGraph, vid) -> float:
    i = graph.index(vid)
    w = graph.edge_weights()
    return float(sum(wk for wk, (a, b) in zip(w, graph.edges) if i in (a, b)))


def relative_wd_change(g: EmbeddedGraph, g_perturbed: EmbeddedGraph, vid) -> float:
    """``(WD_G'(v) - WD_G(v)) / WD_G(v)``."""
    if g.ids != g_perturbed.ids or g.edges != g_perturbed.edges:
        raise GraphError("graphs must share vertex and edge sets")
    base = weighted_degree(g, vid)
    if base == 0:
        raise ZeroDivisionError(f"vertex {vid!r} has zero weighted degree")
    return (weighted_degree(g_perturbed, vid) - base) / base


# ---------------------------------------------------------------------------
# geometric assumptions


def identifiability_scale(r_max: float, epsilon: float) -> float:
    """Minimum admissible vertex separation ``2 r_max + epsilon``."""
    return 2.0 * r_max + epsilon


def min_angle_bound(epsilon: float, k: float) -> float:
    """Angular separation lower bound ``2 arcsin(epsilon / 2k)``."""
    if not (0 <= epsilon <= 2 * k) or k <= 0:
        raise ParameterError(f"need 0 <= epsilon <= 2k, got epsilon={epsilon}, k={k}")
    return 2.0 * math.asin(epsilon / (2.0 * k))


@dataclass(frozen=True)
class Violation:
    """One geometric defect.

    ``primitives`` holds vertex ids: ``(u, v)`` for a collision,
    ``(v, a, b)`` for vertex ``v`` against edge ``{a, b}``, and
    ``(a, b, c, d)`` for crossing edges ``{a, b}`` and ``{c, d}``.
    """

    kind: str  # "crossing" | "collision" | "contact"
    primitives: tuple
    distance: float
    severity: float
    point: tuple | None = None

    def sort_key(self):
        # 12 significant digits so rounding noise cannot reorder true ties
        return (-float(f"{self.severity:.12g}"), self.primitives, self.kind)


@dataclass(frozen=True)
class ConstraintReport:
    min_vertex_vertex: float
    min_vertex_edge: float
    min_edge_edge: float
    violations: tuple
    separation: tuple = ()  # vertex pairs closer than k_min
    epsilon: float = 0.0
    k_min: float | None = None

    @property
    def thick(self) -> bool:
        return not self.violations

    @property
    def identifiable(self) -> bool:
        return not self.separation

    @property
    def clean(self) -> bool:
        return self.thick and self.identifiable


def _severity(epsilon: float, dist: float) -> float:
    return max(float(epsilon - dist), np.finfo(float).tiny)


def check_constraints(graph: EmbeddedGraph, epsilon: float, k_min: float | None = None) -> ConstraintReport:
    """Audit epsilon-thickness and, optionally, the identifiability scale.

    Only non-incident primitive pairs are tested.  A vertex closer than
    epsilon to an edge is reported as a ``contact`` only when its nearest
    point lies strictly inside the edge; otherwise the same defect is the
    ``collision`` with that endpoint.  Edge-edge tests need ``d == 2``.
    """
    x = graph.coords
    n = graph.n
    ids = graph.ids
    tol = 1e-9 * max(graph.diameter(), 1.0)
    viols = []
    sep = []

    min_vv = math.inf
    if n > 1:
        iu, ju = np.triu_indices(n, 1)
        dvv = np.linalg.norm(x[iu] - x[ju], axis=1)
        min_vv = float(dvv.min())
        for k in np.flatnonzero(dvv < epsilon - tol):
            a, b = iu[k], ju[k]
            viols.append(Violation("collision", (ids[a], ids[b]), float(dvv[k]), _severity(epsilon, dvv[k])))
        if k_min is not None:
            sep = [(ids[iu[k]], ids[ju[k]], float(dvv[k])) for k in np.flatnonzero(dvv < k_min - tol)]

    min_ve = math.inf
    min_ee = math.inf
    if graph.d == 2 and graph.m:
        E = graph.edge_index_array()
        pa, pb = x[E[:, 0]], x[E[:, 1]]
        # point-to-segment distance table, edges by vertices
        ab = pb - pa
        denom = np.einsum("ij,ij->i", ab, ab)
        rel = x[None, :, :] - pa[:, None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.einsum("evk,ek->ev", rel, ab) / denom[:, None]
        t = np.where(denom[:, None] > 0, np.clip(t, 0.0, 1.0), 0.0)
        foot = pa[:, None, :] + t[..., None] * ab[:, None, :]
        dve = np.linalg.norm(x[None, :, :] - foot, axis=-1)
        incident = np.zeros_like(dve, dtype=bool)
        rows = np.arange(len(E))
        incident[rows, E[:, 0]] = True
        incident[rows, E[:, 1]] = True
        free = np.where(incident, np.inf, dve)
        if np.isfinite(free).any():
            min_ve = float(free.min())
        for e, v in zip(*np.nonzero((free < epsilon - tol) & (t > 0.0) & (t < 1.0))):
            a, b = E[e]
            viols.append(Violation("contact", (ids[v], ids[a], ids[b]), float(dve[e, v]),
                                   _severity(epsilon, dve[e, v]), tuple(foot[e, v])))
        # edge pairs: distance from the table, crossings from orientation signs
        P, Q = np.triu_indices(len(E), 1)
        keep = ~((E[P, 0] == E[Q, 0]) | (E[P, 0] == E[Q, 1]) | (E[P, 1] == E[Q, 0]) | (E[P, 1] == E[Q, 1]))
        P, Q = P[keep], Q[keep]
        if P.size:
            dee = np.minimum.reduce([dve[Q, E[P, 0]], dve[Q, E[P, 1]], dve[P, E[Q, 0]], dve[P, E[Q, 1]]])

            def orient(o, a, b):
                return (a[:, 0] - o[:, 0]) * (b[:, 1] - o[:, 1]) - (a[:, 1] - o[:, 1]) * (b[:, 0] - o[:, 0])

            A, B, C, D = x[E[P, 0]], x[E[P, 1]], x[E[Q, 0]], x[E[Q, 1]]
            d1, d2, d3, d4 = orient(C, D, A), orient(C, D, B), orient(A, B, C), orient(A, B, D)
            cand = (np.sign(d1) * np.sign(d2) < 0) & (np.sign(d3) * np.sign(d4) < 0)
            for k in np.flatnonzero(cand):
                p, q = P[k], Q[k]
                (a, b), (c, d) = E[p], E[q]
                hit = proper_intersection(x[a], x[b], x[c], x[d], tol)
                if hit is not None:
                    prims = tuple(sorted([(ids[a], ids[b]), (ids[c], ids[d])]))
                    viols.append(Violation("crossing", prims[0] + prims[1], 0.0,
                                           _severity(epsilon, 0.0), tuple(hit)))
                    dee[k] = 0.0
            min_ee = float(dee.min())
    viols.sort(key=Violation.sort_key)
    return ConstraintReport(min_vv, min_ve, min_ee, tuple(viols), tuple(sep), epsilon, k_min)


# ---------------------------------------------------------------------------
# noise


def _mask_array(graph: EmbeddedGraph, mask) -> np.ndarray:
    if mask is None:
        return graph.noisy_mask()
    sel = np.zeros(graph.n, dtype=bool)
    for v in mask:
        sel[graph.index(v)] = True
    return sel


def noisy_coords(graph: EmbeddedGraph, params: ctpl.CtplParams, rng: np.random.Generator,
                 size: int | None = None, mask=None) -> np.ndarray:
    """Perturbed coordinate array(s); shape ``(n, d)`` or ``(size, n, d)``."""
    sel = _mask_array(graph, mask)
    k = int(sel.sum())
    shape = (k,) if size is None else (size, k)
    out = np.array(graph.coords, dtype=float)
    if size is not None:
        out = np.broadcast_to(out, (size,) + out.shape).copy()
    if k:
        out[..., sel, :] += ctpl.displacements(shape, graph.d, params, rng)
    return out


def apply_vertex_noise(graph: EmbeddedGraph, params: ctpl.CtplParams, rng: np.random.Generator,
                       mask: Iterable | None = None) -> EmbeddedGraph:
    """Independent isotropic CTPL displacement of each masked vertex.

    The default mask is every original vertex; repair-inserted subdivision
    vertices stay fixed.
    """
    return graph.with_coords(noisy_coords(graph, params, rng, mask=mask))
