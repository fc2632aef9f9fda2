"""Hub-spoke witness motifs: canonical geometry, extremal displacement,
angular sweeps, greedy disjoint tiling and the motif-packing Frobenius bound.

Angles are in radians throughout.  Planar (d = 2) only.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CatalogueError, DisjointnessError, ExtremalityAssumptionError, ParameterError
from .graph import IDENTITY, EmbeddedGraph, WeightKernel, laplacian, laplacian_batch
from .spectral import PerturbationCertificate, weyl_certificate

KISSING_2D = 6
SPOKE_GAP = math.pi / 3


def _unit(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class MotifConfiguration:
    """Planar hub with ``n`` spokes.

    ``bisector`` is the direction of the unoccupied arc's bisector, measured
    from the hub; when ``None`` it is taken from the widest angular gap.
    """

    hub: np.ndarray
    spokes: np.ndarray
    k: float
    r_max: float
    spoke_angles: tuple
    bisector: float | None = None

    def __post_init__(self):
        hub = np.asarray(self.hub, dtype=float).reshape(2)
        spokes = np.asarray(self.spokes, dtype=float).reshape(-1, 2)
        if not 1 <= len(spokes) <= KISSING_2D:
            raise CatalogueError(f"planar motifs have 1..6 spokes, got {len(spokes)}")
        object.__setattr__(self, "hub", hub)
        object.__setattr__(self, "spokes", spokes)
        object.__setattr__(self, "spoke_angles", tuple(float(a) for a in self.spoke_angles))

    @property
    def n(self) -> int:
        return len(self.spokes)

    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.spokes - self.hub, axis=1)

    def min_separation(self) -> float:
        """Smallest angular gap between spokes (``2 pi`` for one spoke)."""
        if self.n == 1:
            return 2 * math.pi
        return float(np.min(_gaps(self.spoke_angles)))

    def hub_direction(self) -> float:
        if self.bisector is not None:
            return self.bisector
        return _widest_gap_bisector(self.spoke_angles)

    def as_graph(self, kernel: WeightKernel = IDENTITY) -> EmbeddedGraph:
        coords = np.vstack([self.hub, self.spokes])
        edges = tuple((0, i + 1) for i in range(self.n))
        return EmbeddedGraph(tuple(range(self.n + 1)), coords, edges, kernel)


def _gaps(angles) -> np.ndarray:
    a = np.sort(np.mod(np.asarray(angles, dtype=float), 2 * math.pi))
    return np.diff(np.append(a, a[0] + 2 * math.pi))


def _widest_gap_bisector(angles) -> float:
    a = np.sort(np.mod(np.asarray(angles, dtype=float), 2 * math.pi))
    gaps = _gaps(a)
    i = int(np.argmax(gaps))
    return float(np.mod(a[i] + gaps[i] / 2, 2 * math.pi))


def canonical_motif(n: int, k: float = 2.0, r_max: float = 1.0, rotation: float = 0.0,
                    center=(0.0, 0.0)) -> MotifConfiguration:
    """Tightest admissible hub with ``n`` spokes 60 degrees apart.

    Spokes sit at ``rotation + i*pi/3``; the unoccupied arc is bisected by
    ``rotation + (n - 1)*pi/6 + pi``.  For ``n = 6`` that direction lies
    midway between two spokes, one of six equivalent choices.
    """
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= KISSING_2D):
        raise CatalogueError(f"degree must be in 1..6 in the plane, got {n}")
    if k < 2 * r_max:
        raise ParameterError(f"edge length k={k} is below 2*r_max={2 * r_max}")
    angles = rotation + SPOKE_GAP * np.arange(n)
    hub = np.asarray(center, dtype=float)
    spokes = hub + k * _unit(angles)
    bis = float(np.mod(rotation + (n - 1) * SPOKE_GAP / 2 + math.pi, 2 * math.pi))
    return MotifConfiguration(hub, spokes, k, r_max, tuple(angles), bis)


def _require_extremal_kernel(kernel: WeightKernel):
    if not (kernel.nondecreasing and kernel.convex):
        raise ExtremalityAssumptionError(
            f"kernel {kernel.name!r} must be nondecreasing and convex for extremal analysis")


def _spoke_gain(motif: MotifConfiguration, hubs: np.ndarray, r: float, kernel: WeightKernel) -> np.ndarray:
    """Total weight gain with each spoke pushed ``r`` further along the ray
    from a displaced hub; ``hubs`` has shape ``(..., 2)``."""
    dist = np.linalg.norm(motif.spokes - hubs[..., None, :], axis=-1)
    base = kernel(motif.lengths())
    return np.sum(kernel(dist + r) - base, axis=-1)


def extremal_displacement(motif: MotifConfiguration, r: float, kernel: WeightKernel = IDENTITY):
    """Worst-case hub and spoke placement within radius ``r``.

    Returns ``(perturbed, delta_wd)`` where ``delta_wd`` is the hub's
    weighted-degree increase.
    """
    _require_extremal_kernel(kernel)
    if not 0 <= r <= motif.r_max:
        raise ParameterError(f"radius {r} outside [0, r_max={motif.r_max}]")
    h = motif.hub + r * _unit(motif.hub_direction())
    rays = motif.spokes - h
    rays /= np.linalg.norm(rays, axis=1, keepdims=True)
    spokes = motif.spokes + r * rays
    perturbed = MotifConfiguration(h, spokes, motif.k, motif.r_max, motif.spoke_angles, motif.bisector)
    dw = float(np.sum(kernel(np.linalg.norm(spokes - h, axis=1)) - kernel(motif.lengths())))
    return perturbed, dw


def numeric_extremal_oracle(motif: MotifConfiguration, r: float, kernel: WeightKernel = IDENTITY,
                            grid_density=400) -> float:
    """Brute-force maximum weighted-degree gain over a polar hub grid.

    For each candidate hub the best spoke placement is the far point of its
    disc along the ray from the hub, so only the hub is searched.
    """
    nr, nt = (grid_density, grid_density) if np.isscalar(grid_density) else grid_density
    radii = np.linspace(0.0, r, int(nr))
    theta = np.linspace(0.0, 2 * math.pi, int(nt), endpoint=False)
    hubs = motif.hub + radii[:, None, None] * _unit(theta)[None, :, :]
    return float(np.max(_spoke_gain(motif, hubs, r, kernel)))


@dataclass(frozen=True)
class SweepResult:
    offsets: np.ndarray
    values: np.ndarray
    jitter_max: np.ndarray
    jitter_mean: np.ndarray


def _jittered_angles(motif: MotifConfiguration, n_jitters: int, scale: float, rng) -> np.ndarray:
    """Admissible random spoke layouts near the canonical one.

    A common rotation in ``[-scale, scale]`` plus nonnegative gap
    enlargements that keep every gap, including the closing one, at least
    60 degrees.
    """
    n = motif.n
    base = np.asarray(motif.spoke_angles)
    rot = rng.uniform(-scale, scale, size=(n_jitters, 1))
    if n == 1:
        return base + rot
    free = 2 * math.pi - n * SPOKE_GAP
    grow = rng.uniform(0.0, scale, size=(n_jitters, n - 1))
    total = grow.sum(axis=1, keepdims=True)
    shrink = np.where(total > free, free / np.maximum(total, 1e-300), 1.0)
    grow *= shrink
    cum = np.concatenate([np.zeros((n_jitters, 1)), np.cumsum(grow, axis=1)], axis=1)
    centre = cum[:, -1:] / 2  # keep the layout centred on the bisector
    return base + rot + cum - centre


def angular_sweep(motif: MotifConfiguration, offsets, r: float, kernel: WeightKernel = IDENTITY,
                  n_random_spoke_jitters: int = 0, rng=None, jitter_scale: float = math.radians(10)) -> SweepResult:
    """Weighted-degree gain as the hub moves ``r`` at ``bisector + offset``.

    Spokes take their conditional extremal positions.  Jittered layouts
    (admissible perturbations of the spoke angles) are summarised per
    offset by their maximum and mean gain.
    """
    _require_extremal_kernel(kernel)
    offsets = np.asarray(offsets, dtype=float)
    dirs = motif.hub_direction() + offsets
    hubs = motif.hub + r * _unit(dirs)
    values = _spoke_gain(motif, hubs, r, kernel)
    jmax = np.full(offsets.shape, np.nan)
    jmean = np.full(offsets.shape, np.nan)
    if n_random_spoke_jitters > 0:
        if rng is None:
            raise ParameterError("jitter sampling needs a random generator")
        lengths = motif.lengths()
        for idx in range(offsets.size):
            ang = _jittered_angles(motif, n_random_spoke_jitters, jitter_scale, rng)
            spokes = motif.hub + lengths[:, None] * _unit(ang)  # (J, n, 2)
            dist = np.linalg.norm(spokes - hubs[idx], axis=-1)
            gain = np.sum(kernel(dist + r) - kernel(lengths), axis=-1)
            jmax[idx] = gain.max()
            jmean[idx] = gain.mean()
    return SweepResult(offsets, values, jmax, jmean)


# ---------------------------------------------------------------------------
# tiling


@dataclass(frozen=True)
class MotifInstance:
    hub_vertex_id: int
    spoke_vertex_ids: tuple
    degree: int
    worst_case_frob: float | None = None

    @property
    def vertex_ids(self) -> tuple:
        return (self.hub_vertex_id,) + tuple(self.spoke_vertex_ids)


def greedy_tiling(graph: EmbeddedGraph, r: float | None = None, kernel: WeightKernel | None = None) -> list:
    """Vertex-disjoint hub-spoke motifs, highest degree first.

    A hub is accepted when its closed neighbourhood avoids every vertex
    already covered.  Within a degree class hubs are tried in ascending id
    order.  When ``r`` is given each instance carries its worst-case
    Frobenius envelope.
    """
    deg = graph.degrees()
    order = sorted(range(graph.n), key=lambda i: graph.ids[i])
    covered: set = set()
    out = []
    for target in range(KISSING_2D, 0, -1):
        for i in order:
            if deg[i] != target:
                continue
            closed = [i] + graph.neighbors(i)
            if covered.intersection(closed):
                continue
            covered.update(closed)
            inst = MotifInstance(graph.ids[i], tuple(sorted(graph.ids[j] for j in closed[1:])), target)
            if r is not None:
                inst = replace(inst, worst_case_frob=motif_frobenius_envelope(graph, inst, r, kernel))
            out.append(inst)
    return out


def _check_disjoint(tiling):
    seen = set()
    for inst in tiling:
        vs = set(inst.vertex_ids)
        if seen & vs:
            raise DisjointnessError(f"motif at hub {inst.hub_vertex_id} overlaps an earlier motif")
        seen |= vs


def internal_edges(graph: EmbeddedGraph, inst: MotifInstance) -> list:
    """Edge indices with both endpoints inside the motif."""
    members = {graph.index(v) for v in inst.vertex_ids}
    return [e for e, (a, b) in enumerate(graph.edges) if a in members and b in members]


def _star_envelope(hub, spokes, base_w, r, kernel: WeightKernel, n_radial=41, n_angular=128) -> float:
    """Max of ``||E||_F`` over all hub/spoke moves of size <= ``r`` for a star.

    For a star the Frobenius norm is ``sqrt(3 sum d^2 + (sum d)^2)`` in the
    weight changes ``d``, a convex function maximised at a corner of the
    per-spoke box of reachable changes.  The hub is searched on a polar
    grid and the answer is inflated by a Lipschitz covering term so it is
    a strict upper bound.
    """
    n = len(spokes)
    radii = np.linspace(0.0, r, n_radial)
    theta = np.linspace(0.0, 2 * math.pi, n_angular, endpoint=False)
    hubs = (hub + radii[:, None, None] * _unit(theta)[None]).reshape(-1, 2)
    dist = np.linalg.norm(spokes[None] - hubs[:, None], axis=-1)  # (H, n)
    lo = kernel(np.maximum(dist - r, 0.0)) - base_w
    hi = kernel(dist + r) - base_w
    best = 0.0
    for corner in itertools.product((0, 1), repeat=n):
        sel = np.asarray(corner, dtype=bool)
        d = np.where(sel, hi, lo)
        f2 = 3 * np.sum(d**2, axis=1) + np.sum(d, axis=1) ** 2
        best = max(best, float(np.max(f2)))
    cover = (radii[1] - radii[0]) / 2 + r * math.pi / n_angular if r > 0 else 0.0
    reach = float(np.max(dist)) + r
    lip = kernel.lipschitz(reach)
    return math.sqrt(best) + math.sqrt(n + 3) * math.sqrt(n) * lip * cover


def motif_frobenius_envelope(graph: EmbeddedGraph, inst: MotifInstance, r: float,
                             kernel: WeightKernel | None = None) -> float:
    """Upper bound on ``||E_m||_F`` over all vertex moves of size <= ``r``.

    Star edges are bounded jointly; any further internal edge adds at most
    ``2 * (2 r L_w)`` by the triangle inequality.
    """
    kernel = graph.kernel if kernel is None else kernel
    h = graph.index(inst.hub_vertex_id)
    spokes_idx = [graph.index(v) for v in inst.spoke_vertex_ids]
    x = graph.coords
    base = kernel(np.linalg.norm(x[spokes_idx] - x[h], axis=1))
    env = _star_envelope(x[h], x[spokes_idx], base, r, kernel)
    star = {(min(h, s), max(h, s)) for s in spokes_idx}
    extra = [e for e in internal_edges(graph, inst) if graph.edges[e] not in star]
    if extra:
        reach = graph.diameter() + 2 * r
        env += len(extra) * 2 * (2 * r * kernel.lipschitz(reach))
    return float(env)


def residual_edges(graph: EmbeddedGraph, tiling) -> list:
    inside = set()
    for inst in tiling:
        inside.update(internal_edges(graph, inst))
    return [e for e in range(graph.m) if e not in inside]


def residual_envelope(graph: EmbeddedGraph, edges, r: float, kernel: WeightKernel | None = None) -> float:
    """``||E_R||_F`` bound from ``|dw| <= 2 r L_w`` on every residual edge."""
    if not edges:
        return 0.0
    kernel = graph.kernel if kernel is None else kernel
    b = 2 * r * kernel.lipschitz(graph.diameter() + 2 * r)
    deg = np.zeros(graph.n)
    for e in edges:
        i, j = graph.edges[e]
        deg[i] += 1
        deg[j] += 1
    return float(b * math.sqrt(2 * len(edges) + np.sum(deg**2)))


def motif_blocks(graph: EmbeddedGraph, coords_after, tiling) -> list:
    """Per-motif perturbation matrices ``E_m`` (full size), internal edges only."""
    dw = graph.edge_weights(coords_after) - graph.edge_weights()
    E = graph.edge_index_array()
    blocks = []
    for inst in tiling:
        w = np.zeros(graph.m)
        idx = internal_edges(graph, inst)
        w[idx] = dw[idx]
        blocks.append(laplacian_batch(graph.n, E, w))
    return blocks


@dataclass(frozen=True)
class TilingBound:
    motif_term: float
    residual_term: float
    total: float
    p: int
    per_motif: tuple = ()
    realized: float | None = None
    holds: bool | None = None


def packing_bound_estimate(graph: EmbeddedGraph, tiling, r: float, kernel: WeightKernel | None = None,
                           noise_realization: EmbeddedGraph | None = None) -> TilingBound:
    """Mixed quadrature bound ``sqrt(sum ||E_m||_F^2) + ||E_R||_F``.

    Cross terms between vertex-disjoint motif blocks vanish, so motif
    envelopes add in quadrature; the residual is added by the triangle
    inequality.
    """
    _check_disjoint(tiling)
    kernel = graph.kernel if kernel is None else kernel
    per = []
    for inst in tiling:
        w = inst.worst_case_frob
        if w is None:
            w = motif_frobenius_envelope(graph, inst, r, kernel)
        per.append(w)
    motif_term = math.sqrt(sum(v * v for v in per))
    residual = residual_envelope(graph, residual_edges(graph, tiling), r, kernel)
    total = motif_term + residual
    realized = holds = None
    if noise_realization is not None:
        realized = float(np.linalg.norm(laplacian(noise_realization) - laplacian(graph)))
        holds = realized <= total * (1 + 1e-12)
    return TilingBound(motif_term, residual, total, len(tiling), tuple(per), realized, holds)


# ---------------------------------------------------------------------------
# Table 1 style summaries


@dataclass(frozen=True)
class MotifShift:
    n: int
    r: float
    delta_wd: float
    certificate: PerturbationCertificate

    @property
    def coefficient(self) -> float:
        """Weighted-degree gain in units of ``r``."""
        return self.delta_wd / self.r


def extremal_shift(n: int, k: float = 2.0, r: float = 1.0, kernel: WeightKernel = IDENTITY) -> MotifShift:
    """Extremal weighted-degree gain and eigenvalue certificate of the
    canonical degree-``n`` motif."""
    motif = canonical_motif(n, k, r)
    perturbed, dw = extremal_displacement(motif, r, kernel)
    L0 = laplacian(motif.as_graph(kernel))
    L1 = laplacian(perturbed.as_graph(kernel))
    return MotifShift(n, r, dw, weyl_certificate(L0, L1))
