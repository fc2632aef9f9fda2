"""Laplacian spectra, spectral distances and eigenvalue perturbation certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConstructionError, NormalizationError, SpectrumError
from .graph import EmbeddedGraph, laplacian

SYM_RTOL = 1e-9


def solver_atol(*mats) -> float:
    """Absolute tolerance ``1e-8 * max(1, ||L||_2)`` for eigenvalue comparisons."""
    scale = 1.0
    for M in mats:
        M = np.asarray(M, dtype=float)
        if M.size:
            scale = max(scale, float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (M + M.T))))))
    return 1e-8 * scale


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues, repeated by multiplicity."""

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.n else 0.0


def _check_symmetric(L: np.ndarray) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise SpectrumError(f"expected a square matrix, got shape {L.shape}")
    scale = max(1.0, float(np.max(np.abs(L)))) if L.size else 1.0
    if L.size and np.max(np.abs(L - L.T)) > SYM_RTOL * scale:
        raise SpectrumError("matrix is not symmetric")
    return 0.5 * (L + L.T)


def spectrum(L) -> Spectrum:
    return Spectrum(np.linalg.eigvalsh(_check_symmetric(L)))


def graph_spectrum(graph: EmbeddedGraph) -> Spectrum:
    return spectrum(laplacian(graph))


# ---------------------------------------------------------------------------
# distances


def _values(s) -> np.ndarray:
    return s.values if isinstance(s, Spectrum) else np.sort(np.asarray(s, dtype=float).ravel())


def wasserstein2(a, b) -> float:
    """W2 distance between the empirical eigenvalue measures of ``a`` and ``b``.

    Quantile functions are step functions with jumps at ``i/n`` and
    ``j/m``; integrating over the merged partition is exact.  The merge
    runs on the integer grid ``{0, ..., n*m}`` to avoid float ties.
    """
    x, y = _values(a), _values(b)
    n, m = x.size, y.size
    if n == 0 or m == 0:
        raise SpectrumError("empty spectrum")
    if n == m:
        return float(np.sqrt(np.mean((x - y) ** 2)))
    cuts = np.union1d(np.arange(n + 1) * m, np.arange(m + 1) * n)
    left, width = cuts[:-1], np.diff(cuts)
    diff = x[left // m] - y[left // n]
    return float(np.sqrt(np.sum(width * diff**2) / (n * m)))


def max_sup_norm(a, b) -> float:
    """Default reference scale ``max(||a||_inf, ||b||_inf)``."""
    return max(float(np.max(np.abs(_values(a)))), float(np.max(np.abs(_values(b)))))


def spectral_distance(a, b, reference: Callable = max_sup_norm) -> float:
    """Scale-normalised spectral distance ``W2(a, b) / reference(a, b)``."""
    ref = reference(a, b)
    if not ref > 0:
        raise NormalizationError("reference scale is zero; both spectra vanish")
    return wasserstein2(a, b) / ref


def spectral_distance_batch(base, others) -> np.ndarray:
    """Row-wise spectral distance between one spectrum and equal-size spectra.

    ``others`` has shape ``(S, n)`` with ascending rows.
    """
    x = _values(base)
    Y = np.asarray(others, dtype=float)
    ref = np.maximum(np.max(np.abs(x)), np.max(np.abs(Y), axis=1))
    if np.any(ref <= 0):
        raise NormalizationError("reference scale is zero; both spectra vanish")
    return np.sqrt(np.mean((Y - x) ** 2, axis=1)) / ref


def pairwise_spectral_distance(A, B) -> np.ndarray:
    """Row-paired spectral distance between two ``(S, n)`` stacks."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    ref = np.maximum(np.max(np.abs(A), axis=1), np.max(np.abs(B), axis=1))
    if np.any(ref <= 0):
        raise NormalizationError("reference scale is zero; both spectra vanish")
    return np.sqrt(np.mean((A - B) ** 2, axis=1)) / ref


def l2_spectral_shift(a, b) -> float:
    x, y = _values(a), _values(b)
    if x.size != y.size:
        raise SpectrumError(f"size mismatch: {x.size} vs {y.size}")
    return float(np.linalg.norm(x - y))


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class PerturbationCertificate:
    max_eigen_shift: float
    l2_shift: float
    op_norm_E: float
    frob_norm_E: float
    weyl_ratio: float
    lambda_n_shift: float = 0.0
    atol: float = 0.0

    @property
    def holds(self) -> bool:
        t = self.atol
        return (
            self.max_eigen_shift <= self.op_norm_E + t
            and self.op_norm_E <= self.frob_norm_E + t
            and self.l2_shift <= self.frob_norm_E + t
        )


def weyl_certificate(L, L_perturbed) -> PerturbationCertificate:
    L = _check_symmetric(L)
    Lp = _check_symmetric(L_perturbed)
    if L.shape != Lp.shape:
        raise SpectrumError(f"dimension mismatch: {L.shape} vs {Lp.shape}")
    E = Lp - L
    ev = np.linalg.eigvalsh(L)
    evp = np.linalg.eigvalsh(Lp)
    diff = evp - ev
    shift = float(np.max(np.abs(diff))) if diff.size else 0.0
    op = float(np.max(np.abs(np.linalg.eigvalsh(E)))) if E.size else 0.0
    frob = float(np.linalg.norm(E))
    atol = 1e-8 * max(1.0, float(np.max(np.abs(ev), initial=0.0)), float(np.max(np.abs(evp), initial=0.0)))
    if op <= atol:
        ratio = 1.0 if shift <= atol else math.inf
    else:
        ratio = shift / op
    return PerturbationCertificate(
        max_eigen_shift=shift,
        l2_shift=float(np.linalg.norm(diff)),
        op_norm_E=op,
        frob_norm_E=frob,
        weyl_ratio=ratio,
        lambda_n_shift=float(abs(diff[-1])) if diff.size else 0.0,
        atol=atol,
    )


@dataclass(frozen=True)
class InducedBound:
    """Lower bounds on the top eigenvalue from a vertex subset.

    ``bound`` is the top eigenvalue of the principal submatrix
    ``L'[S, S] = L_H' + Delta``; ``internal_bound`` is the top eigenvalue of
    the internal Laplacian ``L_H'`` alone.  Both are at most ``lambda_n``.
    """

    bound: float
    internal_bound: float
    lambda_n: float
    holds: bool

    @property
    def slack(self) -> float:
        return self.lambda_n - self.bound


def induced_lower_bound(L_full, subset: Sequence[int], L_sub_internal) -> InducedBound:
    L = _check_symmetric(L_full)
    LH = _check_symmetric(L_sub_internal)
    idx = np.asarray(list(subset), dtype=int)
    n = L.shape[0]
    if idx.size == 0 or np.any(idx < 0) or np.any(idx >= n) or np.unique(idx).size != idx.size:
        raise IndexError("subset must be distinct indices within range")
    if LH.shape != (idx.size, idx.size):
        raise ConstructionError("internal Laplacian does not match subset size")
    P = L[np.ix_(idx, idx)]
    atol = solver_atol(L)
    off = P - LH
    np.fill_diagonal(off, 0.0)
    if np.max(np.abs(off)) > atol:
        raise ConstructionError("principal submatrix and internal Laplacian differ off the diagonal")
    delta = np.diag(P) - np.diag(LH)
    if np.any(delta < -atol):
        raise ConstructionError("external degree correction has a negative entry")
    lam_n = float(np.linalg.eigvalsh(L)[-1])
    principal = float(np.linalg.eigvalsh(P)[-1])
    internal = float(np.linalg.eigvalsh(LH)[-1])
    holds = lam_n >= principal - atol and principal >= internal - atol
    return InducedBound(principal, internal, lam_n, holds)


@dataclass(frozen=True)
class DegreeBound:
    S_H: float
    Delta_H: int
    frob_bound: float
    l2_bound: float
    frob_actual: float
    l2_actual: float
    holds: bool


def degree_controlled_bound(graph_before: EmbeddedGraph, graph_after: EmbeddedGraph) -> DegreeBound:
    """``S2 <= ||Delta_H||_F <= sqrt(2 + 2 Delta(H)) sqrt(S(H))``."""
    if graph_before.ids != graph_after.ids or graph_before.edges != graph_after.edges:
        raise ConstructionError("graphs must share vertex and edge sets")
    dw = graph_after.edge_weights() - graph_before.edge_weights()
    S = float(np.sum(dw**2))
    deg = graph_before.degrees()
    Dmax = int(deg.max()) if deg.size else 0
    bound = math.sqrt((2.0 + 2.0 * Dmax) * S)
    L0 = laplacian(graph_before)
    L1 = laplacian(graph_after)
    frob = float(np.linalg.norm(L1 - L0))
    s2 = l2_spectral_shift(spectrum(L0), spectrum(L1))
    atol = solver_atol(L0, L1)
    holds = s2 <= frob + atol and frob <= bound + atol
    return DegreeBound(S, Dmax, bound, bound, frob, s2, holds)
