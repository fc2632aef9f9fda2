"""Stochastic co-spectrality (SC) and the spectral separation index (S3I).

``D = d_SD(G, N(G))`` is the spectral distance between a graph and one
noisy copy of it (strong oracle).  When the clean graph is unavailable,
distances between two independent noisy copies are used instead (weak
oracle).
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from . import ctpl
from .errors import DegenerateSampleError, ParameterError, ReliabilityError
from .graph import EmbeddedGraph, laplacian, laplacian_batch, noisy_coords
from .spectral import pairwise_spectral_distance, spectral_distance_batch

CHUNK = 2000
MAX_DROP_FRACTION = 0.10


class Oracle(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True, eq=False)
class DistanceSample:
    values: np.ndarray
    oracle: Oracle = Oracle.STRONG
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if np.any(v < 0):
            raise ParameterError("spectral distances are nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    def mean(self) -> float:
        return float(np.mean(self.values))

    def var(self) -> float:
        return float(np.var(self.values, ddof=1))


def _rng(rng) -> tuple:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), (None if rng is None else int(rng))


def _noisy_spectra(graph: EmbeddedGraph, noise: ctpl.CtplParams, size: int, rng, mask=None) -> np.ndarray:
    """Ascending Laplacian spectra of ``size`` independent noisy copies."""
    edges = graph.edge_index_array()
    out = np.empty((size, graph.n))
    for start in range(0, size, CHUNK):
        m = min(CHUNK, size - start)
        X = noisy_coords(graph, noise, rng, size=m, mask=mask)
        w = graph.kernel(np.linalg.norm(X[:, edges[:, 0]] - X[:, edges[:, 1]], axis=-1))
        out[start:start + m] = np.linalg.eigvalsh(laplacian_batch(graph.n, edges, w))
    return out


def distance_sample(graph: EmbeddedGraph, noise: ctpl.CtplParams, n_samples: int, rng,
                    oracle: Oracle = Oracle.STRONG, mask=None) -> DistanceSample:
    """Monte Carlo draws of the noise-induced spectral distance."""
    gen, seed = _rng(rng)
    if oracle is Oracle.STRONG:
        base = np.linalg.eigvalsh(laplacian(graph))
        vals = spectral_distance_batch(base, _noisy_spectra(graph, noise, n_samples, gen, mask))
    else:
        a = _noisy_spectra(graph, noise, n_samples, gen, mask)
        b = _noisy_spectra(graph, noise, n_samples, gen, mask)
        vals = pairwise_spectral_distance(a, b)
    return DistanceSample(vals, oracle, seed)


@dataclass(frozen=True)
class ScMoments:
    moments: tuple  # raw moments SC_1 .. SC_kmax
    mean: float
    var: float
    sample: DistanceSample


def sc_moments(graph: EmbeddedGraph, noise: ctpl.CtplParams, k_max: int, n_samples: int, rng,
               mask=None) -> ScMoments:
    """Raw moments ``E[D^k]`` for ``k = 1..k_max`` under the strong oracle."""
    if n_samples < 2:
        raise ParameterError("need at least two samples")
    if k_max < 1:
        raise ParameterError("k_max must be positive")
    s = distance_sample(graph, noise, n_samples, rng, Oracle.STRONG, mask)
    mom = tuple(float(np.mean(s.values**k)) for k in range(1, k_max + 1))
    m1 = float(np.mean(s.values))
    var = max(float(np.mean(s.values**2)) - m1 * m1, 0.0)
    return ScMoments(mom, m1, var, s)


def sc_observed(graph: EmbeddedGraph, noise: ctpl.CtplParams, n_pairs: int, rng, mask=None) -> float:
    """Mean spectral distance between independent noisy copies."""
    if n_pairs < 1:
        raise ParameterError("need at least one pair")
    return distance_sample(graph, noise, n_pairs, rng, Oracle.WEAK, mask).mean()


@dataclass(frozen=True)
class Observability:
    threshold: float
    observable: bool


def cantelli_factor(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt((1 - alpha) / alpha)


def observability_test(d_star: float, mu_d: float, sigma_d: float, alpha: float) -> Observability:
    """One-sided Cantelli test: observable iff ``d* > mu + sigma sqrt((1-a)/a)``."""
    if not sigma_d > 0:
        raise DegenerateSampleError("sigma_d must be positive")
    thr = mu_d + sigma_d * cantelli_factor(alpha)
    return Observability(thr, d_star > thr)


def _values(s) -> np.ndarray:
    return s.values if isinstance(s, DistanceSample) else np.asarray(s, dtype=float).ravel()


def _signed_s3i(a, b) -> float:
    x, y = _values(a), _values(b)
    if x.size < 2 or y.size < 2:
        raise DegenerateSampleError("each sample needs at least two values")
    pooled = math.sqrt((np.var(x, ddof=1) + np.var(y, ddof=1)) / 2)
    if pooled == 0:
        raise DegenerateSampleError("pooled variance is zero")
    return float((np.mean(x) - np.mean(y)) / pooled)


def s3i(samples_a, samples_b) -> float:
    """``|mu_a - mu_b| / sqrt((var_a + var_b) / 2)`` with n-1 variances."""
    return abs(_signed_s3i(samples_a, samples_b))


@dataclass(frozen=True)
class S3iResult:
    """Replicated S3I summary.

    ``point`` is the median run-level S3I.  The interval is taken over the
    signed run-level effects, oriented so that the typical run is
    positive; it excludes zero only when the runs agree on which regime
    has the larger mean distance.
    """

    point: float
    ci_lower: float
    ci_upper: float
    runs: int
    samples_per_run: int
    alpha: float
    separable: bool
    dropped: int = 0
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "point": self.point,
            "ci": [self.ci_lower, self.ci_upper],
            "runs": self.runs,
            "samples_per_run": self.samples_per_run,
            "alpha": self.alpha,
            "separable": self.separable,
            "dropped": self.dropped,
            "seed": self.seed,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def summarize_runs(signed, samples_per_run: int, alpha: float, dropped: int = 0, seed=None) -> S3iResult:
    signed = np.asarray(signed, dtype=float)
    orient = 1.0 if np.median(signed) >= 0 else -1.0
    oriented = orient * signed
    lo, hi = np.percentile(oriented, [100 * alpha / 2, 100 * (1 - alpha / 2)])
    point = float(np.median(np.abs(signed)))
    return S3iResult(point, float(lo), float(hi), int(signed.size), samples_per_run, alpha,
                     bool(lo > 0), dropped, seed)


def s3i_replicated(graph_a: EmbeddedGraph, noise_a: ctpl.CtplParams, graph_b: EmbeddedGraph,
                   noise_b: ctpl.CtplParams, runs: int, samples_per_run: int, alpha: float, rng,
                   oracle: Oracle = Oracle.STRONG) -> S3iResult:
    """S3I over independent Monte Carlo runs with a percentile interval.

    Run ``i`` owns substream ``i`` of the master generator, itself split
    into one stream per regime, so results do not depend on run order.
    """
    if runs < 2:
        raise ParameterError("need at least two runs")
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    gen, seed = _rng(rng)
    signed = []
    dropped = 0
    for child in gen.spawn(runs):
        ra, rb = child.spawn(2)
        a = distance_sample(graph_a, noise_a, samples_per_run, ra, oracle)
        b = distance_sample(graph_b, noise_b, samples_per_run, rb, oracle)
        try:
            signed.append(_signed_s3i(a, b))
        except DegenerateSampleError:
            dropped += 1
    if dropped > MAX_DROP_FRACTION * runs or len(signed) < 2:
        raise ReliabilityError(f"{dropped} of {runs} runs were degenerate")
    return summarize_runs(signed, samples_per_run, alpha, dropped, seed)
