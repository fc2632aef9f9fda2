"""Calibrated exponentially tempered power-law (CTPL) radial noise.

The CTPL law is the alpha = 1/2 Levy density tilted by ``exp(-lambda * x)``
and renormalised.  Radii are drawn by rejection from the untempered Levy
proposal ``x = mu + c / z**2`` with ``z ~ N(0, 1)``, then clipped at
``r_max``.  The tempering rate is tuned by Monte Carlo bisection so that the
unclipped tail mass above ``r_max`` matches a tolerance ``delta``.

All sampling routines take an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import integrate

from .errors import (
    BracketError,
    DegenerateSampleError,
    ParameterError,
    QuadratureError,
    SamplerStallError,
)

QUAD_RTOL = 1e-10
MAX_REJECTION_ITER = 10**6
LAMBDA_BRACKET = (0.0, 2.0)


@dataclass(frozen=True)
class CtplParams:
    """Parameters of the clipped CTPL radial law."""

    c: float
    lam: float = 0.0
    mu: float = 0.0
    r_max: float = math.inf
    delta: float = 0.05

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError(f"scale c must be positive, got {self.c}")
        if not self.lam >= 0:
            raise ParameterError(f"tempering lambda must be >= 0, got {self.lam}")
        if not self.r_max > 0:
            raise ParameterError(f"clip radius must be positive, got {self.r_max}")
        if not 0 < self.delta < 1:
            raise ParameterError(f"tail tolerance must lie in (0, 1), got {self.delta}")
        if not math.isfinite(self.mu):
            raise ParameterError("location must be finite")

    def with_lambda(self, lam: float) -> "CtplParams":
        return replace(self, lam=float(lam))


@dataclass(frozen=True)
class RadialSample:
    radius: float
    clipped: bool


@dataclass(frozen=True)
class CalibrationRecord:
    """Cacheable outcome of :func:`autotune_tempering`."""

    c: float
    mu: float
    r_max: float
    delta: float
    lam: float
    n_mc: int
    seed: int

    def params(self) -> CtplParams:
        return CtplParams(c=self.c, lam=self.lam, mu=self.mu, r_max=self.r_max, delta=self.delta)

    def to_json(self) -> str:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CalibrationRecord":
        d = json.loads(text)
        d["lam"] = d.pop("lambda")
        return cls(**d)


def levy_pdf(x, c: float, mu: float = 0.0):
    """Levy density ``sqrt(c/2pi) (x-mu)^(-3/2) exp(-c / (2 (x-mu)))``.

    Zero on ``x <= mu``.  Evaluated in log space so that points just above
    the location return 0 instead of ``0 * inf``.
    """
    if not c > 0:
        raise ParameterError(f"scale c must be positive, got {c}")
    x = np.asarray(x, dtype=float)
    y = x - mu
    out = np.zeros_like(y)
    pos = y > 0
    if np.any(pos):
        yp = y[pos]
        with np.errstate(over="ignore", divide="ignore"):
            logf = 0.5 * math.log(c / (2 * math.pi)) - 1.5 * np.log(yp) - c / (2 * yp)
        out[pos] = np.exp(logf)
    out[~np.isfinite(out)] = 0.0
    return out if out.ndim else float(out)


def _u_integrand(c: float, lam: float):
    # Substituting x = mu + 1/u^2 maps the tilted Levy kernel to a smooth,
    # Gaussian-decaying integrand on (0, inf).
    k = math.sqrt(2 * c / math.pi)

    def g(u):
        if u <= 0:
            return k if lam == 0 else 0.0
        return k * math.exp(-0.5 * c * u * u - lam / (u * u))

    return g


def _quad(g, a, b):
    out = integrate.quad(g, a, b, epsabs=1e-300, epsrel=QUAD_RTOL, limit=400, full_output=1)
    val, err = out[0], out[1]
    # QUADPACK appends a message only when it flags a problem
    if len(out) > 3 and err > 1e-8 * abs(val):
        raise QuadratureError(f"quadrature did not converge: {out[3]} (est. error {err:.3g})")
    return val


@functools.lru_cache(maxsize=1024)
def _shifted_normaliser(c: float, lam: float) -> float:
    """``int_mu^inf f_Levy(x) exp(-lam (x - mu)) dx`` by adaptive quadrature."""
    if lam == 0:
        return 1.0
    return _quad(_u_integrand(c, lam), 0.0, math.inf)


def normalizing_constant(c: float, lam: float, mu: float = 0.0) -> float:
    """``Z(c, lambda, mu) = int f_Levy(x) exp(-lambda x) dx`` over ``(mu, inf)``."""
    if not c > 0 or not lam >= 0:
        raise ParameterError("need c > 0 and lambda >= 0")
    return math.exp(-lam * mu) * _shifted_normaliser(float(c), float(lam))


def ctpl_pdf(x, params: CtplParams):
    """Normalised (unclipped) CTPL density."""
    z = _shifted_normaliser(params.c, params.lam)
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        tilt = np.exp(-params.lam * np.clip(x - params.mu, 0, None))
    out = levy_pdf(x, params.c, params.mu) * tilt / z
    return out if np.ndim(out) else float(out)


def _sf_scalar(t: float, c: float, lam: float, mu: float) -> float:
    if t <= mu:
        return 1.0
    if math.isinf(t):
        return 0.0
    z = _shifted_normaliser(c, lam)
    g = _u_integrand(c, lam)
    u0 = 1.0 / math.sqrt(t - mu)
    # integrate whichever side is smaller to keep relative accuracy
    head = _quad(g, 0.0, u0)
    if head / z < 0.5:
        return head / z
    return 1.0 - _quad(g, u0, math.inf) / z


def ctpl_sf(x, params: CtplParams):
    """Unclipped survival function ``P[X > x]`` by quadrature."""
    x = np.asarray(x, dtype=float)
    vals = np.array([_sf_scalar(float(t), params.c, params.lam, params.mu) for t in x.ravel()])
    vals = vals.reshape(x.shape)
    return vals if vals.ndim else float(vals)


def ctpl_cdf(x, params: CtplParams):
    out = 1.0 - np.asarray(ctpl_sf(x, params))
    return out if out.ndim else float(out)


def sample_radii(
    params: CtplParams,
    size: int,
    rng: np.random.Generator,
    clip: bool = True,
    max_iter: int = MAX_REJECTION_ITER,
):
    """Draw ``size`` radii by Levy-proposal rejection sampling.

    Returns ``(radii, clipped)``.  With ``clip=False`` the raw tempered draws
    are returned and ``clipped`` reports which of them exceed ``r_max``.
    """
    c, lam, mu = params.c, params.lam, params.mu
    out = np.empty(size)
    pending = np.arange(size)
    it = 0
    while pending.size:
        it += 1
        if it > max_iter:
            raise SamplerStallError(max_iter, int(pending.size))
        z = rng.standard_normal(pending.size)
        u = rng.random(pending.size)
        with np.errstate(divide="ignore"):
            x = mu + c / (z * z)
        prop = levy_pdf(x, c, mu)
        ok = np.isfinite(x) & (prop > 0)
        # target/proposal ratio of the unnormalised tilted kernel, bounded by 1
        with np.errstate(over="ignore", invalid="ignore"):
            ratio = np.where(ok, np.exp(-lam * (x - mu)), 0.0)
        accept = ok & (u < ratio)
        out[pending[accept]] = x[accept]
        pending = pending[~accept]
    over = out > params.r_max
    if clip:
        out = np.minimum(out, params.r_max)
    return out, over


def sample_radius(params: CtplParams, rng: np.random.Generator, max_iter: int = MAX_REJECTION_ITER) -> RadialSample:
    r, over = sample_radii(params, 1, rng, clip=True, max_iter=max_iter)
    return RadialSample(radius=float(r[0]), clipped=bool(over[0]))


def estimate_tail(params: CtplParams, threshold: float, n_samples: int, rng: np.random.Generator) -> float:
    """Monte Carlo ``P[X > threshold]`` from unclipped draws."""
    if n_samples < 1:
        raise ParameterError("n_samples must be >= 1")
    x, _ = sample_radii(params, n_samples, rng, clip=False)
    return int(np.count_nonzero(x > threshold)) / n_samples


def autotune_tempering(
    c: float,
    mu: float,
    r_max: float,
    delta: float,
    rng: np.random.Generator,
    tol: float = 1e-3,
    max_iter: int = 40,
    n_mc: int = 100_000,
) -> float:
    """Bisect the tempering rate on [0, 2] so that ``P[X > r_max] ~= delta``.

    Every tail estimate uses its own child stream of ``rng``.  Raises
    :class:`BracketError` when even ``lambda = 2`` leaves too much tail mass.
    """
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    base = CtplParams(c=c, lam=0.0, mu=mu, r_max=r_max, delta=delta)
    lo, hi = LAMBDA_BRACKET

    def tail(lam):
        (sub,) = rng.spawn(1)
        return estimate_tail(base.with_lambda(lam), r_max, n_mc, sub)

    p_hi = tail(hi)
    if p_hi > delta:
        raise BracketError(
            f"tail probability {p_hi:.4g} at lambda={hi} still exceeds delta={delta}; widen the bracket"
        )
    if tail(lo) <= delta:
        return 0.0
    best, best_gap = hi, abs(p_hi - delta)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        p = tail(mid)
        gap = abs(p - delta)
        if gap < best_gap:
            best, best_gap = mid, gap
        if gap < tol:
            return mid
        if p > delta:
            lo = mid
        else:
            hi = mid
    return best


def calibrate(
    c: float,
    r_max: float,
    delta: float,
    seed: int,
    mu: float = 0.0,
    tol: float = 1e-3,
    max_iter: int = 40,
    n_mc: int = 100_000,
) -> CalibrationRecord:
    """Seeded wrapper around :func:`autotune_tempering` returning a cache record."""
    rng = np.random.default_rng(seed)
    lam = autotune_tempering(c, mu, r_max, delta, rng, tol=tol, max_iter=max_iter, n_mc=n_mc)
    return CalibrationRecord(c=c, mu=mu, r_max=r_max, delta=delta, lam=lam, n_mc=n_mc, seed=seed)


def random_directions(shape, d: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors uniform on ``S^{d-1}``; shape ``(*shape, d)``."""
    shape = tuple(np.atleast_1d(shape)) if np.ndim(shape) else (int(shape),)
    if d == 1:
        return rng.choice([-1.0, 1.0], size=shape + (1,))
    if d == 2:
        theta = rng.uniform(0.0, 2 * math.pi, size=shape)
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    v = rng.standard_normal(shape + (d,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def displacements(shape, d: int, params: CtplParams, rng: np.random.Generator) -> np.ndarray:
    """Isotropic CTPL displacement vectors ``R U`` of shape ``(*shape, d)``."""
    shape = (int(shape),) if np.ndim(shape) == 0 else tuple(shape)
    n = int(np.prod(shape)) if shape else 1
    radii, _ = sample_radii(params, n, rng)
    dirs = random_directions(shape, d, rng)
    return radii.reshape(shape + (1,)) * dirs


def perturb_point(point, params: CtplParams, rng: np.random.Generator) -> np.ndarray:
    point = np.asarray(point, dtype=float)
    if point.ndim != 1 or point.size < 1:
        raise ParameterError("point must be a 1-d coordinate vector")
    return point + displacements((), point.size, params, rng)


@dataclass(frozen=True)
class MomentMatched:
    gaussian_mean: float
    gaussian_var: float
    gamma_shape: float
    gamma_scale: float


def moment_matched_comparators(samples) -> MomentMatched:
    """Gaussian and Gamma laws sharing the sample mean and variance."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise DegenerateSampleError("need at least two samples")
    m = float(x.mean())
    v = float(x.var(ddof=1))
    if not v > 0:
        raise DegenerateSampleError("sample variance is zero")
    return MomentMatched(gaussian_mean=m, gaussian_var=v, gamma_shape=m * m / v, gamma_scale=v / m)
