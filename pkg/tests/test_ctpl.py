from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from geospectra import ctpl
from geospectra.ctpl import CtplParams
from geospectra.errors import (
    BracketError,
    DegenerateSampleError,
    ParameterError,
    SamplerStallError,
)
from oracles import binomial_sigma, tail_probability, tempered_levy_law


class TestParams:
    @pytest.mark.parametrize(
        "kw",
        [
            {"c": 0.0},
            {"c": -1.0},
            {"c": 1.0, "lam": -0.1},
            {"c": 1.0, "r_max": 0.0},
            {"c": 1.0, "delta": 0.0},
            {"c": 1.0, "delta": 1.0},
            {"c": 1.0, "mu": math.nan},
        ],
    )
    def test_rejects_invalid(self, kw):
        with pytest.raises(ParameterError):
            CtplParams(**kw)

    def test_calibration_record_roundtrip(self):
        rec = ctpl.CalibrationRecord(c=2.0, mu=0.0, r_max=40.0, delta=0.05, lam=0.0112, n_mc=1000, seed=3)
        text = rec.to_json()
        assert '"lambda"' in text
        assert ctpl.CalibrationRecord.from_json(text) == rec
        assert rec.params().lam == 0.0112


class TestLevyPdf:
    def test_zero_at_and_below_location(self):
        assert ctpl.levy_pdf(0.0, 1.0) == 0.0
        assert ctpl.levy_pdf(-3.0, 1.0, mu=-2.0) == 0.0

    def test_value_at_mu_plus_c(self):
        assert ctpl.levy_pdf(1.0, 1.0) == pytest.approx(math.sqrt(1 / (2 * math.pi)) * math.exp(-0.5), rel=1e-14)
        assert ctpl.levy_pdf(1.0, 1.0) == pytest.approx(0.2420, abs=1e-4)

    @pytest.mark.parametrize("c,mu", [(0.5, 0.0), (1.0, 2.0), (3.0, -1.0)])
    def test_matches_scipy_levy(self, c, mu):
        x = mu + np.geomspace(1e-3, 1e4, 50)
        np.testing.assert_allclose(ctpl.levy_pdf(x, c, mu), stats.levy(loc=mu, scale=c).pdf(x), rtol=1e-12)

    def test_power_law_slope(self):
        x = np.array([1e8, 1e9])
        y = ctpl.levy_pdf(x, 1.0)
        slope = np.diff(np.log(y)) / np.diff(np.log(x))
        assert slope[0] == pytest.approx(-1.5, abs=1e-6)

    def test_finite_everywhere(self):
        x = np.array([1e-300, 1e-10, 1.0, 1e300, np.inf])
        assert np.all(np.isfinite(ctpl.levy_pdf(x, 1.0)))

    def test_rejects_bad_scale(self):
        with pytest.raises(ParameterError):
            ctpl.levy_pdf(1.0, 0.0)


class TestCtplPdf:
    def test_untempered_equals_levy(self):
        p = CtplParams(c=1.3)
        x = np.geomspace(0.01, 100, 30)
        np.testing.assert_allclose(ctpl.ctpl_pdf(x, p), ctpl.levy_pdf(x, 1.3), rtol=1e-14)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 5.0])
    @pytest.mark.parametrize("lam", [1e-4, 0.005, 0.05, 0.5, 2.0])
    def test_normaliser_against_closed_form(self, c, lam):
        # Z = exp(-sqrt(2 c lam)) for mu = 0
        assert ctpl.normalizing_constant(c, lam) == pytest.approx(math.exp(-math.sqrt(2 * c * lam)), rel=1e-10)

    @pytest.mark.parametrize("c,lam", [(1.0, 0.05), (2.0, 0.01), (5.0, 0.5), (0.3, 1e-3)])
    def test_integrates_to_one(self, c, lam):
        p = CtplParams(c=c, lam=lam)
        f = lambda u: ctpl.ctpl_pdf(1.0 / u**2, p) * 2.0 / u**3  # noqa: E731
        total, _ = integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=500)
        assert total == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("c,lam,mu", [(1.0, 0.05, 0.0), (2.5, 0.2, 1.5)])
    def test_matches_inverse_gaussian(self, c, lam, mu):
        p = CtplParams(c=c, lam=lam, mu=mu)
        law = tempered_levy_law(c, lam, mu)
        x = mu + np.geomspace(1e-2, 500, 40)
        np.testing.assert_allclose(ctpl.ctpl_pdf(x, p), law.pdf(x), rtol=1e-9)
        np.testing.assert_allclose(ctpl.ctpl_sf(x, p), law.sf(x), rtol=1e-7, atol=1e-14)

    def test_exponential_tail_rate(self):
        p = CtplParams(c=1.0, lam=0.05)
        x, x2 = 2000.0, 2100.0
        slope = math.log(ctpl.ctpl_pdf(x2, p)) - math.log(ctpl.ctpl_pdf(x, p))
        # the Levy factor adds -1.5 log(x2/x) and the small c/(2x) correction
        expected = -0.05 * (x2 - x) - 1.5 * math.log(x2 / x) - 0.5 * (1 / x2 - 1 / x)
        assert slope == pytest.approx(expected, rel=1e-9)
        assert slope / (x2 - x) == pytest.approx(-0.05, rel=0.02)


class TestSampling:
    def test_seed_determinism(self):
        p = CtplParams(c=1.0, lam=0.01, r_max=50.0)
        a, _ = ctpl.sample_radii(p, 1000, np.random.default_rng(5))
        b, _ = ctpl.sample_radii(p, 1000, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_clip_flag(self, rng):
        p = CtplParams(c=1.0, lam=0.0, r_max=5.0)
        r, over = ctpl.sample_radii(p, 5000, rng)
        assert np.all(r <= 5.0)
        assert np.all(r[over] == 5.0)
        assert np.all(r[~over] < 5.0) or np.all(r[~over] <= 5.0)
        s = ctpl.sample_radius(p, rng)
        assert isinstance(s, ctpl.RadialSample) and s.radius <= 5.0

    def test_heavy_tempering_concentrates_near_location(self, rng):
        # acceptance rate is exp(-sqrt(2 c lam)), so keep c * lam moderate
        free, _ = ctpl.sample_radii(CtplParams(c=1.0, mu=3.0), 20_000, rng)
        tight, _ = ctpl.sample_radii(CtplParams(c=1.0, lam=5.0, mu=3.0), 20_000, rng)
        assert np.all(tight > 3.0)
        assert np.quantile(free, 0.99) - 3.0 > 1000
        assert np.quantile(tight, 0.99) - 3.0 < 3

    def test_stall_reports_iterations(self, rng):
        p = CtplParams(c=1.0, lam=1e6)
        with pytest.raises(SamplerStallError) as info:
            ctpl.sample_radii(p, 10, rng, max_iter=3)
        assert info.value.iterations == 3

    def test_ks_against_closed_form(self, rng):
        p = CtplParams(c=1.0, lam=0.05)
        x, _ = ctpl.sample_radii(p, 100_000, rng, clip=False)
        res = stats.kstest(x, tempered_levy_law(1.0, 0.05).cdf)
        assert res.pvalue > 0.01

    def test_tail_estimate_matches_quadrature(self, rng):
        p = CtplParams(c=1.0, lam=0.05)
        est = ctpl.estimate_tail(p, 50.0, 100_000, rng)
        exact = float(ctpl.ctpl_sf(50.0, p))
        assert exact == pytest.approx(tail_probability(1.0, 0.05, 50.0), rel=1e-8)
        assert abs(est - exact) <= 3 * binomial_sigma(exact, 100_000)

    def test_tail_limits(self, rng):
        p = CtplParams(c=1.0, lam=0.05)
        assert ctpl.estimate_tail(p, 0.0, 1000, rng) == 1.0
        assert ctpl.estimate_tail(p, 1e12, 1000, rng) == 0.0

    def test_tail_nonincreasing_in_lambda(self):
        grid = [0.0, 0.001, 0.005, 0.02, 0.1, 0.5]
        tails = [ctpl.estimate_tail(CtplParams(c=1.0, lam=lam), 20.0, 20_000, np.random.default_rng(9)) for lam in grid]
        assert all(a >= b for a, b in zip(tails, tails[1:]))


class TestAutotune:
    def test_no_tempering_needed(self, rng):
        assert ctpl.autotune_tempering(1.0, 0.0, 50.0, 1 - 1e-9, rng, n_mc=2000) == 0.0

    def test_bracket_failure(self, rng):
        # almost all mass lies beyond a tiny threshold even at lambda = 2
        with pytest.raises(BracketError):
            ctpl.autotune_tempering(1.0, 0.0, 0.05, 0.05, rng, n_mc=2000)

    def test_rejects_bad_delta(self, rng):
        with pytest.raises(ParameterError):
            ctpl.autotune_tempering(1.0, 0.0, 50.0, 1.5, rng)

    def test_close_to_closed_form(self, rng):
        lam = ctpl.autotune_tempering(1.0, 0.0, 10.0, 0.05, rng, tol=5e-4, n_mc=200_000)
        assert tail_probability(1.0, lam, 10.0) == pytest.approx(0.05, abs=2e-3)

    def test_calibrate_is_seeded(self):
        a = ctpl.calibrate(2.0, 20.0, 0.05, seed=11, n_mc=20_000)
        b = ctpl.calibrate(2.0, 20.0, 0.05, seed=11, n_mc=20_000)
        assert a == b


class TestPerturbation:
    def test_displacement_bounded(self, rng):
        p = CtplParams(c=1.0, lam=0.01, r_max=7.0)
        pts = np.array([ctpl.perturb_point((1.0, -2.0), p, rng) for _ in range(500)])
        assert np.all(np.linalg.norm(pts - (1.0, -2.0), axis=1) <= 7.0 + 1e-12)

    def test_angles_uniform(self, rng):
        p = CtplParams(c=1.0, lam=0.01, r_max=50.0)
        v = ctpl.displacements(100_000, 2, p, rng)
        theta = np.arctan2(v[:, 1], v[:, 0])
        counts, _ = np.histogram(theta, bins=36, range=(-np.pi, np.pi))
        assert stats.chisquare(counts).pvalue > 0.01

    def test_mean_vanishes(self, rng):
        p = CtplParams(c=1.0, lam=0.01, r_max=50.0)
        n = 50_000
        v = ctpl.displacements(n, 2, p, rng)
        assert np.linalg.norm(v.mean(axis=0)) <= 4 * 50.0 / math.sqrt(n)

    @pytest.mark.parametrize("d", [1, 3, 5])
    def test_directions_unit(self, rng, d):
        u = ctpl.random_directions((100,), d, rng)
        np.testing.assert_allclose(np.linalg.norm(u, axis=-1), 1.0)


class TestMomentMatching:
    def test_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            ctpl.moment_matched_comparators([2.0, 2.0, 2.0])
        with pytest.raises(DegenerateSampleError):
            ctpl.moment_matched_comparators([2.0])

    def test_gamma_recovery(self, rng):
        x = rng.gamma(2.0, 3.0, size=100_000)
        mm = ctpl.moment_matched_comparators(x)
        assert mm.gamma_shape == pytest.approx(2.0, rel=0.05)
        assert mm.gamma_scale == pytest.approx(3.0, rel=0.05)
        assert mm.gaussian_mean == pytest.approx(x.mean())
        assert mm.gaussian_var == pytest.approx(x.var(ddof=1))

    def test_tail_dominance(self, rng):
        p = CtplParams(c=1.0, lam=0.003866, r_max=50.0)
        x, _ = ctpl.sample_radii(p, 200_000, rng)
        mm = ctpl.moment_matched_comparators(x)
        grid = np.arange(20.0, 49.0, 1.0)
        emp = np.array([np.mean(x > g) for g in grid])
        gauss = stats.norm(mm.gaussian_mean, math.sqrt(mm.gaussian_var)).sf(grid)
        gam = stats.gamma(mm.gamma_shape, scale=mm.gamma_scale).sf(grid)
        dominant = (emp > gauss) & (emp > gam)
        assert dominant.sum() >= 5


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.1, 10.0), lam=st.floats(1e-4, 2.0))
def test_sf_is_a_survival_function(c, lam):
    p = CtplParams(c=c, lam=lam)
    x = np.array([0.0, c / 10, c, 10 * c, 100 * c])
    s = ctpl.ctpl_sf(x, p)
    assert s[0] == pytest.approx(1.0)
    assert np.all(np.diff(s) <= 1e-12)
    assert np.all((s >= 0) & (s <= 1))
