"""Tests for the smoothed-distribution oracle."""

import math

import numpy as np
import pytest
from scipy.special import log_ndtr

from fisher_mean.distributions import (
    Gaussian,
    GaussianMixture,
    GaussianSawtooth,
    GaussianWithAtoms,
    Laplace,
    sample,
)
from fisher_mean.errors import (
    DegenerateTestFunction,
    DensityUnderflow,
    QuadratureNotConverged,
)
from fisher_mean.quadrature import panel_nodes
from fisher_mean.rng import RngStream
from fisher_mean.smoothing import (
    QuadratureConfig,
    SmoothedModel,
    cramer_rao_ratio,
    fisher_information,
    fisher_information_report,
    smoothed_pdf,
    smoothed_pdf_derivative,
    smoothed_score,
)

GAUSS = Gaussian(0.0, 1.0)
LAPLACE = Laplace(0.0, 1.0)
MIXTURE = GaussianMixture(((0.5, 0.0, 0.1), (0.5, 0.0, 10.0)))
ATOMS = GaussianWithAtoms(0.98, 0.0, 1.0, ((0.01, -10.0), (0.01, 10.0)))
SAWTOOTH = GaussianSawtooth(0.0, 1.0, 0.05, 0.5, 41)
ALL_SPECS = [GAUSS, LAPLACE, MIXTURE, ATOMS, SAWTOOTH]


def _laplace_closed_form(mu, b, r, x):
    """Independent closed form for Laplace * N(0, r^2) via Mills-ratio algebra."""
    z = np.asarray(x, float) - mu
    up = (z - r * r / b) / r
    um = (z + r * r / b) / r
    la = r * r / (2 * b * b) - z / b + log_ndtr(up) - math.log(2 * b)
    lb = r * r / (2 * b * b) + z / b + log_ndtr(-um) - math.log(2 * b)
    fa, fb = np.exp(la), np.exp(lb)
    return fa + fb, (fb - fa) / b


class TestGaussianClosedForms:
    def test_pdf_peak(self):
        m = SmoothedModel(GAUSS, 1.0)
        assert smoothed_pdf(m, 0.0) == pytest.approx(1.0 / math.sqrt(4 * math.pi), rel=1e-14)

    def test_derivative_examples(self):
        m = SmoothedModel(GAUSS, 1.0)
        assert smoothed_pdf_derivative(m, 0.0) == pytest.approx(0.0, abs=1e-18)
        assert smoothed_pdf_derivative(m, 1.0) == pytest.approx(
            -0.5 * smoothed_pdf(m, 1.0), rel=1e-14
        )

    def test_score_is_linear(self):
        for mu, sigma, r in [(0.0, 1.0, 0.3), (2.0, 0.5, 1.0), (-1.0, 3.0, 0.05)]:
            m = SmoothedModel(Gaussian(mu, sigma), r)
            x = np.linspace(mu - 5, mu + 5, 41)
            np.testing.assert_allclose(
                smoothed_score(m, x), -(x - mu) / (sigma**2 + r**2), rtol=1e-12, atol=1e-15
            )

    def test_fisher_information_closed_form(self):
        for sigma, r in [(1.0, 1.0), (1.0, 0.3), (2.0, 0.5), (0.5, 0.05)]:
            m = SmoothedModel(Gaussian(0.0, sigma), r)
            assert fisher_information(m) == pytest.approx(1.0 / (sigma**2 + r**2), rel=1e-9)

    def test_score_zero_at_center(self):
        for spec in ALL_SPECS:
            m = SmoothedModel(spec, 0.3)
            assert abs(smoothed_score(m, m.mu)) < 1e-12 / 0.3


class TestAtomPair:
    def test_pdf_is_sum_of_kernels(self):
        # each atom contributes its weight times the kernel centered on it
        a, r, wa, wb = 3.0, 0.7, 0.45, 0.1

        def w_r(u):
            return math.exp(-0.5 * (u / r) ** 2) / (r * math.sqrt(2 * math.pi))

        spec = GaussianWithAtoms(wb, 0.0, 1.0, ((wa, -a), (wa, a)))
        m = SmoothedModel(spec, r)
        s_base = math.sqrt(1.0 + r * r)
        for x in (-3.0, -1.0, 0.0, 0.5, 2.9, 4.1):
            base = wb * math.exp(-0.5 * (x / s_base) ** 2) / (s_base * math.sqrt(2 * math.pi))
            expect = base + wa * (w_r(x - a) + w_r(x + a))
            assert smoothed_pdf(m, x) == pytest.approx(expect, rel=1e-12)

    def test_fisher_approaches_kernel_information(self):
        # well-separated atoms: each smoothed spike contributes score variance 1/r^2
        r = 1.0
        spec = GaussianWithAtoms(1e-12, 0.0, 100.0, ((0.5 - 5e-13, -100.0), (0.5 - 5e-13, 100.0)))
        m = SmoothedModel(spec, r)
        assert fisher_information(m) == pytest.approx(1.0 / r**2, rel=1e-6)


class TestLaplace:
    @pytest.mark.parametrize("r", [0.1, 0.5, 2.0])
    def test_matches_independent_closed_form(self, r):
        m = SmoothedModel(LAPLACE, r)
        x = np.linspace(-8.0, 8.0, 81)
        f, fp = m.density_and_derivative(x)
        f0, fp0 = _laplace_closed_form(0.0, 1.0, r, x)
        np.testing.assert_allclose(f, f0, rtol=1e-12)
        scale = np.abs(fp0) + f0 / r
        assert np.max(np.abs(fp - fp0) / scale) < 1e-12

    def test_pdf_monte_carlo_cross_check(self):
        # 10^7 stratified inverse-CDF draws: variance-free form of E[w_r(-Y)]
        r = 0.5
        m = SmoothedModel(LAPLACE, r)
        u = (np.arange(10_000_000) + 0.5) / 10_000_000
        y = np.where(u < 0.5, np.log(2 * u), -np.log(2 * (1 - u)))
        mc = np.mean(np.exp(-0.5 * (y / r) ** 2)) / (r * math.sqrt(2 * math.pi))
        assert smoothed_pdf(m, 0.0) == pytest.approx(mc, abs=1e-4)

    def test_small_r_fisher_near_unsmoothed(self):
        # unsmoothed Fisher information of Laplace(0, b) is 1/b^2
        m = SmoothedModel(LAPLACE, 0.01)
        assert fisher_information(m) == pytest.approx(1.0, rel=0.05)


class TestMixtureAndSawtooth:
    def test_mixture_pdf_is_weighted_sum_of_smoothed_components(self):
        r = 0.05
        m = SmoothedModel(MIXTURE, r)
        x = np.linspace(-30, 30, 201)
        expect = 0.5 * smoothed_pdf(SmoothedModel(Gaussian(0.0, 0.1), r), x) + 0.5 * smoothed_pdf(
            SmoothedModel(Gaussian(0.0, 10.0), r), x
        )
        np.testing.assert_allclose(smoothed_pdf(m, x), expect, rtol=1e-12)

    def test_sawtooth_pdf_adaptive_quadrature_cross_check(self):
        # independent oracle: adaptive QUADPACK integration of f(y) w_r(x-y),
        # split at the tooth kinks so each piece is smooth
        from scipy.integrate import quad

        r = 0.1
        m = SmoothedModel(SAWTOOTH, r)
        kinks = sorted(
            {c.a + s * c.b for c in SAWTOOTH.components() if c.kind == "tri" for s in (-1, 0, 1)}
        )
        edges = [-13.0] + kinks + [13.0]

        def conv(x):
            total = 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                val, _ = quad(
                    lambda y: SAWTOOTH.pdf(y)
                    * math.exp(-0.5 * ((x - y) / r) ** 2)
                    / (r * math.sqrt(2 * math.pi)),
                    a,
                    b,
                    epsabs=1e-13,
                    epsrel=1e-11,
                )
                total += val
            return total

        for x in (0.0, 0.31, 1.2):
            assert smoothed_pdf(m, x) == pytest.approx(conv(x), rel=1e-9)

    def test_sawtooth_discretization_converged(self):
        coarse = SmoothedModel(SAWTOOTH, 0.02)
        fine = SmoothedModel(SAWTOOTH, 0.02, QuadratureConfig(nodes_per_component=96))
        x = np.linspace(-2, 2, 101)
        np.testing.assert_allclose(smoothed_pdf(coarse, x), smoothed_pdf(fine, x), rtol=1e-11)


class TestDerivativeIdentity:
    @pytest.mark.parametrize(
        "spec,r",
        [(GAUSS, 0.3), (LAPLACE, 0.5), (MIXTURE, 0.3), (ATOMS, 0.3), (SAWTOOTH, 0.3)],
        ids=["gauss", "laplace", "mixture", "atoms", "sawtooth"],
    )
    def test_matches_central_finite_difference(self, spec, r):
        m = SmoothedModel(spec, r)
        h = 1e-5
        x = np.linspace(m.mu - 3.0, m.mu + 3.0, 21)
        fd = (smoothed_pdf(m, x + h) - smoothed_pdf(m, x - h)) / (2 * h)
        # absolute floor covers symmetric zero-crossings where rel tol is vacuous
        np.testing.assert_allclose(
            smoothed_pdf_derivative(m, x), fd, rtol=1e-6, atol=1e-9 * np.max(np.abs(fd))
        )

    def test_score_is_log_density_slope(self):
        for spec in ALL_SPECS:
            m = SmoothedModel(spec, 0.3)
            pts = sample(spec, RngStream(8).substream("fd", type(spec).__name__), 200)
            pts = pts + 0.3 * RngStream(8).substream("fdn", type(spec).__name__).normal(200)
            h = 1e-5
            fd = (np.log(smoothed_pdf(m, pts + h)) - np.log(smoothed_pdf(m, pts - h))) / (2 * h)
            s = smoothed_score(m, pts)
            np.testing.assert_allclose(s, fd, rtol=1e-5, atol=1e-7)


class TestScoreGuards:
    def test_underflow_raises(self):
        m = SmoothedModel(GAUSS, 0.1)
        with pytest.raises(DensityUnderflow):
            smoothed_score(m, 300.0)

    def test_pointwise_score_bound(self):
        # |s_r(x)| <= (1/r) sqrt(2 log(1/(sqrt(2 pi) r f_r(x))))
        for spec in ALL_SPECS:
            r = 0.3
            m = SmoothedModel(spec, r)
            x = np.linspace(m.mu - 6 * m.sigma_r, m.mu + 6 * m.sigma_r, 400)
            f, fp = m.density_and_derivative(x)
            keep = f > 1e-290
            s = fp[keep] / f[keep]
            bound = (1.0 / r) * np.sqrt(
                np.maximum(0.0, 2.0 * np.log(1.0 / (math.sqrt(2 * math.pi) * r * f[keep])))
            )
            assert np.all(np.abs(s) <= bound + 1e-9)


class TestFisherIntegral:
    def test_report_fields(self):
        rep = fisher_information_report(SmoothedModel(GAUSS, 0.3))
        assert rep.value == pytest.approx(1.0 / 1.09, rel=1e-9)
        assert rep.quadrature_nodes > 0
        H = 12.0
        p = 1.0 / H**2
        assert rep.tail_bound == pytest.approx(
            (8 * p / 0.09) * (math.log(2 / p) + 1), rel=1e-12
        )

    def test_cached_and_idempotent(self):
        m = SmoothedModel(LAPLACE, 0.3)
        assert fisher_information(m) == fisher_information(m)

    def test_sandwich_for_all_specs(self):
        for spec in ALL_SPECS:
            var = spec.variance()
            for r in (0.05, 0.3, 1.0, 3.0):
                I = fisher_information(SmoothedModel(spec, r))
                assert 1.0 / (var + r * r) - 1e-9 <= I <= 1.0 / (r * r) + 1e-9, (spec, r, I)

    def test_normalization_within_window(self):
        for spec in ALL_SPECS:
            sigma = math.sqrt(spec.variance())
            for r in (0.05 * sigma, 0.3 * sigma, 1.0 * sigma):
                m = SmoothedModel(spec, r)
                fisher_information_report(m)
                _, edges = m._fisher_cache
                x, w = panel_nodes(edges, m.quad.nodes_per_component)
                mass = float(np.sum(w * m.density_and_derivative(x)[0]))
                assert mass == pytest.approx(1.0, abs=1e-6)

    def test_score_mean_vanishes(self):
        for spec in ALL_SPECS:
            m = SmoothedModel(spec, 0.3)
            fisher_information_report(m)
            _, edges = m._fisher_cache
            x, w = panel_nodes(edges, m.quad.nodes_per_component)
            f, fp = m.density_and_derivative(x)
            assert abs(float(np.sum(w * fp))) < 1e-8

    def test_sawtooth_phase_transition(self):
        w = 0.05
        I_small = fisher_information(SmoothedModel(SAWTOOTH, w / 10.0))
        I_large = fisher_information(SmoothedModel(SAWTOOTH, 10.0 * w))
        assert I_small / I_large >= 10.0
        flat = 1.0 / (SAWTOOTH.variance() + 0.25)
        assert flat / 2.0 <= I_large <= flat * 2.0

    def test_nonconvergence_raises(self, monkeypatch):
        import fisher_mean.smoothing as smoothing_mod

        # with no refinement budget the stability comparison can never pass
        monkeypatch.setattr(smoothing_mod, "_MAX_REFINEMENTS", 1)
        with pytest.raises(QuadratureNotConverged):
            fisher_information(SmoothedModel(GAUSS, 0.3))


class TestCramerRao:
    @pytest.mark.parametrize(
        "spec", ALL_SPECS, ids=["gauss", "laplace", "mixture", "atoms", "sawtooth"]
    )
    def test_score_achieves_equality(self, spec):
        m = SmoothedModel(spec, 0.3)
        ratio = cramer_rao_ratio(m, lambda x: smoothed_score(m, x))
        assert ratio == pytest.approx(1.0 / fisher_information(m), rel=1e-6)

    def test_linear_gives_smoothed_variance(self):
        m = SmoothedModel(GAUSS, 1.0)
        ratio = cramer_rao_ratio(m, lambda x: x - m.mu, g_prime=lambda x: np.ones_like(x))
        assert ratio == pytest.approx(m.sigma_r**2, rel=1e-9)

    def test_tanh_on_gaussian(self):
        m = SmoothedModel(GAUSS, 1.0)
        assert cramer_rao_ratio(m, np.tanh) >= 2.0 - 1e-9

    def test_lower_bound_for_odd_functions(self):
        odd_functions = [
            np.tanh,
            np.sin,
            lambda x: np.sign(x) * np.minimum(np.abs(x), 1.0),
            lambda x: x / (1.0 + x * x),
            lambda x: x**3 / (1 + x**4),
        ]
        for spec in ALL_SPECS:
            m = SmoothedModel(spec, 0.3)
            floor = 1.0 / fisher_information(m) - 1e-9
            for g in odd_functions:
                assert cramer_rao_ratio(m, lambda x: g(x - m.mu)) >= floor

    def test_degenerate_function_rejected(self):
        m = SmoothedModel(GAUSS, 0.3)
        with pytest.raises(DegenerateTestFunction):
            cramer_rao_ratio(m, lambda x: x * x)  # even: E[g'] = 0


class TestModelValidation:
    def test_bad_r(self):
        for r in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                SmoothedModel(GAUSS, r)

    def test_bad_quad_config(self):
        with pytest.raises(ValueError):
            QuadratureConfig(nodes_per_component=1)
        with pytest.raises(ValueError):
            QuadratureConfig(tail_halfwidth_sigmas=0.0)
        with pytest.raises(ValueError):
            QuadratureConfig(abs_tol=-1.0)

    def test_translation_equivariance(self):
        c = 3.7
        shifted = GaussianSawtooth(c, 1.0, 0.05, 0.5, 41)
        m0 = SmoothedModel(SAWTOOTH, 0.3)
        m1 = SmoothedModel(shifted, 0.3)
        x = np.linspace(-2, 2, 41)
        np.testing.assert_allclose(smoothed_pdf(m1, x + c), smoothed_pdf(m0, x), rtol=1e-12)
        np.testing.assert_allclose(
            smoothed_score(m1, x + c), smoothed_score(m0, x), rtol=1e-9, atol=1e-12
        )
        assert fisher_information(m1) == pytest.approx(fisher_information(m0), rel=1e-9)
