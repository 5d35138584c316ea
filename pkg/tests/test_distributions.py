"""Tests for the symmetric test-distribution specs."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fisher_mean.distributions import (
    Gaussian,
    GaussianMixture,
    GaussianSawtooth,
    GaussianWithAtoms,
    Laplace,
    mean,
    parse_spec,
    pdf,
    sample,
    spec_from_dict,
    spec_id,
    variance,
)
from fisher_mean.quadrature import merge_breakpoints, panel_nodes
from fisher_mean.rng import RngStream

GAUSS = Gaussian(0.0, 1.0)
LAPLACE = Laplace(0.0, 1.0)
MIXTURE = GaussianMixture(((0.5, 0.0, 0.1), (0.5, 0.0, 10.0)))
ATOMS = GaussianWithAtoms(0.98, 0.0, 1.0, ((0.01, -10.0), (0.01, 10.0)))
SAWTOOTH = GaussianSawtooth(0.0, 1.0, 0.05, 0.5, 41)

ALL_SPECS = [GAUSS, LAPLACE, MIXTURE, ATOMS, SAWTOOTH]


class TestMoments:
    def test_gaussian(self):
        assert mean(Gaussian(3.0, 2.0)) == 3.0
        assert variance(Gaussian(3.0, 2.0)) == 4.0

    def test_laplace(self):
        assert mean(Laplace(-1.0, 1.5)) == -1.0
        assert variance(Laplace(-1.0, 1.5)) == pytest.approx(4.5, rel=1e-15)

    def test_mixture(self):
        assert mean(MIXTURE) == 0.0
        assert variance(MIXTURE) == pytest.approx(50.005, rel=1e-14)
        shifted = GaussianMixture(((0.5, 1.0, 1.0), (0.5, 3.0, 1.0)))
        assert mean(shifted) == pytest.approx(2.0, abs=1e-15)
        assert variance(shifted) == pytest.approx(2.0, rel=1e-14)

    def test_atoms(self):
        assert mean(ATOMS) == 0.0
        # 0.98 * 1 + 0.02 * 100
        assert variance(ATOMS) == pytest.approx(2.98, rel=1e-14)

    def test_sawtooth_variance_matches_moment_formula(self):
        # Independent oracle: each tooth is a symmetric triangle of support
        # width w, so its variance is w^2/24 and its mean offset is k*w.
        w, lam, sig = 0.05, 0.5, 1.0
        ks = np.arange(-20, 21)
        p = np.exp(-0.5 * (ks * w / sig) ** 2)
        p /= p.sum()
        oracle = (1 - lam) * sig**2 + lam * np.sum(p * ((ks * w) ** 2 + w**2 / 24.0))
        assert variance(SAWTOOTH) == pytest.approx(oracle, rel=1e-12)

    def test_sawtooth_zero_tooth_mass_is_gaussian(self):
        plain = GaussianSawtooth(1.0, 2.0, 0.1, 0.0, 5)
        assert variance(plain) == pytest.approx(4.0, rel=1e-12)
        x = np.linspace(-5, 7, 201)
        np.testing.assert_allclose(pdf(plain, x), pdf(Gaussian(1.0, 2.0), x), rtol=1e-12)


class TestPdf:
    def test_gaussian_peak(self):
        assert pdf(GAUSS, 0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-15)

    def test_laplace_shape(self):
        assert pdf(LAPLACE, 0.0) == pytest.approx(0.5, rel=1e-15)
        assert pdf(LAPLACE, 2.0) == pytest.approx(0.5 * math.exp(-2.0), rel=1e-14)

    def test_mixture_is_weighted_sum(self):
        x = np.linspace(-3, 3, 41)
        expect = 0.5 * pdf(Gaussian(0.0, 0.1), x) + 0.5 * pdf(Gaussian(0.0, 10.0), x)
        np.testing.assert_allclose(pdf(MIXTURE, x), expect, rtol=1e-14)

    def test_atoms_pdf_excludes_point_masses(self):
        x = np.linspace(-12, 12, 101)
        np.testing.assert_allclose(pdf(ATOMS, x), 0.98 * pdf(GAUSS, x), rtol=1e-14)
        # continuous mass integrates to the base weight only
        xs, ws = panel_nodes(np.linspace(-12, 12, 97), 16)
        assert np.sum(ws * pdf(ATOMS, xs)) == pytest.approx(0.98, abs=1e-12)

    def test_sawtooth_tooth_peak_and_valley(self):
        # tooth at center k=0 has weight lam*p_0 and triangle peak 2/w
        w, lam, sig = 0.05, 0.5, 1.0
        ks = np.arange(-20, 21)
        p = np.exp(-0.5 * (ks * w / sig) ** 2)
        p /= p.sum()
        base = pdf(Gaussian(0.0, 1.0), 0.0)
        expect_peak = (1 - lam) * base + lam * p[20] * 2.0 / w
        assert pdf(SAWTOOTH, 0.0) == pytest.approx(expect_peak, rel=1e-12)
        # halfway between teeth the triangles vanish
        expect_valley = (1 - lam) * pdf(Gaussian(0.0, 1.0), w / 2.0)
        assert pdf(SAWTOOTH, w / 2.0) == pytest.approx(expect_valley, rel=1e-12)

    def test_pdf_nonnegative_and_normalized(self):
        for spec in ALL_SPECS:
            cont = [c for c in spec.components() if c.kind != "atom"]
            half = 40.0 * max(c.b for c in cont)
            width = max(min(c.b for c in cont) / 2.0, half / 10_000.0)
            breaks = [c.a + s * c.b for c in cont for s in (-1, 0, 1)]
            edges = merge_breakpoints(mean(spec) - half, mean(spec) + half, breaks, width)
            xs, ws = panel_nodes(edges, 16)
            fx = pdf(spec, xs)
            assert np.all(fx >= 0)
            atom_mass = sum(w for (w, _) in spec.atoms())
            assert np.sum(ws * fx) == pytest.approx(1.0 - atom_mass, abs=1e-9)

    def test_pdf_symmetric_about_mean(self):
        t = np.linspace(0.0, 8.0, 161)
        for spec in ALL_SPECS:
            mu = mean(spec)
            np.testing.assert_allclose(
                pdf(spec, mu + t), pdf(spec, mu - t), rtol=1e-12, atol=1e-300
            )


class TestSampling:
    def test_deterministic_given_stream_identity(self):
        for spec in ALL_SPECS:
            a = sample(spec, RngStream(11).substream("draw"), 64)
            b = sample(spec, RngStream(11).substream("draw"), 64)
            assert np.array_equal(a, b)

    def test_distinct_substreams_differ(self):
        a = sample(GAUSS, RngStream(11).substream("a"), 64)
        b = sample(GAUSS, RngStream(11).substream("b"), 64)
        assert not np.array_equal(a, b)

    def test_zero_count(self):
        assert sample(GAUSS, RngStream(0), 0).shape == (0,)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=[spec_id(s) for s in ALL_SPECS])
    def test_sample_moments(self, spec):
        n = 200_000
        xs = sample(spec, RngStream(987).substream("moments", spec_id(spec)), n)
        mu, var = mean(spec), variance(spec)
        # 6-sigma bands on the MC estimates
        se_mean = math.sqrt(var / n)
        assert abs(xs.mean() - mu) < 6 * se_mean
        fourth = np.mean((xs - mu) ** 4)
        se_var = math.sqrt(max(fourth - var**2, 0.0) / n)
        assert abs(xs.var() - var) < 6 * se_var + 1e-12

    def test_atom_hit_frequency(self):
        n = 200_000
        xs = sample(ATOMS, RngStream(5).substream("atoms"), n)
        hits = np.mean(np.abs(np.abs(xs) - 10.0) < 1e-9)
        assert abs(hits - 0.02) < 6 * math.sqrt(0.02 * 0.98 / n)

    def test_gaussian_quantiles(self):
        # inverse-CDF sampling should reproduce exact quantiles closely
        n = 200_000
        xs = sample(GAUSS, RngStream(21).substream("q"), n)
        for q, z in [(0.5, 0.0), (0.841344746, 1.0), (0.977249868, 2.0)]:
            emp = np.quantile(xs, q)
            assert abs(emp - z) < 0.02


class TestValidation:
    def test_bad_scales(self):
        with pytest.raises(ValueError):
            Gaussian(0.0, 0.0)
        with pytest.raises(ValueError):
            Laplace(0.0, -1.0)
        with pytest.raises(ValueError):
            GaussianSawtooth(0.0, 1.0, -0.1)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum"):
            GaussianMixture(((0.6, -1.0, 1.0), (0.5, 1.0, 1.0)))
        with pytest.raises(ValueError):
            GaussianWithAtoms(0.9, 0.0, 1.0, ((0.01, -1.0), (0.01, 1.0)))

    def test_weights_must_be_positive(self):
        with pytest.raises(ValueError):
            GaussianMixture(((1.2, 0.0, 1.0), (-0.2, 0.0, 2.0)))

    def test_asymmetric_specs_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            GaussianMixture(((0.5, -1.0, 1.0), (0.5, 1.0, 2.0)))
        with pytest.raises(ValueError, match="symmetric"):
            GaussianMixture(((0.3, -1.0, 1.0), (0.5, 1.0, 1.0), (0.2, 0.0, 1.0)))
        with pytest.raises(ValueError, match="symmetric"):
            GaussianWithAtoms(0.98, 0.0, 1.0, ((0.02, 3.0),))

    def test_mirrored_pair_about_offset_center_accepted(self):
        m = GaussianMixture(((0.5, 0.1, 1.0), (0.5, 0.3, 1.0)))
        assert mean(m) == pytest.approx(0.2, abs=1e-15)

    def test_sawtooth_teeth_must_be_odd(self):
        with pytest.raises(ValueError):
            GaussianSawtooth(0.0, 1.0, 0.05, 0.5, 40)
        with pytest.raises(ValueError):
            GaussianSawtooth(0.0, 1.0, 0.05, 1.0, 41)


class TestSerialization:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=[spec_id(s) for s in ALL_SPECS])
    def test_round_trip(self, spec):
        assert parse_spec(spec_id(spec)) == spec
        assert spec_from_dict(spec.to_dict()) == spec
        assert spec_from_dict(json.loads(spec.to_json())) == spec
        assert parse_spec(spec.to_json()) == spec

    def test_compact_forms(self):
        assert parse_spec("gaussian:0,1") == Gaussian(0.0, 1.0)
        assert parse_spec("laplace:0,1") == Laplace(0.0, 1.0)
        assert parse_spec("mixture:0.5,0,0.1;0.5,0,10") == MIXTURE
        assert parse_spec("atoms:0.98,0,1;0.01,-10;0.01,10") == ATOMS
        assert parse_spec("sawtooth:0,1,0.05,0.5,41") == SAWTOOTH
        assert parse_spec("sawtooth:0,1,0.05") == GaussianSawtooth(0.0, 1.0, 0.05)

    def test_malformed_strings(self):
        for bad in ["", "gaussian", "gaussian:1", "nope:0,1", "mixture:", "gaussian:a,b"]:
            with pytest.raises(ValueError):
                parse_spec(bad)
        with pytest.raises(ValueError):
            spec_from_dict({"kind": "unknown"})


@st.composite
def mirrored_mixtures(draw):
    center = draw(st.floats(-5, 5, allow_nan=False))
    n_pairs = draw(st.integers(1, 3))
    comps = []
    for _ in range(n_pairs):
        w = draw(st.floats(0.05, 1.0))
        off = draw(st.floats(0.0, 4.0))
        sig = draw(st.floats(0.1, 3.0))
        comps.append([w, center - off, sig])
        comps.append([w, center + off, sig])
    total = sum(c[0] for c in comps)
    for c in comps:
        c[0] /= total
    # repair rounding drift so the weight-sum invariant holds exactly
    comps[0][0] += 1.0 - sum(c[0] for c in comps)
    return center, GaussianMixture(tuple(tuple(c) for c in comps))


class TestProperties:
    @given(mirrored_mixtures())
    @settings(max_examples=30, deadline=None)
    def test_mirrored_mixture_mean_and_symmetry(self, case):
        center, m = case
        assert mean(m) == pytest.approx(center, abs=1e-9)
        t = np.linspace(0.0, 5.0, 23)
        np.testing.assert_allclose(
            pdf(m, mean(m) + t), pdf(m, mean(m) - t), rtol=1e-9, atol=1e-290
        )

    @given(st.integers(0, 2**32), st.integers(1, 300))
    @settings(max_examples=25, deadline=None)
    def test_samples_finite(self, seed, n):
        xs = sample(LAPLACE, RngStream(seed).substream("p"), n)
        assert xs.shape == (n,)
        assert np.all(np.isfinite(xs))
