import math

import numpy as np
import pytest

from sdeinvariance import (HHParams, Interpretation, MODEL_REGISTRY,
                           NoiseKind, NoiseSpec, UsageError, build_model,
                           hh_metadata, hh_system, rate_alpha, rate_beta,
                           resting_state)
from sdeinvariance.core import diffusion_batch, drift_batch


def ref_rates(v: float):
    """Independent scalar reference for all six rate functions.

    Written from the closed forms with plain math; the singular points of
    the first two opening rates are not handled, so callers must stay
    away from V = -35 and V = -50.
    """
    a1 = 0.1 * (v + 35.0) / (1.0 - math.exp(-(v + 35.0) / 10.0))
    a2 = 0.01 * (v + 50.0) / (1.0 - math.exp(-(v + 50.0) / 10.0))
    a3 = 0.07 * math.exp(-0.05 * (v + 60.0))
    b1 = 4.0 * math.exp(-0.0556 * (v + 60.0))
    b2 = 0.125 * math.exp(-(v + 60.0) / 80.0)
    b3 = 1.0 / (1.0 + math.exp(-0.1 * (v + 30.0)))
    return (a1, a2, a3), (b1, b2, b3)


class TestRates:
    def test_point_values(self):
        assert rate_alpha(3, -60.0) == 0.07
        assert rate_beta(1, -60.0) == 4.0
        assert rate_beta(2, -60.0) == 0.125
        assert rate_beta(3, -30.0) == 0.5

    def test_limit_branches(self):
        assert abs(rate_alpha(1, -35.0) - 1.0) < 1e-9
        assert abs(rate_alpha(2, -50.0) - 0.1) < 1e-9

    def test_continuity_across_singular_points(self):
        for i, v_star, limit in ((1, -35.0, 1.0), (2, -50.0, 0.1)):
            below = rate_alpha(i, v_star - 1e-6)
            above = rate_alpha(i, v_star + 1e-6)
            assert abs(below - limit) < 1e-6
            assert abs(above - limit) < 1e-6

    def test_against_reference_formulas(self):
        for v in (-90.0, -70.0, -55.0, -40.0, -20.0, 0.0, 30.0):
            alphas, betas = ref_rates(v)
            for i in (1, 2, 3):
                assert rate_alpha(i, v) == pytest.approx(alphas[i - 1],
                                                         rel=1e-12)
                assert rate_beta(i, v) == pytest.approx(betas[i - 1],
                                                       rel=1e-12)

    def test_rates_positive_over_physiological_range(self):
        v = np.linspace(-100.0, 60.0, 2001)
        for i in (1, 2, 3):
            assert (rate_alpha(i, v) > 0).all()
            assert (rate_beta(i, v) > 0).all()

    def test_channel_number_validated(self):
        with pytest.raises(UsageError):
            rate_alpha(0, -60.0)
        with pytest.raises(UsageError):
            rate_beta(4, -60.0)

    def test_scalar_in_scalar_out(self):
        out = rate_alpha(1, -40.0)
        assert isinstance(out, float)
        arr = rate_alpha(1, np.array([-40.0, -20.0]))
        assert isinstance(arr, np.ndarray)


class TestDriftStructure:
    def test_face_values_reduce_to_rates(self):
        system = hh_system()
        for v in np.linspace(-100.0, 60.0, 64):
            at_zero = np.array([0.0, 0.0, 0.0, v])
            at_one = np.array([1.0, 1.0, 1.0, v])
            f0 = system.drift(0.0, at_zero)
            f1 = system.drift(0.0, at_one)
            for i in (1, 2, 3):
                assert f0[i - 1] == rate_alpha(i, v)
                assert f1[i - 1] == -rate_beta(i, v)

    def test_voltage_equation(self):
        p = HHParams()
        system = hh_system(p)
        x = np.array([0.2, 0.4, 0.6, -55.0])
        expected = (p.i_app
                    - p.g_na * 0.2 ** 3 * 0.6 * (-55.0 - p.e_na)
                    - p.g_k * 0.4 ** 4 * (-55.0 - p.e_k)
                    - p.g_l * (-55.0 - p.e_l)) / p.c_m
        assert system.drift(0.0, x)[3] == pytest.approx(expected, rel=1e-14)

    def test_vectorized_matches_scalar(self):
        system = hh_system()
        pts = np.array([[0.1, 0.2, 0.3, -70.0],
                        [0.9, 0.8, 0.7, -30.0],
                        [0.0, 1.0, 0.5, 10.0]])
        batch = drift_batch(system, 0.0, pts)
        for k, row in enumerate(pts):
            assert np.array_equal(batch[k], system.drift(0.0, row))


class TestNoise:
    def test_spec_constructors(self):
        assert NoiseSpec.none().kind is NoiseKind.NONE
        add = NoiseSpec.additive(0.3)
        assert add.sigma == (0.3, 0.3, 0.3)
        mul = NoiseSpec.multiplicative((0.1, 0.2, 0.3))
        assert mul.sigma == (0.1, 0.2, 0.3)

    def test_spec_validation(self):
        with pytest.raises(UsageError):
            NoiseSpec(NoiseKind.NONE, (0.1, 0.1, 0.1))
        with pytest.raises(UsageError):
            NoiseSpec(NoiseKind.ADDITIVE, None)
        with pytest.raises(UsageError):
            NoiseSpec.additive((0.1, 0.2))
        with pytest.raises(UsageError):
            NoiseSpec.additive(0.0)
        with pytest.raises(UsageError):
            NoiseSpec.multiplicative(-0.5)

    def test_additive_diffusion_matrix(self):
        system = hh_system(noise=NoiseSpec.additive((0.1, 0.2, 0.3)))
        g = system.diffusion(0.0, np.array([0.5, 0.5, 0.5, -60.0]))
        expected = np.zeros((4, 3))
        expected[0, 0], expected[1, 1], expected[2, 2] = 0.1, 0.2, 0.3
        assert np.array_equal(g, expected)

    def test_multiplicative_diffusion_vanishes_on_faces(self):
        system = hh_system(noise=NoiseSpec.multiplicative(0.5))
        for gates in ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.0, 1.0, 0.0)):
            g = system.diffusion(0.0, np.array(gates + (-60.0,)))
            assert np.array_equal(g, np.zeros((4, 3)))
        g_mid = system.diffusion(0.0, np.array([0.5, 0.5, 0.5, -60.0]))
        assert g_mid[0, 0] == 0.5 * 0.25

    def test_voltage_row_is_always_zero(self):
        for spec in (NoiseSpec.additive(0.4), NoiseSpec.multiplicative(0.4)):
            system = hh_system(noise=spec)
            pts = np.array([[0.2, 0.4, 0.6, -50.0], [0.8, 0.1, 0.9, 0.0]])
            g = diffusion_batch(system, 0.0, pts)
            assert np.array_equal(g[:, 3, :], np.zeros((2, 3)))

    def test_jacobian_matches_difference_quotient(self):
        system = hh_system(noise=NoiseSpec.multiplicative(0.5))
        x = np.array([0.3, 0.6, 0.9, -40.0])
        jac = system.diffusion_jacobian(0.0, x)
        assert jac.shape == (4, 3, 4)
        eps = 1e-7
        for j in range(4):
            shifted = x.copy()
            shifted[j] += eps
            approx = (system.diffusion(0.0, shifted)
                      - system.diffusion(0.0, x)) / eps
            assert np.allclose(jac[:, :, j], approx, atol=1e-6)


class TestModelRegistry:
    def test_registry_names(self):
        assert set(MODEL_REGISTRY) == {"hh-det", "hh-additive", "hh-logistic"}

    def test_build_model_defaults(self):
        system, info = build_model("hh-logistic")
        assert system.m == 4 and system.r == 3
        assert system.name == "hh-logistic"
        assert system.interpretation is Interpretation.ITO
        assert info.box.indices == (0, 1, 2)
        assert info.horizon == 100.0
        g = system.diffusion(0.0, np.array([0.5, 0.5, 0.5, -60.0]))
        assert g[0, 0] == 0.5 * 0.25  # default sigma 0.5

    def test_build_model_unknown_name(self):
        with pytest.raises(UsageError, match="hh-additive"):
            build_model("hh-gaussian")

    def test_interpretation_passes_through(self):
        system, _ = build_model("hh-additive", sigma=0.1,
                                interpretation=Interpretation.STRATONOVICH)
        assert system.interpretation is Interpretation.STRATONOVICH

    def test_params_validation(self):
        with pytest.raises(UsageError):
            HHParams(c_m=0.0)
        with pytest.raises(UsageError):
            HHParams(g_na=-1.0)


class TestRestingState:
    def test_matches_independent_computation(self):
        v = -60.0
        alphas, betas = ref_rates(v)
        expected = [a / (a + b) for a, b in zip(alphas, betas)]
        got = resting_state(v)
        assert got.shape == (4,)
        assert got[3] == v
        assert np.allclose(got[:3], expected, rtol=1e-12)

    def test_is_drift_equilibrium_for_gates(self):
        system = hh_system()
        x = resting_state(-60.0)
        f = system.drift(0.0, x)
        assert np.allclose(f[:3], 0.0, atol=1e-15)

    def test_metadata_start_state_inside_box(self):
        info = hh_metadata()
        assert info.box.contains(info.x0)
        assert (info.x0[:3] > 0).all() and (info.x0[:3] < 1).all()
