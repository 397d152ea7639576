"""Semiclassical vector fields and weighted norms."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerlab.errors import ParameterError, ResolutionWarning
from wignerlab.evolution import step_transport
from wignerlab.norms import FAMILIES, NormSpec, norm, vector_field_apply
from wignerlab.spectral import PhaseField, PhaseGrid, density

GRID = PhaseGrid.make(128, 24.0, 128, 24.0, -12.0)


def _gaussian_field(shift=0.3, width=0.8):
    return PhaseField.from_function(
        GRID, lambda x, v: np.exp(-0.5 * (x - shift) ** 2 - 0.5 * v**2 / width) * (1 + 0.2 * np.cos(x))
    )


@pytest.fixture(scope="module")
def gauss():
    return _gaussian_field()


class TestVectorFields:
    def test_sum_and_difference(self, gauss):
        eps = 0.1
        vp, vm = (vector_field_apply(gauss, w, eps).data for w in ("V+", "V-"))
        dx = np.fft.ifft(1j * GRID.gx.odd_frequencies[:, None] * np.fft.fft(gauss.data, axis=0), axis=0)
        assert np.abs(0.5 * (vp + vm) - eps * dx).max() <= 1e-12
        V = GRID.mesh()[1]
        assert np.abs((vp - vm) / 4j - V * gauss.data).max() <= 1e-12

    def test_x_fields(self, gauss):
        eps = 0.2
        xp, xm = (vector_field_apply(gauss, w, eps).data for w in ("X+", "X-"))
        X = GRID.mesh()[0]
        assert np.abs((xp - xm) / 4j - X * gauss.data).max() <= 1e-12

    def test_commute_with_transport(self, gauss):
        for which in ("V+", "V-"):
            a = step_transport(vector_field_apply(gauss, which, 0.1), 0.37).data
            b = vector_field_apply(step_transport(gauss, 0.37), which, 0.1).data
            assert np.abs(a - b).max() <= 1e-10

    def test_unknown_field(self, gauss):
        with pytest.raises(ParameterError):
            vector_field_apply(gauss, "Y+", 0.1)


class TestNormSpec:
    @pytest.mark.parametrize("kw", [{"m": -1, "r": 0}, {"m": 0, "r": 1.5}, {"m": 0, "r": 0, "family": "H"}])
    def test_validation(self, kw):
        with pytest.raises(ParameterError):
            NormSpec(**kw)

    def test_h0r0_rejects_derivatives(self, gauss):
        with pytest.raises(ParameterError):
            norm(gauss, NormSpec(1, 0, "H0r0_eps"), 0.1)

    def test_object_kind_checked(self, gauss):
        with pytest.raises(ParameterError):
            norm(gauss, NormSpec(0, 0, "density_Hmr_eps"), 0.1)
        with pytest.raises(ParameterError):
            norm(density(gauss), NormSpec(0, 0, "Hmr_eps"), 0.1)


class TestNormValues:
    @pytest.mark.parametrize("family", ["Hmr_standard", "Hmr_eps", "H0r0_eps"])
    def test_zero_order_is_l2(self, gauss, family):
        assert abs(norm(gauss, NormSpec(0, 0, family), 0.1) - gauss.l2_norm()) <= 1e-12 * gauss.l2_norm()

    def test_density_zero_order(self, gauss):
        rho = density(gauss)
        ref = np.sqrt(GRID.gx.spacing * np.sum(rho.data**2))
        assert abs(norm(rho, NormSpec(0, 0, "density_Hmr_eps"), 0.1) - ref) <= 1e-12 * ref

    def test_standard_norm_of_gaussian(self):
        # || (1 - Laplacian)^{1/2} g ||^2 = ||g||^2 + ||grad g||^2 for g = exp(-(x^2 + v^2)/2)
        f = PhaseField.from_function(GRID, lambda x, v: np.exp(-0.5 * (x**2 + v**2)))
        ref = np.sqrt(np.pi + np.pi)
        assert abs(norm(f, NormSpec(1, 0, "Hmr_standard"), 1.0) - ref) <= 1e-10

    def test_velocity_weight(self):
        f = PhaseField.from_function(GRID, lambda x, v: np.exp(-0.5 * (x**2 + v**2)))
        # int (1 + v^2) e^{-x^2 - v^2} = pi * 3/2
        assert abs(norm(f, NormSpec(0, 1, "Hmr_standard"), 1.0) - np.sqrt(1.5 * np.pi)) <= 1e-10

    @given(st.floats(-3.0, 3.0), st.sampled_from(FAMILIES[:3]))
    @settings(max_examples=15, deadline=None)
    def test_homogeneity(self, alpha, family):
        f = _gaussian_field()
        spec = NormSpec(1, 1, family) if family != "H0r0_eps" else NormSpec(0, 1, family)
        n1 = norm(f.with_data(alpha * f.data), spec, 0.1)
        assert abs(n1 - abs(alpha) * norm(f, spec, 0.1)) <= 1e-12 * max(1.0, n1)

    @pytest.mark.parametrize("family", ["Hmr_standard", "Hmr_eps"])
    def test_triangle_inequality(self, family):
        f, g = _gaussian_field(0.3, 0.8), _gaussian_field(-1.0, 1.3)
        spec = NormSpec(1, 1, family)
        assert norm(f.with_data(f.data + g.data), spec, 0.1) <= norm(f, spec, 0.1) + norm(g, spec, 0.1) + 1e-12

    def test_eps_weighting_of_density_norm(self, gauss):
        rho = density(gauss)
        big, small = (norm(rho, NormSpec(0, 1, "density_Hmr_eps"), e) for e in (0.2, 0.05))
        assert big > small > norm(rho, NormSpec(0, 0, "density_Hmr_eps"), 0.1)


class TestEmbeddings:
    @pytest.mark.parametrize("m,r", [(0, 1), (1, 1), (2, 1), (1, 2)])
    def test_ratios_bracketed_across_eps(self, gauss, m, r):
        rho = density(gauss)
        dens, full = [], []
        for eps in (0.2, 0.1, 0.05):
            dens.append(norm(rho, NormSpec(0, r, "density_Hmr_eps"), eps) / norm(gauss, NormSpec(0, r, "H0r0_eps"), eps))
            full.append(norm(gauss, NormSpec(m, r, "Hmr_standard"), eps) / norm(gauss, NormSpec(m, r, "Hmr_eps"), eps))
        assert max(dens) / min(dens) <= 3
        assert max(full) / min(full) <= 3


class TestResolution:
    def test_warns_on_rough_data(self, rng):
        grid = PhaseGrid.make(32, 2 * np.pi, 32, 8.0)
        f = PhaseField(grid, rng.normal(size=grid.shape), real=True)
        with pytest.warns(ResolutionWarning):
            norm(f, NormSpec(2, 0, "Hmr_standard"), 0.1)

    def test_silent_on_smooth_data(self, gauss):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            norm(gauss, NormSpec(2, 1, "Hmr_eps"), 0.1)
