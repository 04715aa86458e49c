import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfaccess import defun as D
from gfaccess import kernels as K
from gfaccess import transforms as T
from gfaccess.errors import ConvergenceError, DivergenceError, InputError


def normal_cf():
    return T.CharacteristicFunction(lambda w: np.exp(-0.5 * w * w), T.Symmetry.REAL_SYMMETRIC)


class TestConfig:
    def test_defaults(self):
        cfg = T.QuadratureConfig()
        assert (cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions, cfg.truncation_threshold) == (
            1e-10, 1e-10, 2000, 1e-16)

    @pytest.mark.parametrize("kw", [{"abs_tol": 0.0}, {"rel_tol": -1.0}, {"max_subdivisions": 0}])
    def test_invalid(self, kw):
        with pytest.raises(InputError):
            T.QuadratureConfig(**kw)

    def test_cf_must_be_one_at_origin(self):
        with pytest.raises(InputError):
            T.CharacteristicFunction(lambda w: 0.5 * np.ones_like(w))


class TestGilPelaez:
    def test_standard_normal_at_zero(self):
        assert T.gil_pelaez_pdf(normal_cf(), 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)

    def test_laplace_at_one(self):
        cf = T.CharacteristicFunction(lambda w: 1 / (1 + w * w), T.Symmetry.REAL_SYMMETRIC)
        assert T.gil_pelaez_pdf(cf, 1.0) == pytest.approx(0.5 * math.exp(-1), abs=1e-8)

    def test_defun_peak(self):
        cf = T.CharacteristicFunction.of(D.DifferentiatedErrorFunction(1.0, 4.0))
        assert T.gil_pelaez_pdf(cf, 0.0) == pytest.approx(1 / (3 * math.sqrt(math.pi)), abs=1e-12)

    def test_general_and_symmetric_paths_agree(self):
        d = K.kernel("normal", m=0.0, sigma2=1.0)
        general = T.CharacteristicFunction(lambda w: K.cf(d, w), T.Symmetry.GENERAL)
        y = np.linspace(-4.0, 4.0, 9)
        assert np.allclose(T.gil_pelaez_pdf(general, y), T.gil_pelaez_pdf(normal_cf(), y), atol=1e-12)

    @pytest.mark.parametrize("dist", [
        K.kernel("normal", m=1.0, sigma2=0.5),
        K.kernel("laplace", m=0.0, sigma=1.0),
        K.kernel("gamma", r=3.0, theta=1.0),
    ], ids=["normal", "laplace", "gamma"])
    def test_round_trip(self, dist):
        mean, var = K.mean_variance(dist)
        sd = math.sqrt(var)
        y = np.linspace(mean - 6 * sd, mean + 6 * sd, 49)
        inv = T.gil_pelaez_pdf(T.CharacteristicFunction.of(dist), y)
        assert np.max(np.abs(inv - K.pdf(dist, y))) <= 1e-6

    def test_shifted_laplace_kink(self):
        d = K.kernel("laplace", m=-1.0, sigma=1.0)
        y = np.array([-1.0, -0.5, 0.5])
        inv = T.gil_pelaez_pdf(T.CharacteristicFunction.of(d), y)
        assert np.max(np.abs(inv - K.pdf(d, y))) <= 1e-6

    def test_detail_reports_truncation(self):
        r = T.gil_pelaez_detail(normal_cf(), 0.0)
        assert r.omega_max >= 8.0 and not r.clamped and r.error >= 0.0

    def test_overshoot_is_clamped_and_flagged(self):
        # far tail of a kinked density: true value ~1e-18, inversion noise straddles 0
        cf = T.CharacteristicFunction(lambda w: 1 / (1 + w * w), T.Symmetry.REAL_SYMMETRIC)
        r = T.gil_pelaez_detail(cf, 40.0)
        assert r.value >= 0.0
        assert r.value <= 1e-8

    def test_non_decaying_cf(self):
        cf = T.CharacteristicFunction(lambda w: np.ones_like(w, dtype=complex))
        with pytest.raises(ConvergenceError):
            T.gil_pelaez_pdf(cf, 0.0)

    def test_truncation_point(self):
        w = T.truncation_point(normal_cf(), 1e-16)
        assert w == 2.0 ** round(math.log2(w))
        assert math.exp(-0.5 * w * w) < 1e-16


class TestNumericOracles:
    def test_spec_examples(self):
        assert T.numeric_mgf(K.kernel("exponential", theta=4.0), 0.1) == pytest.approx(1 / 0.6, rel=1e-10)
        assert T.numeric_mgf(K.kernel("poisson", **{"lambda": 1.0}), 0.0) == pytest.approx(1.0, abs=1e-14)
        assert T.numeric_mgf(K.kernel("uniform", a=0.0, b=1.0), 1.0) == pytest.approx(math.e - 1, rel=1e-10)

    def test_divergence_detected(self):
        with pytest.raises(DivergenceError):
            T.numeric_mgf(K.kernel("pareto1", alpha=2.0, theta=1.0), 0.5)

    def test_numeric_laplace_transform(self):
        d = K.kernel("pareto1", alpha=2.0, theta=1.0)
        assert T.numeric_laplace_transform(d, 1.0) == pytest.approx(0.21938393439552027, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.3, 3.0), st.floats(-4.0, 4.0))
def test_normal_inversion_property(m, var, z):
    d = K.kernel("normal", m=m, sigma2=var)
    y = m + z * math.sqrt(var)
    assert abs(T.gil_pelaez_pdf(T.CharacteristicFunction.of(d), y) - K.pdf(d, y)) <= 1e-8
