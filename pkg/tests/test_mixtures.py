import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad

from gfaccess import kernels as K
from gfaccess import mixtures as M
from gfaccess.errors import DomainError, InputError, UnknownNameError, UnsupportedError
from gfaccess.quadrature import integrate


def poisson(lam=1.0):
    return K.kernel("poisson", **{"lambda": lam})


def gamma_poisson(r=2.0, theta=1.0):
    return M.MixtureModel(poisson(), M.gamma_mixing(r, theta))


class TestMixingDensity:
    def test_normalization_enforced(self):
        with pytest.raises(InputError):
            M.MixingDensity(K.Interval(0.0, 1.0), lambda a: 2.0 * np.ones_like(a), "twice")

    @pytest.mark.parametrize("text,dom", [
        ("gamma:r=2,theta=1", None),
        ("normal:mu=3,sigma=0.5", K.Interval(0.0, math.inf)),
        ("truncnormal:mu=0.1,sigma=1,lo=0,hi=2", None),
        ("uniform:lo=0.5,hi=1.5", None),
        ("expr:lo=0,hi=1,f=2*x", None),
        ("expr:lo=0,hi=inf,f=x*exp(-x)", None),
    ])
    def test_presets_are_normalized(self, text, dom):
        g = M.parse_mixing(text, dom)
        lo, hi = g.effective
        assert integrate(g, lo, hi, abs_tol=1e-12, points=g.breakpoints()).value == pytest.approx(1.0, abs=1e-8)

    def test_parse_errors(self):
        with pytest.raises(UnknownNameError):
            M.parse_mixing("beta:a=1,b=2")
        with pytest.raises(UnknownNameError):
            M.parse_mixing("gamma:r=2,theta=1,k=3")
        with pytest.raises(InputError):
            M.parse_mixing("gamma:r=2")
        with pytest.raises(InputError):
            M.parse_mixing("expr:lo=0,hi=1")


class TestModel:
    def test_requires_single_free_parameter(self):
        with pytest.raises((InputError, UnsupportedError)):
            M.MixtureModel(K.kernel("uniform", a=0.0, b=1.0), M.uniform_mixing(0.5, 1.0))

    def test_domain_containment(self):
        with pytest.raises((InputError, DomainError)):
            M.MixtureModel(poisson(), M.normal_mixing(0.0, 1.0))


class TestGammaPoisson:
    def test_cdf_at_zero(self):
        assert M.mixture_cdf(gamma_poisson(), 0.0) == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("r", [1.0, 2.0, 5.0])
    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
    def test_pmf_is_negbin(self, r, theta):
        x = np.arange(51)
        nb = stats.nbinom.pmf(x, r, 1 / (1 + theta))
        assert np.max(np.abs(M.mixture_pmf(gamma_poisson(r, theta), x) - nb)) <= 1e-10

    def test_mgf_is_negbin(self):
        mm = gamma_poisson(2.0, 1.0)
        nb = K.kernel("negbin", r=2.0, p=0.5)
        for s in (-1.0, 0.2, 0.5):
            assert M.mixture_mgf(mm, s) == pytest.approx(K.mgf(nb, s), rel=1e-10)

    def test_mgf_at_zero(self):
        assert M.mixture_mgf(gamma_poisson(), 0.0) == pytest.approx(1.0, abs=1e-10)

    def test_mgf_strip_violation(self):
        # NegBin(2, 1/2) needs e^s < 2; unbounded lambda makes s = 1 diverge
        with pytest.raises(DomainError):
            M.mixture_mgf(gamma_poisson(), 1.0)


def test_exponential_gamma_mgf_two_routes():
    mm = M.MixtureModel(K.kernel("exponential", theta=1.0), M.gamma_mixing(2.0, 1.0))
    g = M.gamma_mixing(2.0, 1.0)
    # independent route: scipy QUADPACK over the same mixing density
    ref = quad(lambda t: g(t) / (1 + 0.1 * t), 0, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    assert M.mixture_mgf(mm, -0.1) == pytest.approx(ref, abs=1e-10)
    # for s > 0 the kernel MGF blows up at theta = 1/s inside the mixing domain
    with pytest.raises(DomainError):
        M.mixture_mgf(mm, 0.1)


def test_narrow_mixing_recovers_kernel():
    mm = M.MixtureModel(poisson(), M.normal_mixing(3.0, 1e-4, 0.0, math.inf))
    for x in (0.0, 2.0, 5.0):
        assert M.mixture_cdf(mm, x) == pytest.approx(K.cdf(poisson(3.0), x), abs=1e-4)


def test_cdf_below_support_is_zero():
    assert M.mixture_cdf(gamma_poisson(), -3.0) == 0.0


def test_continuous_mixture_pdf_integrates_to_one():
    mm = M.MixtureModel(K.kernel("exponential", theta=1.0), M.gamma_mixing(3.0, 0.5))
    v = integrate(lambda x: M.mixture_pdf(mm, x), 0.0, math.inf, abs_tol=1e-10).value
    assert v == pytest.approx(1.0, abs=1e-7)


class TestSampling:
    def test_mean(self):
        x = M.sample_mixture(gamma_poisson(), 100_000, 11)
        assert abs(x.mean() - 2.0) <= 0.05

    def test_determinism(self):
        assert np.array_equal(M.sample_mixture(gamma_poisson(), 200, 5), M.sample_mixture(gamma_poisson(), 200, 5))

    def test_point_mass_limit_is_poisson(self):
        mm = M.MixtureModel(poisson(), M.normal_mixing(3.0, 1e-4, 0.0, math.inf))
        x = M.sample_mixture(mm, 100_000, 2)
        observed = np.array([np.sum(x == k) for k in range(9)] + [np.sum(x >= 9)])
        p = stats.poisson.pmf(np.arange(9), 3.0)
        expected = len(x) * np.append(p, 1 - p.sum())
        assert stats.chisquare(observed, expected).pvalue > 0.001

    def test_zero_draws(self):
        with pytest.raises(InputError):
            M.sample_mixture(gamma_poisson(), 0, 1)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.3, 2.0))
def test_mixture_cdf_monotone(r, theta):
    mm = gamma_poisson(r, theta)
    x = np.linspace(-1.0, 30.0, 100)
    c = M.mixture_cdf(mm, x)
    assert np.all(np.diff(c) >= -1e-15) and np.all((c >= 0) & (c <= 1 + 1e-12))
