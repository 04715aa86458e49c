import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfaccess import kernels as K
from gfaccess import transforms as T
from gfaccess.errors import (DivergenceError, DomainError, InputError, UnknownNameError,
                             UnsupportedError)

# one representative member per family, with MGF probe points inside its strip
REPRESENTATIVES = [
    (K.kernel("poisson", **{"lambda": 2.5}), [-1.0, 0.3, 1.0]),
    (K.kernel("negbin", r=2.5, p=0.3), [-1.0, 0.5, 1.0]),
    (K.kernel("gamma", r=2.0, theta=1.5), [-2.0, 0.3, 0.6]),
    (K.kernel("exponential", theta=4.0), [-1.0, 0.1, 0.2]),
    (K.kernel("weibull", theta=1.0, tau=2.0), [-1.0, 0.7, 1.5]),
    (K.kernel("pareto1", alpha=3.0, theta=1.0), [-2.0, -0.5, 0.0]),
    (K.kernel("normal", m=0.5, sigma2=2.0), [-1.0, 0.4, 1.0]),
    (K.kernel("normal_mv", m=1.5, kappa=0.5), [-0.5, 0.3, 0.8]),
    (K.kernel("laplace", m=-0.5, sigma=0.8), [-1.0, 0.2, 1.0]),
    (K.kernel("gumbel", m=1.0, sigma=0.5), [-1.0, 0.5, 1.5]),
    (K.kernel("logarithmic", q=0.3), [-1.0, 0.5, 1.0]),
    (K.kernel("discrete_laplace", p=0.4), [-0.5, 0.2, 0.8]),
    (K.kernel("uniform", a=0.5, b=2.0), [-1.0, 0.5, 3.0]),
    (K.kernel("defun", a=1.0, b=4.0), [-0.5, 0.3, 1.0]),
]
IDS = [d.family.value for d, _ in REPRESENTATIVES]


class TestSpecExamples:
    def test_uniform_cdf(self):
        assert K.cdf(K.kernel("uniform", a=0.0, b=1.0), 0.25) == pytest.approx(0.25, abs=1e-15)

    def test_discrete_laplace_cdf_floor_semantics(self):
        d = K.kernel("discrete_laplace", p=0.5)
        assert K.cdf(d, 0.0) == pytest.approx(2 / 3, abs=1e-15)
        assert K.cdf(d, 0.7) == K.cdf(d, 0.0)
        assert K.cdf(d, -0.01) == pytest.approx(1 / 3, abs=1e-15)

    def test_gumbel_cdf(self):
        assert K.cdf(K.kernel("gumbel", m=0.0, sigma=1.0), 0.0) == pytest.approx(math.exp(-1), abs=1e-15)

    def test_mgf_at_zero_is_exactly_one(self):
        for d, _ in REPRESENTATIVES:
            assert K.mgf(d, 0.0) == 1.0

    def test_gamma_mgf(self):
        assert K.mgf(K.kernel("gamma", r=2.0, theta=1.0), 0.5) == pytest.approx(4.0, rel=1e-14)

    def test_poisson_mgf(self):
        assert K.mgf(K.kernel("poisson", **{"lambda": 2.0}), math.log(2)) == pytest.approx(math.e ** 2, rel=1e-14)

    def test_cf_examples(self):
        assert K.cf(K.kernel("normal", m=0.0, sigma2=1.0), 0.0) == 1.0
        assert K.cf(K.kernel("laplace", m=0.0, sigma=2.0), 0.25) == pytest.approx(0.8, abs=1e-15)
        v = K.cf(K.kernel("poisson", **{"lambda": 1.0}), math.pi)
        assert v.real == pytest.approx(math.exp(-2), abs=1e-15)
        assert abs(v.imag) < 1e-15

    def test_laplace_transform_examples(self):
        assert K.laplace_transform(K.kernel("exponential", theta=2.0), 0.0) == 1.0
        assert K.laplace_transform(K.kernel("exponential", theta=2.0), 1.0) == pytest.approx(1 / 3, rel=1e-14)
        # high-precision quadrature reference
        lt = K.laplace_transform(K.kernel("pareto1", alpha=2.0, theta=1.0), 1.0)
        assert lt == pytest.approx(0.21938393439552027, rel=1e-13)

    def test_sample_examples(self):
        assert abs(K.sample(K.kernel("uniform", a=0.0, b=1.0), 100_000, 42).mean() - 0.5) <= 0.005
        assert abs(K.sample(K.kernel("poisson", **{"lambda": 3.0}), 100_000, 1).var() - 3.0) <= 0.1
        assert abs(K.sample(K.kernel("discrete_laplace", p=0.5), 100_000, 7).mean()) <= 0.02


class TestFrozenValues:
    """Values from 80-digit mpmath quadrature or series."""

    def test_gumbel_mgf(self):
        assert K.mgf(K.kernel("gumbel", m=0.0, sigma=1.0), 0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_weibull_transforms(self):
        lt = K.laplace_transform(K.kernel("weibull", theta=2.0, tau=0.5), 1.0)
        assert lt == pytest.approx(0.43818222822684617, rel=1e-12)
        assert K.mgf(K.kernel("weibull", theta=1.0, tau=2.0), 0.7) == pytest.approx(1.9672274782679682, rel=1e-12)

    def test_logarithmic_mgf(self):
        assert K.mgf(K.kernel("logarithmic", q=0.3), 0.5) == pytest.approx(1.913331756315013, rel=1e-14)

    def test_negbin_pmf(self):
        assert K.pmf(K.kernel("negbin", r=2.5, p=0.3), 4) == pytest.approx(0.029964161799510749, rel=1e-13)


class TestValidation:
    def test_parameter_domains(self):
        with pytest.raises(DomainError):
            K.kernel("gamma", r=-1.0, theta=1.0)
        with pytest.raises(DomainError):
            K.kernel("negbin", r=1.0, p=1.0)
        with pytest.raises(DomainError):
            K.kernel("uniform", a=2.0, b=1.0)

    def test_unknown_names(self):
        with pytest.raises(UnknownNameError) as exc:
            K.kernel("cauchy", m=0.0)
        assert exc.value.token == "cauchy"
        with pytest.raises(UnknownNameError):
            K.parse_kernel_spec("gamma:r=2,theta=1,zeta=3")

    def test_missing_parameter(self):
        with pytest.raises(InputError):
            K.parse_kernel_spec("gamma:r=2")

    def test_free_and_fixed_partition(self):
        d = K.kernel("gamma", free=["theta"], r=2.0, theta=1.0)
        assert set(d.free_params) | set(d.fixed_params) == {"r", "theta"}
        assert not set(d.free_params) & set(d.fixed_params)

    def test_mgf_outside_strip_names_boundary(self):
        with pytest.raises(DivergenceError, match="strip"):
            K.mgf(K.kernel("gamma", r=2.0, theta=1.0), 1.0)
        with pytest.raises(DivergenceError):
            K.mgf(K.kernel("pareto1", alpha=2.0, theta=1.0), 0.1)

    def test_laplace_transform_errors(self):
        with pytest.raises(DomainError):
            K.laplace_transform(K.kernel("gamma", r=2.0, theta=1.0), -1.0)
        with pytest.raises(UnsupportedError):
            K.laplace_transform(K.kernel("normal", m=0.0, sigma2=1.0), 1.0)


class TestSpecGrammar:
    def test_round_trip(self):
        text = "gamma:r=2,theta=1,free=theta"
        d = K.parse_kernel_spec(text)
        assert d.free_params == ("theta",)
        assert K.parse_kernel_spec(K.to_spec(d)) == d

    def test_aliases(self):
        assert K.parse_kernel_spec("nb:r=2,p=0.5").family is K.Family.NEGBIN
        assert K.parse_kernel_spec("de:a=1,b=4").family is K.Family.DEFUN


@pytest.mark.parametrize("dist,s_values", REPRESENTATIVES, ids=IDS)
def test_closed_form_mgf_matches_numeric_oracle(dist, s_values):
    for s in s_values:
        exact = K.mgf(dist, s)
        assert abs(T.numeric_mgf(dist, s) - exact) <= max(1e-8, 1e-8 * exact)


@pytest.mark.parametrize("dist", [d for d, _ in REPRESENTATIVES], ids=IDS)
def test_closed_form_cf_matches_numeric_oracle(dist):
    for w in (-2.0, 0.3, 1.7):
        assert abs(K.cf(dist, w) - T.numeric_cf(dist, w)) <= 1e-10


@pytest.mark.parametrize("dist", [d for d, _ in REPRESENTATIVES], ids=IDS)
def test_cf_properties(dist):
    w = np.linspace(-6.0, 6.0, 25)
    v = K.cf(dist, w)
    assert np.all(np.abs(v) <= 1.0 + 1e-14)
    assert np.allclose(K.cf(dist, -w), np.conj(v), atol=1e-15)


@pytest.mark.parametrize("dist", [d for d, _ in REPRESENTATIVES], ids=IDS)
def test_sampling_is_deterministic_and_in_support(dist):
    x = K.sample(dist, 500, 123)
    assert np.array_equal(x, K.sample(dist, 500, 123))
    lo, hi = K.support(dist)
    assert np.all(x >= lo) and np.all(x <= hi)


@pytest.mark.parametrize("dist", [d for d, _ in REPRESENTATIVES if d.discrete], ids=lambda d: d.family.value)
def test_pmf_normalization(dist):
    k = np.arange(-400, 400)
    assert abs(K.pmf(dist, k).sum() - 1.0) <= 1e-10


def test_laplace_transform_equals_mgf_at_negative_argument():
    for d in (K.kernel("gamma", r=2.0, theta=1.5), K.kernel("exponential", theta=3.0),
              K.kernel("weibull", theta=1.0, tau=2.0)):
        for s in (0.1, 1.0, 3.0):
            assert K.laplace_transform(d, s) == pytest.approx(K.mgf(d, -s), rel=1e-12)


def test_family_tags():
    g_r = K.family_tags(K.kernel("gamma", free=["r"], r=2.0, theta=1.0))
    assert g_r.tags == {K.Tag.ADDITIVELY_CLOSED}
    assert g_r.verdict.identifiable is True
    g_t = K.family_tags(K.kernel("gamma", free=["theta"], r=2.0, theta=1.0))
    assert g_t.tags == {K.Tag.SCALE_PARAMETER}
    assert g_t.verdict.identifiable is True
    assert K.family_tags(K.kernel("uniform", a=0.0, b=1.0)).verdict.identifiable is False
    assert K.family_tags(K.kernel("logarithmic", q=0.3)).verdict.identifiable is None


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.2, 5.0), st.floats(0.01, 30.0))
def test_gamma_scale_identity(r, theta, x):
    d = K.kernel("gamma", free=["theta"], r=r, theta=theta)
    assert abs(K.cdf(d, x) - K.cdf(d.with_params(theta=1.0), x / theta)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(-5.0, 5.0), st.floats(0.1, 4.0), st.floats(-10.0, 10.0))
def test_laplace_location_identity(m, sigma, x):
    d = K.kernel("laplace", m=m, sigma=sigma)
    assert abs(K.cdf(d, x) - K.cdf(d.with_params(m=0.0), x - m)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0), st.floats(-4.0, 4.0))
def test_additive_closure(r1, r2, w):
    d = K.kernel("negbin", r=r1, p=0.35)
    lhs = K.cf(d.with_params(r=r1 + r2), w)
    assert abs(lhs - K.cf(d, w) * K.cf(d.with_params(r=r2), w)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(0.001, 0.999))
def test_negbin_overdispersion(r, p):
    mean, var = K.mean_variance(K.kernel("negbin", r=r, p=p))
    assert var > mean


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-20.0, 20.0), min_size=2, max_size=20))
def test_cdf_nondecreasing(xs):
    xs = np.sort(np.asarray(xs))
    for d in (K.kernel("gumbel", m=0.0, sigma=2.0), K.kernel("poisson", **{"lambda": 3.0}),
              K.kernel("discrete_laplace", p=0.6)):
        c = K.cdf(d, xs)
        assert np.all(np.diff(c) >= 0) and np.all((c >= 0) & (c <= 1))
