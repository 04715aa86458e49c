import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfaccess import accessibility as A
from gfaccess import kernels as K
from gfaccess import mixtures as M
from gfaccess.errors import DomainError, InputError, UnknownNameError, UnsupportedError

SCALAR = ["poisson-to-normal-mv", "gamma-to-negbin", "exp-to-laplace", "laplace-to-discrete-laplace"]


class TestRegistry:
    def test_five_mappings_with_verdicts(self):
        ms = A.builtin_mappings()
        assert [m.name for m in ms] == A.mapping_names()
        assert len(ms) == 5
        assert [m.identifiable for m in ms] == [True, True, True, True, False]

    def test_lookups(self):
        assert A.get_mapping("gamma-to-negbin").eta((1.0,)) == pytest.approx((0.5,))
        assert A.get_mapping("laplace-to-discrete-laplace").eta((2.0,)) == pytest.approx((0.5,))
        assert A.get_mapping("exp-to-laplace").eta((4.0,)) == pytest.approx((2.0,))

    def test_unknown_name(self):
        with pytest.raises(UnknownNameError) as exc:
            A.get_mapping("normal-to-cauchy")
        assert exc.value.token == "normal-to-cauchy"

    @pytest.mark.parametrize("name", A.mapping_names())
    def test_xi_vanishes_at_zero(self, name):
        assert A.get_mapping(name).xi(0.0) == 0.0


class TestDefinition1:
    def test_exp_laplace_example(self):
        m = A.get_mapping("exp-to-laplace")
        rep = A.verify_definition1(m, [(4.0,)], [0.0, 0.1], tol=1e-14)
        assert rep.passed

    def test_laplace_dl_example(self):
        m = A.get_mapping("laplace-to-discrete-laplace")
        rep = A.verify_definition1(m, [(2.0,)], [0.25], tol=1e-14)
        assert rep.passed
        dl = m.target_kernel((2.0,))
        assert K.mgf(dl, m.xi(0.25)) == pytest.approx(4 / 3, rel=1e-14)

    def test_builtin_suite(self):
        reports = A.verify_builtin_suite(tol=1e-10)
        assert all(r.passed for r in reports.values())
        assert max(r.max_abs_residual for r in reports.values()) <= 1e-10

    @pytest.mark.parametrize("name", A.mapping_names())
    def test_swapped_roles(self, name):
        m = A.get_mapping(name)
        assert A.verify_swapped(m, A.default_param_grid(m), tol=1e-10).passed

    def test_detects_wrong_mapping(self):
        m = A.get_mapping("exp-to-laplace")
        bad = A.AccessibilityMapping("bad", m.source, m.target, lambda p: (1.1 * math.sqrt(p[0]),),
                                     lambda p: (p[0] ** 2 / 1.21,), m.xi, m.xi_inv, m.epsilon1,
                                     m.epsilon2, True)
        rep = A.verify_definition1(bad, [(1.0,)], np.linspace(0, 0.5, 5))
        assert not rep.passed

    def test_grid_outside_strip(self):
        m = A.get_mapping("exp-to-laplace")
        with pytest.raises(DomainError):
            A.verify_definition1(m, [(1.0,)], [0.5, 2.0])

    def test_report_lists_checks(self):
        m = A.get_mapping("gamma-to-negbin")
        rep = A.verify_definition1(m, [(1.0,), (2.0,)])
        names = list(rep.checks)
        assert any(n.startswith("(iii)") for n in names)
        assert any(n.startswith("(ii)") for n in names)
        assert any(n.startswith("(i)") for n in names)
        assert rep.passed == all(c.passed for c in rep.checks.values())
        assert "one-to-one" in rep.summary()


class TestCorollaries:
    def test_corollary1_normal_mean_variance(self):
        nmv = K.kernel("normal_mv", m=1.0, kappa=0.5)
        rep = A.verify_corollary1(nmv, lambda b: b, lambda t: t + 0.25 * t * t,
                                  ([0.5, 1.0, 3.0], np.linspace(0.1, 2.0, 12)))
        assert rep.passed

    def test_corollary1_poisson(self):
        rep = A.verify_corollary1(K.kernel("poisson", **{"lambda": 1.0}), lambda b: b, math.expm1,
                                  ([0.5, 2.0], np.linspace(0.1, 1.5, 8)))
        assert rep.passed

    def test_corollary1_two_free_parameters_fail(self):
        rep = A.verify_corollary1(K.kernel("uniform", a=0.5, b=1.0), lambda b: b, lambda t: t,
                                  ([1.0], [0.5]))
        assert not rep.passed

    def test_corollary1_requires_positive_t(self):
        with pytest.raises(DomainError):
            A.verify_corollary1(K.kernel("poisson", **{"lambda": 1.0}), lambda b: b, math.expm1,
                                ([1.0], [0.0, 0.5]))

    def test_corollary2_gamma_negbin(self):
        m = A.get_mapping("gamma-to-negbin", r=2.0)
        src = K.kernel("gamma", free=["theta"], r=2.0, theta=1.0)
        tgt = K.kernel("negbin", free=["p"], r=2.0, p=0.5)
        rep = A.verify_corollary2(src, tgt, m, ([1.0, 3.0], [0.1, 0.25]), tol=1e-12)
        assert rep.passed
        assert K.mgf(tgt, math.log(1.25)) == pytest.approx((1 / 0.75) ** 2, rel=1e-14)

    def test_corollary2_exp_laplace(self):
        m = A.get_mapping("exp-to-laplace")
        rep = A.verify_corollary2(K.kernel("exponential", theta=1.0), K.kernel("laplace", m=0.0, sigma=1.0,
                                                                            free=["sigma"]),
                                  m, ([0.5, 2.0], [0.05, 0.2]), tol=1e-12)
        assert rep.passed

    def test_corollary2_product_form(self):
        g = K.kernel("gamma", free=["theta"], r=2.0, theta=3.0)
        assert K.mgf(g, 0.1) == pytest.approx(K.mgf(g.with_params(theta=1.0), 0.3), rel=1e-14)

    def test_corollary2_requires_scale_family(self):
        m = A.get_mapping("poisson-to-normal-mv")
        with pytest.raises(InputError):
            A.verify_corollary2(K.kernel("poisson", **{"lambda": 1.0}), K.kernel("normal_mv", m=1.0, kappa=1.0),
                                m, ([1.0], [0.1]))


class TestTransport:
    def test_exp_laplace_gamma_mixing(self):
        m = A.get_mapping("exp-to-laplace")
        rep = A.transport_mixed_mgf(m, M.gamma_mixing(2.0, 1.0), np.linspace(0.0, 0.405, 20))
        assert rep.passed and rep.max_abs_residual <= 1e-8
        assert not rep.warnings

    def test_gamma_negbin(self):
        m = A.get_mapping("gamma-to-negbin", r=2.0)
        rep = A.transport_mixed_mgf(m, M.gamma_mixing(3.0, 0.2), np.linspace(0.0, 0.5, 8))
        assert rep.passed

    def test_laplace_dl_explicit_grid(self):
        m = A.get_mapping("laplace-to-discrete-laplace")
        rep = A.transport_mixed_mgf(m, M.uniform_mixing(0.5, 1.5), np.linspace(0.0, 0.6, 8))
        assert rep.passed

    def test_point_mass_limit_reduces_to_definition1(self):
        m = A.get_mapping("poisson-to-normal-mv")
        rep = A.transport_mixed_mgf(m, M.normal_mixing(2.0, 1e-3, 0.0, math.inf), [0.0, 0.3])
        assert rep.passed
        direct = A.verify_definition1(m, [(2.0,)], [0.0, 0.3])
        assert abs(rep.max_abs_residual - direct.max_abs_residual) <= 1e-6

    def test_two_dimensional_mapping_unsupported(self):
        with pytest.raises(UnsupportedError):
            A.transport_mixed_mgf(A.get_mapping("uniform-to-defun"), M.uniform_mixing(0.5, 1.0))

    def test_pushforward_normalized(self):
        m = A.get_mapping("exp-to-laplace")
        g = A.pushforward(m, M.gamma_mixing(2.0, 1.0))
        assert g.integrate(lambda b: np.ones_like(b)) == pytest.approx(1.0, abs=1e-8)


class TestMappingFile:
    TEXT = """
    name = my-exp-laplace
    source = exponential:free=theta
    target = laplace:m=0,free=sigma
    eta = sqrt(theta)
    eta_inv = sigma^2
    xi = sqrt(s)
    xi_inv = t^2
    epsilon1 = 0.9/theta
    identifiable = true
    """

    def test_load_and_verify(self, tmp_path):
        p = tmp_path / "map.txt"
        p.write_text("\n".join(line.strip() for line in self.TEXT.splitlines()))
        m = A.load_mapping_file(p)
        assert m.name == "my-exp-laplace"
        assert A.verify_definition1(m, A.default_param_grid(m), tol=1e-10).passed

    def test_missing_key(self):
        with pytest.raises(InputError):
            A.mapping_from_dict({"source": "exponential:free=theta"})

    def test_unknown_key(self):
        with pytest.raises(UnknownNameError):
            A.mapping_from_dict({"sauce": "x"})


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SCALAR), st.floats(0.3, 3.0), st.floats(0.0, 0.85))
def test_identity_property(name, alpha, frac):
    m = A.get_mapping(name)
    s = frac * m.epsilon1((alpha,))
    lhs = K.mgf(m.target_kernel((alpha,)), m.xi(s))
    rhs = K.mgf(m.source_kernel((alpha,)), s)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SCALAR), st.floats(0.05, 20.0))
def test_eta_round_trip_property(name, alpha):
    m = A.get_mapping(name)
    assert m.eta_inv(m.eta((alpha,)))[0] == pytest.approx(alpha, rel=1e-12)
