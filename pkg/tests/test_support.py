"""Quadrature engine, expression compiler and config reader."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfaccess.config import read_keyvalue
from gfaccess.errors import InputError, UnknownNameError
from gfaccess.expr import Expression
from gfaccess.quadrature import WynnEpsilon, integrate, integrate_panels


class TestIntegrate:
    def test_polynomial_exact(self):
        r = integrate(lambda x: x ** 5 - 3 * x, -1.0, 2.0)
        assert r.value == pytest.approx(2 ** 6 / 6 - 1 / 6 - 1.5 * 3, abs=1e-13)
        assert r.converged

    def test_infinite_ranges(self):
        assert integrate(lambda x: np.exp(-x * x), -math.inf, math.inf).value == pytest.approx(
            math.sqrt(math.pi), abs=1e-12)
        assert integrate(lambda x: 1 / (1 + x * x), 0.0, math.inf).value == pytest.approx(math.pi / 2, abs=1e-10)

    def test_reversed_bounds(self):
        assert integrate(np.cos, 1.0, 0.0).value == pytest.approx(-math.sin(1.0), abs=1e-14)

    def test_breakpoints_handle_kinks(self):
        r = integrate(np.abs, -1.0, 3.0, points=[0.0])
        assert r.value == pytest.approx(5.0, abs=1e-14)

    def test_panels(self):
        edges = np.linspace(0.0, math.pi, 7)
        assert integrate_panels(np.sin, edges).value == pytest.approx(2.0, abs=1e-14)

    def test_complex_integrand(self):
        r = integrate(lambda x: np.exp(1j * x), 0.0, math.pi)
        assert r.value == pytest.approx(2j, abs=1e-13)


def test_wynn_accelerates_alternating_series():
    w = WynnEpsilon()
    s = 0.0
    for k in range(12):
        s += (-1) ** k / (k + 1)
        w.push(s)
    # raw partial sum is off by ~4e-2; the epsilon table matches mpmath.shanks
    assert abs(w.estimate - math.log(2)) <= 2e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_gaussian_integral_property(mu, scale):
    v = integrate(lambda x: np.exp(-((x - mu) / scale) ** 2), -math.inf, math.inf).value
    assert v == pytest.approx(scale * math.sqrt(math.pi), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(-50.0, 50.0), st.floats(0.01, 5.0))
def test_breakpoints_on_infinite_range(mu, scale):
    # far, narrow peaks can hide between mapped nodes; a breakpoint pins them
    v = integrate(lambda x: np.exp(-((x - mu) / scale) ** 2), -math.inf, math.inf, points=[mu]).value
    assert v == pytest.approx(scale * math.sqrt(math.pi), rel=1e-9)


class TestExpression:
    def test_grammar(self):
        e = Expression("pow(x, 2) + 2^3 - ln(e) + sqrt(4) * cosh(0) / acosh(cosh(1.5) + 0*x)", ["x"])
        assert e(x=3.0) == pytest.approx(9 + 8 - 1 + 2 / 1.5, rel=1e-12)

    def test_vectorised(self):
        e = Expression("exp(-x) * x", ["x"])
        x = np.linspace(0.0, 2.0, 5)
        assert np.allclose(e(x=x), np.exp(-x) * x)

    def test_complex_continuation(self):
        v = Expression("sqrt(s)", ["s"])(s=-4.0)
        assert v == pytest.approx(2j)

    @pytest.mark.parametrize("text", ["__import__('os')", "x.real", "[x]", "lambda: 1", ""])
    def test_rejects_unsafe_or_bad_input(self, text):
        with pytest.raises(InputError):
            Expression(text, ["x"])

    def test_unknown_variable(self):
        with pytest.raises(UnknownNameError) as exc:
            Expression("y + 1", ["x"])
        assert exc.value.token == "y"

    def test_missing_value(self):
        with pytest.raises(InputError):
            Expression("x + 1", ["x"])()


class TestConfig:
    def test_read(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("# comment\nname = exp-to-laplace\n\ntol=1e-12  # trailing\n")
        assert read_keyvalue(p) == {"name": "exp-to-laplace", "tol": "1e-12"}

    def test_bad_line(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("just words\n")
        with pytest.raises(InputError):
            read_keyvalue(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_keyvalue(tmp_path / "nope.txt")
