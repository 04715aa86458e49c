"""The Differentiated Error Function (DE) distribution.

DE(a, b) is the law of ``Y`` with ``Y | V ~ Normal(0, 2V)`` and
``V ~ Uniform(a, b)``; equivalently its MGF is the Uniform(a, b) MGF read
at ``s = t**2``::

    M(t)   = (exp(b t^2) - exp(a t^2)) / ((b - a) t^2)
    phi(w) = (exp(-a w^2) - exp(-b w^2)) / ((b - a) w^2)

The density is evaluated through the rearrangement

    f(y) = [sqrt(b) e^{-u_b^2} h(u_b) - sqrt(a) e^{-u_a^2} h(u_a)] / (sqrt(pi) (b - a))

with ``u_c = |y| / (2 sqrt(c))`` and ``h(u) = 1 - sqrt(pi) u erfcx(u)``, which is
algebraically identical to the erf/erf' closed form but free of the
cancellation between its two bracketed terms in the tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateParameterError, DomainError, InputError, RangeError
from .quadrature import integrate

SQRT_PI = math.sqrt(math.pi)
_SERIES_CUTOFF = 1e-4
_ASYMPTOTIC_U = 12.0
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class DifferentiatedErrorFunction:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"DE parameters must be finite, got a={a}, b={b}")
        if a < 0 or b <= 0:
            raise DomainError(f"DE needs 0 <= a < b, got a={a}, b={b}")
        if a == b:
            raise DegenerateParameterError(
                f"DE(a={a}, b={b}) is degenerate; its a -> b limit is Normal(0, {2 * a})")
        if a > b:
            raise DomainError(f"DE needs a < b, got a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def width(self) -> float:
        return self.b - self.a


def erf_prime(u):
    """Derivative of erf, ``2/sqrt(pi) * exp(-u^2)``."""
    u = np.asarray(u, dtype=float)
    out = (2.0 / SQRT_PI) * np.exp(-u * u)
    return out[()] if out.ndim == 0 else out


def _h(u: np.ndarray) -> np.ndarray:
    """``1 - sqrt(pi) u erfcx(u)`` for u >= 0, asymptotic series for large u."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = u < _ASYMPTOTIC_U
    us = u[small]
    out[small] = 1.0 - SQRT_PI * us * special.erfcx(us)
    ul = u[~small]
    if ul.size:
        # 1 - sqrt(pi) u erfcx(u) ~ -sum_{n>=1} (-1)^n (2n-1)!! / (2u^2)^n
        z = 1.0 / (2.0 * ul * ul)
        term = np.ones_like(ul)
        acc = np.zeros_like(ul)
        for n in range(1, 25):
            term = term * (2 * n - 1) * z
            acc += (-1) ** (n + 1) * term
        out[~small] = acc
    return out


def _weighted_terms(d: DifferentiatedErrorFunction, y: np.ndarray):
    """Return (log of the b-term envelope, bracket) with f = exp(env) * bracket."""
    ay = np.abs(y)
    sb = math.sqrt(d.b)
    ub = ay / (2.0 * sb)
    bracket = sb * _h(ub)
    if d.a > 0:
        sa = math.sqrt(d.a)
        # tiny a pushes ua^2 to inf; the a-term then vanishes, which is the right limit
        with np.errstate(over="ignore"):
            ua = ay / (2.0 * sa)
            # exp(-(ua^2 - ub^2)) relative to the b-term envelope
            rel = np.exp(-(ua * ua - ub * ub))
            bracket = bracket - sa * _h(ua) * rel
    return -ub * ub, bracket


def pdf(d: DifferentiatedErrorFunction, y):
    """Density of DE(a, b) at ``y`` (scalar or array)."""
    y = np.asarray(y, dtype=float)
    env, bracket = _weighted_terms(d, y)
    out = np.exp(env) * bracket / (SQRT_PI * d.width)
    out = np.maximum(out, 0.0)
    return out[()] if out.ndim == 0 else out


def logpdf(d: DifferentiatedErrorFunction, y):
    y = np.asarray(y, dtype=float)
    env, bracket = _weighted_terms(d, y)
    with np.errstate(divide="ignore"):
        out = env + np.log(bracket) - math.log(SQRT_PI * d.width)
    return out[()] if out.ndim == 0 else out


def pdf_erf_form(d: DifferentiatedErrorFunction, y):
    """The density written directly with erf and erf' (no rearrangement).

    Kept as an independent cross-check of :func:`pdf`; it loses accuracy in
    the far tails through cancellation.
    """
    y = np.asarray(y, dtype=float)
    sb = math.sqrt(d.b)
    ub = y / (2.0 * sb)
    if d.a > 0:
        sa = math.sqrt(d.a)
        ua = y / (2.0 * sa)
        erf_a, derf_a = special.erf(ua), sa * erf_prime(ua)
    else:
        erf_a, derf_a = np.sign(y), 0.0
    out = (y * (special.erf(ub) - erf_a) + sb * erf_prime(ub) - derf_a) / (2.0 * d.width)
    return out[()] if np.ndim(out) == 0 else out


def _ratio_series(x):
    """(exp(x) - 1)/x, exact at 0; works for complex arrays."""
    x = np.asarray(x)
    small = np.abs(x) < 1e-5
    safe = np.where(small, 1.0, x)
    direct = np.expm1(safe) / safe
    series = 1.0 + x / 2.0 + x * x / 6.0
    return np.where(small, series, direct)


def cf(d: DifferentiatedErrorFunction, omega):
    """Characteristic function; real, even, equal to 1 at the origin."""
    w = np.asarray(omega, dtype=float)
    w2 = w * w
    a, b = d.a, d.b
    near = np.abs(w) < _SERIES_CUTOFF
    # phi = exp(-a w^2) * (1 - exp(-(b-a) w^2)) / ((b-a) w^2)
    x = -d.width * w2
    direct = np.exp(-a * w2) * _ratio_series(x)
    series = 1.0 - (a + b) * w2 / 2.0 + (a * a + a * b + b * b) * w2 * w2 / 6.0
    out = np.where(near, series, direct)
    return out[()] if out.ndim == 0 else out


def mgf(d: DifferentiatedErrorFunction, t):
    """Moment-generating function, finite for every real ``t``.

    Complex ``t`` is accepted (analytic continuation); ``mgf(d, 1j*w)``
    equals ``cf(d, w)``.
    """
    t = np.asarray(t)
    t2 = t * t
    a, b = d.a, d.b
    if np.any(np.real(b * t2) > _LOG_MAX - 1.0):
        raise RangeError(f"DE mgf overflows for |t| beyond {math.sqrt((_LOG_MAX - 1) / b):.6g}")
    near = np.abs(t) < _SERIES_CUTOFF
    direct = np.exp(a * t2) * _ratio_series(d.width * t2)
    series = 1.0 + (a + b) * t2 / 2.0 + (a * a + a * b + b * b) * t2 * t2 / 6.0
    out = np.where(near, series, direct)
    if not np.iscomplexobj(t):
        out = np.real(out)
    return out[()] if np.ndim(out) == 0 else out


def moments(d: DifferentiatedErrorFunction) -> tuple[float, float]:
    """Mean and variance: (0, a + b)."""
    return 0.0, d.a + d.b


def fourth_moment(d: DifferentiatedErrorFunction) -> float:
    """E[Y^4] = 4 (a^2 + ab + b^2), read off the t^4 coefficient of the MGF."""
    a, b = d.a, d.b
    return 4.0 * (a * a + a * b + b * b)


def cdf(d: DifferentiatedErrorFunction, y, abs_tol: float = 1e-12):
    """CDF by quadrature of the density from 0, using F(0) = 1/2."""
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        if math.isinf(v):
            out[i] = 1.0 if v > 0 else 0.0
            continue
        r = integrate(lambda x: pdf(d, x), 0.0, abs(v), abs_tol=abs_tol, rel_tol=1e-12)
        out[i] = 0.5 + math.copysign(r.value, v)
    out = np.clip(out, 0.0, 1.0).reshape(y.shape)
    return out[()] if out.ndim == 0 else out


def sample(d: DifferentiatedErrorFunction, n: int, seed: int) -> np.ndarray:
    """Draw V ~ Uniform(a, b), then Y | V ~ Normal(0, 2V)."""
    if n < 1:
        raise InputError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    v = rng.uniform(d.a, d.b, size=n)
    return rng.normal(0.0, np.sqrt(2.0 * v))


def scale_mixture_cf(d: DifferentiatedErrorFunction, omega, abs_tol: float = 1e-15):
    """CF of the sampler's two-stage law, E_V[exp(-V w^2)], by quadrature over V.

    This is independent of :func:`cf` and is what justifies the sampler.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty_like(w)
    for i, wi in enumerate(w):
        r = integrate(lambda v: np.exp(-v * wi * wi), d.a, d.b, abs_tol=abs_tol, rel_tol=1e-15)
        out[i] = r.value / d.width
    return out[0] if np.ndim(omega) == 0 else out


@dataclass(frozen=True)
class TailReport:
    y: np.ndarray
    ratio: np.ndarray
    max_over_min: float
    bounded: bool
    inconclusive: bool
    passed: bool
    bound: float = 4.0


def tail_envelope_check(d: DifferentiatedErrorFunction, y_lo: float, y_hi: float,
                        samples: int = 64, bound: float = 4.0) -> TailReport:
    """Check that f(y) y^2 exp(y^2 / 4b) stays within a bounded band.

    The ratio is computed in log space so it survives underflow of f.
    """
    if not y_lo < y_hi:
        raise InputError(f"need y_lo < y_hi, got [{y_lo}, {y_hi}]")
    sb = math.sqrt(d.b)
    lo_ok = y_lo >= 5 * sb * (1 - 1e-12)
    hi_ok = y_hi <= 10 * sb * (1 + 1e-12)
    if not (lo_ok and hi_ok):
        raise InputError(
            f"tail window must lie in [5 sqrt(b), 10 sqrt(b)] = [{5 * sb:.6g}, {10 * sb:.6g}]")
    if samples < 2:
        raise InputError("need at least two sample points")
    y = np.linspace(y_lo, y_hi, samples)
    _, bracket = _weighted_terms(d, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(bracket) + 2.0 * np.log(y) - math.log(SQRT_PI * d.width)
    inconclusive = bool(np.all(pdf(d, y) == 0.0)) and not np.all(np.isfinite(log_r))
    r = np.exp(log_r)
    bounded = bool(np.all(np.isfinite(r)) and np.all(r > 0))
    spread = float(r.max() / r.min()) if bounded else math.inf
    return TailReport(y, r, spread, bounded, inconclusive,
                      bounded and not inconclusive and spread <= bound, bound)
