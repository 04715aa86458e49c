"""Catalog of kernel distributions with exact CDF, density and transforms.

A :class:`KernelDistribution` is a family plus concrete parameter values and a
designation of which parameters are *free* (mixed over) and which are fixed.
Evaluation is functional::

    >>> d = kernel("gamma", r=2, theta=1, free="r")
    >>> mgf(d, 0.5)
    4.0

Closed-form MGFs accept complex arguments inside their convergence strip
(analytic continuation), and the CF is the MGF on the imaginary axis.
Weibull (no closed-form transform) and Pareto type I (transform through the
generalised exponential integral) are the two exceptions and are evaluated
numerically.
"""

from __future__ import annotations

import enum
import math
import types
from dataclasses import dataclass, field
from typing import Mapping

import mpmath
import numpy as np
from scipy import special

from . import defun as _de
from .errors import (DivergenceError, DomainError, InputError, UnknownNameError,
                     UnsupportedError)
from .quadrature import integrate, integrate_panels

INF = math.inf


class Family(str, enum.Enum):
    POISSON = "poisson"
    NEGBIN = "negbin"
    GAMMA = "gamma"
    EXPONENTIAL = "exponential"
    WEIBULL = "weibull"
    PARETO1 = "pareto1"
    NORMAL = "normal"
    NORMAL_MV = "normal_mv"
    LAPLACE = "laplace"
    GUMBEL = "gumbel"
    LOGARITHMIC = "logarithmic"
    DISCRETE_LAPLACE = "discrete_laplace"
    UNIFORM = "uniform"
    DEFUN = "defun"


ALIASES = {
    "negative_binomial": Family.NEGBIN,
    "nb": Family.NEGBIN,
    "exp": Family.EXPONENTIAL,
    "pareto": Family.PARETO1,
    "nmv": Family.NORMAL_MV,
    "normal_mean_variance": Family.NORMAL_MV,
    "log": Family.LOGARITHMIC,
    "logseries": Family.LOGARITHMIC,
    "dl": Family.DISCRETE_LAPLACE,
    "de": Family.DEFUN,
    "differentiated_error_function": Family.DEFUN,
}

PARAM_ALIASES = {"lam": "lambda", "λ": "lambda", "θ": "theta", "ς": "sigma", "κ": "kappa",
                 "τ": "tau", "α": "alpha", "var": "sigma2"}


def resolve_family(name) -> Family:
    if isinstance(name, Family):
        return name
    key = str(name).strip().lower().replace("-", "_")
    try:
        return Family(key)
    except ValueError:
        pass
    if key in ALIASES:
        return ALIASES[key]
    raise UnknownNameError("family", str(name), [f.value for f in Family])


@dataclass(frozen=True)
class Interval:
    """A real interval with per-end openness."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=float)
        above = v >= self.lo if self.lo_closed else v > self.lo
        below = v <= self.hi if self.hi_closed else v < self.hi
        return bool(np.all(above & below))

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


POSITIVE = Interval(0.0, INF)
REAL = Interval(-INF, INF)
UNIT = Interval(0.0, 1.0)
NONNEG = Interval(0.0, INF, lo_closed=True)


@dataclass(frozen=True)
class FamilyInfo:
    params: tuple[str, ...]
    domains: Mapping[str, Interval]
    default_free: tuple[str, ...]
    discrete: bool


CATALOG: dict[Family, FamilyInfo] = {
    Family.POISSON: FamilyInfo(("lambda",), {"lambda": POSITIVE}, ("lambda",), True),
    Family.NEGBIN: FamilyInfo(("r", "p"), {"r": POSITIVE, "p": UNIT}, ("r",), True),
    Family.GAMMA: FamilyInfo(("r", "theta"), {"r": POSITIVE, "theta": POSITIVE}, ("r",), False),
    Family.EXPONENTIAL: FamilyInfo(("theta",), {"theta": POSITIVE}, ("theta",), False),
    Family.WEIBULL: FamilyInfo(("theta", "tau"), {"theta": POSITIVE, "tau": POSITIVE}, ("theta",), False),
    Family.PARETO1: FamilyInfo(("alpha", "theta"), {"alpha": POSITIVE, "theta": POSITIVE}, ("theta",), False),
    Family.NORMAL: FamilyInfo(("m", "sigma2"), {"m": REAL, "sigma2": POSITIVE}, ("m",), False),
    Family.NORMAL_MV: FamilyInfo(("m", "kappa"), {"m": POSITIVE, "kappa": POSITIVE}, ("m",), False),
    Family.LAPLACE: FamilyInfo(("m", "sigma"), {"m": REAL, "sigma": POSITIVE}, ("m",), False),
    Family.GUMBEL: FamilyInfo(("m", "sigma"), {"m": REAL, "sigma": POSITIVE}, ("m",), False),
    Family.LOGARITHMIC: FamilyInfo(("q",), {"q": UNIT}, ("q",), True),
    Family.DISCRETE_LAPLACE: FamilyInfo(("p",), {"p": UNIT}, ("p",), True),
    Family.UNIFORM: FamilyInfo(("a", "b"), {"a": NONNEG, "b": POSITIVE}, ("a", "b"), False),
    Family.DEFUN: FamilyInfo(("a", "b"), {"a": NONNEG, "b": POSITIVE}, ("a", "b"), False),
}


@dataclass(frozen=True)
class KernelDistribution:
    family: Family
    params: Mapping[str, float]
    free_params: tuple[str, ...] | None = None
    fixed_params: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        fam = resolve_family(self.family)
        object.__setattr__(self, "family", fam)
        info = CATALOG[fam]
        params = {}
        for k, v in dict(self.params).items():
            name = PARAM_ALIASES.get(k, k)
            if name not in info.params:
                raise UnknownNameError(f"{fam.value} parameter", k, info.params)
            params[name] = float(v)
        missing = [p for p in info.params if p not in params]
        if missing:
            raise InputError(f"{fam.value} needs parameter(s) {missing}")
        _validate(fam, params)
        ordered = {p: params[p] for p in info.params}
        object.__setattr__(self, "params", types.MappingProxyType(ordered))
        free = self.free_params
        if free is None:
            free = info.default_free
        elif isinstance(free, str):
            free = tuple(f for f in free.replace("|", "+").split("+") if f)
        free = tuple(PARAM_ALIASES.get(f, f) for f in free)
        for f in free:
            if f not in info.params:
                raise UnknownNameError(f"{fam.value} parameter", f, info.params)
        if len(set(free)) != len(free):
            raise InputError(f"duplicate free parameter in {free}")
        object.__setattr__(self, "free_params", tuple(free))
        object.__setattr__(self, "fixed_params", tuple(p for p in info.params if p not in free))

    @property
    def discrete(self) -> bool:
        return CATALOG[self.family].discrete

    def with_params(self, **updates) -> "KernelDistribution":
        p = dict(self.params)
        p.update(updates)
        return KernelDistribution(self.family, p, self.free_params)

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    def __hash__(self):
        return hash((self.family, tuple(self.params.items()), self.free_params))

    def __eq__(self, other):
        if not isinstance(other, KernelDistribution):
            return NotImplemented
        return (self.family, dict(self.params), self.free_params) == \
            (other.family, dict(other.params), other.free_params)

    def __str__(self):
        return to_spec(self)


def kernel(family, free=None, **params) -> KernelDistribution:
    """Shorthand constructor: ``kernel("negbin", r=2, p=0.5, free="p")``."""
    return KernelDistribution(resolve_family(family), params, free)


def _validate(fam: Family, params: Mapping[str, float]) -> None:
    info = CATALOG[fam]
    for name, dom in info.domains.items():
        v = params[name]
        if not math.isfinite(v) and not (math.isinf(dom.hi) and v == INF and dom.hi_closed):
            raise DomainError(f"{fam.value}: parameter {name}={v} is not finite")
        if not dom.contains(v):
            raise DomainError(f"{fam.value}: parameter {name}={v} outside {dom}")
    if fam in (Family.UNIFORM, Family.DEFUN) and not params["a"] < params["b"]:
        if fam is Family.DEFUN and params["a"] == params["b"]:
            _de.DifferentiatedErrorFunction(params["a"], params["b"])
        raise DomainError(f"{fam.value}: need a < b, got a={params['a']}, b={params['b']}")


# ---------------------------------------------------------------------------
# Kernel-spec text form: ``family:name=value,...,free=n1+n2``
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelTemplate:
    """A family with fixed-parameter bindings and named free slots."""

    family: Family
    fixed: Mapping[str, float]
    free: tuple[str, ...]

    def bind(self, *values, **named) -> KernelDistribution:
        p = dict(self.fixed)
        if values:
            if len(values) != len(self.free):
                raise InputError(f"{self.family.value} template expects {len(self.free)} free value(s)")
            p.update(zip(self.free, (float(v) for v in values)))
        p.update(named)
        return KernelDistribution(self.family, p, self.free)


def _split_spec(text: str):
    text = text.strip()
    if ":" in text:
        fam_txt, rest = text.split(":", 1)
    else:
        fam_txt, rest = text, ""
    fam = resolve_family(fam_txt)
    params: dict[str, float] = {}
    free = None
    for item in filter(None, (s.strip() for s in rest.split(","))):
        if "=" not in item:
            raise InputError(f"expected name=value in kernel spec, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if k == "free":
            free = tuple(f.strip() for f in v.replace("|", "+").split("+") if f.strip())
            continue
        k = PARAM_ALIASES.get(k, k)
        if k not in CATALOG[fam].params:
            raise UnknownNameError(f"{fam.value} parameter", k, CATALOG[fam].params)
        try:
            params[k] = float(v)
        except ValueError:
            raise InputError(f"parameter {k} expects a number, got {v!r}") from None
    return fam, params, free


def parse_kernel_spec(text: str) -> KernelDistribution:
    """Parse ``family:name=value,...[,free=a+b]`` into a distribution."""
    fam, params, free = _split_spec(text)
    return KernelDistribution(fam, params, free)


def parse_kernel_template(text: str) -> KernelTemplate:
    """Parse a spec whose free parameters may be left without values."""
    fam, params, free = _split_spec(text)
    info = CATALOG[fam]
    if free is None:
        free = tuple(p for p in info.params if p not in params) or info.default_free
    free = tuple(PARAM_ALIASES.get(f, f) for f in free)
    for f in free:
        if f not in info.params:
            raise UnknownNameError(f"{fam.value} parameter", f, info.params)
    missing = [p for p in info.params if p not in params and p not in free]
    if missing:
        raise InputError(f"{fam.value} template needs fixed value(s) for {missing}")
    fixed = {k: v for k, v in params.items() if k not in free}
    return KernelTemplate(fam, types.MappingProxyType(fixed), free)


def to_spec(dist: KernelDistribution) -> str:
    body = ",".join(f"{k}={v:.17g}" for k, v in dist.params.items())
    return f"{dist.family.value}:{body},free={'+'.join(dist.free_params)}"


# ---------------------------------------------------------------------------
# Per-family implementations.  ``p`` values may be numpy arrays (mixtures
# evaluate a kernel across many free-parameter values at once).
# ---------------------------------------------------------------------------

def _floor(x):
    return np.floor(np.asarray(x, dtype=float))


def _cdf_impl(fam: Family, x, p):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam is Family.POISSON:
            k = _floor(x)
            return np.where(k < 0, 0.0, special.gammaincc(np.maximum(k, 0) + 1, p["lambda"]))
        if fam is Family.NEGBIN:
            k = _floor(x)
            return np.where(k < 0, 0.0, special.betainc(p["r"], np.maximum(k, 0) + 1, 1 - p["p"]))
        if fam is Family.GAMMA:
            return special.gammainc(p["r"], np.maximum(x, 0.0) / p["theta"])
        if fam is Family.EXPONENTIAL:
            return -np.expm1(-np.maximum(x, 0.0) / p["theta"])
        if fam is Family.WEIBULL:
            return -np.expm1(-(np.maximum(x, 0.0) / p["theta"]) ** p["tau"])
        if fam is Family.PARETO1:
            return np.where(x <= p["theta"], 0.0, -np.expm1(p["alpha"] * np.log(p["theta"] / np.where(x > 0, x, 1.0))))
        if fam is Family.NORMAL:
            return special.ndtr((x - p["m"]) / np.sqrt(p["sigma2"]))
        if fam is Family.NORMAL_MV:
            return special.ndtr((x - p["m"]) / np.sqrt(p["kappa"] * p["m"]))
        if fam is Family.LAPLACE:
            z = (x - p["m"]) / p["sigma"]
            return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0)))
        if fam is Family.GUMBEL:
            return np.exp(-np.exp(-(x - p["m"]) / p["sigma"]))
        if fam is Family.LOGARITHMIC:
            return _log_cdf(x, p["q"])
        if fam is Family.DISCRETE_LAPLACE:
            k = _floor(x)
            q = p["p"]
            neg = q ** np.where(k < 0, -k, 0) / (1 + q)
            pos = 1.0 - q ** (np.where(k >= 0, k, 0) + 1) / (1 + q)
            return np.where(k < 0, neg, pos)
        if fam is Family.UNIFORM:
            return np.clip((x - p["a"]) / (p["b"] - p["a"]), 0.0, 1.0)
        if fam is Family.DEFUN:
            if np.ndim(p["a"]) or np.ndim(p["b"]):
                return np.vectorize(lambda xi, ai, bi: float(_de.cdf(_de.DifferentiatedErrorFunction(ai, bi), xi)))(
                    x, p["a"], p["b"])
            return _de.cdf(_de.DifferentiatedErrorFunction(float(p["a"]), float(p["b"])), x)
    raise UnsupportedError(fam.value)


def _log_cdf(x, q):
    if np.ndim(q):
        return np.vectorize(lambda xi, qi: float(_log_cdf(xi, float(qi))))(x, q)
    q = float(q)
    k = _floor(x)
    kmax = int(min(max(np.max(k, initial=0), 0), 10_000_000))
    if kmax < 1:
        return np.where(k < 1, 0.0, 1.0) * 0.0
    # Stop accumulating once terms fall below 1e-16 of the running sum.
    terms = []
    total = 0.0
    n = 0
    block = 4096
    while n < kmax:
        m = min(block, kmax - n)
        kk = np.arange(n + 1, n + m + 1, dtype=float)
        t = np.exp(kk * math.log(q) - np.log(kk)) / -math.log1p(-q)
        terms.append(t)
        total += t.sum()
        n += m
        if t[-1] < 1e-16 * total:
            break
    c = np.cumsum(np.concatenate(terms))
    idx = np.clip(k, 1, len(c)).astype(int) - 1
    out = np.where(k < 1, 0.0, c[idx])
    return np.minimum(out, 1.0)


def _density_impl(fam: Family, x, p):
    """PMF for discrete families (zero off the lattice), PDF otherwise."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if CATALOG[fam].discrete:
            k = np.round(x)
            on = np.abs(x - k) == 0
            if fam is Family.POISSON:
                lam = p["lambda"]
                v = np.exp(special.xlogy(k, lam) - lam - special.gammaln(k + 1))
                v = np.where(k >= 0, v, 0.0)
            elif fam is Family.NEGBIN:
                r, q = p["r"], p["p"]
                kk = np.maximum(k, 0)
                v = np.exp(special.gammaln(r + kk) - special.gammaln(r) - special.gammaln(kk + 1)
                           + r * np.log1p(-q) + special.xlogy(kk, q))
                v = np.where(k >= 0, v, 0.0)
            elif fam is Family.LOGARITHMIC:
                q = p["q"]
                kk = np.maximum(k, 1)
                v = np.exp(kk * np.log(q) - np.log(kk)) / -np.log1p(-q)
                v = np.where(k >= 1, v, 0.0)
            elif fam is Family.DISCRETE_LAPLACE:
                q = p["p"]
                v = (1 - q) / (1 + q) * q ** np.abs(k)
            return np.where(on, v, 0.0)
        if fam is Family.GAMMA:
            r, th = p["r"], p["theta"]
            xp = np.where(x > 0, x, 1.0)
            v = np.exp(special.xlogy(r - 1, xp / th) - xp / th - special.gammaln(r)) / th
            return np.where(x > 0, v, np.where((x == 0) & (r == 1), 1.0 / th, 0.0))
        if fam is Family.EXPONENTIAL:
            return np.where(x >= 0, np.exp(-np.maximum(x, 0) / p["theta"]) / p["theta"], 0.0)
        if fam is Family.WEIBULL:
            th, tau = p["theta"], p["tau"]
            z = np.maximum(x, 0.0) / th
            v = tau / th * z ** (tau - 1) * np.exp(-z ** tau)
            return np.where(x > 0, v, 0.0)
        if fam is Family.PARETO1:
            a, th = p["alpha"], p["theta"]
            xp = np.where(x > th, x, th)
            return np.where(x > th, a / th * np.exp(-(a + 1) * np.log(xp / th)), 0.0)
        if fam in (Family.NORMAL, Family.NORMAL_MV):
            var = p["sigma2"] if fam is Family.NORMAL else p["kappa"] * p["m"]
            return np.exp(-(x - p["m"]) ** 2 / (2 * var)) / np.sqrt(2 * math.pi * var)
        if fam is Family.LAPLACE:
            return np.exp(-np.abs(x - p["m"]) / p["sigma"]) / (2 * p["sigma"])
        if fam is Family.GUMBEL:
            z = (x - p["m"]) / p["sigma"]
            return np.exp(-z - np.exp(-z)) / p["sigma"]
        if fam is Family.UNIFORM:
            return np.where((x > p["a"]) & (x < p["b"]), 1.0 / (p["b"] - p["a"]), 0.0)
        if fam is Family.DEFUN:
            if np.ndim(p["a"]) or np.ndim(p["b"]):
                return np.vectorize(lambda xi, ai, bi: float(_de.pdf(_de.DifferentiatedErrorFunction(ai, bi), xi)))(
                    x, p["a"], p["b"])
            return _de.pdf(_de.DifferentiatedErrorFunction(float(p["a"]), float(p["b"])), x)
    raise UnsupportedError(fam.value)


def strip_of(fam: Family, p) -> Interval:
    """Real-part interval on which the MGF integral/sum converges.

    Parameter values may sit on the closure of their domain (0 or inf), which
    is how mixtures probe the strip at the ends of a mixing domain.
    """
    with np.errstate(divide="ignore"):
        inv = lambda v: float(np.divide(1.0, np.float64(v)))  # noqa: E731
        nlog = lambda v: float(-np.log(np.float64(v)))  # noqa: E731
        if fam in (Family.POISSON, Family.NORMAL, Family.NORMAL_MV, Family.UNIFORM, Family.DEFUN):
            return REAL
        if fam is Family.NEGBIN:
            return Interval(-INF, nlog(p["p"]))
        if fam in (Family.GAMMA, Family.EXPONENTIAL):
            return Interval(-INF, inv(p["theta"]))
        if fam is Family.WEIBULL:
            if p["tau"] > 1:
                return REAL
            if p["tau"] == 1:
                return Interval(-INF, inv(p["theta"]))
            return Interval(-INF, 0.0, hi_closed=True)
        if fam is Family.PARETO1:
            return Interval(-INF, 0.0, hi_closed=True)
        if fam is Family.LAPLACE:
            return Interval(-inv(p["sigma"]), inv(p["sigma"]))
        if fam is Family.GUMBEL:
            return Interval(-INF, inv(p["sigma"]))
        if fam is Family.LOGARITHMIC:
            return Interval(-INF, nlog(p["q"]))
        if fam is Family.DISCRETE_LAPLACE:
            c = nlog(p["p"])
            return Interval(-c, c)
    raise UnsupportedError(fam.value)


def _ratio_expm1(x):
    x = np.asarray(x)
    small = np.abs(x) < 1e-5
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x / 2.0 + x * x / 6.0, np.expm1(safe) / safe)


def _mgf_impl(fam: Family, s, p):
    """Closed-form MGF at real or complex ``s`` (no strip check)."""
    s = np.asarray(s)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if fam is Family.POISSON:
            return np.exp(p["lambda"] * np.expm1(s))
        if fam is Family.NEGBIN:
            q = p["p"]
            return np.exp(p["r"] * (np.log1p(-q) - np.log1p(-q * np.exp(s))))
        if fam is Family.GAMMA:
            return np.exp(-p["r"] * np.log1p(-p["theta"] * s))
        if fam is Family.EXPONENTIAL:
            return 1.0 / (1.0 - p["theta"] * s)
        if fam is Family.NORMAL:
            return np.exp(p["m"] * s + 0.5 * p["sigma2"] * s * s)
        if fam is Family.NORMAL_MV:
            return np.exp(p["m"] * (s + 0.5 * p["kappa"] * s * s))
        if fam is Family.LAPLACE:
            return np.exp(p["m"] * s) / (1.0 - p["sigma"] ** 2 * s * s)
        if fam is Family.GUMBEL:
            z = 1.0 - p["sigma"] * s
            lg = special.loggamma(z) if np.iscomplexobj(z) else special.gammaln(z)
            return np.exp(p["m"] * s + lg)
        if fam is Family.LOGARITHMIC:
            q = p["q"]
            return np.log1p(-q * np.exp(s)) / np.log1p(-q)
        if fam is Family.DISCRETE_LAPLACE:
            q = p["p"]
            return (1 - q) ** 2 / ((1 - q * np.exp(s)) * (1 - q * np.exp(-s)))
        if fam is Family.UNIFORM:
            a, b = p["a"], p["b"]
            return np.exp(a * s) * _ratio_expm1((b - a) * s)
        if fam is Family.DEFUN:
            return _de.mgf(_de.DifferentiatedErrorFunction(float(p["a"]), float(p["b"])), s)
        if fam is Family.PARETO1:
            return _pareto_transform(s, p)
        if fam is Family.WEIBULL:
            return _weibull_transform(s, p)
    raise UnsupportedError(fam.value)


def _pareto_transform(s, p):
    """E[exp(sX)] = alpha * E_{alpha+1}(-s theta), Re s <= 0."""
    a, th = float(p["alpha"]), float(p["theta"])
    s = np.asarray(s)
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i, si in enumerate(flat):
        if si == 0:
            out[i] = 1.0
        else:
            out[i] = complex(a * mpmath.expint(a + 1, mpmath.mpc(-si * th)))
    out = out.reshape(s.shape)
    return out if np.iscomplexobj(s) else out.real


def _weibull_transform(s, p):
    """E[exp(sX)] with X = theta U^(1/tau), U ~ Exp(1), by quadrature in U."""
    th, tau = float(p["theta"]), float(p["tau"])
    s = np.asarray(s)
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i, si in enumerate(flat):
        if si == 0:
            out[i] = 1.0
            continue
        sr, om = float(np.real(si)), float(np.imag(si))

        def f(u, sr=sr, om=om):
            x = th * u ** (1.0 / tau)
            return np.exp((sr * x - u) + 1j * om * x)

        if om == 0.0:
            r = integrate(lambda u: np.real(f(u)), 0.0, INF, abs_tol=1e-14, rel_tol=1e-13)
        else:
            # Truncate where exp(-u) < 1e-19 and break at half-periods of exp(i om x).
            u_max = 45.0 + max(0.0, sr * th * 45.0 ** (1.0 / tau))
            n_half = min(int(abs(om) * th * u_max ** (1.0 / tau) / math.pi) + 1, 20000)
            edges = (np.arange(n_half + 1) * math.pi / (abs(om) * th)) ** tau
            edges = np.unique(np.clip(np.append(edges, u_max), 0.0, u_max))
            r = integrate_panels(f, edges, abs_tol=1e-14, rel_tol=1e-13,
                                 max_subdivisions=max(2000, 4 * len(edges)))
        out[i] = r.value
    out = out.reshape(s.shape)
    return out if np.iscomplexobj(s) else out.real


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def _out(v):
    v = np.asarray(v)
    return v[()] if v.ndim == 0 else v


def convergence_strip(dist: KernelDistribution) -> Interval:
    return strip_of(dist.family, dist.params)


def support(dist: KernelDistribution) -> tuple[float, float]:
    fam, p = dist.family, dist.params
    if fam in (Family.POISSON, Family.NEGBIN):
        return 0.0, INF
    if fam is Family.LOGARITHMIC:
        return 1.0, INF
    if fam in (Family.GAMMA, Family.EXPONENTIAL, Family.WEIBULL):
        return 0.0, INF
    if fam is Family.PARETO1:
        return p["theta"], INF
    if fam is Family.UNIFORM:
        return p["a"], p["b"]
    return -INF, INF


def mean_variance(dist: KernelDistribution) -> tuple[float, float]:
    """First two moments (``inf`` where they do not exist)."""
    fam, p = dist.family, dist.params
    if fam is Family.POISSON:
        return p["lambda"], p["lambda"]
    if fam is Family.NEGBIN:
        r, q = p["r"], p["p"]
        return r * q / (1 - q), r * q / (1 - q) ** 2
    if fam is Family.GAMMA:
        return p["r"] * p["theta"], p["r"] * p["theta"] ** 2
    if fam is Family.EXPONENTIAL:
        return p["theta"], p["theta"] ** 2
    if fam is Family.WEIBULL:
        th, tau = p["theta"], p["tau"]
        g1 = math.gamma(1 + 1 / tau)
        return th * g1, th * th * (math.gamma(1 + 2 / tau) - g1 * g1)
    if fam is Family.PARETO1:
        a, th = p["alpha"], p["theta"]
        mean = a * th / (a - 1) if a > 1 else INF
        var = a * th * th / ((a - 1) ** 2 * (a - 2)) if a > 2 else INF
        return mean, var
    if fam is Family.NORMAL:
        return p["m"], p["sigma2"]
    if fam is Family.NORMAL_MV:
        return p["m"], p["kappa"] * p["m"]
    if fam is Family.LAPLACE:
        return p["m"], 2 * p["sigma"] ** 2
    if fam is Family.GUMBEL:
        return p["m"] + np.euler_gamma * p["sigma"], (math.pi * p["sigma"]) ** 2 / 6
    if fam is Family.LOGARITHMIC:
        q = p["q"]
        L = -math.log1p(-q)
        mean = q / ((1 - q) * L)
        return mean, q * (1 - q / L) / ((1 - q) ** 2 * L)
    if fam is Family.DISCRETE_LAPLACE:
        q = p["p"]
        return 0.0, 2 * q / (1 - q) ** 2
    if fam is Family.UNIFORM:
        a, b = p["a"], p["b"]
        return 0.5 * (a + b), (b - a) ** 2 / 12
    if fam is Family.DEFUN:
        return 0.0, p["a"] + p["b"]
    raise UnsupportedError(fam.value)


def cdf(dist: KernelDistribution, x):
    """CDF at any real ``x``; discrete families use floor semantics."""
    return _out(np.clip(_cdf_impl(dist.family, x, dist.params), 0.0, 1.0))


def pdf(dist: KernelDistribution, x):
    """Density (continuous) or mass at lattice points (discrete)."""
    return _out(_density_impl(dist.family, x, dist.params))


def pmf(dist: KernelDistribution, k):
    if not dist.discrete:
        raise UnsupportedError(f"{dist.family.value} is continuous; use pdf")
    return pdf(dist, k)


def _check_strip(dist: KernelDistribution, s) -> None:
    strip = convergence_strip(dist)
    re = np.real(np.asarray(s))
    if not strip.contains(re):
        bad = np.asarray(re).ravel()
        ok = np.array([strip.contains(v) for v in bad])
        first = bad[~ok][0]
        raise DivergenceError(
            f"{dist.family.value} MGF diverges at s={first:g}: convergence strip is {strip}")


def mgf(dist: KernelDistribution, s):
    """Moment-generating function E[exp(sX)].

    Real ``s`` gives real output.  Complex ``s`` is evaluated by analytic
    continuation when ``Re s`` lies in the strip.
    """
    s = np.asarray(s)
    _check_strip(dist, s)
    v = _mgf_impl(dist.family, s, dist.params)
    v = np.where(s == 0, 1.0, v)
    if not np.iscomplexobj(s):
        v = np.real(v)
    return _out(v)


def cf(dist: KernelDistribution, omega):
    """Characteristic function E[exp(i omega X)]."""
    w = np.asarray(omega, dtype=float)
    if dist.family is Family.DEFUN:
        v = _de.cf(_de.DifferentiatedErrorFunction(dist["a"], dist["b"]), w).astype(complex)
    else:
        v = _mgf_impl(dist.family, 1j * w, dist.params)
    v = np.where(w == 0, 1.0 + 0j, v)
    return _out(np.asarray(v, dtype=complex))


LAPLACE_FAMILIES = (Family.PARETO1, Family.GAMMA, Family.WEIBULL, Family.EXPONENTIAL)


def laplace_transform(dist: KernelDistribution, s):
    """E[exp(-sX)] for kernels supported on the positive half-line, s >= 0."""
    if dist.family not in LAPLACE_FAMILIES:
        raise UnsupportedError(
            f"laplace_transform is provided for positive-support families "
            f"{[f.value for f in LAPLACE_FAMILIES]}, not {dist.family.value}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise DomainError(f"laplace_transform needs s >= 0, got {s}")
    v = _mgf_impl(dist.family, -s, dist.params)
    v = np.where(s == 0, 1.0, np.real(v))
    return _out(v)


def _sample_impl(fam: Family, p, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` variates; parameter values may be length-``n`` arrays."""
    if fam is Family.POISSON:
        return rng.poisson(p["lambda"], n).astype(float)
    if fam is Family.NEGBIN:
        return rng.negative_binomial(p["r"], 1 - np.asarray(p["p"]), n).astype(float)
    if fam is Family.GAMMA:
        return rng.gamma(p["r"], p["theta"], n)
    if fam is Family.EXPONENTIAL:
        return rng.exponential(p["theta"], n)
    if fam is Family.WEIBULL:
        return p["theta"] * rng.weibull(p["tau"], n)
    if fam is Family.PARETO1:
        return p["theta"] * (1.0 + rng.pareto(p["alpha"], n))
    if fam is Family.NORMAL:
        return rng.normal(p["m"], np.sqrt(p["sigma2"]), n)
    if fam is Family.NORMAL_MV:
        return rng.normal(p["m"], np.sqrt(np.asarray(p["kappa"]) * p["m"]), n)
    if fam is Family.LAPLACE:
        return rng.laplace(p["m"], p["sigma"], n)
    if fam is Family.GUMBEL:
        return rng.gumbel(p["m"], p["sigma"], n)
    if fam is Family.LOGARITHMIC:
        return rng.logseries(p["q"], n).astype(float)
    if fam is Family.DISCRETE_LAPLACE:
        # difference of two iid geometrics on {0, 1, ...}
        q = 1 - np.asarray(p["p"])
        g1 = rng.geometric(q, n) - 1
        g2 = rng.geometric(q, n) - 1
        return (g1 - g2).astype(float)
    if fam is Family.UNIFORM:
        return rng.uniform(p["a"], p["b"], n)
    if fam is Family.DEFUN:
        v = rng.uniform(p["a"], p["b"], n)
        return rng.normal(0.0, np.sqrt(2.0 * v))
    raise UnsupportedError(fam.value)


def sample(dist: KernelDistribution, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` variates; identical (dist, n, seed) give identical output."""
    if n < 1:
        raise InputError(f"sample size must be >= 1, got {n}")
    return _sample_impl(dist.family, dist.params, int(n), np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# Family membership and identifiability metadata
# ---------------------------------------------------------------------------

class Tag(str, enum.Enum):
    ADDITIVELY_CLOSED = "AdditivelyClosed"
    SCALE_PARAMETER = "ScaleParameter"
    LOCATION_PARAMETER = "LocationParameter"
    INFINITE_POWER_SERIES = "InfinitePowerSeries"


@dataclass(frozen=True)
class Verdict:
    free: tuple[str, ...]
    identifiable: bool | None
    citation: str


@dataclass(frozen=True)
class FamilyTag:
    tags: frozenset
    identifiable_free_params: tuple[Verdict, ...]
    free: tuple[str, ...] = ()

    @property
    def verdict(self) -> Verdict | None:
        """Catalogued verdict for the distribution's own free designation."""
        for v in self.identifiable_free_params:
            if set(v.free) == set(self.free):
                return v
        return None


_AC, _SP, _LP, _IPS = (Tag.ADDITIVELY_CLOSED, Tag.SCALE_PARAMETER,
                       Tag.LOCATION_PARAMETER, Tag.INFINITE_POWER_SERIES)
_TEICHER = "Teicher (1961)"

# (family, free designation) -> (tags, identifiable, citation)
_MEMBERSHIP: dict[tuple[Family, tuple[str, ...]], tuple[frozenset, bool | None, str]] = {
    (Family.POISSON, ("lambda",)): (frozenset({_AC, _IPS}), True, "Feller (1943)"),
    (Family.NEGBIN, ("r",)): (frozenset({_AC}), True, _TEICHER),
    (Family.NEGBIN, ("p",)): (frozenset({_IPS}), True,
                              "Luxmann-Ellinghaus (1987); Sapatinas (1995); "
                              "GF-accessible from Gamma(r, theta) with free theta"),
    (Family.GAMMA, ("r",)): (frozenset({_AC}), True, _TEICHER),
    (Family.GAMMA, ("theta",)): (frozenset({_SP}), True, _TEICHER),
    (Family.EXPONENTIAL, ("theta",)): (frozenset({_SP}), True, _TEICHER + " (Gamma with r = 1)"),
    (Family.WEIBULL, ("theta",)): (frozenset({_SP}), True, _TEICHER),
    (Family.PARETO1, ("theta",)): (frozenset({_SP}), True, _TEICHER),
    (Family.NORMAL, ("m",)): (frozenset({_LP}), True, _TEICHER),
    (Family.NORMAL_MV, ("m",)): (frozenset({_AC}), True,
                                 "GF-accessible from Poisson(lambda) (double-exponential MGF form)"),
    (Family.LAPLACE, ("m",)): (frozenset({_LP}), True, _TEICHER),
    (Family.LAPLACE, ("sigma",)): (frozenset(), True,
                                   "GF-accessible from Exponential(theta) with free theta"),
    (Family.GUMBEL, ("m",)): (frozenset({_LP}), True, _TEICHER),
    (Family.LOGARITHMIC, ("q",)): (frozenset({_IPS}), None,
                                   "identifiable only under conditions of Luxmann-Ellinghaus (1987), "
                                   "Sapatinas (1995), Stoyanov and Lin (2011); no verdict recorded"),
    (Family.DISCRETE_LAPLACE, ("p",)): (frozenset(), True,
                                        "GF-accessible from Laplace(0, sigma) with free sigma"),
    (Family.UNIFORM, ("a", "b")): (frozenset(), False,
                                   _TEICHER + ": unidentifiable when midpoint and length are both free"),
    (Family.DEFUN, ("a", "b")): (frozenset(), False,
                                 "GF-accessible from Uniform(a, b) with free (a, b), which is unidentifiable"),
}

# Uniform in midpoint/length coordinates m = (a+b)/2, l = b - a.
_UNIFORM_ML = (
    Verdict(("m",), True, _TEICHER + ": identifiable iff exactly one of m=(a+b)/2, l=b-a is free"),
    Verdict(("l",), True, _TEICHER + ": identifiable iff exactly one of m=(a+b)/2, l=b-a is free"),
    Verdict(("m", "l"), False, _TEICHER + ": unidentifiable when both m and l are free"),
)


def family_tags(dist: KernelDistribution) -> FamilyTag:
    fam = dist.family
    free = tuple(dist.free_params)
    verdicts = [Verdict(f, ident, cite) for (fm, f), (_, ident, cite) in _MEMBERSHIP.items() if fm is fam]
    if fam is Family.UNIFORM:
        verdicts.extend(_UNIFORM_ML)
    tags = frozenset()
    for (fm, f), (t, _, _) in _MEMBERSHIP.items():
        if fm is fam and set(f) == set(free):
            tags = t
    return FamilyTag(tags, tuple(verdicts), free)


# Vectorised entry points used by the mixture engine: evaluate a kernel over
# an array of values for its single free parameter without re-validating.

def cdf_over(dist: KernelDistribution, x, free_values) -> np.ndarray:
    (name,) = dist.free_params
    p = dict(dist.params)
    p[name] = np.asarray(free_values, dtype=float)
    return np.clip(_cdf_impl(dist.family, x, p), 0.0, 1.0)


def density_over(dist: KernelDistribution, x, free_values) -> np.ndarray:
    (name,) = dist.free_params
    p = dict(dist.params)
    p[name] = np.asarray(free_values, dtype=float)
    return _density_impl(dist.family, x, p)


def mgf_over(dist: KernelDistribution, s, free_values) -> np.ndarray:
    """MGF at a single ``s`` for each value of the free parameter."""
    (name,) = dist.free_params
    vals = np.asarray(free_values, dtype=float)
    if np.asarray(s) == 0:
        return np.ones_like(vals)
    if dist.family in (Family.WEIBULL, Family.PARETO1, Family.DEFUN):
        # these evaluate one parameter set at a time
        out = [_mgf_impl(dist.family, s, {**dist.params, name: float(v)}) for v in vals.ravel()]
        return np.asarray(out).reshape(vals.shape)
    p = dict(dist.params)
    p[name] = vals
    return _mgf_impl(dist.family, s, p)


def sample_over(dist: KernelDistribution, free_values, rng: np.random.Generator) -> np.ndarray:
    """One draw per entry of ``free_values`` for the single free parameter."""
    (name,) = dist.free_params
    vals = np.asarray(free_values, dtype=float)
    p = dict(dist.params)
    p[name] = vals
    return _sample_impl(dist.family, p, vals.size, rng)


def param_domain(family, name: str) -> Interval:
    fam = resolve_family(family)
    return CATALOG[fam].domains[name]


__all__ = [
    "Family", "KernelDistribution", "KernelTemplate", "Interval", "Tag", "Verdict", "FamilyTag",
    "kernel", "parse_kernel_spec", "parse_kernel_template", "to_spec", "cdf", "pdf", "pmf",
    "mgf", "cf", "laplace_transform", "sample", "family_tags", "convergence_strip", "support",
    "mean_variance", "CATALOG",
]

