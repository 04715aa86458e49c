"""Continuous mixtures F(x) = int F(x | alpha) g(alpha) d alpha over one free parameter.

A :class:`MixingDensity` is a normalised density on an interval of the
kernel's free-parameter domain.  Infinite ends are truncated where the
density has fallen below ``1e-14`` of its peak, found by geometric growth
from the density's centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import kernels as K
from .errors import ConvergenceError, DivergenceError, DomainError, InputError, UnknownNameError, UnsupportedError
from .expr import Expression
from .kernels import Interval, KernelDistribution
from .quadrature import gk15, integrate, integrate_panels
from .transforms import DEFAULT, QuadratureConfig

INF = math.inf
_NEGLIGIBLE = 1e-14
NORMALIZATION_TOL = 1e-8


@dataclass(frozen=True)
class MixingDensity:
    domain: Interval
    density: Callable
    description: str = ""
    center: float | None = None
    scale: float | None = None
    noise: float = 0.0  # relative accuracy floor of ``density`` itself
    effective: tuple[float, float] = field(init=False)

    def __post_init__(self):
        lo, hi = self.domain.lo, self.domain.hi
        if not lo < hi:
            raise InputError(f"mixing domain {self.domain} is empty")
        c = self.center if self.center is not None else _default_center(lo, hi)
        sc = self.scale if self.scale is not None else _default_scale(lo, hi)
        object.__setattr__(self, "center", float(c))
        object.__setattr__(self, "scale", float(sc))
        object.__setattr__(self, "effective", _effective_domain(self))
        total = self.integrate(lambda a: np.ones_like(a))
        if not abs(total - 1.0) <= NORMALIZATION_TOL:
            raise InputError(
                f"mixing density {self.description or ''} integrates to {total:.12g} over "
                f"{self.domain}, not 1 (tolerance {NORMALIZATION_TOL:g})")

    def __call__(self, alpha):
        a = np.asarray(alpha, dtype=float)
        with np.errstate(all="ignore"):
            v = np.asarray(self.density(a), dtype=float)
        v = np.where(np.isfinite(v), v, 0.0)
        inside = (a >= self.domain.lo) & (a <= self.domain.hi)
        out = np.where(inside, np.broadcast_to(v, a.shape), 0.0)
        return out[()] if out.ndim == 0 else out

    def breakpoints(self) -> np.ndarray:
        lo, hi = self.effective
        pts = [lo, hi]
        if lo < self.center < hi:
            pts.append(self.center)
        for k in (-2, -1, 1, 2):
            p = self.center + k * self.scale
            if lo < p < hi:
                pts.append(p)
        return np.unique(pts)

    def integrate(self, h: Callable, abs_tol: float = 1e-13, rel_tol: float = 1e-12,
                  max_subdivisions: int = 4000):
        """int h(alpha) g(alpha) d alpha over the effective domain (h vectorised)."""
        r = integrate_panels(lambda a: h(a) * self(a), self.breakpoints(),
                             abs_tol=max(abs_tol, self.noise), rel_tol=max(rel_tol, self.noise),
                             max_subdivisions=max_subdivisions)
        if not r.converged:
            raise ConvergenceError(f"mixing quadrature did not converge (error {r.error:.3g})")
        return r.value


def _default_center(lo, hi):
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def _default_scale(lo, hi):
    if math.isfinite(lo) and math.isfinite(hi):
        return (hi - lo) / 4.0
    return 1.0


def _effective_domain(m: MixingDensity) -> tuple[float, float]:
    lo, hi = m.domain.lo, m.domain.hi
    c, sc = m.center, m.scale
    probe_lo = lo if math.isfinite(lo) else c - 8 * sc
    probe_hi = hi if math.isfinite(hi) else c + 8 * sc
    probe = np.linspace(probe_lo, probe_hi, 2001)[1:-1]
    peak = float(np.max(m(probe)))
    if not peak > 0:
        raise InputError(f"mixing density {m.description} is zero near its centre {c:g}")
    cut = _NEGLIGIBLE * peak

    def grow(direction, bound):
        w = sc
        for _ in range(200):
            x = c + direction * w
            if direction * (x - bound) >= 0:
                return bound
            if m(x) < cut and m(c + direction * 1.5 * w) < cut:
                return x
            w *= 2.0
        raise InputError(f"mixing density {m.description} does not decay on an infinite domain")

    return float(grow(-1, lo)), float(grow(+1, hi))


# ---------------------------------------------------------------------------
# Presets and the mixing-spec grammar
# ---------------------------------------------------------------------------

def gamma_mixing(r: float, theta: float) -> MixingDensity:
    if not (r > 0 and theta > 0):
        raise DomainError(f"gamma mixing needs r > 0, theta > 0, got r={r}, theta={theta}")

    def g(a):
        ap = np.where(a > 0, a, 1.0)
        return np.where(a > 0, np.exp(special.xlogy(r - 1, ap / theta) - ap / theta
                                      - special.gammaln(r)) / theta, 0.0)
    return MixingDensity(Interval(0.0, INF), g, f"gamma(r={r:g}, theta={theta:g})",
                         center=r * theta, scale=math.sqrt(r) * theta)


def normal_mixing(mu: float, sigma: float, lo: float = -INF, hi: float = INF) -> MixingDensity:
    """Normal(mu, sigma^2) truncated to [lo, hi] and renormalised."""
    if not sigma > 0:
        raise DomainError(f"normal mixing needs sigma > 0, got {sigma}")
    mass = special.ndtr((hi - mu) / sigma) - special.ndtr((lo - mu) / sigma)
    if not mass > 0:
        raise DomainError(f"normal mixing has no mass on [{lo}, {hi}]")

    def g(a):
        return np.exp(-0.5 * ((a - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi) * mass)
    center = min(max(mu, lo), hi)
    return MixingDensity(Interval(lo, hi, math.isfinite(lo), math.isfinite(hi)), g,
                         f"normal(mu={mu:g}, sigma={sigma:g}) on [{lo:g}, {hi:g}]",
                         center=center, scale=sigma)


def uniform_mixing(lo: float, hi: float) -> MixingDensity:
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"uniform mixing needs finite lo < hi, got [{lo}, {hi}]")
    width = hi - lo
    return MixingDensity(Interval(lo, hi, True, True), lambda a: np.full(np.shape(a), 1.0 / width),
                         f"uniform[{lo:g}, {hi:g}]")


def expr_mixing(text: str, lo: float, hi: float, variable: str = "x") -> MixingDensity:
    e = Expression(text, variables=(variable,))

    def g(a):
        return np.real(np.asarray(e(**{variable: a}), dtype=complex))
    return MixingDensity(Interval(lo, hi, math.isfinite(lo), math.isfinite(hi)), g, f"expr({text})")


PRESETS = ("gamma", "normal", "truncnormal", "uniform", "expr")


def _num(key, v):
    try:
        return float(v)
    except ValueError:
        raise InputError(f"mixing parameter {key} expects a number, got {v!r}") from None


def parse_mixing(text: str, domain: Interval | None = None) -> MixingDensity:
    """Parse ``gamma:r=2,theta=1``, ``normal:mu=..,sigma=..[,lo=..,hi=..]``,
    ``uniform:lo=..,hi=..`` or ``expr:lo=..,hi=..,f=<expression in x>``.

    For ``normal`` and ``expr`` the bounds default to ``domain`` (usually the
    kernel's free-parameter domain).
    """
    text = text.strip()
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name not in PRESETS:
        raise UnknownNameError("mixing preset", name, PRESETS)
    fexpr = None
    if name == "expr":
        head, sep, fexpr = rest.partition("f=")
        if not sep or not fexpr.strip():
            raise InputError("expr mixing needs f=<expression> as its last field")
        rest = head.rstrip().rstrip(",")
    kv = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        if "=" not in item:
            raise InputError(f"expected name=value in mixing spec, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        kv[k] = _num(k, v)
    d_lo = domain.lo if domain is not None else -INF
    d_hi = domain.hi if domain is not None else INF

    def take(*keys, **defaults):
        unknown = set(kv) - set(keys) - set(defaults)
        if unknown:
            raise UnknownNameError(f"{name} mixing parameter", sorted(unknown)[0], keys + tuple(defaults))
        missing = [k for k in keys if k not in kv]
        if missing:
            raise InputError(f"{name} mixing needs {missing}")
        return [kv[k] for k in keys] + [kv.get(k, v) for k, v in defaults.items()]

    if name == "gamma":
        r, theta = take("r", "theta")
        return gamma_mixing(r, theta)
    if name in ("normal", "truncnormal"):
        mu, sigma, lo, hi = take("mu", "sigma", lo=d_lo, hi=d_hi)
        return normal_mixing(mu, sigma, lo, hi)
    if name == "uniform":
        lo, hi = take("lo", "hi")
        return uniform_mixing(lo, hi)
    lo, hi = take(lo=d_lo, hi=d_hi)
    return expr_mixing(fexpr.strip(), lo, hi)


# ---------------------------------------------------------------------------
# Mixture model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixtureModel:
    kernel: KernelDistribution
    mixing: MixingDensity

    def __post_init__(self):
        if len(self.kernel.free_params) != 1:
            raise UnsupportedError(
                f"mixtures need exactly one free kernel parameter, got {self.kernel.free_params}")
        dom = K.param_domain(self.kernel.family, self.free_name)
        m = self.mixing.domain
        if m.lo < dom.lo or m.hi > dom.hi:
            raise DomainError(
                f"mixing domain {m} is not inside the {self.free_name} domain {dom}")

    @property
    def free_name(self) -> str:
        return self.kernel.free_params[0]


def _kernel_integral(mm: MixtureModel, h, cfg: QuadratureConfig):
    """int h(alpha) g(alpha) d alpha.

    Beyond the mixing density's own cutoff the weight ``h`` may still grow
    (e.g. an MGF), so the range is extended in doubling chunks until they no
    longer contribute.
    """
    g = mm.mixing

    def f(a):
        with np.errstate(over="ignore", invalid="ignore"):
            return h(a) * g(a)

    opts = dict(abs_tol=max(cfg.abs_tol * 1e-2, g.noise), rel_tol=max(cfg.rel_tol * 1e-2, g.noise),
                max_subdivisions=max(cfg.max_subdivisions, 4000))
    r = integrate_panels(f, g.breakpoints(), **opts)
    if not r.converged:
        raise ConvergenceError(f"mixture quadrature did not converge (error {r.error:.3g})")
    total = r.value
    lo, hi = g.effective
    for direction, end, bound in ((+1, hi, g.domain.hi), (-1, lo, g.domain.lo)):
        width = g.scale
        for _ in range(200):
            if end == bound:
                break
            nxt = end + direction * width
            nxt = min(nxt, bound) if direction > 0 else max(nxt, bound)
            with np.errstate(over="ignore", invalid="ignore"):
                piece = integrate(f, min(end, nxt), max(end, nxt), **opts).value
            total = total + piece
            if not np.isfinite(total):
                raise DivergenceError("mixture integral diverges: the weight outgrows the mixing tail")
            if abs(piece) <= 1e-17 * max(abs(total), 1e-300):
                break
            end, width = nxt, width * 2.0
        else:
            raise DivergenceError("mixture integral tail does not decay")
    return total


def mixture_cdf(mm: MixtureModel, x, cfg: QuadratureConfig = DEFAULT):
    """F(x) = int F(x | alpha) g(alpha) d alpha (scalar or array ``x``)."""
    xs = np.asarray(x, dtype=float)
    out = np.empty(xs.size)
    for i, xi in enumerate(xs.ravel()):
        if xi == -INF:
            out[i] = 0.0
        elif xi == INF:
            out[i] = 1.0
        else:
            out[i] = _kernel_integral(mm, lambda a, xi=xi: K.cdf_over(mm.kernel, xi, a), cfg)
    out = np.clip(out, 0.0, 1.0).reshape(xs.shape)
    return out[()] if out.ndim == 0 else out


def mixture_pmf(mm: MixtureModel, k, cfg: QuadratureConfig = DEFAULT):
    """Mass at integer ``k`` as the CDF step F(k) - F(k - 1)."""
    if not mm.kernel.discrete:
        raise UnsupportedError(f"{mm.kernel.family.value} is continuous; use mixture_pdf")
    ks = np.asarray(k, dtype=float)
    if np.any(ks != np.floor(ks)):
        raise InputError("mixture_pmf needs integer arguments")
    out = np.asarray(mixture_cdf(mm, ks, cfg)) - np.asarray(mixture_cdf(mm, ks - 1, cfg))
    out = np.maximum(out, 0.0)
    return out[()] if out.ndim == 0 else out


def mixture_pdf(mm: MixtureModel, x, cfg: QuadratureConfig = DEFAULT):
    """Mixture density (continuous kernels) or mass (discrete kernels)."""
    xs = np.asarray(x, dtype=float)
    out = np.array([_kernel_integral(mm, lambda a, xi=xi: K.density_over(mm.kernel, xi, a), cfg)
                    for xi in xs.ravel()]).reshape(xs.shape)
    return out[()] if out.ndim == 0 else out


def check_mixing_strip(mm: MixtureModel, s) -> None:
    """Raise unless Re(s) lies in the kernel's strip across the whole mixing domain.

    Strips move monotonically with every catalogued parameter, so the two
    (possibly infinite) ends of the domain are the binding nodes.
    """
    re = float(np.real(s))
    if re == 0.0:
        return
    name = mm.free_name
    for node in (mm.mixing.domain.lo, mm.mixing.domain.hi, mm.mixing.center):
        p = dict(mm.kernel.params)
        p[name] = node
        strip = K.strip_of(mm.kernel.family, p)
        if not strip.contains(re):
            raise DomainError(
                f"s={re:g} leaves the {mm.kernel.family.value} MGF strip {strip} at mixing node "
                f"{name}={node:g}")


def mixture_mgf(mm: MixtureModel, s, cfg: QuadratureConfig = DEFAULT):
    """int M(s | alpha) g(alpha) d alpha; complex ``s`` allowed inside the strip."""
    if s == 0:
        return 1.0
    check_mixing_strip(mm, s)
    v = _kernel_integral(mm, lambda a: K.mgf_over(mm.kernel, s, a), cfg)
    if np.iscomplexobj(np.asarray(s)):
        return complex(v)
    return float(np.real(v))


def mixing_inverse_cdf_table(m: MixingDensity, nodes: int = 4097):
    """Tabulate the mixing CDF on a grid, exact per cell by GK15."""
    lo, hi = m.effective
    bp = m.breakpoints()
    grid = np.unique(np.concatenate([np.linspace(lo, hi, nodes), bp]))
    cell, _, _ = gk15(lambda a: m(a), grid[:-1], grid[1:])
    cdf = np.concatenate([[0.0], np.cumsum(np.maximum(cell, 0.0))])
    cdf /= cdf[-1]
    return grid, cdf


def sample_mixing(m: MixingDensity, n: int, rng: np.random.Generator) -> np.ndarray:
    grid, cdf = mixing_inverse_cdf_table(m)
    u = rng.random(n)
    return np.interp(u, cdf, grid)


def sample_mixture(mm: MixtureModel, n: int, seed: int) -> np.ndarray:
    """Two-stage draw: alpha from the mixing density, then X | alpha."""
    if n < 1:
        raise InputError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    alpha = sample_mixing(mm.mixing, int(n), rng)
    return K.sample_over(mm.kernel, alpha, rng)


__all__ = ["MixingDensity", "MixtureModel", "gamma_mixing", "normal_mixing", "uniform_mixing",
           "expr_mixing", "parse_mixing", "mixture_cdf", "mixture_pmf", "mixture_pdf",
           "mixture_mgf", "sample_mixture", "check_mixing_strip"]
