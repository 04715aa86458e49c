"""Numeric transform oracles: Gil-Pelaez density inversion and MGF/CF by quadrature.

The inversion evaluates

    f(y) = (1/pi) * int_0^inf Re[exp(-i y w) phi(w)] dw

in three regimes.  ``y == 0`` (or a half-period longer than the whole
significant w-range) integrates a non-oscillatory integrand on geometric
panels.  Moderate ``|y|`` integrates half-period-aligned panels out to the
truncation point.  When that would need too many panels, a core range is
integrated directly and the remaining half-period panels, whose partial sums
alternate, are summed with Wynn's epsilon algorithm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels as K
from .errors import ConvergenceError, DivergenceError, InputError
from .quadrature import WynnEpsilon, gk15, integrate, integrate_panels


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    truncation_threshold: float = 1e-16

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.truncation_threshold > 0):
            raise InputError("tolerances and truncation threshold must be positive")
        if self.max_subdivisions < 1:
            raise InputError("max_subdivisions must be >= 1")


DEFAULT = QuadratureConfig()


class Symmetry(str, enum.Enum):
    REAL_SYMMETRIC = "RealSymmetric"
    GENERAL = "General"


@dataclass(frozen=True)
class CharacteristicFunction:
    """A vectorised CF ``evaluator(w) -> complex`` with a symmetry hint."""

    evaluator: Callable
    symmetry_hint: Symmetry = Symmetry.GENERAL

    def __post_init__(self):
        object.__setattr__(self, "symmetry_hint", Symmetry(self.symmetry_hint))
        at0 = complex(np.asarray(self.evaluator(np.array([0.0])))[0])
        if abs(at0 - 1.0) > 1e-12:
            raise InputError(f"a characteristic function must equal 1 at 0, got {at0}")

    def __call__(self, w):
        return np.asarray(self.evaluator(np.asarray(w, dtype=float)))

    @classmethod
    def of(cls, dist) -> "CharacteristicFunction":
        """CF of a kernel distribution or a DE instance."""
        from . import defun
        if isinstance(dist, defun.DifferentiatedErrorFunction):
            return cls(lambda w: defun.cf(dist, w), Symmetry.REAL_SYMMETRIC)
        sym = Symmetry.GENERAL
        if dist.family is K.Family.DEFUN or (
                dist.family in (K.Family.LAPLACE, K.Family.NORMAL) and dist["m"] == 0) or \
                dist.family is K.Family.DISCRETE_LAPLACE:
            sym = Symmetry.REAL_SYMMETRIC
        return cls(lambda w: K.cf(dist, w), sym)


@dataclass(frozen=True)
class InversionResult:
    value: float
    error: float
    clamped: bool
    omega_max: float
    method: str


_OMEGA_BUDGET = 2.0 ** 50
_MAX_ALIGNED = 4000
_MAX_TAIL_PANELS = 4000


def _abs_cf(cf: CharacteristicFunction, w):
    return np.abs(cf(w))


def truncation_point(cf: CharacteristicFunction, threshold: float) -> float:
    """Smallest W = 2^k with max |phi| sampled on [W, 2W] below ``threshold``."""
    probe = np.linspace(0.0, 1.0, 9)
    w = 2.0 ** -8
    while w <= _OMEGA_BUDGET:
        if np.max(_abs_cf(cf, w * (1.0 + probe))) < threshold:
            return w
        w *= 2.0
    raise ConvergenceError(
        f"|phi| did not fall below {threshold:g} before w = {_OMEGA_BUDGET:g}; "
        "the characteristic function does not appear to decay")


def _cf_scale(cf: CharacteristicFunction, w_cut: float) -> float:
    """A w at which |phi| has dropped noticeably; sets the finest geometric panel."""
    w = w_cut
    while w > 2.0 ** -30 and np.abs(cf(np.array([w])))[0] < 0.9:
        w /= 2.0
    return w


def _integrand(cf: CharacteristicFunction, y: float):
    if cf.symmetry_hint is Symmetry.REAL_SYMMETRIC:
        return lambda w: np.cos(y * w) * np.real(cf(w))
    return lambda w: np.real(np.exp(-1j * y * w) * cf(w))


def gil_pelaez_detail(cf: CharacteristicFunction, y: float,
                      cfg: QuadratureConfig = DEFAULT) -> InversionResult:
    y = float(y)
    if not math.isfinite(y):
        raise InputError(f"y must be finite, got {y}")
    W = truncation_point(cf, cfg.truncation_threshold)
    g = _integrand(cf, y)
    w_lo = _cf_scale(cf, W)
    geo = W * 2.0 ** -np.arange(0, max(1, int(math.log2(W / w_lo)) + 5))
    ay = abs(y)
    P = math.pi / ay if ay > 0 else math.inf
    tol = dict(abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)

    if W / P <= _MAX_ALIGNED:
        aligned = np.arange(1, int(W / P) + 1) * P if ay > 0 else np.empty(0)
        edges = np.unique(np.concatenate([[0.0, W], geo, aligned]))
        core = integrate_panels(g, edges, max_subdivisions=max(cfg.max_subdivisions, 4 * len(edges)), **tol)
        tail = integrate(g, W, math.inf, max_subdivisions=cfg.max_subdivisions, **tol)
        total, err = core.value + tail.value, core.error + tail.error
        ok = core.converged and tail.converged
        method = "direct" if ay == 0 else "aligned"
    else:
        # Core: directly up to an aligned point beyond the CF's bulk.
        n_core = int(min(_MAX_ALIGNED, max(16, math.ceil(8 * w_lo / P))))
        C = n_core * P
        edges = np.unique(np.concatenate([[0.0], geo[geo < C], np.arange(1, n_core + 1) * P]))
        core = integrate_panels(g, edges, max_subdivisions=max(cfg.max_subdivisions, 4 * len(edges)), **tol)
        total, err, ok = _wynn_tail(g, C, P, W, core.value, cfg)
        method = "wynn"
        if not ok:
            # No alternation to accelerate (e.g. phase of phi cancels the
            # oscillation); the tail is then smooth enough to map directly.
            tail = integrate(g, C, math.inf, max_subdivisions=cfg.max_subdivisions, **tol)
            total, err, ok = core.value + tail.value, tail.error, tail.converged
            method = "mapped"
        err += core.error
        ok = ok and core.converged
    if not ok:
        raise ConvergenceError(f"Gil-Pelaez integral at y={y:g} did not converge (error {err:.3g})")
    value = total / math.pi
    err /= math.pi
    clamped = False
    if value < 0:
        if value >= -cfg.abs_tol - err:
            value, clamped = 0.0, True
        else:
            raise ConvergenceError(f"Gil-Pelaez inversion gave a negative density {value:.3g} at y={y:g}")
    return InversionResult(float(value), float(err), clamped, W, method)


def _wynn_tail(g, start: float, P: float, W: float, core_value: float, cfg: QuadratureConfig):
    """Sum half-period panels beyond ``start`` with epsilon acceleration."""
    wynn = WynnEpsilon()
    partial = core_value
    panel_err = 0.0
    batch = 32
    done = 0
    stable = 0
    lo = start
    while done < _MAX_TAIL_PANELS:
        a = lo + P * np.arange(batch)
        # two GK15 panels per half period
        a2 = np.concatenate([a, a + P / 2])
        b2 = a2 + P / 2
        v, e, _ = gk15(g, a2, b2)
        per = v[:batch] + v[batch:]
        panel_err += float(np.sum(e))
        for term in per:
            partial += term
            est = wynn.push(partial)
            tol = max(cfg.abs_tol, cfg.rel_tol * abs(est))
            stable = stable + 1 if wynn.change() <= tol else 0
            if stable >= 3:
                return float(np.real(est)), wynn.change() + panel_err, True
        lo += batch * P
        done += batch
        if lo > W:
            # Beyond the truncation point the panels carry < threshold each.
            return float(np.real(partial)), panel_err + cfg.truncation_threshold * P, True
    return float(np.real(wynn.estimate)), math.inf, False


def gil_pelaez_pdf(cf: CharacteristicFunction, y, cfg: QuadratureConfig = DEFAULT):
    """Density at ``y`` (scalar or array) recovered from the CF."""
    y_arr = np.asarray(y, dtype=float)
    out = np.array([gil_pelaez_detail(cf, v, cfg).value for v in y_arr.ravel()]).reshape(y_arr.shape)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Direct quadrature / summation oracles for kernel transforms
# ---------------------------------------------------------------------------

def _centre_scale(dist) -> tuple[float, float]:
    lo, hi = K.support(dist)
    mean, var = K.mean_variance(dist)
    if not math.isfinite(mean):
        mean = 2.0 * lo if lo > 0 else 1.0
    scale = math.sqrt(var) if math.isfinite(var) and var > 0 else max(abs(mean), 1.0)
    return min(max(mean, lo), hi), scale


_MAX_GROWTH = 60


def _weighted(dist, s):
    """x -> exp(s x) f(x), guarding 0 * inf where the density has underflowed."""
    def f(x):
        d = K.pdf(dist, x)
        with np.errstate(over="ignore", invalid="ignore"):
            e = np.exp(s * x)
            return np.where(d > 0, e * d, 0.0)
    return f


def _grow(chunk_value, start: float, direction: int, limit: float, step0: float, total0, cfg,
          s) -> complex:
    """Accumulate chunks of geometrically growing width until they vanish."""
    total = total0
    pos, width = start, step0
    for _ in range(_MAX_GROWTH):
        if (direction > 0 and pos >= limit) or (direction < 0 and pos <= limit):
            return total
        nxt = pos + direction * width
        nxt = min(nxt, limit) if direction > 0 else max(nxt, limit)
        v = chunk_value(min(pos, nxt), max(pos, nxt))
        if not np.isfinite(v):
            raise DivergenceError(f"transform integral diverges at s={s}")
        total = total + v
        if not np.isfinite(total):
            raise DivergenceError(f"transform integral diverges at s={s}")
        if abs(v) <= 1e-17 * max(abs(total), 1e-300) and width > step0:
            return total
        pos, width = nxt, width * 2.0
    raise DivergenceError(f"transform integral at s={s} keeps growing; outside the convergence strip")


def numeric_mgf(dist, s, cfg: QuadratureConfig = DEFAULT):
    """E[exp(sX)] by adaptive quadrature (continuous) or summation (discrete)."""
    lo, hi = K.support(dist)
    c, scale = _centre_scale(dist)
    if dist.discrete:
        return _discrete_transform(dist, lambda k: np.exp(s * k), s)

    f = _weighted(dist, s)
    kinks = [p for p in _kinks(dist) if lo < p < hi]

    def chunk(a, b):
        with np.errstate(all="ignore"):
            r = integrate(f, a, b, abs_tol=cfg.abs_tol * 1e-3, rel_tol=cfg.rel_tol * 1e-2,
                          max_subdivisions=cfg.max_subdivisions, points=kinks)
        return r.value

    mid = chunk(max(lo, c - scale), min(hi, c + scale)) if c - scale < hi else 0.0
    right = _grow(chunk, min(hi, c + scale), +1, hi, scale, 0.0, cfg, s)
    left = _grow(chunk, max(lo, c - scale), -1, lo, scale, 0.0, cfg, s)
    total = mid + left + right
    return float(np.real(total)) if np.isrealobj(s) else complex(total)


def _discrete_transform(dist, weight, s):
    lo, _ = K.support(dist)
    c, scale = _centre_scale(dist)
    c = math.floor(c)
    block = max(16, int(4 * scale))
    total = 0.0
    # right side from c upward, left side from c-1 downward
    for direction in (+1, -1):
        start = c if direction > 0 else c - 1
        n = block
        for _ in range(_MAX_GROWTH):
            ks = start + direction * np.arange(n, dtype=float)
            ks = ks[ks >= lo]
            if ks.size == 0:
                break
            with np.errstate(over="ignore", invalid="ignore"):
                pm = K.pdf(dist, ks)
                terms = np.where(pm > 0, weight(ks) * pm, 0.0)
            v = terms.sum()
            if not np.isfinite(v):
                raise DivergenceError(f"transform series diverges at s={s}")
            total = total + v
            last = abs(terms[-1]) if terms.size else 0.0
            if last <= 1e-17 * max(abs(total), 1e-300) and abs(terms[0]) >= last:
                break
            start = ks[-1] + direction
            n = min(2 * n, 1 << 16)
        else:
            raise DivergenceError(f"transform series at s={s} keeps growing; outside the convergence strip")
    return total


def _kinks(dist) -> list[float]:
    fam, p = dist.family, dist.params
    if fam in (K.Family.LAPLACE,):
        return [p["m"]]
    if fam is K.Family.DEFUN:
        return [0.0]
    return []


def effective_support(dist, mass: float = 1e-17) -> tuple[float, float]:
    """Interval outside which each tail carries less than ``mass``."""
    lo, hi = K.support(dist)
    c, scale = _centre_scale(dist)
    a = lo
    if not math.isfinite(lo):
        w = scale
        while K.cdf(dist, c - w) > mass:
            w *= 2
        a = c - w
    b = hi
    if not math.isfinite(hi):
        w = scale
        while 1.0 - K.cdf(dist, c + w) > mass and w < 1e18 * scale:
            w *= 2
        b = c + w
    return a, b


def numeric_cf(dist, omega, cfg: QuadratureConfig = DEFAULT) -> complex:
    """E[exp(i w X)] by direct summation or half-period-aligned quadrature."""
    w = float(omega)
    if dist.discrete:
        return complex(_discrete_transform(dist, lambda k: np.exp(1j * w * k), 1j * w))
    a, b = effective_support(dist)
    f = _weighted(dist, 1j * w)
    pts = [p for p in _kinks(dist) if a < p < b]
    if w != 0:
        P = math.pi / abs(w)
        n = min(int((b - a) / P), 20000)
        pts.extend(a + P * np.arange(1, n + 1))
    pts.extend(np.linspace(a, b, 33)[1:-1])
    edges = np.unique(np.concatenate([[a, b], [p for p in pts if a < p < b]]))
    r = integrate_panels(f, edges, abs_tol=cfg.abs_tol * 1e-2, rel_tol=cfg.rel_tol * 1e-2,
                         max_subdivisions=max(cfg.max_subdivisions, 4 * len(edges)))
    return complex(r.value)


def numeric_laplace_transform(dist, s: float, cfg: QuadratureConfig = DEFAULT) -> float:
    if s < 0:
        raise InputError("Laplace transform argument must be >= 0")
    return float(numeric_mgf(dist, -s, cfg))


__all__ = ["QuadratureConfig", "CharacteristicFunction", "Symmetry", "InversionResult",
           "gil_pelaez_pdf", "gil_pelaez_detail", "numeric_mgf", "numeric_cf",
           "numeric_laplace_transform", "truncation_point", "effective_support"]
