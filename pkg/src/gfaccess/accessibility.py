"""Generating-function accessibility between kernels and its numerical verification.

A kernel Y is GF-accessible from a kernel X when continuous one-to-one maps
``eta`` (parameters) and ``xi`` (transform arguments) satisfy

    M_Y(eta(alpha); xi(s)) = M_X(alpha; s)    for s in [0, epsilon1).

The maps may depend on fixed parameters but never on each other's
arguments.  Accessibility transports identifiability of every continuous
mixture of X to the corresponding mixtures of Y, which is what
:func:`transport_mixed_mgf` checks at the level of mixed MGFs.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from . import kernels as K
from .config import read_keyvalue
from .errors import DivergenceError, DomainError, InputError, UnknownNameError, UnsupportedError
from .expr import Expression
from .kernels import Family, KernelTemplate, Tag
from .mixtures import MixingDensity, MixtureModel, mixture_mgf
from .transforms import DEFAULT, QuadratureConfig

Params = tuple  # tuple of free-parameter values, in template order


@dataclass(frozen=True)
class AccessibilityMapping:
    """An (eta, eta_inv, xi, xi_inv) quadruple tying ``source`` to ``target``.

    ``eta``/``eta_inv`` act on tuples of free-parameter values.  ``xi`` and
    ``xi_inv`` act elementwise on arrays and may return complex values when
    continued off the positive axis.  ``epsilon1(alpha)`` bounds the s-range
    for source parameters ``alpha``; ``epsilon2(beta)`` the t-range.
    """

    name: str
    source: KernelTemplate
    target: KernelTemplate
    eta: Callable[[Params], Params]
    eta_inv: Callable[[Params], Params]
    xi: Callable
    xi_inv: Callable
    epsilon1: Callable[[Params], float]
    epsilon2: Callable[[Params], float]
    identifiable: bool | None = True
    description: str = ""
    fixed: Mapping[str, float] = field(default_factory=dict)

    def swapped(self) -> "AccessibilityMapping":
        """The same relation read from target to source (accessibility is symmetric)."""
        return replace(self, name=f"{self.name} (swapped)", source=self.target, target=self.source,
                       eta=self.eta_inv, eta_inv=self.eta, xi=self.xi_inv, xi_inv=self.xi,
                       epsilon1=self.epsilon2, epsilon2=self.epsilon1)

    def source_kernel(self, alpha: Params) -> K.KernelDistribution:
        return self.source.bind(*alpha)

    def target_kernel(self, alpha: Params) -> K.KernelDistribution:
        return self.target.bind(*self.eta(alpha))

    @property
    def verdict(self) -> str:
        if self.identifiable is None:
            return "no verdict"
        return "transports identifiability" if self.identifiable else "transports unidentifiability"


def _scalar(fn):
    """Lift a scalar map to the tuple convention."""
    return lambda p: (fn(p[0]),)


# ---------------------------------------------------------------------------
# Built-in registry
# ---------------------------------------------------------------------------

def _poisson_to_normal_mv(kappa: float = 1.0) -> AccessibilityMapping:
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")

    def xi(s):
        s = np.asarray(s)
        disc = 1.0 + 2.0 * kappa * np.expm1(s)
        root = np.sqrt(disc.astype(complex)) if np.any(np.real(disc) < 0) or np.iscomplexobj(disc) \
            else np.sqrt(disc)
        # (sqrt(1 + 2 kappa u) - 1) / kappa, written without cancellation at small u
        return 2.0 * np.expm1(s) / (1.0 + root)

    def xi_inv(t):
        t = np.asarray(t)
        return np.log1p(t + 0.5 * kappa * t * t)

    eps1 = lambda a: 1.0  # noqa: E731
    return AccessibilityMapping(
        "poisson-to-normal-mv",
        KernelTemplate(Family.POISSON, {}, ("lambda",)),
        KernelTemplate(Family.NORMAL_MV, {"kappa": kappa}, ("m",)),
        eta=_scalar(lambda lam: lam), eta_inv=_scalar(lambda m: m),
        xi=xi, xi_inv=xi_inv,
        epsilon1=eps1, epsilon2=lambda b: float(np.real(xi(1.0))),
        identifiable=True,
        description="Normal with variance kappa*m from Poisson(lambda): m = lambda, "
                    "s = ln(kappa t^2/2 + t + 1)",
        fixed={"kappa": kappa})


def _gamma_to_negbin(r: float = 2.0) -> AccessibilityMapping:
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    eps1 = lambda a: 0.9 * min(1.0 / a[0], 1.0)  # noqa: E731
    return AccessibilityMapping(
        "gamma-to-negbin",
        KernelTemplate(Family.GAMMA, {"r": r}, ("theta",)),
        KernelTemplate(Family.NEGBIN, {"r": r}, ("p",)),
        eta=_scalar(lambda th: th / (1.0 + th)), eta_inv=_scalar(lambda p: p / (1.0 - p)),
        xi=lambda s: np.log1p(np.asarray(s)), xi_inv=lambda t: np.expm1(np.asarray(t)),
        epsilon1=eps1, epsilon2=lambda b: math.log1p(eps1((b[0] / (1 - b[0]),))),
        identifiable=True,
        description="NegBin(r, p) from Gamma(r, theta): p = theta/(1+theta), t = ln(1+s)",
        fixed={"r": r})


def _exp_to_laplace() -> AccessibilityMapping:
    eps1 = lambda a: 0.9 / a[0]  # noqa: E731
    return AccessibilityMapping(
        "exp-to-laplace",
        KernelTemplate(Family.EXPONENTIAL, {}, ("theta",)),
        KernelTemplate(Family.LAPLACE, {"m": 0.0}, ("sigma",)),
        eta=_scalar(math.sqrt), eta_inv=_scalar(lambda sg: sg * sg),
        xi=_csqrt, xi_inv=lambda t: np.asarray(t) ** 2,
        epsilon1=eps1, epsilon2=lambda b: math.sqrt(eps1((b[0] ** 2,))),
        identifiable=True,
        description="Laplace(0, sigma) from Exponential(theta): sigma = sqrt(theta), t = sqrt(s)",
    )


def _dl_p(sigma: float) -> float:
    # 1 + (1 - sqrt(2 sigma^2 + 1)) / sigma^2, rationalised to avoid cancellation
    root = math.sqrt(2.0 * sigma * sigma + 1.0)
    return (root - 1.0) / (root + 1.0)


def _laplace_to_discrete_laplace() -> AccessibilityMapping:
    eps1 = lambda a: 0.9 / a[0]  # noqa: E731

    def xi(s):
        s = np.asarray(s)
        return np.arccosh(s * s + 1.0)

    def xi_inv(t):
        # sqrt(cosh t - 1) = sqrt(2) sinh(t/2)
        return math.sqrt(2.0) * np.sinh(np.asarray(t) / 2.0)

    return AccessibilityMapping(
        "laplace-to-discrete-laplace",
        KernelTemplate(Family.LAPLACE, {"m": 0.0}, ("sigma",)),
        KernelTemplate(Family.DISCRETE_LAPLACE, {}, ("p",)),
        eta=_scalar(_dl_p), eta_inv=_scalar(lambda p: math.sqrt(2.0 * p) / (1.0 - p)),
        xi=xi, xi_inv=xi_inv,
        epsilon1=eps1, epsilon2=lambda b: float(xi(eps1((math.sqrt(2 * b[0]) / (1 - b[0]),)))),
        identifiable=True,
        description="DiscreteLaplace(p) from Laplace(0, sigma): "
                    "p = 1 + (1 - sqrt(2 sigma^2 + 1))/sigma^2, t = acosh(s^2 + 1)",
    )


def _uniform_to_defun() -> AccessibilityMapping:
    return AccessibilityMapping(
        "uniform-to-defun",
        KernelTemplate(Family.UNIFORM, {}, ("a", "b")),
        KernelTemplate(Family.DEFUN, {}, ("a", "b")),
        eta=lambda ab: tuple(ab), eta_inv=lambda ab: tuple(ab),
        xi=_csqrt, xi_inv=lambda t: np.asarray(t) ** 2,
        epsilon1=lambda ab: 1.0, epsilon2=lambda ab: 1.0,
        identifiable=False,
        description="DE(a, b) from Uniform(a, b): identity on (a, b), t = sqrt(s); "
                    "carries the unidentifiability of Uniform mixtures with both ends free",
    )


def _csqrt(s):
    s = np.asarray(s)
    if np.iscomplexobj(s) or np.any(s < 0):
        return np.sqrt(s.astype(complex))
    return np.sqrt(s)


_BUILDERS: dict[str, Callable[..., AccessibilityMapping]] = {
    "poisson-to-normal-mv": _poisson_to_normal_mv,
    "gamma-to-negbin": _gamma_to_negbin,
    "exp-to-laplace": _exp_to_laplace,
    "laplace-to-discrete-laplace": _laplace_to_discrete_laplace,
    "uniform-to-defun": _uniform_to_defun,
}
_ALIASES = {"laplace-to-dl": "laplace-to-discrete-laplace", "poisson-to-nmv": "poisson-to-normal-mv",
            "exponential-to-laplace": "exp-to-laplace", "uniform-to-de": "uniform-to-defun"}


def builtin_mappings(**fixed) -> list[AccessibilityMapping]:
    """The five catalogued mappings, in registry order.

    ``fixed`` may set ``kappa`` (normal-mv side) and ``r`` (shared Gamma/NegBin shape).
    """
    return [get_mapping(name, **fixed) for name in _BUILDERS]


def mapping_names() -> list[str]:
    return list(_BUILDERS)


def get_mapping(name: str, **fixed) -> AccessibilityMapping:
    key = _ALIASES.get(name, name)
    if key not in _BUILDERS:
        raise UnknownNameError("mapping", name, list(_BUILDERS))
    builder = _BUILDERS[key]
    accepted = set(inspect.signature(builder).parameters)
    return builder(**{k: float(v) for k, v in fixed.items() if k in accepted})


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    residual: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class VerificationReport:
    """Outcome of a verification: grid, per-check residuals and a verdict."""

    subject: str
    grid: str
    checks: dict[str, CheckResult] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def add(self, name: str, residual: float, tol: float, note: str = "") -> CheckResult:
        residual = float(residual)
        res = CheckResult(residual, tol, bool(residual <= tol), note)
        self.checks[name] = res
        return res

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks.values())

    @property
    def max_abs_residual(self) -> float:
        return max((c.residual for c in self.checks.values()), default=math.nan)

    def summary(self) -> str:
        lines = [f"{self.subject}: {'PASS' if self.passed else 'FAIL'} "
                 f"(max residual {self.max_abs_residual:.3e})", f"  grid: {self.grid}"]
        for name, c in self.checks.items():
            flag = "ok  " if c.passed else "FAIL"
            extra = f"  [{c.note}]" if c.note else ""
            lines.append(f"  {flag} {name}: residual {c.residual:.3e} <= {c.tolerance:.1e}{extra}")
        lines.extend(f"  note: {n}" for n in self.notes)
        lines.extend(f"  warning: {w}" for w in self.warnings)
        return "\n".join(lines)


_ONE_TO_ONE_NOTE = "one-to-one checked on the sampled grid only (strict monotonicity / distinct images)"


# ---------------------------------------------------------------------------
# Transform evaluation with a Laplace-transform fallback
# ---------------------------------------------------------------------------

def _in_strip(dist, s) -> bool:
    return K.convergence_strip(dist).contains(np.real(s)) or np.real(s) == 0


def _transform_pair(mapping: AccessibilityMapping, alpha: Params, s: float):
    """(M_X(alpha; u), M_Y(eta(alpha); xi(u)), used_lt) with u = s or the LT argument -s."""
    src = mapping.source_kernel(alpha)
    tgt = mapping.target_kernel(alpha)
    u, used_lt = s, False
    if not _in_strip(src, s):
        if s > 0 and src.family in K.LAPLACE_FAMILIES:
            u, used_lt = -s, True
        else:
            raise DomainError(
                f"grid point s={s:g} at {_fmt(mapping.source.free, alpha)} is outside the "
                f"{src.family.value} MGF strip {K.convergence_strip(src)}")
    t = mapping.xi(u)
    try:
        mx = K.mgf(src, u)
        my = K.mgf(tgt, t)
    except DivergenceError as exc:
        raise DomainError(f"grid point s={s:g} at {_fmt(mapping.source.free, alpha)}: {exc}") from None
    return complex(mx), complex(my), used_lt


def _fmt(names, values) -> str:
    return ", ".join(f"{n}={v:g}" for n, v in zip(names, values))


def _as_params(p) -> Params:
    return tuple(float(v) for v in p) if isinstance(p, (tuple, list, np.ndarray)) else (float(p),)


def _resolve_s_grid(mapping, alpha, s_grid, fraction=0.9, n=50):
    if s_grid is None:
        return np.linspace(0.0, fraction * mapping.epsilon1(alpha), n)
    if callable(s_grid):
        return np.asarray(s_grid(alpha), dtype=float)
    return np.asarray(s_grid, dtype=float)


def verify_definition1(mapping: AccessibilityMapping, param_grid, s_grid=None,
                       tol: float = 1e-10) -> VerificationReport:
    """Check the MGF identity on a grid, plus one-to-one surrogates for eta and xi.

    ``s_grid`` may be a sequence, a callable ``alpha -> grid``, or ``None`` for
    50 points of ``[0, 0.9 * epsilon1(alpha)]``.
    """
    alphas = [_as_params(p) for p in param_grid]
    if not alphas:
        raise InputError("parameter grid is empty")
    rep = VerificationReport(mapping.name, "")
    worst = 0.0
    worst_at = None
    worst_xi_mono = 0.0
    roundtrip_xi = 0.0
    lt_points = 0
    n_points = 0
    for alpha in alphas:
        grid = _resolve_s_grid(mapping, alpha, s_grid)
        if grid.size == 0:
            raise InputError("s grid is empty")
        eps1 = mapping.epsilon1(alpha)
        if np.any(grid < 0) or np.any(grid >= eps1):
            bad = grid[(grid < 0) | (grid >= eps1)][0]
            raise DomainError(f"s={bad:g} is outside [0, epsilon1={eps1:g}) at {_fmt(mapping.source.free, alpha)}")
        for s in grid:
            mx, my, lt = _transform_pair(mapping, alpha, float(s))
            lt_points += lt
            n_points += 1
            r = abs(my - mx)
            if not np.isfinite(r):
                r = math.inf
            if r > worst or worst_at is None:
                worst, worst_at = r, (alpha, float(s))
        t = np.real(mapping.xi(grid))
        gs = np.sort(grid)
        tg = np.real(mapping.xi(gs))
        if gs.size > 1:
            steps = np.diff(tg)
            worst_xi_mono = max(worst_xi_mono, float(np.max(np.where(steps > 0, 0.0, 1.0 - steps))))
        back = np.real(mapping.xi_inv(t))
        roundtrip_xi = max(roundtrip_xi, float(np.max(np.abs(back - grid) / np.maximum(1.0, np.abs(grid)))))
    rep.grid = (f"{len(alphas)} parameter point(s) x {n_points // len(alphas)} s-point(s); "
                f"params {alphas[0]}..{alphas[-1]}")
    rep.add("(iii) MGF identity", worst, tol,
            f"worst at {_fmt(mapping.source.free, worst_at[0])}, s={worst_at[1]:g}")
    rep.add("(ii) xi(0) = 0", abs(complex(mapping.xi(0.0))), 1e-15)
    rep.add("(ii) xi strictly increasing", worst_xi_mono, 0.0)
    rep.add("(ii) xi_inv(xi(s)) = s", roundtrip_xi, 1e-12)
    _check_eta(rep, mapping, alphas)
    rep.notes.append(_ONE_TO_ONE_NOTE)
    if lt_points:
        rep.notes.append(f"{lt_points} point(s) evaluated as Laplace transforms (argument -s)")
    return rep


def _check_eta(rep: VerificationReport, mapping: AccessibilityMapping, alphas) -> None:
    images = [tuple(float(np.real(v)) for v in mapping.eta(a)) for a in alphas]
    back = [mapping.eta_inv(b) for b in images]
    rt = max(max(abs(x - y) / max(1.0, abs(x)) for x, y in zip(a, bb)) for a, bb in zip(alphas, back))
    rep.add("(i) eta_inv(eta(alpha)) = alpha", rt, 1e-12)
    # Injectivity: distinct inputs give distinct images.
    collisions = 0
    seen = {}
    for a, im in zip(alphas, images):
        if im in seen and seen[im] != a:
            collisions += 1
        seen[im] = a
    rep.add("(i) eta injective on grid", collisions, 0.0)
    if len(alphas[0]) == 1 and len(alphas) > 1:
        order = np.argsort([a[0] for a in alphas])
        ims = np.array([images[i][0] for i in order])
        d = np.diff(ims)
        mono = bool(np.all(d > 0) or np.all(d < 0)) if d.size else True
        rep.add("(i) eta strictly monotone", 0.0 if mono else 1.0, 0.0)


def verify_swapped(mapping: AccessibilityMapping, param_grid, tol: float = 1e-10,
                   n: int = 50) -> VerificationReport:
    """Verify the reverse relation on the image grid (symmetry of accessibility)."""
    sw = mapping.swapped()
    betas = [mapping.eta(_as_params(p)) for p in param_grid]
    return verify_definition1(sw, betas, lambda b: np.linspace(0.0, 0.9 * sw.epsilon1(b), n), tol)


# ---------------------------------------------------------------------------
# Corollaries
# ---------------------------------------------------------------------------

def verify_corollary1(target: K.KernelDistribution, eta_inv: Callable, xi_inv: Callable,
                      grid, tol: float = 1e-10) -> VerificationReport:
    """Check log M_Y(t; beta) = eta_inv(beta) * xi_inv(t).

    ``grid`` is ``(beta_values, t_values)`` with ``t > 0``.  Two checks run:
    direct factorisation, and t-constancy of log M(t; b1) / log M(t; b_ref)
    at the value eta_inv(b1)/eta_inv(b_ref).
    """
    betas, ts = (np.asarray(g, dtype=float) for g in grid)
    rep = VerificationReport(f"corollary-1 form for {target.family.value}",
                             f"{betas.size} beta value(s) x {ts.size} t value(s)")
    if len(target.free_params) != 1:
        rep.add("single free parameter", 1.0, 0.0,
                f"{len(target.free_params)} free parameters admit no scalar factorisation")
        return rep
    if betas.size < 1 or ts.size < 1:
        raise InputError("corollary-1 grid is empty")
    if np.any(ts <= 0):
        raise DomainError("corollary-1 check needs t > 0 (log M vanishes at t = 0)")
    name = target.free_params[0]
    logs = np.empty((betas.size, ts.size))
    for i, b in enumerate(betas):
        d = target.with_params(**{name: b})
        m = np.asarray(K.mgf(d, ts), dtype=float)
        if np.any(m <= 1.0):
            bad = ts[np.asarray(m <= 1.0)][0]
            raise DomainError(f"log MGF is not positive at t={bad:g}, {name}={b:g}")
        logs[i] = np.log(m)
    fac = np.array([[eta_inv(b) * xi_inv(t) for t in ts] for b in betas], dtype=float)
    rel = np.abs(logs - fac) / np.maximum(1.0, np.abs(logs))
    rep.add("log M = eta_inv(beta) * xi_inv(t)", float(rel.max()), tol)
    ref = int(np.argmax(betas))
    ratio = logs / logs[ref]
    expect = np.array([eta_inv(b) / eta_inv(betas[ref]) for b in betas])[:, None]
    rep.add("log-MGF ratio constant in t", float(np.max(np.abs(ratio - expect) / np.maximum(1.0, np.abs(expect)))), tol)
    return rep


def verify_corollary2(source_scale_family: K.KernelDistribution, target: K.KernelDistribution,
                      mapping: AccessibilityMapping, grid, tol: float = 1e-10) -> VerificationReport:
    """Scale-family route: M_X(s; theta) = psi(theta s) and M_Y(t; beta) = psi(eta_inv(beta) xi_inv(t)).

    ``psi`` is the source MGF at unit scale.  ``grid`` is ``(theta_values, s_values)``.
    """
    src = source_scale_family
    if Tag.SCALE_PARAMETER not in K.family_tags(src).tags:
        raise InputError(f"{src.family.value} with free {src.free_params} is not a scale-parameter kernel")
    if target.family is not mapping.target.family or src.family is not mapping.source.family:
        raise InputError("source/target kernels do not match the mapping")
    thetas, ss = (np.asarray(g, dtype=float) for g in grid)
    (name,) = src.free_params
    (tname,) = target.free_params
    unit = src.with_params(**{name: 1.0})
    psi = lambda u: K.mgf(unit, u)  # noqa: E731
    rep = VerificationReport(f"corollary-2 form for {mapping.name}",
                             f"{thetas.size} theta value(s) x {ss.size} s value(s)")
    prod = 0.0
    ident = 0.0
    for th in thetas:
        d = src.with_params(**{name: th})
        eps1 = mapping.epsilon1((th,))
        if np.any(ss >= eps1):
            raise DomainError(f"s={ss[ss >= eps1][0]:g} is outside [0, epsilon1={eps1:g}) at {name}={th:g}")
        for s in ss:
            mx = K.mgf(d, s)
            prod = max(prod, abs(mx - psi(th * s)))
            beta = mapping.eta((th,))
            t = mapping.xi(s)
            y = target.with_params(**{tname: beta[0]})
            my = K.mgf(y, t)
            u = mapping.eta_inv(beta)[0] * np.real(mapping.xi_inv(t))
            ident = max(ident, abs(my - psi(u)), abs(my - mx))
    rep.add("(a) product form M(s; theta) = M(theta s; 1)", prod, tol)
    rep.add("(b) M_Y(t; beta) = psi(eta_inv(beta) xi_inv(t))", ident, tol)
    return rep


# ---------------------------------------------------------------------------
# Mixed-MGF transport
# ---------------------------------------------------------------------------

def _fd_derivative(fn: Callable[[float], float], x: float, h: float, lo: float, hi: float) -> float:
    """Central difference, shrinking the step to stay well inside (lo, hi)."""
    if math.isfinite(lo):
        h = min(h, 1e-3 * (x - lo))
    if math.isfinite(hi):
        h = min(h, 1e-3 * (hi - x))
    while (x - h <= lo or x + h >= hi) and h > 1e-300:
        h /= 2.0
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def pushforward(mapping: AccessibilityMapping, g: MixingDensity,
                report: VerificationReport | None = None) -> MixingDensity:
    """Density of beta = eta(alpha) when alpha ~ g, using g(alpha)/|d eta/d alpha|."""
    if len(mapping.source.free) != 1:
        raise UnsupportedError("pushforward is implemented for scalar free parameters")
    eta = lambda a: float(np.real(mapping.eta((a,))[0]))  # noqa: E731
    eta_inv = lambda b: float(np.real(mapping.eta_inv((b,))[0]))  # noqa: E731
    dom = g.domain
    src_dom = K.param_domain(mapping.source.family, mapping.source.free[0])
    lo_a, hi_a = max(dom.lo, src_dom.lo), min(dom.hi, src_dom.hi)
    mismatch = [0.0]
    g_ref = float(g(g.center))

    def jac(a: float) -> float:
        h = 1e-6 * max(1.0, abs(a))
        d1 = _fd_derivative(eta, a, h, lo_a, hi_a)
        d2 = _fd_derivative(eta, a, h / 2, lo_a, hi_a)
        # differentiability is judged where the mixing density carries weight
        if d1 != 0 and float(g(a)) >= 1e-6 * g_ref:
            mismatch[0] = max(mismatch[0], abs(d1 - d2) / abs(d1))
        return abs(d1)

    def density(b):
        shape = np.shape(b)
        b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
        out = np.zeros_like(b)
        for i, bi in enumerate(b):
            try:
                a = eta_inv(bi)
            except (ValueError, ZeroDivisionError):
                continue
            if not (lo_a < a < hi_a or (dom.lo <= a <= dom.hi and math.isfinite(a))):
                continue
            j = jac(a)
            if j > 0 and np.isfinite(j):
                out[i] = float(g(a)) / j
        return out.reshape(shape)

    ends = sorted(_safe_eta(eta, v) for v in (dom.lo, dom.hi))
    center = _safe_eta(eta, g.center)
    spread = abs(_safe_eta(eta, g.center + g.scale) - center) or 1.0
    ends_closed = (dom.lo_closed, dom.hi_closed)
    pf = MixingDensity(K.Interval(ends[0], ends[1], *ends_closed), density,
                       f"pushforward of {g.description} through eta", center=center, scale=spread,
                       noise=1e-9)
    if report is not None and mismatch[0] > 1e-4:
        report.warnings.append(
            f"finite-difference Jacobian changed by {mismatch[0]:.2e} under step halving")
    return pf


def _safe_eta(eta, v: float) -> float:
    if math.isinf(v):
        # limit at infinity, approached through a huge finite value if needed
        try:
            r = eta(v)
        except (ValueError, OverflowError, ZeroDivisionError):
            r = math.nan
        if math.isnan(r):
            r = eta(math.copysign(1e300, v))
        return r
    try:
        return eta(v)
    except (ValueError, ZeroDivisionError):
        return float(np.real(eta(v + 1e-300)))


def transport_mixed_mgf(mapping: AccessibilityMapping, g: MixingDensity, s_grid=None,
                        tol: float = 1e-8, cfg: QuadratureConfig = DEFAULT) -> VerificationReport:
    """Check int M_Y(eta(a); xi(s)) g(a) da = int M_X(a; s) g(a) da on a grid of s.

    The target side is evaluated twice: in alpha-space, and in beta-space
    against the pushforward density.  When ``s > 0`` leaves the source strip
    somewhere on the mixing domain and the source lives on the positive
    half-line, the identity is checked for Laplace transforms instead
    (argument ``-s``, target at the continuation ``xi(-s)``).
    """
    if len(mapping.source.free) != 1:
        raise UnsupportedError(
            f"{mapping.name}: mixed-MGF transport needs a scalar free parameter; "
            "two-parameter mappings are verified through the MGF identity only")
    norm = g.integrate(lambda a: np.ones_like(a))
    if abs(norm - 1.0) > 1e-8:
        raise InputError(f"mixing density integrates to {norm:.12g}, not 1")
    src_model = MixtureModel(mapping.source.bind(g.center), g)
    if s_grid is None:
        s_grid = np.linspace(0.0, 0.9 * mapping.epsilon1((g.center,)), 20)
    s_grid = np.asarray(s_grid, dtype=float)
    rep = VerificationReport(f"{mapping.name} mixed-MGF transport",
                             f"{s_grid.size} s-point(s) in [{s_grid.min():g}, {s_grid.max():g}]; "
                             f"mixing {g.description}")
    pf = pushforward(mapping, g, rep)
    pf_norm = pf.integrate(lambda b: np.ones_like(b))
    rep.add("pushforward normalisation", abs(pf_norm - 1.0), 1e-8)
    tgt_model = MixtureModel(mapping.target.bind(pf.center), pf)
    eta = lambda a: np.array([np.real(mapping.eta((float(x),))[0]) for x in np.atleast_1d(a)])  # noqa: E731
    worst_alpha = worst_beta = 0.0
    lt_used = 0
    from .mixtures import check_mixing_strip, _kernel_integral
    for s in s_grid:
        u = float(s)
        try:
            check_mixing_strip(src_model, u)
        except DomainError:
            if u > 0 and mapping.source.family in K.LAPLACE_FAMILIES:
                u = -u
                lt_used += 1
            else:
                raise
        lhs = mixture_mgf(src_model, u, cfg)
        t = mapping.xi(u)
        t = complex(t) if np.iscomplexobj(np.asarray(t)) else float(t)
        tgt_kernel = tgt_model.kernel
        rhs_a = _kernel_integral(src_model, lambda a: K.mgf_over(tgt_kernel, t, eta(a)), cfg)
        rhs_b = mixture_mgf(tgt_model, t, cfg)
        worst_alpha = max(worst_alpha, abs(complex(rhs_a) - lhs))
        worst_beta = max(worst_beta, abs(complex(rhs_b) - lhs))
    rep.add("mixed MGF identity (alpha-space)", worst_alpha, tol)
    rep.add("mixed MGF identity (pushforward beta-space)", worst_beta, tol)
    if lt_used:
        rep.notes.append(
            f"{lt_used} s-point(s) leave the source MGF strip on the mixing domain; "
            "checked as Laplace transforms with the target at xi(-s)")
    return rep


# ---------------------------------------------------------------------------
# User mappings
# ---------------------------------------------------------------------------

_MAPPING_KEYS = {"name", "source", "target", "eta", "eta_inv", "xi", "xi_inv", "epsilon1",
                 "epsilon2", "identifiable", "description"}


def mapping_from_dict(cfg: Mapping[str, str]) -> AccessibilityMapping:
    """Build a scalar mapping from expression strings.

    Keys: ``source``/``target`` kernel templates (e.g. ``exponential:free=theta``),
    ``eta`` (in the source free parameter), ``eta_inv`` (in the target free
    parameter), ``xi`` (in ``s``), ``xi_inv`` (in ``t``), ``epsilon1`` (in the
    source free parameter) and optionally ``epsilon2``, ``name``,
    ``identifiable`` and ``description``.  Fixed parameters of either side may
    appear in any expression.
    """
    unknown = set(cfg) - _MAPPING_KEYS
    if unknown:
        raise UnknownNameError("mapping key", sorted(unknown)[0], sorted(_MAPPING_KEYS))
    for key in ("source", "target", "eta", "eta_inv", "xi", "xi_inv", "epsilon1"):
        if key not in cfg:
            raise InputError(f"mapping file is missing {key!r}")
    src = K.parse_kernel_template(cfg["source"])
    tgt = K.parse_kernel_template(cfg["target"])
    if len(src.free) != 1 or len(tgt.free) != 1:
        raise UnsupportedError("user mappings need exactly one free parameter on each side")
    a_name, b_name = src.free[0], tgt.free[0]
    fixed = {**dict(src.fixed), **dict(tgt.fixed)}
    fixed_names = tuple(fixed)
    if a_name in fixed_names or b_name in fixed_names:
        raise InputError("a free parameter of one side is fixed on the other; rename is required")

    eta_e = Expression(cfg["eta"], (a_name,) + fixed_names)
    eta_inv_e = Expression(cfg["eta_inv"], (b_name,) + fixed_names)
    # xi may not depend on the free parameters (only on s and fixed values)
    xi_e = Expression(cfg["xi"], ("s",) + fixed_names)
    xi_inv_e = Expression(cfg["xi_inv"], ("t",) + fixed_names)
    eps1_e = Expression(cfg["epsilon1"], (a_name,) + fixed_names)
    eps2_e = Expression(cfg["epsilon2"], (b_name,) + fixed_names) if "epsilon2" in cfg else None

    def real_if_possible(v):
        v = np.asarray(v)
        if np.iscomplexobj(v) and np.all(np.imag(v) == 0):
            v = np.real(v)
        return v[()] if v.ndim == 0 else v

    eta = lambda p: (float(np.real(eta_e(**{a_name: p[0]}, **fixed))),)  # noqa: E731
    eta_inv = lambda p: (float(np.real(eta_inv_e(**{b_name: p[0]}, **fixed))),)  # noqa: E731
    xi = lambda s: real_if_possible(xi_e(s=np.asarray(s), **fixed))  # noqa: E731
    xi_inv = lambda t: real_if_possible(xi_inv_e(t=np.asarray(t), **fixed))  # noqa: E731
    eps1 = lambda p: float(eps1_e(**{a_name: p[0]}, **fixed))  # noqa: E731
    if eps2_e is not None:
        eps2 = lambda p: float(eps2_e(**{b_name: p[0]}, **fixed))  # noqa: E731
    else:
        eps2 = lambda p: float(np.real(xi(eps1(eta_inv(p)))))  # noqa: E731
    ident = cfg.get("identifiable", "").strip().lower()
    verdict = {"true": True, "yes": True, "false": False, "no": False}.get(ident)
    if ident and verdict is None and ident not in ("none", "unknown"):
        raise InputError(f"identifiable must be true/false/unknown, got {ident!r}")
    return AccessibilityMapping(cfg.get("name", "user-mapping"), src, tgt, eta, eta_inv, xi, xi_inv,
                                eps1, eps2, verdict, cfg.get("description", ""), fixed)


def load_mapping_file(path) -> AccessibilityMapping:
    return mapping_from_dict(read_keyvalue(path))


def default_param_grid(mapping: AccessibilityMapping) -> list[Params]:
    """Acceptance grid for a built-in mapping (scale values 0.25..4, (a, b) sets)."""
    if mapping.name.startswith("uniform-to-defun"):
        return [(0.5, 1.0), (1.0, 4.0), (2.0, 3.0)]
    return [(v,) for v in (0.25, 0.5, 1.0, 2.0, 4.0)]


def verify_builtin_suite(tol: float = 1e-10, n: int = 50) -> dict[str, VerificationReport]:
    """Run the identity check for all built-ins over the acceptance grids.

    Reports are keyed ``name`` or ``name[kappa=..]``/``name[r=..]`` where a
    fixed parameter is swept.
    """
    out: dict[str, VerificationReport] = {}
    sweeps = {"poisson-to-normal-mv": ("kappa", (0.5, 1.0, 2.0)), "gamma-to-negbin": ("r", (1.0, 2.0, 5.0))}
    for name in mapping_names():
        key, values = sweeps.get(name, (None, (None,)))
        for v in values:
            m = get_mapping(name, **({key: v} if key else {}))
            label = f"{name}[{key}={v:g}]" if key else name
            grid = default_param_grid(m)
            out[label] = verify_definition1(
                m, grid, lambda a, m=m: np.linspace(0.0, 0.9 * m.epsilon1(a), n), tol)
    return out



__all__ = ["AccessibilityMapping", "VerificationReport", "CheckResult", "builtin_mappings",
           "get_mapping", "mapping_names", "verify_definition1", "verify_swapped",
           "verify_corollary1", "verify_corollary2", "transport_mixed_mgf", "pushforward",
           "mapping_from_dict", "load_mapping_file", "default_param_grid", "verify_builtin_suite"]

