"""Command-line front end.

Every subcommand writes CSV (header row, ``%.12g`` values, newline-terminated)
except ``verify-mapping``, which writes a text report.  Exit status is 0 on
success, 1 when a verification fails or a computation does not converge, and
2 for invalid input.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from typing import Sequence

import numpy as np

from . import accessibility as A
from . import defun as D
from . import kernels as K
from . import mixtures as M
from . import transforms as T
from .config import read_keyvalue
from .errors import ConvergenceError, InputError, RangeError, UnknownNameError, UnsupportedError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class CliInputError(Exception):
    """Raised for bad command-line input; carries the offending token."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliInputError(message)


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with inclusive endpoints; count = floor((stop-start)/step) + 1."""
    parts = text.split(":")
    if len(parts) != 3:
        raise CliInputError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise CliInputError(f"grid must be numeric start:stop:step, got {text!r}") from None
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise CliInputError(f"grid values must be finite, got {text!r}")
    if not step > 0:
        raise CliInputError(f"grid step must be positive, got {parts[2]!r}")
    if stop < start:
        raise CliInputError(f"grid start must not exceed stop, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # snap to the printed precision so each CSV row reports the exact abscissa used
    return np.array([float("%.12g" % v) for v in start + step * np.arange(count)])


def format_csv(header: Sequence[str], columns: Sequence[np.ndarray]) -> str:
    cols = [np.atleast_1d(np.asarray(c)) for c in columns]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*cols):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return "%.12g" % float(v)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _need(args, name):
    v = getattr(args, name)
    if v is None:
        raise CliInputError(f"--{name.replace('_', '-')} is required for {args.command}")
    return v


def _dist(args):
    return K.parse_kernel_spec(_need(args, "dist"))


def _grid(args, default=None):
    if args.grid is None:
        if default is None:
            raise CliInputError(f"--grid is required for {args.command}")
        return parse_grid(default)
    return parse_grid(args.grid)


def cmd_pdf(args):
    d = _dist(args)
    x = _grid(args)
    return format_csv(["x", "pmf" if d.discrete else "pdf"], [x, K.pdf(d, x)]), EXIT_OK


def cmd_cdf(args):
    d = _dist(args)
    x = _grid(args)
    return format_csv(["x", "cdf"], [x, K.cdf(d, x)]), EXIT_OK


def cmd_mgf(args):
    d = _dist(args)
    s = _grid(args)
    return format_csv(["s", "mgf"], [s, K.mgf(d, s)]), EXIT_OK


def cmd_cf(args):
    d = _dist(args)
    w = _grid(args)
    v = np.atleast_1d(K.cf(d, w))
    return format_csv(["omega", "re", "im"], [w, v.real, v.imag]), EXIT_OK


def _de_from_args(args):
    if args.a is None and args.b is None:
        return None
    if args.a is None or args.b is None:
        raise CliInputError("--a and --b must be given together")
    return D.DifferentiatedErrorFunction(args.a, args.b)


def cmd_invert(args):
    cfg = T.QuadratureConfig(abs_tol=args.tol, rel_tol=args.tol)
    de = _de_from_args(args)
    if de is not None:
        cf = T.CharacteristicFunction.of(de)
        exact = lambda y: D.pdf(de, y)  # noqa: E731
    else:
        d = _dist(args)
        if d.discrete:
            raise CliInputError(f"invert needs a continuous distribution, got {d.family.value}")
        cf = T.CharacteristicFunction.of(d)
        exact = lambda y: K.pdf(d, y)  # noqa: E731
    y = _grid(args)
    res = [T.gil_pelaez_detail(cf, v, cfg) for v in y]
    f = np.array([r.value for r in res])
    ref = np.asarray(exact(y), dtype=float)
    return format_csv(["y", "f", "closed_form", "abs_diff", "clamped"],
                      [y, f, ref, np.abs(f - ref), [r.clamped for r in res]]), EXIT_OK


def _mapping(args):
    if args.mapping_file:
        return [A.load_mapping_file(args.mapping_file)]
    name = _need(args, "name")
    fixed = {}
    if args.kappa is not None:
        fixed["kappa"] = args.kappa
    if args.r is not None:
        fixed["r"] = args.r
    if name == "all":
        return A.builtin_mappings(**fixed)
    return [A.get_mapping(name, **fixed)]


def cmd_verify_mapping(args):
    tol = args.tol
    out = []
    ok = True
    for m in _mapping(args):
        if args.grid is not None:
            s = parse_grid(args.grid)
            s_grid = s
        else:
            s_grid = lambda a, m=m: np.linspace(0.0, 0.9 * m.epsilon1(a), 50)  # noqa: E731
        grid = _param_grid(args, m)
        rep = A.verify_definition1(m, grid, s_grid, tol)
        sw = A.verify_swapped(m, grid, tol)
        out.append(rep.summary())
        out.append(sw.summary())
        out.append(f"  verdict: {m.verdict}")
        ok = ok and rep.passed and sw.passed
    return "\n".join(out) + "\n", EXIT_OK if ok else EXIT_FAIL


def _param_grid(args, m):
    if args.params is None:
        return A.default_param_grid(m)
    grid = []
    for item in args.params.split(","):
        try:
            grid.append(tuple(float(v) for v in item.split(":")))
        except ValueError:
            raise CliInputError(f"bad parameter value {item!r} in --params") from None
    return grid


def _mixture(args):
    d = _dist(args)
    if len(d.free_params) != 1:
        raise CliInputError(f"mix needs exactly one free parameter, got free={'+'.join(d.free_params)}")
    dom = K.param_domain(d.family, d.free_params[0])
    g = M.parse_mixing(_need(args, "mixing"), dom)
    return M.MixtureModel(d, g)


def cmd_mix(args):
    mm = _mixture(args)
    x = _grid(args)
    cfg = T.QuadratureConfig(abs_tol=args.tol, rel_tol=args.tol)
    what = args.what
    if what == "mgf":
        return format_csv(["s", "mgf"], [x, [M.mixture_mgf(mm, float(s), cfg) for s in x]]), EXIT_OK
    if what == "cdf":
        return format_csv(["x", "cdf"], [x, M.mixture_cdf(mm, x, cfg)]), EXIT_OK
    if mm.kernel.discrete:
        if np.any(x != np.floor(x)):
            raise CliInputError("pmf grid must contain integers")
        return format_csv(["x", "pmf"], [x, M.mixture_pmf(mm, x, cfg)]), EXIT_OK
    return format_csv(["x", "pdf"], [x, M.mixture_pdf(mm, x, cfg)]), EXIT_OK


def cmd_sample(args):
    n = args.n
    if n is None or n < 1:
        raise CliInputError(f"--n must be a positive integer, got {n}")
    if args.mixing is not None:
        x = M.sample_mixture(_mixture(args), n, args.seed)
    else:
        de = _de_from_args(args)
        x = D.sample(de, n, args.seed) if de is not None else K.sample(_dist(args), n, args.seed)
    return format_csv(["x"], [x]), EXIT_OK


def _ab_sets(args):
    if args.ab:
        sets = []
        for item in args.ab.split(","):
            try:
                a, b = (float(v) for v in item.split(":"))
            except ValueError:
                raise CliInputError(f"--ab entries are a:b pairs, got {item!r}") from None
            sets.append((a, b))
        return sets
    if args.a is not None or args.b is not None:
        if args.a is None or args.b is None:
            raise CliInputError("--a and --b must be given together")
        return [(args.a, args.b)]
    # three panels: sharp peak, fixed a with growing b, fixed width shifted
    return [(0.0, 1.0), (0.0, 4.0), (1.0, 2.0), (1.0, 4.0), (1.0, 8.0), (3.0, 4.0)]


def cmd_figure1(args):
    y = _grid(args, default="-10:10:0.1")
    sets = _ab_sets(args)
    if len(sets) == 1:
        d = D.DifferentiatedErrorFunction(*sets[0])
        return format_csv(["y", "f"], [y, D.pdf(d, y)]), EXIT_OK
    cols = [[], [], [], []]
    for a, b in sets:
        d = D.DifferentiatedErrorFunction(a, b)
        cols[0].extend([a] * y.size)
        cols[1].extend([b] * y.size)
        cols[2].extend(y)
        cols[3].extend(D.pdf(d, y))
    return format_csv(["a", "b", "y", "f"], [np.array(c) for c in cols]), EXIT_OK


COMMANDS = {
    "pdf": cmd_pdf, "cdf": cmd_cdf, "mgf": cmd_mgf, "cf": cmd_cf, "invert": cmd_invert,
    "verify-mapping": cmd_verify_mapping, "mix": cmd_mix, "sample": cmd_sample,
    "figure1": cmd_figure1,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gfaccess", description="Kernel transforms, accessibility checks and mixtures.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--dist", help="kernel spec, e.g. gamma:r=2,theta=1,free=theta")
        sp.add_argument("--grid", help="start:stop:step (inclusive)")
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--n", type=int)
        sp.add_argument("--out", help="output file (default: standard output)")
        sp.add_argument("--config", help="key=value file whose entries override flags")
        sp.add_argument("--name", help="built-in mapping name, or 'all'")
        sp.add_argument("--mapping-file", help="user mapping definition (key=value)")
        sp.add_argument("--params", help="mapping parameter grid, e.g. 0.5,1,2 or 1:4,2:3")
        sp.add_argument("--kappa", type=float)
        sp.add_argument("--r", type=float)
        sp.add_argument("--mixing", help="mixing spec, e.g. gamma:r=2,theta=1")
        sp.add_argument("--what", choices=("cdf", "pmf", "pdf", "mgf"), default="cdf")
        sp.add_argument("--a", type=float)
        sp.add_argument("--b", type=float)
        sp.add_argument("--ab", help="comma-separated a:b pairs for figure1")
    return p


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if not args.config:
        return
    entries = read_keyvalue(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    actions = {a.dest: a for a in sub._actions}  # noqa: SLF001
    for key, raw in entries.items():
        dest = key.replace("-", "_")
        if dest in ("config", "help") or dest not in actions:
            raise CliInputError(f"unknown config key {key!r}")
        act = actions[dest]
        try:
            value = act.type(raw) if act.type is not None else raw
        except ValueError:
            raise CliInputError(f"config key {key!r} has invalid value {raw!r}") from None
        if act.choices is not None and value not in act.choices:
            raise CliInputError(f"config key {key!r} has invalid value {raw!r}")
        setattr(args, dest, value)


_VALUE_FLAGS = ("--grid", "--params", "--a", "--b")


def _glue_values(argv: list[str]) -> list[str]:
    # argparse reads "-10:10:0.1" as an option; bind such values to their flag
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_values(sys.argv[1:] if argv is None else list(argv)))
        if args.command is None:
            raise CliInputError("a subcommand is required: " + ", ".join(COMMANDS))
        _apply_config(parser, args)
        if not args.tol > 0:
            raise CliInputError(f"--tol must be positive, got {args.tol}")
        text, code = COMMANDS[args.command](args)
    except UnknownNameError as exc:
        print(f"error: {exc} (offending token: {exc.token})", file=stderr)
        return EXIT_INPUT
    except (CliInputError, InputError, ValueError, UnsupportedError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (ConvergenceError, RangeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_FAIL
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    raise SystemExit(main())
