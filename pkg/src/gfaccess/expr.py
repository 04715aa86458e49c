"""A tiny arithmetic expression language for user-supplied maps and densities.

Grammar: numbers, variables, ``+ - * / ^`` (``**`` also accepted), unary
minus, parentheses, and the functions ``exp ln log sqrt cosh acosh pow``.
Constants ``pi`` and ``e`` are predefined.  Expressions are compiled once to
a numpy-vectorised callable; square roots, logarithms and ``acosh`` move to
the complex plane when a real argument leaves their real domain, which the
accessibility verifier relies on when it continues a map to negative
arguments.
"""

from __future__ import annotations

import ast
import math
from typing import Callable

import numpy as np

from .errors import InputError, UnknownNameError


def _needs_complex(x, bad) -> bool:
    return np.iscomplexobj(x) or bool(np.any(bad(np.asarray(x))))


def _sqrt(x):
    x = np.asarray(x)
    if _needs_complex(x, lambda v: v < 0):
        return np.sqrt(x.astype(complex))
    return np.sqrt(x)


def _ln(x):
    x = np.asarray(x)
    if _needs_complex(x, lambda v: v < 0):
        return np.log(x.astype(complex))
    return np.log(x)


def _acosh(x):
    x = np.asarray(x)
    if _needs_complex(x, lambda v: v < 1):
        return np.arccosh(x.astype(complex))
    return np.arccosh(x)


def _pow(x, y):
    x = np.asarray(x)
    if not np.iscomplexobj(x) and np.any(x < 0) and not float(np.asarray(y)).is_integer():
        return np.power(x.astype(complex), y)
    return np.power(x, y)


FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "ln": _ln,
    "log": _ln,
    "sqrt": _sqrt,
    "cosh": np.cosh,
    "acosh": _acosh,
    "pow": _pow,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: _pow,
}


class Expression:
    """A compiled expression over a fixed set of variable names."""

    def __init__(self, text: str, variables=()):
        self.text = text.strip()
        if not self.text:
            raise InputError("empty expression")
        source = self.text.replace("^", "**")
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise InputError(f"cannot parse expression {text!r}: {exc.msg}") from None
        self.variables = tuple(variables)
        self.names: set[str] = set()
        self._fn = self._compile(tree.body)

    def _compile(self, node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            v = float(node.value)
            return lambda env: v
        if isinstance(node, ast.Name):
            name = node.id
            if name in CONSTANTS:
                v = CONSTANTS[name]
                return lambda env: v
            if self.variables and name not in self.variables:
                raise UnknownNameError("variable", name, self.variables)
            self.names.add(name)
            return lambda env: env[name]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = self._compile(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda env: np.negative(inner(env))
            return inner
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            left = self._compile(node.left)
            right = self._compile(node.right)
            return lambda env: op(left(env), right(env))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            fname = node.func.id
            if fname not in FUNCTIONS:
                raise UnknownNameError("function", fname, FUNCTIONS)
            if node.keywords:
                raise InputError(f"keyword arguments not allowed in {self.text!r}")
            want = 2 if fname == "pow" else 1
            if len(node.args) != want:
                raise InputError(f"{fname}() takes {want} argument(s) in {self.text!r}")
            fn = FUNCTIONS[fname]
            args = [self._compile(a) for a in node.args]
            return lambda env: fn(*(a(env) for a in args))
        raise InputError(f"unsupported syntax in expression {self.text!r}")

    def __call__(self, **values):
        missing = self.names - values.keys()
        if missing:
            raise InputError(f"expression {self.text!r} needs values for {sorted(missing)}")
        with np.errstate(all="ignore"):
            out = self._fn(values)
        out = np.asarray(out)
        return out[()] if out.ndim == 0 else out

    def __repr__(self):
        return f"Expression({self.text!r})"
