"""Whitelisted arithmetic expressions in one variable, compiled to numpy-aware
callables. Used for scalar observables, parametric cocycle entries and
Fekete test sequences given in config files."""

from __future__ import annotations

import ast
import math

import numpy as np

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "floor": np.floor, "tanh": np.tanh,
    "cosh": np.cosh, "sinh": np.sinh, "log2": np.log2,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
    ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub,
    ast.UAdd, ast.Mod,
)


class Expression:
    """``Expression("2**k + k", var="k")(np.arange(5))``"""

    def __init__(self, text: str, var: str = "x"):
        self.text = str(text)
        self.var = var
        try:
            tree = ast.parse(self.text, mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse expression {self.text!r}: {exc.msg}") from None
        for node in ast.walk(tree):
            if not isinstance(node, _NODES):
                raise ValueError(f"disallowed construct {type(node).__name__} in {self.text!r}")
            if isinstance(node, ast.Name) and node.id not in _FUNCS and node.id not in _CONSTS and node.id != var:
                raise ValueError(f"unknown name {node.id!r} in {self.text!r}")
            if isinstance(node, ast.Call) and not (
                isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords
            ):
                raise ValueError(f"only calls to {sorted(_FUNCS)} are allowed")
            if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
                raise ValueError(f"non-numeric constant in {self.text!r}")
        self._code = compile(tree, f"<expr {self.text}>", "eval")
        self.depends_on_var = any(isinstance(n, ast.Name) and n.id == var for n in ast.walk(tree))

    def __call__(self, value):
        env = {"__builtins__": {}, **_FUNCS, **_CONSTS, self.var: value}
        out = eval(self._code, env)
        if np.ndim(value) and not np.ndim(out):
            out = np.full(np.shape(value), out, dtype=float)
        return out

    def __repr__(self):
        return f"Expression({self.text!r})"
