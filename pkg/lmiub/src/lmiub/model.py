"""Reader for the JSON model interchange format.

A model file declares matrix entries as expression strings in the scalar
parameters r1..rm, for example {"m": 1, "A": [["-1", "r1"]], ...} together
with "range" and "rate" bounds (lists of [lo, hi] per parameter).
Expressions support + - * / ^, unary minus, parentheses and the functions
sin, cos, sqrt, exp, abs.  They are compiled through the ast module with a
node whitelist; nothing outside that grammar evaluates.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass

import numpy as np

_FUNCTIONS = {"sin": math.sin, "cos": math.cos, "sqrt": math.sqrt,
              "exp": math.exp, "abs": abs}

_ALLOWED = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.USub, ast.UAdd, ast.Add,
    ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Constant, ast.Name, ast.Call,
    ast.Load,
)


def _compile_entry(text, m: int):
    if isinstance(text, (int, float)):
        value = float(text)
        return lambda rho: value
    tree = ast.parse(str(text).replace("^", "**"), mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ValueError(f"unsupported syntax {type(node).__name__!r} in {text!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
                raise ValueError(f"unknown function in {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ValueError(f"non-numeric constant in {text!r}")
        if isinstance(node, ast.Name) and node.id not in _FUNCTIONS:
            if not (node.id.startswith("r") and node.id[1:].isdigit()
                    and 1 <= int(node.id[1:]) <= m):
                raise ValueError(f"unknown variable {node.id!r} in {text!r}")
    code = compile(tree, "<entry>", "eval")

    def fn(rho):
        env = {f"r{i + 1}": float(rho[i]) for i in range(m)}
        env.update(_FUNCTIONS)
        return float(eval(code, {"__builtins__": {}}, env))

    return fn


def _matrix_fn(entries, m):
    rows = [[_compile_entry(e, m) for e in row] for row in entries]

    def fn(rho):
        return np.array([[e(rho) for e in row] for row in rows])

    return fn


@dataclass(frozen=True)
class Model:
    m: int
    n: int
    p: int
    q: int
    A: object
    B: object
    C: object
    D: object
    range_lo: np.ndarray
    range_hi: np.ndarray
    rate_lo: np.ndarray
    rate_hi: np.ndarray
    name: str = ""


def model_from_dict(data: dict) -> Model:
    m = int(data["m"])
    A = _matrix_fn(data["A"], m)
    B = _matrix_fn(data["B"], m)
    C = _matrix_fn(data["C"], m)
    D = _matrix_fn(data["D"], m)
    rb = np.asarray(data["range"], float).reshape(m, 2)
    mb = np.asarray(data["rate"], float).reshape(m, 2)
    n = len(data["A"])
    p = len(data["B"][0])
    q = len(data["C"])
    return Model(m=m, n=n, p=p, q=q, A=A, B=B, C=C, D=D,
                 range_lo=rb[:, 0], range_hi=rb[:, 1],
                 rate_lo=mb[:, 0], rate_hi=mb[:, 1],
                 name=data.get("name", ""))


def load_model(path: str) -> Model:
    with open(path) as f:
        data = json.load(f)
    if isinstance(data.get("model"), dict):
        data = data["model"]  # accept a full run config too
    return model_from_dict(data)
