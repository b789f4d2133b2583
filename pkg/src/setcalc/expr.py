"""Minimal arithmetic expressions: numbers, named variables, ``+ - * / ^``,
parentheses and a few whitelisted functions.

Parsing goes through :mod:`ast` with a node whitelist; ``^`` is read as a
power and exponents must be integer literals.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
}

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY = (ast.UAdd, ast.USub)


class ExpressionError(ValueError):
    pass


def _int_literal(node) -> bool:
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, _UNARY):
        node = node.operand
    return isinstance(node, ast.Constant) and type(node.value) is int


@dataclass(frozen=True)
class Expression:
    text: str
    variables: tuple
    _code: object = field(repr=False, compare=False)
    _tree: object = field(repr=False, compare=False)

    def __call__(self, *args, **kwargs):
        env = dict(zip(self.variables, args))
        env.update(kwargs)
        missing = [v for v in self.variables if v not in env]
        if missing:
            raise ExpressionError(f"missing values for {missing}")
        env.update(FUNCTIONS)
        return eval(self._code, {"__builtins__": {}}, env)

    @property
    def arity(self) -> int:
        """Highest index among variables named ``t1, t2, ...`` (0 if none)."""
        idx = [int(v[1:]) for v in self.variables if re.fullmatch(r"t\d+", v)]
        return max(idx, default=0)

    def render(self, rename: Mapping[str, str]) -> str:
        """Source text with variables renamed, ``**`` printed as ``^``."""
        tree = _Renamer(rename).visit(_copy(self._tree))
        return ast.unparse(tree).replace(" ** ", "^").replace("**", "^")


class _Renamer(ast.NodeTransformer):
    def __init__(self, rename):
        self.rename = rename

    def visit_Name(self, node):
        if node.id in self.rename:
            return ast.copy_location(ast.Name(id=self.rename[node.id], ctx=node.ctx), node)
        return node


def _copy(tree):
    return ast.parse(ast.unparse(tree), mode="eval")


def parse(text: str, variables: Iterable[str] | None = None) -> Expression:
    """Parse ``text``; ``variables`` restricts allowed names (default: any ``tN`` or ``x*``)."""
    src = text.replace("^", "**").replace("×", "*").replace("−", "-")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    allowed = set(variables) if variables is not None else None
    used: list[str] = []
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.expr_context, ast.operator, ast.unaryop)):
            continue
        if isinstance(node, ast.BinOp):
            if not isinstance(node.op, _BINOPS):
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
            if isinstance(node.op, ast.Pow) and not _int_literal(node.right):
                raise ExpressionError("exponents must be integer literals")
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, _UNARY):
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        elif isinstance(node, ast.Constant):
            if type(node.value) not in (int, float):
                raise ExpressionError(f"literal {node.value!r} not allowed")
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                raise ExpressionError("only exp, log, sqrt, sin, cos, abs may be called")
            if node.keywords or len(node.args) != 1:
                raise ExpressionError("functions take exactly one argument")
        elif isinstance(node, ast.Name):
            if node.id in FUNCTIONS:
                continue
            if allowed is not None and node.id not in allowed:
                raise ExpressionError(f"unknown variable {node.id!r}")
            if allowed is None and not re.fullmatch(r"t\d+|x\d*", node.id):
                raise ExpressionError(f"unknown variable {node.id!r}")
            if node.id not in used:
                used.append(node.id)
        else:
            raise ExpressionError(f"{type(node).__name__} not allowed in expressions")
    if variables is not None:
        ordered = tuple(variables)
    else:
        ordered = tuple(sorted(used, key=_var_key))
    code = compile(tree, "<expr>", "eval")
    return Expression(text, ordered, code, tree)


def _var_key(name: str):
    m = re.fullmatch(r"([a-z]+)(\d*)", name)
    return (m.group(1), int(m.group(2) or 0)) if m else (name, 0)


def phi_expression(text: str) -> Expression:
    """Parse an m-ary ``phi(t1, ..., tm)``; the arity is the highest ``t`` index."""
    expr = parse(text)
    bad = [v for v in expr.variables if not re.fullmatch(r"t\d+", v)]
    if bad:
        raise ExpressionError(f"phi may only use t1..tm, found {bad}")
    m = expr.arity
    if m < 1:
        raise ExpressionError("phi must use at least one variable t1")
    return parse(text, [f"t{i}" for i in range(1, m + 1)])
