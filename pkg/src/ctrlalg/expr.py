"""Integer index expressions and predicates used by generator families and rules.

Expressions are parsed with :mod:`ast` and restricted to integer arithmetic;
``/`` means floor division so that witnesses like ``m/2`` stay integral.
"""

from __future__ import annotations

import ast
from typing import Callable, Mapping

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a // b,
    ast.FloorDiv: lambda a, b: a // b,
    ast.Mod: lambda a, b: a % b,
}
_CMPOPS = {
    ast.Lt: lambda a, b: a < b,
    ast.LtE: lambda a, b: a <= b,
    ast.Gt: lambda a, b: a > b,
    ast.GtE: lambda a, b: a >= b,
    ast.Eq: lambda a, b: a == b,
    ast.NotEq: lambda a, b: a != b,
}


class ExprError(ValueError):
    pass


def _compile(node: ast.AST, names: tuple[str, ...]) -> Callable[[Mapping[str, int]], int]:
    if isinstance(node, ast.Expression):
        return _compile(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        v = node.value
        return lambda env: v
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise ExprError(f"unknown variable {node.id!r}")
        k = node.id
        return lambda env: env[k]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd, ast.Not)):
        f = _compile(node.operand, names)
        if isinstance(node.op, ast.USub):
            return lambda env: -f(env)
        if isinstance(node.op, ast.Not):
            return lambda env: int(not f(env))
        return f
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left, names), _compile(node.right, names)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.BoolOp):
        parts = [_compile(v, names) for v in node.values]
        if isinstance(node.op, ast.And):
            return lambda env: int(all(p(env) for p in parts))
        return lambda env: int(any(p(env) for p in parts))
    if isinstance(node, ast.Compare):
        first = _compile(node.left, names)
        rest = [(_CMPOPS[type(o)], _compile(c, names)) for o, c in zip(node.ops, node.comparators)]

        def cmp(env: Mapping[str, int]) -> int:
            a = first(env)
            for op, g in rest:
                b = g(env)
                if not op(a, b):
                    return 0
                a = b
            return 1

        return cmp
    raise ExprError(f"unsupported syntax: {ast.dump(node)}")


class Expr:
    """A compiled integer expression over named variables."""

    def __init__(self, text: str, names: tuple[str, ...] | list[str]) -> None:
        self.text = text.strip()
        self.names = tuple(names)
        src = self.text.replace("&&", " and ").replace("||", " or ")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as e:
            raise ExprError(f"cannot parse expression {text!r}: {e.msg}") from None
        self._f = _compile(tree, self.names)

    def __call__(self, *args: int) -> int:
        return self._f(dict(zip(self.names, args)))

    def __repr__(self) -> str:
        return self.text

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Expr) and (self.text, self.names) == (other.text, other.names)

    def __hash__(self) -> int:
        return hash((self.text, self.names))


TRUE = Expr("1", ())
