"""Small expression language for guards, rewrites and predicate formulas.

Expressions are written in Python syntax and parsed with :mod:`ast`, but only
a whitelisted subset is accepted:

* boolean: ``and``, ``or``, ``not``, ``true``/``false``, comparisons
  ``==  !=  <  <=  >  >=`` (chains allowed; ``≠ ≤ ≥`` are accepted too);
* arithmetic: ``+``, ``-``, ``*``, unary ``-``, parentheses;
* names: state variables, plus ``action`` inside guards;
* literals: numbers (read exactly as decimals) and quoted action ids.

Numbers are evaluated with :class:`decimal.Decimal`, so ``M - 0.2 * S``
is exact.
"""

from __future__ import annotations

import ast
import decimal
import operator
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Collection, Mapping, Optional

from normalign.errors import ExpressionError, SchemaMismatch

_CONTEXT = decimal.Context(prec=50, traps=[decimal.InvalidOperation, decimal.Overflow])

_UNICODE = {"≠": "!=", "≤": "<=", "≥": ">=", "∧": " and ", "∨": " or ", "¬": " not "}

_COMPARE = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}

_ARITH = {ast.Add: "add", ast.Sub: "subtract", ast.Mult: "multiply"}

_BOOL_NAMES = {"true": True, "false": False}


def _parse(text: str) -> tuple:
    if not isinstance(text, str):
        if isinstance(text, bool):
            text = "true" if text else "false"
        elif isinstance(text, (int, Decimal)):
            text = str(text)
        else:
            raise ExpressionError(f"expression must be a string, got {text!r}")
    source = text
    for sym, repl in _UNICODE.items():
        source = source.replace(sym, repl)
    source = source.strip()
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    return source, tree.body


@dataclass(frozen=True)
class Expr:
    """A parsed expression plus the names and string literals it mentions."""

    text: str
    names: frozenset
    literals: frozenset
    fn: Callable

    def __call__(self, env: Mapping):
        return self.fn(env)

    def __str__(self):
        return self.text


class _Compiler:
    def __init__(self, source: str, allow_bool: bool, allow_arith: bool):
        self.source = source
        self.allow_bool = allow_bool
        self.allow_arith = allow_arith
        self.names: set = set()
        self.literals: set = set()

    def fail(self, node, what="unsupported syntax"):
        segment = ast.get_source_segment(self.source, node) or type(node).__name__
        raise ExpressionError(f"{what}: {segment!r} in {self.source!r}")

    def compile(self, node) -> Callable:
        if isinstance(node, ast.Constant):
            return self.constant(node)
        if isinstance(node, ast.Name):
            if node.id in _BOOL_NAMES:
                value = _BOOL_NAMES[node.id]
                return lambda env: value
            name = node.id
            self.names.add(name)

            def lookup(env):
                try:
                    return env[name]
                except KeyError:
                    raise SchemaMismatch(f"unknown variable {name!r}") from None
            return lookup
        if isinstance(node, ast.BoolOp) and self.allow_bool:
            parts = [self.compile(v) for v in node.values]
            if isinstance(node.op, ast.And):
                return lambda env: all(_truth(p(env)) for p in parts)
            return lambda env: any(_truth(p(env)) for p in parts)
        if isinstance(node, ast.UnaryOp):
            inner = self.compile(node.operand)
            if isinstance(node.op, ast.Not) and self.allow_bool:
                return lambda env: not _truth(inner(env))
            if isinstance(node.op, ast.USub) and self.allow_arith:
                return lambda env: _CONTEXT.minus(_number(inner(env)))
            if isinstance(node.op, ast.UAdd) and self.allow_arith:
                return lambda env: _number(inner(env))
            self.fail(node)
        if isinstance(node, ast.BinOp) and self.allow_arith:
            op = _ARITH.get(type(node.op))
            if op is None:
                self.fail(node, "only +, - and * are supported")
            left, right = self.compile(node.left), self.compile(node.right)
            method = getattr(_CONTEXT, op)
            return lambda env: method(_number(left(env)), _number(right(env)))
        if isinstance(node, ast.Compare) and self.allow_bool:
            operands = [self.compile(node.left)] + [self.compile(c) for c in node.comparators]
            ops = []
            source = self.source
            for op in node.ops:
                fn = _COMPARE.get(type(op))
                if fn is None:
                    self.fail(node, "unsupported comparison")
                ops.append(fn)

            def compare(env):
                values = [_comparable(o(env)) for o in operands]
                try:
                    return all(fn(a, b) for fn, a, b in zip(ops, values, values[1:]))
                except TypeError:
                    raise ExpressionError(f"cannot compare {values!r} in {source!r}") from None
            return compare
        self.fail(node)

    def constant(self, node) -> Callable:
        value = node.value
        if isinstance(value, bool):
            return lambda env: value
        if isinstance(value, (int, float)):
            text = ast.get_source_segment(self.source, node) or repr(value)
            number = Decimal(text.replace("_", ""))
            return lambda env: number
        if isinstance(value, str) and self.allow_bool:
            self.literals.add(value)
            return lambda env: value
        self.fail(node, "unsupported literal")


def _truth(value) -> bool:
    if not isinstance(value, bool):
        raise ExpressionError(f"expected a boolean, got {value!r}")
    return value


def _number(value) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise ExpressionError(f"expected a number, got {value!r}")
    return Decimal(value)


def _comparable(value):
    if isinstance(value, int) and not isinstance(value, bool):
        return Decimal(value)
    return value


def compile_expr(text: str, *, kind: str = "guard") -> Expr:
    """Parse ``text`` as a ``guard``/``formula`` (boolean) or ``arith`` expression."""
    source, node = _parse(text)
    if kind in ("guard", "formula"):
        comp = _Compiler(source, allow_bool=True, allow_arith=True)
    elif kind == "arith":
        comp = _Compiler(source, allow_bool=False, allow_arith=True)
    else:
        raise ValueError(f"unknown expression kind {kind!r}")
    fn = comp.compile(node)
    return Expr(text if isinstance(text, str) else source, frozenset(comp.names),
                frozenset(comp.literals), fn)


def bind(expr: Expr, variables: Collection[str], actions: Optional[Collection[str]] = None,
         where: str = "") -> None:
    """Check that ``expr`` only mentions known names.

    ``actions`` is given for guards, where ``action`` and quoted action ids
    are legal; ``None`` means neither may appear.
    """
    allowed = set(variables)
    if actions is not None:
        allowed.add("action")
    unknown = sorted(expr.names - allowed)
    prefix = f"{where}: " if where else ""
    if unknown:
        raise SchemaMismatch(f"{prefix}{str(expr)!r} references unknown name(s) {unknown}")
    if expr.literals:
        bad = sorted(expr.literals - set(actions or ()))
        if bad:
            raise SchemaMismatch(f"{prefix}{str(expr)!r} references undeclared action(s) {bad}")
