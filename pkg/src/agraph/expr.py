"""A small arithmetic expression language evaluated over exact rationals.

Serialized descriptions cannot carry Python closures, so sweep functions,
constraint conditions and expression performance models are written as
strings in a restricted Python-like syntax::

    x * 2
    [x[0] * 2, x[1] * 2]
    256 / a == b
    prod(arch.mult.instance) if batch > 1 else 1

Supported: integer and decimal literals (decimal literals are exact), string
literals, list/tuple displays, identifiers, indexing, attribute access on
mappings (``arch.mult`` is ``arch['mult']``), ``+ - * / // % **``, unary
minus, comparisons (chained), ``and``/``or``/``not``, conditional
expressions, and the functions listed in ``FUNCTIONS``.  Division is exact;
no floating point value is ever produced.
"""

import ast
import math
from collections.abc import Mapping
from fractions import Fraction

from .errors import EvalError
from .rational import normalize, product, to_rational


def _log2(x):
    x = to_rational(x)
    if isinstance(x, int) and x > 0 and x & (x - 1) == 0:
        return x.bit_length() - 1
    raise ValueError(f"log2({x}) is not an exact integer")


def _num(f):
    def wrapped(*args):
        return to_rational(f(*args))

    return wrapped


FUNCTIONS = {
    "prod": lambda xs: product(xs),
    "sum": lambda xs: to_rational(sum(xs)),
    "min": min,
    "max": max,
    "abs": abs,
    "len": len,
    "floor": _num(math.floor),
    "ceil": _num(math.ceil),
    "log2": _log2,
}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: Fraction(a) / b,
    ast.FloorDiv: lambda a, b: a // b,
    ast.Mod: lambda a, b: a % b,
    ast.Pow: lambda a, b: a**b,
}

_CMPOPS = {
    ast.Eq: lambda a, b: a == b,
    ast.NotEq: lambda a, b: a != b,
    ast.Lt: lambda a, b: a < b,
    ast.LtE: lambda a, b: a <= b,
    ast.Gt: lambda a, b: a > b,
    ast.GtE: lambda a, b: a >= b,
    ast.In: lambda a, b: a in b,
    ast.NotIn: lambda a, b: a not in b,
}


class Expr:
    """A parsed expression.  Calling it binds names positionally or by keyword.

    >>> Expr("x * 2", params=("x",))(3)
    6
    >>> Expr("256 / a == b", params=("a", "b"))(32, 8)
    True
    """

    def __init__(self, source, params=()):
        if not isinstance(source, str):
            raise EvalError(f"expression must be a string, got {type(source).__name__}")
        self.source = source
        self.params = tuple(params)
        try:
            tree = ast.parse(source.strip(), mode="eval")
        except SyntaxError as exc:
            raise EvalError(exc.msg, source, exc.offset) from None
        self._tree = tree
        _check(tree.body, source.strip())

    def __call__(self, *args, **kwargs):
        env = dict(zip(self.params, args))
        env.update(kwargs)
        return self.evaluate(env)

    def evaluate(self, env, where=None):
        try:
            return normalize(_eval(self._tree.body, env, self.source.strip()))
        except EvalError as exc:
            if where and not exc.where:
                raise EvalError(str(exc), where=where) from None
            raise

    def names(self):
        return sorted({n.id for n in ast.walk(self._tree) if isinstance(n, ast.Name)} - set(FUNCTIONS))

    def __eq__(self, other):
        return isinstance(other, Expr) and self.source.strip() == other.source.strip()

    def __hash__(self):
        return hash(self.source.strip())

    def __repr__(self):
        return f"Expr({self.source!r})"

    def __getstate__(self):
        return {"source": self.source, "params": self.params}

    def __setstate__(self, state):
        self.__init__(state["source"], state["params"])


_ALLOWED = (
    ast.Constant, ast.Name, ast.Load, ast.BinOp, ast.UnaryOp, ast.BoolOp, ast.Compare,
    ast.Subscript, ast.Attribute, ast.List, ast.Tuple, ast.IfExp, ast.Call,
    ast.USub, ast.UAdd, ast.Not, ast.And, ast.Or, ast.Index if hasattr(ast, "Index") else ast.Load,
) + tuple(_BINOPS) + tuple(_CMPOPS)


def _check(node, src):
    for sub in ast.walk(node):
        if not isinstance(sub, _ALLOWED):
            raise EvalError(f"unsupported syntax {type(sub).__name__}", src, getattr(sub, "col_offset", None))
        if isinstance(sub, ast.Call):
            if not isinstance(sub.func, ast.Name) or sub.func.id not in FUNCTIONS:
                raise EvalError("only built-in functions may be called", src, sub.col_offset)
            if sub.keywords:
                raise EvalError("keyword arguments are not supported", src, sub.col_offset)
        if isinstance(sub, ast.Constant) and not isinstance(sub.value, (int, float, str, bool)):
            raise EvalError(f"unsupported literal {sub.value!r}", src, sub.col_offset)
        if isinstance(sub, ast.Subscript) and isinstance(sub.slice, ast.Slice):
            raise EvalError("slices are not supported", src, sub.col_offset)


def _eval(node, env, src):
    try:
        return _eval_node(node, env, src)
    except EvalError:
        raise
    except ZeroDivisionError:
        raise EvalError("division by zero", src, getattr(node, "col_offset", None)) from None
    except (TypeError, ValueError, KeyError, IndexError, AttributeError) as exc:
        raise EvalError(f"{type(exc).__name__}: {exc}", src, getattr(node, "col_offset", None)) from None


def _eval_node(node, env, src):
    if isinstance(node, ast.Constant):
        v = node.value
        if isinstance(v, float):
            # exact decimal from the literal text
            return to_rational(ast.get_source_segment(src, node) or repr(v))
        return v
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        if node.id in ("True", "False"):
            return node.id == "True"
        raise EvalError(f"unknown name {node.id!r}", src, node.col_offset)
    if isinstance(node, ast.BinOp):
        a = _eval(node.left, env, src)
        b = _eval(node.right, env, src)
        if isinstance(a, (list, tuple, str)) or isinstance(b, (list, tuple, str)):
            raise EvalError("arithmetic on non-numbers", src, node.col_offset)
        return to_rational(_BINOPS[type(node.op)](a, b))
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, env, src)
        if isinstance(node.op, ast.Not):
            return not v
        if isinstance(v, (list, tuple, str, bool)):
            raise EvalError("arithmetic on non-numbers", src, node.col_offset)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BoolOp):
        if isinstance(node.op, ast.And):
            result = True
            for value in node.values:
                result = _eval(value, env, src)
                if not result:
                    return result
            return result
        result = False
        for value in node.values:
            result = _eval(value, env, src)
            if result:
                return result
        return result
    if isinstance(node, ast.Compare):
        left = _eval(node.left, env, src)
        for op, comp in zip(node.ops, node.comparators):
            right = _eval(comp, env, src)
            if not _CMPOPS[type(op)](_cmp_value(left), _cmp_value(right)):
                return False
            left = right
        return True
    if isinstance(node, ast.IfExp):
        return _eval(node.body if _eval(node.test, env, src) else node.orelse, env, src)
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_eval(e, env, src) for e in node.elts]
    if isinstance(node, ast.Subscript):
        base = _eval(node.value, env, src)
        sl = node.slice
        if hasattr(ast, "Index") and isinstance(sl, ast.Index):  # pragma: no cover - py<3.9
            sl = sl.value
        key = _eval(sl, env, src)
        if isinstance(key, Fraction):
            raise EvalError("non-integer index", src, node.col_offset)
        return base[key]
    if isinstance(node, ast.Attribute):
        base = _eval(node.value, env, src)
        if not isinstance(base, Mapping):
            raise EvalError(f"attribute access on non-mapping ({node.attr})", src, node.col_offset)
        if node.attr not in base:
            raise EvalError(f"no key {node.attr!r}", src, node.col_offset)
        return base[node.attr]
    if isinstance(node, ast.Call):
        args = [_eval(a, env, src) for a in node.args]
        return FUNCTIONS[node.func.id](*args)
    raise EvalError(f"unsupported syntax {type(node).__name__}", src, getattr(node, "col_offset", None))


def _cmp_value(v):
    # lists and tuples compare equal when their elements do
    if isinstance(v, tuple):
        return list(v)
    return v


def as_callable(fn, params):
    """Accept an ``Expr``, an expression string, or a native callable."""
    if isinstance(fn, Expr):
        return fn
    if isinstance(fn, str):
        return Expr(fn, params)
    if callable(fn):
        return fn
    raise EvalError(f"expected an expression or callable, got {fn!r}")
