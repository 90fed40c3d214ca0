"""Expression trees over phase-space variables.

Nodes are hash-consed: building the same structure twice returns the same
object, so equality is identity and shared subtrees are shared in memory.
That keeps repeated differentiation (Lie brackets, operator products)
from blowing up, and lets the code generator emit each distinct
subexpression once.

Two families of constructors exist.  The node classes (``Add(a, b)`` and
friends) build exactly what they are given; the ``s_*`` functions apply a
fixed list of exact rewrites first.  ``simplify`` rebuilds a tree through
the ``s_*`` functions.  Every rewrite is bit-exact wherever the original
expression is defined: constant folding performs the same IEEE operation
evaluation would, and identities like ``x*1 -> x`` never change a value.
"""

import math
import threading
import weakref

import numpy as np

from .errors import DomainError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "ln")

_table = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Expr:
    __slots__ = ("__weakref__", "_cache")
    _fields = ()

    def __new__(cls, *args):
        vals = cls._normalize(*args)
        key = (cls,) + tuple(v.hex() if isinstance(v, float) else v for v in vals)
        with _lock:
            node = _table.get(key)
            if node is None:
                node = object.__new__(cls)
                for name, v in zip(cls._fields, vals):
                    object.__setattr__(node, name, v)
                object.__setattr__(node, "_cache", {})
                _table[key] = node
        return node

    @classmethod
    def _normalize(cls, *args):
        return args

    def __setattr__(self, name, value):
        raise AttributeError("expression nodes are immutable")

    def __reduce__(self):
        return (type(self), tuple(getattr(self, f) for f in self._fields))

    def children(self):
        return ()

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"<{type(self).__name__} {to_text(self)}>"


class Const(Expr):
    __slots__ = ("value",)
    _fields = ("value",)

    @classmethod
    def _normalize(cls, value):
        return (float(value),)


class Pi(Expr):
    __slots__ = ()


class Var(Expr):
    __slots__ = ("kind", "index")
    _fields = ("kind", "index")

    @classmethod
    def _normalize(cls, kind, index):
        if kind not in ("q", "p"):
            raise ValueError(f"variable kind must be 'q' or 'p', got {kind!r}")
        index = int(index)
        if index < 1:
            raise ValueError("variable indices start at 1")
        return (kind, index)

    @property
    def name(self):
        return f"{self.kind}{self.index}"


class Neg(Expr):
    __slots__ = ("arg",)
    _fields = ("arg",)

    def children(self):
        return (self.arg,)


class BinOp(Expr):
    __slots__ = ("left", "right")
    _fields = ("left", "right")
    symbol = "?"

    def children(self):
        return (self.left, self.right)


class Add(BinOp):
    __slots__ = ()
    symbol = "+"


class Sub(BinOp):
    __slots__ = ()
    symbol = "-"


class Mul(BinOp):
    __slots__ = ()
    symbol = "*"


class Div(BinOp):
    __slots__ = ()
    symbol = "/"


class Pow(Expr):
    __slots__ = ("base", "exponent")
    _fields = ("base", "exponent")

    @classmethod
    def _normalize(cls, base, exponent):
        if isinstance(exponent, float):
            if not exponent.is_integer():
                raise ValueError("exponent must be an integer")
        return (base, int(exponent))

    def children(self):
        return (self.base,)


class Func(Expr):
    __slots__ = ("name", "arg")
    _fields = ("name", "arg")

    @classmethod
    def _normalize(cls, name, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        return (name, arg)

    def children(self):
        return (self.arg,)


ZERO = Const(0.0)
ONE = Const(1.0)
PI = Pi()


def _is_const(e, value=None):
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


# -- simplifying constructors ----------------------------------------------


def _order_key(e):
    """Deterministic total order used to sort commutative operands."""
    if isinstance(e, Const):
        return (0, e.value, "")
    if isinstance(e, Pi):
        return (1, 0, "")
    if isinstance(e, Var):
        return (2, (e.kind == "p") * 1_000_000 + e.index, "")
    return (3, 0, to_text(e))


def _sorted_pair(a, b):
    # IEEE addition and multiplication are commutative, so this is exact
    return (b, a) if _order_key(b) < _order_key(a) else (a, b)


def s_neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def s_add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(b, Neg):
        return s_sub(a, b.arg)
    if isinstance(a, Neg):
        return s_sub(b, a.arg)
    return Add(*_sorted_pair(a, b))


def s_sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return s_neg(b)
    if a is b:
        return ZERO
    if isinstance(b, Neg):
        return s_add(a, b.arg)
    return Sub(a, b)


def s_mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return s_neg(b)
    if _is_const(b, -1.0):
        return s_neg(a)
    if isinstance(a, Neg) and isinstance(b, Neg):
        return s_mul(a.arg, b.arg)
    if isinstance(a, Neg):
        return s_neg(s_mul(a.arg, b))
    if isinstance(b, Neg):
        return s_neg(s_mul(a, b.arg))
    return Mul(*_sorted_pair(a, b))


def _pow2(e):
    return isinstance(e, Const) and e.value != 0.0 and math.isfinite(e.value) and abs(math.frexp(e.value)[0]) == 0.5


def s_div(a, b):
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    # (c*x)/d -> (c/d)*x when c and d are powers of two: both sides are exact
    # rescalings of x, barring overflow or underflow
    if _pow2(b) and isinstance(a, Mul):
        if _pow2(a.left):
            return s_mul(Const(a.left.value / b.value), a.right)
        if _pow2(a.right):
            return s_mul(a.left, Const(a.right.value / b.value))
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(b, -1.0):
        return s_neg(a)
    if isinstance(a, Neg) and isinstance(b, Neg):
        return s_div(a.arg, b.arg)
    if isinstance(a, Neg):
        return s_neg(s_div(a.arg, b))
    if isinstance(b, Neg):
        return s_neg(s_div(a, b.arg))
    return Div(a, b)


def s_pow(a, k):
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return a
    if isinstance(a, Const) and (a.value != 0.0 or k > 0):
        try:
            return Const(a.value**k)
        except OverflowError:
            return Pow(a, k)
    if isinstance(a, Neg):
        inner = s_pow(a.arg, k)
        return inner if k % 2 == 0 else s_neg(inner)
    return Pow(a, k)


def s_func(name, a):
    return Func(name, a)


def simplify(e):
    """Rebuild ``e`` through the exact rewrite rules; idempotent."""
    done = e._cache.get("simp")
    if done is not None:
        return done
    for node in postorder(e):
        if "simp" in node._cache:
            continue
        if isinstance(node, (Const, Pi, Var)):
            out = node
        elif isinstance(node, Neg):
            out = s_neg(node.arg._cache["simp"])
        elif isinstance(node, BinOp):
            a = node.left._cache["simp"]
            b = node.right._cache["simp"]
            out = _S_BIN[type(node)](a, b)
        elif isinstance(node, Pow):
            out = s_pow(node.base._cache["simp"], node.exponent)
        else:
            out = s_func(node.name, node.arg._cache["simp"])
        node._cache["simp"] = out
        out._cache["simp"] = out
    return e._cache["simp"]


_S_BIN = {Add: s_add, Sub: s_sub, Mul: s_mul, Div: s_div}


# -- traversal ----------------------------------------------------------------


def postorder(*roots):
    """Distinct nodes reachable from ``roots``, children before parents."""
    seen = set()
    order = []
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in reversed(node.children()):
                if id(child) not in seen:
                    stack.append((child, False))
    return order


def free_vars(e):
    cached = e._cache.get("vars")
    if cached is None:
        cached = frozenset(n for n in postorder(e) if isinstance(n, Var))
        e._cache["vars"] = cached
    return cached


def node_count(e):
    return len(postorder(e))


# -- differentiation ----------------------------------------------------------


def diff(e, v):
    """Exact symbolic derivative of ``e`` with respect to the Var ``v``."""
    key = ("d", v)
    cached = e._cache.get(key)
    if cached is not None:
        return cached
    for node in postorder(e):
        if key in node._cache:
            continue
        node._cache[key] = _diff_node(node, v, key)
    return e._cache[key]


def _diff_node(node, v, key):
    if isinstance(node, (Const, Pi)):
        return ZERO
    if isinstance(node, Var):
        return ONE if node is v else ZERO
    if v not in free_vars(node):
        return ZERO
    if isinstance(node, Neg):
        return s_neg(node.arg._cache[key])
    if isinstance(node, (Add, Sub)):
        da = node.left._cache[key]
        db = node.right._cache[key]
        return s_add(da, db) if isinstance(node, Add) else s_sub(da, db)
    if isinstance(node, Mul):
        a, b = node.left, node.right
        return s_add(s_mul(a._cache[key], b), s_mul(a, b._cache[key]))
    if isinstance(node, Div):
        a, b = node.left, node.right
        if b._cache[key] is ZERO:
            return s_div(a._cache[key], b)
        num = s_sub(s_mul(a._cache[key], b), s_mul(a, b._cache[key]))
        return s_div(num, s_pow(b, 2))
    if isinstance(node, Pow):
        k = node.exponent
        inner = s_mul(Const(float(k)), s_pow(node.base, k - 1))
        return s_mul(inner, node.base._cache[key])
    a = node.arg
    da = a._cache[key]
    if node.name == "sin":
        outer = s_func("cos", a)
    elif node.name == "cos":
        outer = s_neg(s_func("sin", a))
    elif node.name == "exp":
        outer = node
    elif node.name == "sqrt":
        return s_div(da, s_mul(Const(2.0), node))
    else:  # ln
        return s_div(da, a)
    return s_mul(outer, da)


# -- printing -------------------------------------------------------------------


def _fmt_number(v):
    if math.copysign(1.0, v) < 0:
        return f"(-{_fmt_number(-v)})"
    if math.isinf(v) or math.isnan(v):
        raise ValueError(f"cannot print non-finite constant {v}")
    if v.is_integer() and v < 2.0**53:
        return str(int(v))
    return repr(v)


def to_text(e):
    """Canonical fully parenthesized text; re-parses to the same values."""
    cached = e._cache.get("text")
    if cached is not None:
        return cached
    for node in postorder(e):
        if "text" in node._cache:
            continue
        if isinstance(node, Const):
            s = _fmt_number(node.value)
        elif isinstance(node, Pi):
            s = "pi"
        elif isinstance(node, Var):
            s = node.name
        elif isinstance(node, Neg):
            s = f"(-{node.arg._cache['text']})"
        elif isinstance(node, BinOp):
            s = f"({node.left._cache['text']} {node.symbol} {node.right._cache['text']})"
        elif isinstance(node, Pow):
            k = node.exponent
            ks = str(k) if k >= 0 else f"(-{-k})"
            s = f"({node.base._cache['text']} ^ {ks})"
        else:
            s = f"{node.name}({node.arg._cache['text']})"
        node._cache["text"] = s
    return e._cache["text"]


# -- evaluation by code generation ---------------------------------------------


class _Signal(Exception):
    def __init__(self, index, reason):
        super().__init__(index, reason)
        self.index = index
        self.reason = reason


def _sc_div(a, b, i):
    if b == 0.0:
        raise _Signal(i, "division by zero")
    return a / b


def _sc_pow(a, k, i):
    try:
        return a**k
    except ZeroDivisionError:
        raise _Signal(i, "zero raised to a negative power") from None
    except OverflowError:
        raise _Signal(i, "overflow") from None


def _sc_exp(a, i):
    try:
        return math.exp(a)
    except OverflowError:
        raise _Signal(i, "overflow in exp") from None


def _sc_sqrt(a, i):
    if a < 0.0:
        raise _Signal(i, "sqrt of a negative value")
    return math.sqrt(a)


def _sc_ln(a, i):
    if a <= 0.0:
        raise _Signal(i, "ln of a non-positive value")
    return math.log(a)


def _np_div(a, b, i):
    if np.any(np.asarray(b) == 0.0):
        raise _Signal(i, "division by zero")
    return np.divide(a, b)


def _np_pow(a, k, i):
    a = np.asarray(a, dtype=float)
    if k < 0 and np.any(a == 0.0):
        raise _Signal(i, "zero raised to a negative power")
    with np.errstate(over="raise"):
        try:
            return np.power(a, float(k))
        except FloatingPointError:
            raise _Signal(i, "overflow") from None


def _np_exp(a, i):
    with np.errstate(over="raise"):
        try:
            return np.exp(a)
        except FloatingPointError:
            raise _Signal(i, "overflow in exp") from None


def _np_sqrt(a, i):
    if np.any(np.asarray(a) < 0.0):
        raise _Signal(i, "sqrt of a negative value")
    return np.sqrt(a)


def _np_ln(a, i):
    if np.any(np.asarray(a) <= 0.0):
        raise _Signal(i, "ln of a non-positive value")
    return np.log(a)


_HELPERS = {
    "scalar": {
        "_div": _sc_div, "_pow": _sc_pow, "_exp": _sc_exp, "_sqrt": _sc_sqrt,
        "_ln": _sc_ln, "_sin": math.sin, "_cos": math.cos, "_PI": math.pi,
        "_float": float,
    },
    "array": {
        "_div": _np_div, "_pow": _np_pow, "_exp": _np_exp, "_sqrt": _np_sqrt,
        "_ln": _np_ln, "_sin": np.sin, "_cos": np.cos, "_PI": math.pi,
        "_float": lambda x: np.asarray(x, dtype=float),
    },
}


def _literal(v):
    if math.isnan(v) or math.isinf(v):
        return f"_float({repr(str(v))})"
    text = repr(v)
    return f"({text})" if text.startswith("-") else text


def compile_exprs(exprs, mode="scalar"):
    """Compile expressions into one function ``fn(q, p) -> tuple``.

    ``mode="scalar"`` uses ``math`` on Python floats (fast for integrators);
    ``mode="array"`` uses numpy ufuncs and evaluates whole grids at once.
    Each distinct subexpression is computed once.
    """
    exprs = tuple(exprs)
    if not exprs:
        return lambda q, p: ()
    store = exprs[0]._cache
    key = ("code", mode, exprs)
    fn = store.get(key)
    if fn is not None:
        return fn

    nodes = postorder(*exprs)
    names = {}
    header = []
    lines = []
    for i, node in enumerate(nodes):
        nid = id(node)
        if isinstance(node, Const):
            names[nid] = _literal(node.value)
            continue
        if isinstance(node, Pi):
            names[nid] = "_PI"
            continue
        if isinstance(node, Var):
            name = node.name
            header.append(f"{name} = _float({node.kind}[{node.index - 1}])")
            names[nid] = name
            continue
        t = f"t{i}"
        if isinstance(node, Neg):
            rhs = f"-{names[id(node.arg)]}"
        elif isinstance(node, Div):
            rhs = f"_div({names[id(node.left)]}, {names[id(node.right)]}, {i})"
        elif isinstance(node, BinOp):
            rhs = f"{names[id(node.left)]} {node.symbol} {names[id(node.right)]}"
        elif isinstance(node, Pow):
            rhs = f"_pow({names[id(node.base)]}, {node.exponent}, {i})"
        elif node.name in ("sin", "cos"):
            rhs = f"_{node.name}({names[id(node.arg)]})"
        else:
            rhs = f"_{node.name}({names[id(node.arg)]}, {i})"
        lines.append(f"{t} = {rhs}")
        names[nid] = t

    outputs = ", ".join(names[id(e)] for e in exprs)
    body = "\n        ".join(header + lines + [f"return ({outputs},)"])
    src = (
        "def _compiled(q, p):\n"
        "    try:\n"
        f"        {body}\n"
        "    except _Signal as _e:\n"
        "        raise DomainError(_e.reason, to_text(_nodes[_e.index])) from None\n"
    )
    namespace = dict(_HELPERS[mode])
    namespace.update(_Signal=_Signal, DomainError=DomainError, to_text=to_text, _nodes=nodes)
    exec(compile(src, "<prequant-expr>", "exec"), namespace)
    fn = namespace["_compiled"]
    store[key] = fn
    return fn
