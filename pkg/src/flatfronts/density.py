"""Scalar functions of t with derivatives, and the whitelisted expression language.

Accepted expressions are built from the variable ``t``, numeric literals,
``+ - *``, ``**`` with a non-negative integer literal exponent, and
``sin(k*t)`` / ``cos(k*t)`` for integer literals k. Anything else is
rejected. Parsing goes through :mod:`ast`; evaluation carries (value,
derivative) pairs.
"""

import ast

import numpy as np


class Density:
    """A smooth function a(t) with its first derivative."""

    def __init__(self, func, dfunc, label="density"):
        self._func = func
        self._dfunc = dfunc
        self.label = label

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self._func(t), dtype=float), t.shape).copy()

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self._dfunc(t), dtype=float), t.shape).copy()

    def __repr__(self):
        return f"Density({self.label})"

    @classmethod
    def constant(cls, c):
        c = float(c)
        return cls(lambda t: np.full_like(t, c), lambda t: np.zeros_like(t), label=repr(c))

    @classmethod
    def trig(cls, c0=0.0, cos=(), sin=()):
        """c0 + sum_k cos[k-1] cos(k t) + sin[k-1] sin(k t)."""
        cos = np.asarray(cos, dtype=float)
        sin = np.asarray(sin, dtype=float)

        def f(t):
            out = np.full_like(t, float(c0))
            for k, c in enumerate(cos, 1):
                out = out + c * np.cos(k * t)
            for k, s in enumerate(sin, 1):
                out = out + s * np.sin(k * t)
            return out

        def df(t):
            out = np.zeros_like(t)
            for k, c in enumerate(cos, 1):
                out = out - k * c * np.sin(k * t)
            for k, s in enumerate(sin, 1):
                out = out + k * s * np.cos(k * t)
            return out

        return cls(f, df, label=trig_expression(c0, cos, sin))

    @classmethod
    def from_expression(cls, text):
        tree = parse_expression(text)
        return cls(lambda t: _eval(tree, t)[0], lambda t: _eval(tree, t)[1], label=text)


class ExpressionError(ValueError):
    pass


def trig_expression(c0, cos, sin):
    """Whitelisted expression string for a trigonometric polynomial."""
    terms = [repr(float(c0))]
    for k, c in enumerate(cos, 1):
        if c:
            terms.append(f"{float(c)!r}*cos({k}*t)")
    for k, s in enumerate(sin, 1):
        if s:
            terms.append(f"{float(s)!r}*sin({k}*t)")
    return " + ".join(terms)


def parse_expression(text):
    try:
        tree = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    _validate(tree)
    return tree


def _int_literal(node):
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        inner = _int_literal(node.operand)
        return None if inner is None else -inner
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return node.value
    return None


def _trig_multiple(node):
    """Integer k for an argument of the form t, k*t or t*k."""
    if isinstance(node, ast.Name) and node.id == "t":
        return 1
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        for a, b in ((node.left, node.right), (node.right, node.left)):
            k = _int_literal(a)
            if k is not None and isinstance(b, ast.Name) and b.id == "t":
                return k
    return None


def _validate(node):
    if isinstance(node, ast.Constant):
        if type(node.value) not in (int, float):
            raise ExpressionError(f"literal {node.value!r} is not a number")
    elif isinstance(node, ast.Name):
        if node.id != "t":
            raise ExpressionError(f"unknown name {node.id!r}; only t is allowed")
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.UAdd, ast.USub)):
            raise ExpressionError("only unary + and - are allowed")
        _validate(node.operand)
    elif isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            k = _int_literal(node.right)
            if k is None or k < 0:
                raise ExpressionError("exponents must be non-negative integer literals")
            _validate(node.left)
        elif isinstance(node.op, (ast.Add, ast.Sub, ast.Mult)):
            _validate(node.left)
            _validate(node.right)
        else:
            raise ExpressionError(f"operator {type(node.op).__name__} is not allowed")
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in ("sin", "cos")):
            raise ExpressionError("only sin and cos may be called")
        if node.keywords or len(node.args) != 1 or _trig_multiple(node.args[0]) is None:
            raise ExpressionError("sin/cos take a single argument of the form k*t")
    else:
        raise ExpressionError(f"{type(node).__name__} is not allowed in expressions")


def _eval(node, t):
    if isinstance(node, ast.Constant):
        return np.full_like(t, float(node.value)), np.zeros_like(t)
    if isinstance(node, ast.Name):
        return t, np.ones_like(t)
    if isinstance(node, ast.UnaryOp):
        v, d = _eval(node.operand, t)
        return (-v, -d) if isinstance(node.op, ast.USub) else (v, d)
    if isinstance(node, ast.Call):
        k = _trig_multiple(node.args[0])
        if node.func.id == "sin":
            return np.sin(k * t), k * np.cos(k * t)
        return np.cos(k * t), -k * np.sin(k * t)
    if isinstance(node.op, ast.Pow):
        v, d = _eval(node.left, t)
        k = _int_literal(node.right)
        if k == 0:
            return np.ones_like(t), np.zeros_like(t)
        return v**k, k * v ** (k - 1) * d
    lv, ld = _eval(node.left, t)
    rv, rd = _eval(node.right, t)
    if isinstance(node.op, ast.Add):
        return lv + rv, ld + rd
    if isinstance(node.op, ast.Sub):
        return lv - rv, ld - rd
    return lv * rv, ld * rv + lv * rd
