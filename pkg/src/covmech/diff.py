"""Forward-mode dual numbers and finite differences.

Component closures (metrics, potentials, tensor coefficients) are written
against the math functions exported here (`sin`, `cos`, `sqrt`, ...), which
dispatch on `Dual` so the same closure serves both plain evaluation and
forward-mode differentiation.  `jacobian` is the single entry point: it tries
dual seeding and falls back to central differences when a closure is not
dual-safe (mode "auto").

Derivative arrays always carry the differentiation index FIRST:
``jacobian(f, x)[lam] == d f / d x^lam``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

EPS = float(np.finfo(float).eps)
CBRT_EPS = EPS ** (1.0 / 3.0)

MODES = ("analytic", "dual", "fd", "auto")


class Dual:
    """First-order dual number val + eps*d.  Nesting (val itself a Dual) is
    supported, which is what makes differentiating a closure that internally
    differentiates another closure work."""

    __slots__ = ("val", "eps")

    def __init__(self, val, eps=0.0):
        self.val = val
        self.eps = eps

    def __repr__(self):
        return f"Dual({self.val!r}, {self.eps!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.eps - other.eps)
        return Dual(self.val - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.eps)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.val * other.eps + self.eps * other.val)
        return Dual(self.val * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val / other.val,
                        (self.eps * other.val - self.val * other.eps)
                        / (other.val * other.val))
        return Dual(self.val / other, self.eps / other)

    def __rtruediv__(self, other):
        return Dual(other / self.val, -other * self.eps / (self.val * self.val))

    def __pow__(self, n):
        if isinstance(n, Dual):
            raise TypeError("dual exponents are not supported")
        return Dual(self.val ** n, n * self.val ** (n - 1) * self.eps)

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __pos__(self):
        return self

    # comparisons look at the value part only; keeps domain-style guards
    # inside closures working when they are hit during differentiation
    def __lt__(self, other):
        return value(self) < value(other)

    def __le__(self, other):
        return value(self) <= value(other)

    def __gt__(self, other):
        return value(self) > value(other)

    def __ge__(self, other):
        return value(self) >= value(other)

    def __abs__(self):
        return Dual(abs(self.val), self.eps if self.val >= 0 else -self.eps)

    def sin(self):
        return Dual(sin(self.val), self.eps * cos(self.val))

    def cos(self):
        return Dual(cos(self.val), -self.eps * sin(self.val))

    def tan(self):
        c = cos(self.val)
        return Dual(tan(self.val), self.eps / (c * c))

    def sqrt(self):
        root = sqrt(self.val)
        return Dual(root, self.eps / (2.0 * root))

    def exp(self):
        e = exp(self.val)
        return Dual(e, self.eps * e)

    def log(self):
        return Dual(log(self.val), self.eps / self.val)


def _dispatch(name, mathfn):
    def fn(x):
        if isinstance(x, Dual):
            return getattr(x, name)()
        return mathfn(x)

    fn.__name__ = name
    return fn


sin = _dispatch("sin", math.sin)
cos = _dispatch("cos", math.cos)
tan = _dispatch("tan", math.tan)
sqrt = _dispatch("sqrt", math.sqrt)
exp = _dispatch("exp", math.exp)
log = _dispatch("log", math.log)


def value(v):
    """Strip any level of Dual nesting down to the underlying float."""
    while isinstance(v, Dual):
        v = v.val
    return v


def _eps_part(v):
    return value(v.eps) if isinstance(v, Dual) else 0.0


def _to_float_array(y) -> np.ndarray:
    arr = np.asarray(y, dtype=object)
    flat = arr.ravel()
    out = np.fromiter((float(value(v)) for v in flat), float, count=flat.size)
    return out.reshape(arr.shape)


def dual_jacobian(f: Callable, x: np.ndarray):
    """(value, partials) of f at x by seeding one coordinate direction at a time."""
    x = np.asarray(x, dtype=float)
    d = x.size
    val = None
    cols = []
    for lam in range(d):
        seed = np.empty(d, dtype=object)
        for i in range(d):
            seed[i] = Dual(x[i], 1.0 if i == lam else 0.0)
        y = np.asarray(f(seed), dtype=object)
        flat = y.ravel()
        col = np.fromiter((float(_eps_part(v)) for v in flat), float,
                          count=flat.size).reshape(y.shape)
        cols.append(col)
        if val is None:
            val = np.fromiter((float(value(v)) for v in flat), float,
                              count=flat.size).reshape(y.shape)
    return val, np.stack(cols, axis=0)


def fd_step(xi: float) -> float:
    return CBRT_EPS * max(1.0, abs(xi))


def fd_jacobian(f: Callable, x: np.ndarray):
    """(value, partials) by central differences, step h = cbrt(eps)*max(1,|x|)."""
    x = np.asarray(x, dtype=float)
    d = x.size
    val = _to_float_array(f(x))
    cols = []
    for lam in range(d):
        h = fd_step(x[lam])
        xp = x.copy()
        xm = x.copy()
        xp[lam] += h
        xm[lam] -= h
        cols.append((_to_float_array(f(xp)) - _to_float_array(f(xm))) / (2.0 * h))
    return val, np.stack(cols, axis=0)


def jacobian(f: Callable, x: np.ndarray, mode: str = "auto",
             analytic: Callable | None = None) -> np.ndarray:
    """Partial derivatives of an array-valued closure, derivative index first."""
    if analytic is not None:
        return np.asarray(analytic(np.asarray(x, dtype=float)), dtype=float)
    if mode not in MODES:
        raise ValueError(f"unknown differentiation mode {mode!r}")
    if mode == "analytic":
        raise ValueError("mode 'analytic' requires an analytic closure")
    if mode in ("dual", "auto"):
        try:
            return dual_jacobian(f, x)[1]
        except (TypeError, AttributeError, ZeroDivisionError):
            if mode == "dual":
                raise
    return fd_jacobian(f, x)[1]


@dataclass(frozen=True)
class DifferentiationScheme:
    """How a chart differentiates its closures: analytic partials when
    supplied, dual-number forward mode for closure-based components, central
    finite differences as the fallback."""

    mode: str = "auto"

    def partials(self, f: Callable, x: np.ndarray,
                 analytic: Callable | None = None) -> np.ndarray:
        return jacobian(f, x, mode=self.mode, analytic=analytic)


def fd_gradient(f: Callable[[np.ndarray], float], v: np.ndarray) -> np.ndarray:
    """Central-difference gradient of a scalar function of a vector."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    for i in range(v.size):
        h = fd_step(v[i])
        vp = v.copy()
        vm = v.copy()
        vp[i] += h
        vm[i] -= h
        out[i] = (f(vp) - f(vm)) / (2.0 * h)
    return out
