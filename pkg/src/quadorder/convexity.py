"""Divided differences, grid checks of n-convexity, and n-convex test functions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .measure import Interval, Measure, taylor_shift

DEFAULT_TOL = 1e-9


def divided_difference(points, values):
    """Divided difference ``f[x_1, ..., x_k]`` by the classical recurrence.

    Works with any numeric type supporting ``-`` and ``/`` (floats,
    ``Fraction``, ``mpmath.mpf``), so it doubles as an exact-arithmetic oracle.
    """
    xs = list(points)
    table = list(values)
    if not xs or len(xs) != len(table):
        raise ValueError("need at least one point and one value per point")
    if len(set(xs)) != len(xs):
        raise ValueError("divided difference points must be pairwise distinct")
    k = len(xs)
    for level in range(1, k):
        table = [
            (table[i + 1] - table[i]) / (xs[i + level] - xs[i]) for i in range(k - level)
        ]
    return table[0]


def window_divided_differences(grid, values, order):
    """Divided differences of ``order + 1`` consecutive grid points.

    Returns ``(dd, scale)``: ``dd[i] = f[x_i, ..., x_{i+order}]`` and ``scale[i]``
    is the same recurrence run on ``|f|`` with sums in place of differences,
    which bounds how much rounding the window can amplify.
    """
    x = np.asarray(grid, dtype=float)
    dd = np.asarray(values, dtype=float)
    scale = np.abs(dd)
    for level in range(1, order + 1):
        h = x[level:] - x[:-level]
        dd = (dd[1:] - dd[:-1]) / h
        scale = (scale[1:] + scale[:-1]) / h
    return dd, scale


def is_n_convex_on_grid(f, n: int, grid, tol: float = DEFAULT_TOL) -> bool:
    """True iff every ``(n+2)``-point consecutive divided difference is ``>= -tol * scale``.

    ``tol`` is relative to the magnitude of the terms entering each divided
    difference, so the verdict does not depend on the units of ``f``.
    """
    grid = np.asarray(grid, dtype=float)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if grid.size < n + 2:
        raise ValueError(f"grid of {grid.size} points is too small for order {n}")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    values = np.asarray(f(grid), dtype=float)
    dd, scale = window_divided_differences(grid, values, n + 1)
    return bool(np.all(dd >= -tol * scale))


@dataclass(frozen=True)
class TestFunction:
    """An analytically n-convex function.

    ``kind`` is ``"monomial"`` (params ``k``, ``sign``), ``"truncated_power"``
    (params ``n``, ``t``: ``max(x - t, 0)**n``) or ``"exponential"`` (param
    ``lam``).  ``order`` is the n for which the function is known n-convex.
    """

    __test__ = False

    kind: str
    params: tuple
    order: int

    def __post_init__(self):
        if self.kind not in ("monomial", "truncated_power", "exponential"):
            raise ValueError(f"unknown test function kind {self.kind!r}")

    @property
    def param_dict(self) -> dict:
        names = {"monomial": ("k", "sign"), "truncated_power": ("n", "t"), "exponential": ("lam",)}
        return dict(zip(names[self.kind], self.params))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "monomial":
            k, sign = self.params
            return sign * x**k
        if self.kind == "truncated_power":
            n, t = self.params
            if n == 0:
                return (x > t).astype(float)
            return np.maximum(x - t, 0.0) ** n
        (lam,) = self.params
        return np.exp(lam * x)

    def max_abs(self, interval: Interval) -> float:
        a, b = interval
        if self.kind == "monomial":
            k, _ = self.params
            return max(abs(a) ** k, abs(b) ** k) if k else 1.0
        if self.kind == "truncated_power":
            n, t = self.params
            return max(b - t, 0.0) ** n if n else float(b > t)
        (lam,) = self.params
        return math.exp(lam * b) if lam >= 0 else math.exp(lam * a)

    def integrate(self, mu: Measure) -> float:
        """``∫ f dmu``: closed form for monomials and truncated powers."""
        if self.kind == "monomial":
            k, sign = self.params
            return sign * mu.moment(k)
        if self.kind == "truncated_power":
            return _integrate_truncated_power(mu, *self.params)
        return mu.expect(self)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.param_dict, "order": self.order}

    @classmethod
    def from_dict(cls, data: dict) -> "TestFunction":
        kind, params = data["kind"], data["params"]
        order = data["order"]
        if kind == "monomial":
            return monomial(params["k"], order, params.get("sign", 1))
        if kind == "truncated_power":
            return truncated_power(params["n"], params["t"])
        return exponential(params["lam"], order)

    def describe(self) -> str:
        if self.kind == "monomial":
            k, sign = self.params
            return f"{'-' if sign < 0 else ''}x^{k}"
        if self.kind == "truncated_power":
            n, t = self.params
            return f"max(x-{t:.17g},0)^{n}"
        return f"exp({self.params[0]:.17g}x)"


def monomial(k: int, order: int, sign: int = 1) -> TestFunction:
    return TestFunction("monomial", (int(k), int(sign)), int(order))


def truncated_power(n: int, t: float) -> TestFunction:
    return TestFunction("truncated_power", (int(n), float(t)), int(n))


def exponential(lam: float, order: int) -> TestFunction:
    return TestFunction("exponential", (float(lam),), int(order))


def _integrate_truncated_power(mu: Measure, n: int, t: float) -> float:
    terms = []
    if mu.atoms:
        x = mu.atom_positions
        vals = (x > t).astype(float) if n == 0 else np.maximum(x - t, 0.0) ** n
        terms.extend(mu.atom_weights * vals)
    shift_power = np.zeros(n + 1)
    shift_power[n] = 1.0
    for piece in mu.pieces:
        c, d = piece.support
        lo = max(c, t)
        if lo >= d:
            continue
        # Substitute x = u + t, then integrate p(u + t) * u**n over u.
        shifted = taylor_shift(piece.coefficients, t)
        anti = P.polyint(P.polymul(shifted, shift_power))
        terms.append(P.polyval(d - t, anti) - P.polyval(lo - t, anti))
    return math.fsum(terms)


def monomial_exponents(n: int, interval: Interval) -> list[int]:
    """Exponents in ``n+1 .. n+5`` whose monomial is n-convex on ``interval``."""
    ks = range(n + 1, n + 6)
    if interval.a >= 0:
        return list(ks)
    return [k for k in ks if (k - n - 1) % 2 == 0]


def sample_test_functions(n: int, count: int, seed, interval: Interval) -> list[TestFunction]:
    """Deterministic (per seed) mix of monomials, truncated powers and exponentials.

    Uses numpy's PCG64 generator seeded through ``SeedSequence(seed)``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    exponents = monomial_exponents(n, interval)
    out = []
    for _ in range(count):
        kind = rng.integers(3)
        if kind == 0:
            out.append(monomial(exponents[rng.integers(len(exponents))], n))
        elif kind == 1:
            t = rng.uniform(interval.a, interval.b)
            while t == interval.a:
                t = rng.uniform(interval.a, interval.b)
            out.append(truncated_power(n, t))
        else:
            lam = 3.0 - rng.uniform(0.0, 3.0)  # in (0, 3]
            out.append(exponential(lam, n))
    return out
