"""Gauss, Lobatto, Radau and 3-point Chebyshev rules on an interval.

Rules average rather than integrate: weights sum to one, so every rule is a
probability measure (see :func:`quadorder.measure.from_rule`).  Nodes come
from the Legendre Jacobi matrix (Golub-Welsch); Lobatto and Radau rules pin
their endpoints by modifying the last row of that matrix.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._tridiag import tridiagonal_eigh
from .measure import Interval

MAX_POINTS = 64
EXACTNESS_RTOL = 1e-10
# Endpoint nodes are pinned structurally; the computed eigenvalue must agree to this.
_ENDPOINT_CHECK = 1e-10


class RuleError(ValueError):
    pass


class Family(str, enum.Enum):
    GAUSS = "gauss"
    LOBATTO = "lobatto"
    RADAU_LEFT = "radau-left"
    RADAU_RIGHT = "radau-right"
    CHEBYSHEV3 = "chebyshev3"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    family: Family
    interval: Interval
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise RuleError("nodes and weights must be nonempty vectors of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise RuleError("nodes must be strictly increasing")
        if nodes[0] < self.interval.a or nodes[-1] > self.interval.b:
            raise RuleError("nodes must lie in the interval")
        if np.any(weights <= 0):
            raise RuleError("weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    def __call__(self, f) -> float:
        return apply(self, f)

    @property
    def label(self) -> str:
        if self.family is Family.CHEBYSHEV3:
            return "chebyshev3"
        return f"{self.family.value}:{len(self)}"


def _legendre_beta(k):
    # Monic Legendre recurrence p_{k+1} = x p_k - beta_k p_{k-1}.
    return k * k / (4.0 * k * k - 1.0)


def _monic_legendre(m, x):
    """Values p_0(x), ..., p_m(x) of the monic Legendre polynomials."""
    vals = [1.0, x]
    for k in range(1, m):
        vals.append(x * vals[k] - _legendre_beta(k) * vals[k - 1])
    return vals[: m + 1]


def _golub_welsch(diag, beta):
    nodes, first = tridiagonal_eigh(diag, np.sqrt(beta))
    weights = first**2
    return nodes, weights / weights.sum()


def _symmetrize(t, w):
    return 0.5 * (t - t[::-1]), 0.5 * (w + w[::-1])


def _check_points(m, lo):
    if not isinstance(m, (int, np.integer)) or not lo <= m <= MAX_POINTS:
        raise RuleError(f"number of points must be an integer in [{lo}, {MAX_POINTS}], got {m!r}")
    return int(m)


def _reference_gauss(m):
    t, w = _golub_welsch(np.zeros(m), [_legendre_beta(k) for k in range(1, m)])
    return _symmetrize(t, w)


def _reference_radau_left(m):
    diag = np.zeros(m)
    p = _monic_legendre(m - 1, -1.0)
    if m == 1:
        diag[0] = -1.0
    else:
        diag[-1] = -1.0 - _legendre_beta(m - 1) * p[m - 2] / p[m - 1]
    t, w = _golub_welsch(diag, [_legendre_beta(k) for k in range(1, m)])
    if abs(t[0] + 1.0) > _ENDPOINT_CHECK:
        raise RuleError(f"Radau construction missed the endpoint by {abs(t[0] + 1.0):.3g}")
    t[0] = -1.0
    return t, w


def _reference_lobatto(m):
    # Solve for the last recurrence pair that makes both -1 and 1 eigenvalues.
    diag = np.zeros(m)
    beta = [_legendre_beta(k) for k in range(1, m)]
    pl = _monic_legendre(m - 1, -1.0)
    pr = _monic_legendre(m - 1, 1.0)
    lhs = np.array([[pl[m - 1], pl[m - 2]], [pr[m - 1], pr[m - 2]]])
    rhs = np.array([-pl[m - 1], pr[m - 1]])
    alpha, last_beta = np.linalg.solve(lhs, rhs)
    diag[-1] = alpha
    beta[-1] = last_beta
    t, w = _golub_welsch(diag, beta)
    t, w = _symmetrize(t, w)
    if abs(t[0] + 1.0) > _ENDPOINT_CHECK:
        raise RuleError(f"Lobatto construction missed the endpoints by {abs(t[0] + 1.0):.3g}")
    t[0], t[-1] = -1.0, 1.0
    return t, w


def _to_interval(t, interval, pin_left=False, pin_right=False):
    u = 0.5 * (np.asarray(t) + 1.0)
    x = interval.a + interval.length * u
    if pin_left:
        x[0] = interval.a
    if pin_right:
        x[-1] = interval.b
    return x


def gauss(m: int, interval: Interval) -> QuadratureRule:
    m = _check_points(m, 1)
    t, w = _reference_gauss(m)
    return QuadratureRule(Family.GAUSS, interval, _to_interval(t, interval), w, 2 * m - 1)


def lobatto(m: int, interval: Interval) -> QuadratureRule:
    m = _check_points(m, 2)
    t, w = _reference_lobatto(m)
    x = _to_interval(t, interval, pin_left=True, pin_right=True)
    return QuadratureRule(Family.LOBATTO, interval, x, w, 2 * m - 3)


def radau_left(m: int, interval: Interval) -> QuadratureRule:
    m = _check_points(m, 1)
    t, w = _reference_radau_left(m)
    x = _to_interval(t, interval, pin_left=True)
    return QuadratureRule(Family.RADAU_LEFT, interval, x, w, 2 * m - 2)


def radau_right(m: int, interval: Interval) -> QuadratureRule:
    """Mirror image of :func:`radau_left` through the interval midpoint."""
    m = _check_points(m, 1)
    t, w = _reference_radau_left(m)
    x = _to_interval(-t[::-1], interval, pin_right=True)
    return QuadratureRule(Family.RADAU_RIGHT, interval, x, w[::-1], 2 * m - 2)


def chebyshev3(interval: Interval) -> QuadratureRule:
    offset = interval.length / (2.0 * math.sqrt(2.0))
    c = interval.midpoint
    return QuadratureRule(Family.CHEBYSHEV3, interval, [c - offset, c, c + offset], [1 / 3] * 3, 3)


def custom(nodes, weights, interval: Interval) -> QuadratureRule:
    """Wrap arbitrary positive weights; the exactness degree is measured."""
    w = np.asarray(weights, dtype=float)
    probe = QuadratureRule(Family.CUSTOM, interval, nodes, w, 0)
    return QuadratureRule(Family.CUSTOM, interval, probe.nodes, w, verify_exactness(probe))


_BUILDERS = {
    Family.GAUSS: gauss,
    Family.LOBATTO: lobatto,
    Family.RADAU_LEFT: radau_left,
    Family.RADAU_RIGHT: radau_right,
}


def make_rule(family, m: int | None, interval: Interval) -> QuadratureRule:
    family = Family(family)
    if family is Family.CHEBYSHEV3:
        if m not in (None, 3):
            raise RuleError("chebyshev3 has exactly 3 points")
        return chebyshev3(interval)
    if family is Family.CUSTOM:
        raise RuleError("custom rules need explicit nodes and weights")
    if m is None:
        raise RuleError(f"{family.value} needs a number of points")
    return _BUILDERS[family](m, interval)


def parse_rule(text: str, interval: Interval) -> QuadratureRule:
    """Parse inline specs such as ``gauss:3``, ``radau-left:2`` or ``chebyshev3``."""
    name, _, points = text.partition(":")
    try:
        family = Family(name.strip().lower())
    except ValueError:
        raise RuleError(f"unknown rule family {name!r}") from None
    try:
        m = int(points) if points else None
    except ValueError:
        raise RuleError(f"bad point count in {text!r}") from None
    return make_rule(family, m, interval)


def apply(rule: QuadratureRule, f) -> float:
    values = np.asarray(f(rule.nodes), dtype=float)
    if values.shape != rule.nodes.shape:
        values = np.array([float(f(x)) for x in rule.nodes])
    return float(np.dot(rule.weights, values))


def uniform_moment(interval: Interval, k: int) -> float:
    a, b = interval
    return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))


def verify_exactness(rule: QuadratureRule, rtol: float = EXACTNESS_RTOL) -> int:
    """Largest degree ``k`` such that the rule reproduces uniform moments ``0..k``.

    Returns -1 if even the mass is wrong.
    """
    top = 2 * len(rule) + 2
    for j in range(top + 1):
        exact = uniform_moment(rule.interval, j)
        got = math.fsum(rule.weights * rule.nodes**j)
        if abs(got - exact) > rtol * max(1.0, abs(exact)):
            return j - 1
    return top


def rule_to_dict(rule: QuadratureRule) -> dict:
    return {
        "family": rule.family.value,
        "exactness_degree": rule.exactness_degree,
        "interval": [rule.interval.a, rule.interval.b],
        "atoms": [{"x": float(x), "w": float(w)} for x, w in zip(rule.nodes, rule.weights)],
        "pieces": [],
    }


def rule_from_dict(data: dict) -> QuadratureRule:
    atoms = data["atoms"]
    return QuadratureRule(
        Family(data.get("family", "custom")),
        Interval(*data["interval"]),
        [a["x"] for a in atoms],
        [a["w"] for a in atoms],
        int(data["exactness_degree"]),
    )
