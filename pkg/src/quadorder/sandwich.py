"""Quadrature bounds for measures sharing the uniform moments up to degree n.

For odd n the bracketing rules are Gauss with (n+1)/2 points below and
Lobatto with (n+3)/2 points above; for even n they are the left and right
Radau rules with (n+2)/2 points.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .convexity import TestFunction, monomial, sample_test_functions
from .measure import DensityPiece, Interval, Measure, from_rule, mix, uniform
from .ordering import MOMENT_RTOL, OrderCertificate, certify_s_convex_order
from .rules import QuadratureRule, chebyshev3, gauss, lobatto, radau_left, radau_right, uniform_moment

SPOT_TOL = 1e-9
SPOT_CHECKS = 50
ORACLE_DPS = 50


class MomentHypothesisError(ValueError):
    """The measure's moments 1..n do not match the uniform ones."""

    def __init__(self, k: int, residual: float):
        super().__init__(f"moment {k} differs from the uniform moment by {residual:.3g}")
        self.k = k
        self.residual = residual


def sandwich_rules(n: int, interval: Interval) -> tuple[QuadratureRule, QuadratureRule]:
    if n < 1:
        raise ValueError("n must be at least 1")
    if n % 2:
        return gauss((n + 1) // 2, interval), lobatto((n + 3) // 2, interval)
    return radau_left((n + 2) // 2, interval), radau_right((n + 2) // 2, interval)


@dataclass(frozen=True)
class HypothesisCheck:
    ok: bool
    failing_k: int | None
    residuals: tuple[float, ...]

    def __bool__(self):
        return self.ok


def check_moment_hypothesis(mu: Measure, n: int, tol: float = MOMENT_RTOL) -> HypothesisCheck:
    """Do moments ``1..n`` of ``mu`` equal those of the uniform distribution?"""
    if n < 1:
        raise ValueError("n must be at least 1")
    residuals = []
    failing = None
    for k in range(1, n + 1):
        exact = uniform_moment(mu.interval, k)
        r = mu.moment(k) - exact
        residuals.append(r)
        if failing is None and abs(r) > tol * max(1.0, abs(exact)):
            failing = k
    return HypothesisCheck(failing is None, failing, tuple(residuals))


@dataclass(frozen=True)
class SpotCheck:
    function: TestFunction
    lower: float
    middle: float
    upper: float

    @property
    def violation(self) -> float:
        """Largest amount by which ``lower <= middle <= upper`` fails (<= 0 if it holds)."""
        return max(self.lower - self.middle, self.middle - self.upper)

    def to_dict(self) -> dict:
        return {
            "function": self.function.to_dict(),
            "lower": self.lower,
            "middle": self.middle,
            "upper": self.upper,
            "violation": self.violation,
        }


@dataclass(frozen=True)
class SandwichResult:
    n: int
    lower_rule: QuadratureRule
    upper_rule: QuadratureRule
    lower_certificate: OrderCertificate
    upper_certificate: OrderCertificate
    spot_checks: tuple[SpotCheck, ...] = field(default=())
    seed: int | None = None

    @property
    def certified(self) -> bool:
        return self.lower_certificate.certified and self.upper_certificate.certified

    def max_relative_violation(self, interval: Interval) -> float:
        return max(
            (sc.violation / sc.function.max_abs(interval) for sc in self.spot_checks),
            default=-math.inf,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "lower_rule": self.lower_rule.label,
            "upper_rule": self.upper_rule.label,
            "lower_certificate": self.lower_certificate.to_dict(),
            "upper_certificate": self.upper_certificate.to_dict(),
            "spot_checks": [sc.to_dict() for sc in self.spot_checks],
        }


def spot_check(f: TestFunction, mu: Measure, lower: QuadratureRule, upper: QuadratureRule) -> SpotCheck:
    return SpotCheck(f, f.integrate(from_rule(lower)), f.integrate(mu), f.integrate(from_rule(upper)))


def certify_sandwich(
    mu: Measure,
    n: int,
    tol: float = MOMENT_RTOL,
    seed: int = 0,
    checks: int = SPOT_CHECKS,
    extra_functions=(),
) -> SandwichResult:
    """Certify ``lower(f) <= ∫ f dmu <= upper(f)`` for all n-convex ``f``.

    Raises :class:`MomentHypothesisError` when moments ``1..n`` of ``mu``
    differ from the uniform ones; no n-convex bound can then hold.
    """
    hyp = check_moment_hypothesis(mu, n, tol)
    if not hyp:
        raise MomentHypothesisError(hyp.failing_k, hyp.residuals[hyp.failing_k - 1])
    lower, upper = sandwich_rules(n, mu.interval)
    low_cert = certify_s_convex_order(from_rule(lower), mu, n, tol)
    up_cert = certify_s_convex_order(mu, from_rule(upper), n, tol)
    functions = [*extra_functions]
    if checks:
        functions += sample_test_functions(n, checks, seed, mu.interval)
    spots = tuple(spot_check(f, mu, lower, upper) for f in functions)
    return SandwichResult(n, lower, upper, low_cert, up_cert, spots, seed)


def legendre_perturbed_density(interval: Interval, degree: int, amplitude: float) -> Measure:
    """Density ``(1 + amplitude * P_degree(t)) / (b - a)`` with ``t`` mapped to [-1, 1].

    Orthogonality keeps moments ``0..degree-1`` equal to the uniform ones.
    """
    if abs(amplitude) > 1:
        raise ValueError("|amplitude| must be at most 1 for a nonnegative density")
    leg = np.zeros(degree + 1)
    leg[degree] = amplitude
    shape = np.polynomial.Polynomial(np.polynomial.legendre.leg2poly(leg))
    a, b = interval
    t = np.polynomial.Polynomial([-(a + b) / (b - a), 2.0 / (b - a)])
    coeffs = (1.0 + shape(t)).coef / (b - a)
    # Monomial coefficients grow like binomials; re-pin the mass that rounding moved.
    coeffs[0] -= (DensityPiece(interval, tuple(coeffs)).mass - 1.0) / (b - a)
    return Measure(interval, pieces=(DensityPiece(interval, tuple(coeffs)),))


def _component_pool(n: int, interval: Interval):
    pool = [("uniform", lambda: uniform(interval))]
    for m in range(1, 9):
        if 2 * m - 1 >= n:
            pool.append((f"gauss:{m}", lambda m=m: from_rule(gauss(m, interval))))
        if m >= 2 and 2 * m - 3 >= n:
            pool.append((f"lobatto:{m}", lambda m=m: from_rule(lobatto(m, interval))))
        if 2 * m - 2 >= n:
            pool.append((f"radau-left:{m}", lambda m=m: from_rule(radau_left(m, interval))))
            pool.append((f"radau-right:{m}", lambda m=m: from_rule(radau_right(m, interval))))
    if n <= 3:
        pool.append(("chebyshev3", lambda: from_rule(chebyshev3(interval))))
    return pool


def random_moment_matched_measure(n: int, interval: Interval, seed) -> Measure:
    """Seeded convex mixture of components that all match uniform moments to degree >= n.

    Components: uniform, Gauss/Lobatto/Radau rules of sufficient exactness,
    the 3-point Chebyshev rule when ``n <= 3`` and uniform densities
    perturbed by a Legendre polynomial of degree ``n+1 .. n+3``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    pool = _component_pool(n, interval)
    count = int(rng.integers(1, 5))
    parts = []
    for _ in range(count):
        if rng.random() < 0.2:
            degree = int(rng.integers(n + 1, n + 4))
            parts.append(legendre_perturbed_density(interval, degree, rng.uniform(-0.9, 0.9)))
        else:
            parts.append(pool[int(rng.integers(len(pool)))][1]())
    raw = rng.dirichlet(np.ones(count))
    raw = np.maximum(raw, 1e-3)
    weights = raw / raw.sum()
    weights[-1] = 1.0 - math.fsum(weights[:-1])
    return mix(list(zip(weights.tolist(), parts)))


def perturb_moment(mu: Measure, k: int, weight: float = 1e-3, amplitude: float = 0.9) -> Measure:
    """Move ``weight`` of mass onto a density that breaks moment ``k`` only.

    The added component is ``legendre_perturbed_density(..., k, amplitude)``,
    so moments ``1..k-1`` keep whatever agreement with the uniform ones ``mu``
    had, while moment ``k`` shifts by ``weight * amplitude * (k!)^2 / (2k+1)!
    * (b - a)^k``.
    """
    if not 0 < weight < 1:
        raise ValueError("weight must lie in (0, 1)")
    bump = legendre_perturbed_density(mu.interval, k, amplitude)
    return mix([(1.0 - weight, mu), (weight, bump)])


def moment_shift(interval: Interval, k: int, weight: float = 1e-3, amplitude: float = 0.9) -> float:
    """Exact moment-``k`` shift produced by :func:`perturb_moment`."""
    return weight * amplitude * math.factorial(k) ** 2 / math.factorial(2 * k + 1) * interval.length**k


def necessity_witnesses(mu: Measure, n: int, tol: float = MOMENT_RTOL):
    """For a failed moment ``k <= n``, integrals of ``x**k`` and ``-x**k`` against the bounds.

    Returns ``(k, [SpotCheck(+x^k), SpotCheck(-x^k)])`` or ``None`` when the
    hypothesis holds.  Each monomial is n-convex, and exactly one of the two
    breaks a side of the sandwich.
    """
    hyp = check_moment_hypothesis(mu, n, tol)
    if hyp:
        return None
    k = hyp.failing_k
    lower, upper = sandwich_rules(n, mu.interval)
    return k, [spot_check(monomial(k, n, sign), mu, lower, upper) for sign in (1, -1)]


# Extended-precision oracle, independent of the double-precision paths above.

def oracle_integral(mu: Measure, f: TestFunction, dps: int = ORACLE_DPS):
    """``∫ f dmu`` evaluated with ``dps`` decimal digits.

    Polynomials and truncated powers are integrated from their exact
    antiderivatives; exponentials by adaptive mpmath quadrature.
    """
    if not isinstance(f, TestFunction):
        raise TypeError("oracle_integral supports TestFunction instances only")
    with mpmath.workdps(dps):
        atoms = mpmath.fsum(mpmath.mpf(w) * _mp_eval(f, mpmath.mpf(x)) for x, w in zip(mu.atom_positions, mu.atom_weights))
        total = atoms
        for piece in mu.pieces:
            c, d = (mpmath.mpf(v) for v in piece.support)
            coeffs = [mpmath.mpf(v) for v in piece.coefficients]
            total += _mp_piece_integral(f, coeffs, c, d)
        return +total


def _mp_eval(f, x):
    if f.kind == "monomial":
        k, sign = f.params
        return sign * x**k
    if f.kind == "truncated_power":
        n, t = f.params
        t = mpmath.mpf(t)
        if x <= t:
            return mpmath.mpf(0)
        return (x - t) ** n
    return mpmath.exp(mpmath.mpf(f.params[0]) * x)


def _mp_piece_integral(f, coeffs, c, d):
    if f.kind == "monomial":
        k, sign = f.params
        return sign * mpmath.fsum(
            co * (d ** (i + k + 1) - c ** (i + k + 1)) / (i + k + 1) for i, co in enumerate(coeffs)
        )
    if f.kind == "truncated_power":
        n, t = f.params
        t = mpmath.mpf(t)
        lo = max(c, t)
        if lo >= d:
            return mpmath.mpf(0)
        # x^i = sum_j C(i, j) t^(i-j) u^j with u = x - t; integrate u^(j+n).
        total = mpmath.mpf(0)
        for i, co in enumerate(coeffs):
            for j in range(i + 1):
                e = j + n + 1
                total += co * mpmath.binomial(i, j) * t ** (i - j) * ((d - t) ** e - (lo - t) ** e) / e
        return total
    lam = mpmath.mpf(f.params[0])
    return mpmath.quad(lambda x: mpmath.polyval(coeffs[::-1], x) * mpmath.exp(lam * x), [c, d])


# Corpus verification.

@dataclass(frozen=True)
class CorpusRow:
    n: int
    seed: int
    index: int
    lower_verdict: str
    upper_verdict: str
    max_violation: float


@dataclass
class CorpusReport:
    n: int
    seed: int
    count: int
    functions: int
    rows: list[CorpusRow]
    results: list[SandwichResult]

    @property
    def violations(self) -> int:
        return sum(1 for r in self.rows if r.max_violation > SPOT_TOL)

    @property
    def max_violation(self) -> float:
        return max((r.max_violation for r in self.rows), default=-math.inf)

    def to_dict(self, include_spot_checks: bool = False) -> dict:
        out = {
            "n": self.n,
            "seed": self.seed,
            "count": self.count,
            "functions": self.functions,
            "violations": self.violations,
            "max_relative_violation": self.max_violation,
            "rows": [r.__dict__ for r in self.rows],
        }
        if include_spot_checks:
            out["results"] = [r.to_dict() for r in self.results]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "seed", "index", "lower_verdict", "upper_verdict", "max_violation"])
        for r in self.rows:
            writer.writerow([r.n, r.seed, r.index, r.lower_verdict, r.upper_verdict, repr(r.max_violation)])
        return buf.getvalue()


def verify_corpus(n: int, count: int, seed: int, interval: Interval = Interval(0.0, 1.0),
                  functions: int = SPOT_CHECKS) -> CorpusReport:
    """Check the bounds on ``count`` seeded moment-matched measures.

    Measure ``i`` is drawn with seed ``(seed, n, i)`` and tested against
    ``functions`` n-convex functions drawn with seed ``(seed, n, i, 1)``.
    Violations are relative to ``max|f|`` on the interval.
    """
    rows, results = [], []
    for i in range(count):
        mu = random_moment_matched_measure(n, interval, [seed, n, i])
        res = certify_sandwich(mu, n, seed=[seed, n, i, 1], checks=functions)
        results.append(res)
        rows.append(CorpusRow(
            n, seed, i,
            res.lower_certificate.verdict.value,
            res.upper_certificate.verdict.value,
            res.max_relative_violation(interval),
        ))
    return CorpusReport(n, seed, count, functions, rows, results)
