"""CDF crossing analysis and s-convex ordering certificates.

Sign convention
---------------
``crossing_scan(mu, nu)`` studies ``D = F_nu - F_mu``.  A certificate that
``∫ f dmu <= ∫ f dnu`` for every s-convex ``f`` requires equal moments
``1..s``, exactly ``s`` sign changes of ``D`` and ``(-1)**(s+1) * D >= 0`` on
the initial segment.  For ``s = 1`` this is Ohlin's lemma (``F_mu <= F_nu``
before the single crossing).  Some printed statements of the
Denuit-Lefevre-Shaked criterion prints the opposite inequality; that
version contradicts Ohlin's lemma at ``s = 1`` and is not used here.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .convexity import TestFunction, monomial, truncated_power
from .measure import Measure, MeasureError, cdf_eval, taylor_shift

MOMENT_RTOL = 1e-10
# Monomial-basis densities of degree ~10 carry CDF rounding near 1e-11.
ZERO_TOL = 1e-10  # |F_nu - F_mu| below this counts as zero
MASS_RTOL = 1e-10
ROOT_XTOL = 1e-13
SUBGRID = 256
WITNESS_TOL = 1e-9  # a witness must beat the other side by this times max|f|
WITNESS_GRID = 257
SHARED_MOMENT_CAP = 20

CONVENTION_NOTE = (
    "FirstBelowSecond certified when moments 1..s agree, F_second - F_first "
    "changes sign exactly s times and (-1)^(s+1) (F_second - F_first) >= 0 "
    "initially (reduces to Ohlin's lemma at s=1)"
)


class Sign(str, enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"
    ZERO = "Zero"

    @classmethod
    def of(cls, s: int) -> "Sign":
        return cls.PLUS if s > 0 else cls.MINUS if s < 0 else cls.ZERO

    def flipped(self) -> "Sign":
        return {Sign.PLUS: Sign.MINUS, Sign.MINUS: Sign.PLUS, Sign.ZERO: Sign.ZERO}[self]


class Verdict(str, enum.Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


class Direction(str, enum.Enum):
    FIRST_BELOW_SECOND = "FirstBelowSecond"
    SECOND_BELOW_FIRST = "SecondBelowFirst"


class Comparability(str, enum.Enum):
    INCOMPARABLE = "IncomparableCertified"
    NECESSARY_HOLD = "NecessaryConditionsHold"
    MOMENT_MISMATCH = "MomentMismatch"


@dataclass(frozen=True)
class CrossingReport:
    crossings: tuple[float, ...]
    initial_sign: Sign
    sign_sequence: tuple[Sign, ...]

    @property
    def count(self) -> int:
        return len(self.crossings)

    @property
    def identical(self) -> bool:
        return self.initial_sign is Sign.ZERO

    def to_dict(self) -> dict:
        return {
            "crossings": [float(x) for x in self.crossings],
            "count": self.count,
            "initial_sign": self.initial_sign.value,
            "sign_sequence": [s.value for s in self.sign_sequence],
        }


@dataclass(frozen=True)
class Witness:
    """An s-convex function whose integrals violate one ordering direction."""

    function: TestFunction
    first_value: float
    second_value: float
    refutes: Direction

    @property
    def violation(self) -> float:
        d = self.first_value - self.second_value
        return d if self.refutes is Direction.FIRST_BELOW_SECOND else -d

    def to_dict(self) -> dict:
        return {
            "function": self.function.to_dict(),
            "first": self.first_value,
            "second": self.second_value,
            "refutes": self.refutes.value,
            "violation": self.violation,
        }


@dataclass(frozen=True)
class OrderCertificate:
    verdict: Verdict
    s: int
    direction: Direction
    moment_residuals: tuple[float, ...]
    crossing_report: CrossingReport
    notes: str = ""
    witnesses: tuple[Witness, ...] = field(default=())

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "s": self.s,
            "direction": self.direction.value,
            "moment_residuals": [float(r) for r in self.moment_residuals],
            "crossing_report": self.crossing_report.to_dict(),
            "witnesses": [w.to_dict() for w in self.witnesses],
            "notes": self.notes,
            "convention": CONVENTION_NOTE,
        }


def _same_interval(mu: Measure, nu: Measure):
    if mu.interval != nu.interval:
        raise MeasureError(
            f"measures live on different intervals {tuple(mu.interval)} and {tuple(nu.interval)}"
        )


def _local_difference(mu: Measure, nu: Measure, lo: float, hi: float) -> np.ndarray:
    """Coefficients of ``u -> F_nu(lo + u) - F_mu(lo + u)`` on ``[lo, hi)``.

    Assumes no atom or piece boundary strictly inside ``(lo, hi)``.
    """
    density = np.zeros(1)
    for sign, m in ((1.0, nu), (-1.0, mu)):
        for piece in m.pieces:
            c, d = piece.support
            if c <= lo and hi <= d:
                density = P.polyadd(density, sign * taylor_shift(piece.coefficients, lo))
    poly = P.polyint(density)
    poly[0] += cdf_eval(nu, lo) - cdf_eval(mu, lo)
    return poly


def _difference_pieces(mu: Measure, nu: Measure):
    pts = np.union1d(mu.breakpoints(), nu.breakpoints())
    return [(lo, hi, _local_difference(mu, nu, lo, hi)) for lo, hi in zip(pts[:-1], pts[1:])]


def _sign(v: float) -> int:
    return 0 if abs(v) <= ZERO_TOL else (1 if v > 0 else -1)


def _local_samples(coeffs, width):
    """Sample offsets in ``[0, width]``: a uniform subgrid plus real roots and the
    midpoints between them, so no sign change of the polynomial is skipped."""
    us = np.linspace(0.0, width, SUBGRID + 2)
    if coeffs.size > 1 and np.any(coeffs[1:]):
        roots = P.polyroots(P.polytrim(coeffs, 0.0))
        real = [r.real for r in np.atleast_1d(roots) if abs(r.imag) <= 1e-9 and 0.0 < r.real < width]
        if real:
            knots = np.sort(np.array([0.0, *real, width]))
            us = np.concatenate([us, real, 0.5 * (knots[1:] + knots[:-1])])
    return np.unique(us)


def crossing_scan(mu: Measure, nu: Measure) -> CrossingReport:
    """Sign alternation points of ``F_nu - F_mu``.

    Roots inside smooth pieces are found by bracketing; a sign change across
    an atom is placed at the atom; a zero plateau between opposite signs
    yields one crossing at its right end; touches without sign change are
    not crossings.
    """
    _same_interval(mu, nu)
    crossings: list[float] = []
    signs: list[int] = []
    prev_sign = 0
    prev_u = None
    prev_piece = None
    last_zero = None

    for idx, (lo, hi, coeffs) in enumerate(_difference_pieces(mu, nu)):
        us = _local_samples(coeffs, hi - lo)
        vals = P.polyval(us, coeffs)
        xs = lo + us
        xs[-1] = hi
        for u, x, v in zip(us, xs, vals):
            s = _sign(v)
            if s == 0:
                last_zero = x
                continue
            if prev_sign == 0:
                signs.append(s)
            elif s != prev_sign:
                if last_zero is not None:
                    where = last_zero
                elif prev_piece == idx and prev_u < u:
                    root = brentq(lambda t: P.polyval(t, coeffs), prev_u, u, xtol=ROOT_XTOL)
                    where = lo + root
                else:
                    where = x
                crossings.append(float(where))
                signs.append(s)
            prev_sign, prev_u, prev_piece, last_zero = s, u, idx, None

    initial = Sign.of(signs[0]) if signs else Sign.ZERO
    return CrossingReport(tuple(crossings), initial, tuple(Sign.of(s) for s in signs))


def moment_residuals(mu: Measure, nu: Measure, max_k: int) -> list[float]:
    return [mu.moment(j) - nu.moment(j) for j in range(1, max_k + 1)]


def _moment_close(m1: float, m2: float, tol: float) -> bool:
    return abs(m1 - m2) <= tol * max(1.0, abs(m1))


def shared_moment_degree(mu: Measure, nu: Measure, max_k: int, tol: float = MOMENT_RTOL) -> int:
    """Largest ``l <= max_k`` with moments ``1..l`` of ``mu`` and ``nu`` equal."""
    if max_k < 1:
        raise ValueError("max_k must be at least 1")
    for j in range(1, max_k + 1):
        if not _moment_close(mu.moment(j), nu.moment(j), tol):
            return j - 1
    return max_k


def find_witnesses(mu: Measure, nu: Measure, s: int, tol: float = WITNESS_TOL) -> list[Witness]:
    """s-convex functions violating either direction of the ordering.

    Candidates are ``±x**j`` for ``j <= s`` (both s-convex), ``x**(s+1)`` and
    the truncated powers ``max(x - t, 0)**s`` on a grid of ``t`` plus all
    atom positions.  At most one witness per direction is kept (the largest
    relative violation).
    """
    a, b = mu.interval
    candidates = [monomial(j, s, sign) for j in range(1, s + 1) for sign in (1, -1)]
    candidates.append(monomial(s + 1, s))
    ts = np.union1d(np.linspace(a, b, WITNESS_GRID)[:-1],
                    np.union1d(mu.atom_positions, nu.atom_positions))
    candidates.extend(truncated_power(s, float(t)) for t in ts if t < b)

    best: dict[Direction, tuple[float, Witness]] = {}
    for f in candidates:
        v1, v2 = f.integrate(mu), f.integrate(nu)
        scale = max(f.max_abs(mu.interval), 1e-300)
        for direction, excess in (
            (Direction.FIRST_BELOW_SECOND, v1 - v2),
            (Direction.SECOND_BELOW_FIRST, v2 - v1),
        ):
            rel = excess / scale
            if rel > tol and (direction not in best or rel > best[direction][0]):
                best[direction] = (rel, Witness(f, v1, v2, direction))
    return [best[d][1] for d in Direction if d in best]


def _required_initial(s: int) -> Sign:
    return Sign.PLUS if s % 2 == 1 else Sign.MINUS


def certify_s_convex_order(
    mu: Measure, nu: Measure, s: int, tol: float = MOMENT_RTOL
) -> OrderCertificate:
    """Decide whether ``mu`` and ``nu`` are ordered for all s-convex functions.

    ``Certified`` carries the direction established by the crossing
    criterion.  ``Refuted`` means explicit s-convex witnesses break both
    directions.  Anything else is ``Inconclusive``.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    _same_interval(mu, nu)
    for m in (mu, nu):
        if not m.is_probability(MASS_RTOL):
            raise MeasureError(f"certification needs probability measures (mass {m.total_mass!r})")
    residuals = tuple(moment_residuals(mu, nu, s))
    report = crossing_scan(mu, nu)
    moments_ok = all(_moment_close(mu.moment(j), nu.moment(j), tol) for j in range(1, s + 1))

    def cert(verdict, direction, notes, witnesses=()):
        return OrderCertificate(verdict, s, direction, residuals, report, notes, tuple(witnesses))

    if moments_ok and report.identical:
        return cert(Verdict.CERTIFIED, Direction.FIRST_BELOW_SECOND,
                    "measures coincide: ordering holds in both directions")
    if moments_ok and report.count == s:
        if report.initial_sign is _required_initial(s):
            return cert(Verdict.CERTIFIED, Direction.FIRST_BELOW_SECOND,
                        f"{s} crossings, initial sign {report.initial_sign.value}")
        return cert(Verdict.CERTIFIED, Direction.SECOND_BELOW_FIRST,
                    f"{s} crossings, initial sign {report.initial_sign.value}")

    witnesses = find_witnesses(mu, nu, s)
    refuted = {w.refutes for w in witnesses}
    if len(refuted) == 2:
        if moments_ok:
            notes = "moments 1..s agree but s-convex witnesses violate both directions"
        else:
            j = next(j for j in range(1, s + 1) if not _moment_close(mu.moment(j), nu.moment(j), tol))
            notes = f"moment {j} differs; ±x^{j} are both s-convex and violate one direction each"
        return cert(Verdict.REFUTED, Direction.FIRST_BELOW_SECOND, notes, witnesses)

    open_direction = (
        Direction.SECOND_BELOW_FIRST if Direction.FIRST_BELOW_SECOND in refuted
        else Direction.FIRST_BELOW_SECOND
    )
    reason = [] if moments_ok else ["moments 1..s differ"]
    if report.count != s:
        reason.append(f"{report.count} crossings instead of {s}")
    elif report.initial_sign is Sign.ZERO:
        reason.append("no initial sign")
    return cert(Verdict.INCONCLUSIVE, open_direction,
                "; ".join(reason) or "criterion not met", witnesses)


@dataclass(frozen=True)
class ComparabilityResult:
    verdict: Comparability
    n: int
    shared_moments: int
    failing_moment: int | None = None
    witnesses: tuple[Witness, ...] = ()

    def describe(self) -> str:
        if self.verdict is Comparability.INCOMPARABLE:
            return f"incomparable (shared moments: {self.shared_moments})"
        if self.verdict is Comparability.MOMENT_MISMATCH:
            return f"moment mismatch at j={self.failing_moment} (±x^{self.failing_moment} witnesses)"
        return f"necessary conditions hold (shared moments: {self.shared_moments})"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "n": self.n,
            "shared_moments": self.shared_moments,
            "failing_moment": self.failing_moment,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "summary": self.describe(),
        }


def incomparability_check(mu: Measure, nu: Measure, n: int, tol: float = MOMENT_RTOL) -> ComparabilityResult:
    """Moment-based necessary conditions for an n-convex ordering.

    An ordering for all n-convex functions forces moments ``1..n`` to agree
    and moment ``n+1`` to differ.  Equal moments up to ``n+1`` between
    distinct measures therefore rule out both directions.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _same_interval(mu, nu)
    shared = shared_moment_degree(mu, nu, n + 1, tol)
    if shared < n:
        j = shared + 1
        witnesses = []
        for sign in (1, -1):
            f = monomial(j, n, sign)
            v1, v2 = f.integrate(mu), f.integrate(nu)
            direction = Direction.FIRST_BELOW_SECOND if v1 > v2 else Direction.SECOND_BELOW_FIRST
            witnesses.append(Witness(f, v1, v2, direction))
        return ComparabilityResult(Comparability.MOMENT_MISMATCH, n, shared, j, tuple(witnesses))
    if shared >= n + 1 and not crossing_scan(mu, nu).identical:
        shared = shared_moment_degree(mu, nu, max(n + 1, SHARED_MOMENT_CAP), tol)
        return ComparabilityResult(Comparability.INCOMPARABLE, n, shared)
    return ComparabilityResult(Comparability.NECESSARY_HOLD, n, shared)
