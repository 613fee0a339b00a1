"""Probability measures on a closed interval.

A :class:`Measure` is a finite set of point atoms plus density pieces, each
piece a polynomial (ascending coefficients in ``x``) on a subinterval.  That
carrier keeps moments and CDFs in closed form, which the crossing analysis in
:mod:`quadorder.ordering` relies on.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

MASS_TOL = 1e-12
DENSITY_TOL = -1e-12
DENSITY_GRID = 512


class MeasureError(ValueError):
    """Raised for malformed measures or incompatible measure operations."""


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise MeasureError(f"invalid interval [{self.a}, {self.b}]: need finite a < b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, x: float) -> bool:
        return self.a <= x <= self.b

    def __iter__(self):
        yield self.a
        yield self.b


def parse_interval(text: str) -> Interval:
    """Parse ``"a,b"`` into an :class:`Interval`."""
    parts = text.split(",")
    if len(parts) != 2:
        raise MeasureError(f"interval must look like 'a,b', got {text!r}")
    try:
        return Interval(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise MeasureError(f"interval must look like 'a,b', got {text!r}") from exc


@dataclass(frozen=True)
class Atom:
    position: float
    weight: float


@dataclass(frozen=True)
class DensityPiece:
    support: Interval
    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            coeffs = (0.0,)
        object.__setattr__(self, "coefficients", coeffs)

    @cached_property
    def local_antiderivative(self) -> np.ndarray:
        """Coefficients of ``u -> ∫_c^{c+u} p``, with ``c`` the left end of the support."""
        return P.polyint(taylor_shift(self.coefficients, self.support.a))

    @cached_property
    def mass(self) -> float:
        return float(P.polyval(self.support.length, self.local_antiderivative))

    def check_nonnegative(self):
        c, d = self.support
        xs = np.linspace(c, d, DENSITY_GRID)
        coeffs = np.asarray(self.coefficients)
        vals = P.polyval(xs, coeffs)
        # Relative to the summed term sizes: monomial coefficients far from 0 cancel heavily.
        scale = np.maximum(1.0, P.polyval(np.abs(xs), np.abs(coeffs)))
        bad = vals < DENSITY_TOL * scale
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise MeasureError(
                f"density on [{c}, {d}] is negative ({vals[i]:.3g} at x={xs[i]:.17g})"
            )


def taylor_shift(coeffs, t) -> np.ndarray:
    """Coefficients of ``u -> p(u + t)`` for ``p`` given by ascending ``coeffs``."""
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.zeros_like(coeffs)
    for i, c in enumerate(coeffs):
        if c:
            out[: i + 1] += c * np.array([math.comb(i, j) * t ** (i - j) for j in range(i + 1)])
    return out


def _canonical_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    merged: dict[float, float] = {}
    for atom in atoms:
        x, w = float(atom.position), float(atom.weight)
        if not (w > 0 and math.isfinite(w)):
            raise MeasureError(f"atom weight must be positive, got {w} at x={x}")
        merged[x] = merged.get(x, 0.0) + w
    return tuple(Atom(x, merged[x]) for x in sorted(merged))


@dataclass(frozen=True)
class Measure:
    """Finite atoms plus piecewise-polynomial density on ``interval``.

    Atoms at identical positions are merged; pieces are sorted and must have
    disjoint interiors and a nonnegative density.
    """

    interval: Interval
    atoms: tuple[Atom, ...] = ()
    pieces: tuple[DensityPiece, ...] = ()

    def __post_init__(self):
        atoms = _canonical_atoms(self.atoms)
        for atom in atoms:
            if not self.interval.contains(atom.position):
                raise MeasureError(f"atom at {atom.position} lies outside {tuple(self.interval)}")
        pieces = tuple(sorted(self.pieces, key=lambda p: p.support.a))
        for piece in pieces:
            c, d = piece.support
            if c < self.interval.a or d > self.interval.b:
                raise MeasureError(f"piece support [{c}, {d}] leaves {tuple(self.interval)}")
            piece.check_nonnegative()
        for left, right in zip(pieces, pieces[1:]):
            if right.support.a < left.support.b:
                raise MeasureError("density pieces overlap")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)

    @cached_property
    def atom_positions(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=float)

    @cached_property
    def atom_weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=float)

    @cached_property
    def total_mass(self) -> float:
        return float(math.fsum([*self.atom_weights, *(p.mass for p in self.pieces)]))

    def is_probability(self, tol: float = MASS_TOL) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def moment(self, k: int) -> float:
        return moment(self, k)

    def cdf(self, x):
        return cdf_eval(self, x)

    def expect(self, f) -> float:
        """Integrate a vectorized callable: exact on atoms, 64-point Gauss per piece."""
        total = float(np.dot(self.atom_weights, f(self.atom_positions))) if self.atoms else 0.0
        if self.pieces:
            t, w = _reference_gauss64()
            for piece in self.pieces:
                c, d = piece.support
                half = 0.5 * (d - c)
                xs = 0.5 * (c + d) + half * t
                dens = P.polyval(xs, np.asarray(piece.coefficients))
                total += half * float(np.dot(w, dens * f(xs)))
        return total

    def breakpoints(self) -> np.ndarray:
        pts = {self.interval.a, self.interval.b, *self.atom_positions.tolist()}
        for piece in self.pieces:
            pts.update(piece.support)
        return np.array(sorted(pts))


_GAUSS64 = None


def _reference_gauss64():
    # Legendre nodes on [-1, 1] with weights summing to 2.
    global _GAUSS64
    if _GAUSS64 is None:
        from .rules import gauss

        rule = gauss(64, Interval(-1.0, 1.0))
        _GAUSS64 = (rule.nodes, 2.0 * rule.weights)
    return _GAUSS64


def moment(mu: Measure, k: int) -> float:
    """``∫ x**k dmu`` in closed form."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    terms = [float(w) * float(x) ** k for x, w in zip(mu.atom_positions, mu.atom_weights)]
    for piece in mu.pieces:
        c, d = piece.support
        for i, coef in enumerate(piece.coefficients):
            if coef:
                e = i + k + 1
                terms.append(coef * (d**e - c**e) / e)
    return math.fsum(terms)


def cdf_eval(mu: Measure, x):
    """Right-continuous CDF; 0 left of ``a`` and total mass right of ``b``."""
    xs = np.asarray(x, dtype=float)
    out = np.zeros_like(xs)
    if mu.atoms:
        cum = np.concatenate([[0.0], np.cumsum(mu.atom_weights)])
        out = out + cum[np.searchsorted(mu.atom_positions, xs, side="right")]
    for piece in mu.pieces:
        c, d = piece.support
        out = out + P.polyval(np.clip(xs, c, d) - c, piece.local_antiderivative)
    return float(out) if out.ndim == 0 else out


def uniform(interval: Interval) -> Measure:
    return Measure(interval, pieces=(DensityPiece(interval, (1.0 / interval.length,)),))


def dirac(x: float, interval: Interval, weight: float = 1.0) -> Measure:
    return Measure(interval, atoms=(Atom(x, weight),))


def from_rule(rule) -> Measure:
    """The discrete measure putting ``rule.weights`` at ``rule.nodes``."""
    weights = np.asarray(rule.weights, dtype=float)
    if np.any(weights <= 0):
        raise MeasureError("quadrature rule has a nonpositive weight")
    return Measure(rule.interval, atoms=tuple(Atom(x, w) for x, w in zip(rule.nodes, weights)))


def _merge_pieces(scaled: Sequence[tuple[float, DensityPiece]]) -> tuple[DensityPiece, ...]:
    if not scaled:
        return ()
    cuts = sorted({e for _, p in scaled for e in p.support})
    merged: list[tuple[float, float, np.ndarray]] = []
    for lo, hi in zip(cuts, cuts[1:]):
        acc = None
        for w, p in scaled:
            if p.support.a <= lo and hi <= p.support.b:
                term = w * np.asarray(p.coefficients)
                acc = term if acc is None else P.polyadd(acc, term)
        if acc is None:
            continue
        if merged and merged[-1][1] == lo and np.array_equal(merged[-1][2], acc):
            merged[-1] = (merged[-1][0], hi, acc)
        else:
            merged.append((lo, hi, acc))
    return tuple(DensityPiece(Interval(lo, hi), tuple(c)) for lo, hi, c in merged)


def mix(components: Sequence[tuple[float, Measure]]) -> Measure:
    """Convex combination of measures sharing one interval."""
    if not components:
        raise MeasureError("mix needs at least one component")
    interval = components[0][1].interval
    weights = [float(w) for w, _ in components]
    if any(w <= 0 for w in weights):
        raise MeasureError("mixture weights must be positive")
    if abs(math.fsum(weights) - 1.0) > MASS_TOL:
        raise MeasureError(f"mixture weights sum to {math.fsum(weights)!r}, not 1")
    if any(m.interval != interval for _, m in components):
        raise MeasureError("mixture components live on different intervals")
    atoms = [Atom(a.position, w * a.weight) for w, m in components for a in m.atoms]
    pieces = _merge_pieces([(w, p) for w, m in components for p in m.pieces])
    return Measure(interval, tuple(atoms), pieces)


# JSON (shortest round-trip float repr, so read/write is bit exact).

def measure_to_dict(mu: Measure) -> dict:
    return {
        "interval": [mu.interval.a, mu.interval.b],
        "atoms": [{"x": a.position, "w": a.weight} for a in mu.atoms],
        "pieces": [
            {"support": [p.support.a, p.support.b], "coeffs": list(p.coefficients)}
            for p in mu.pieces
        ],
    }


def measure_from_dict(data: dict) -> Measure:
    try:
        interval = Interval(*data["interval"])
        atoms = tuple(Atom(float(a["x"]), float(a["w"])) for a in data.get("atoms", []))
        pieces = tuple(
            DensityPiece(Interval(*p["support"]), tuple(float(c) for c in p["coeffs"]))
            for p in data.get("pieces", [])
        )
    except (KeyError, TypeError) as exc:
        raise MeasureError(f"malformed measure JSON: {exc}") from exc
    return Measure(interval, atoms, pieces)


def dumps(mu: Measure, **kwargs) -> str:
    return json.dumps(measure_to_dict(mu), **kwargs)


def loads(text: str) -> Measure:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureError(f"invalid JSON: {exc}") from exc
    return measure_from_dict(data)


def load(path) -> Measure:
    with open(path) as fh:
        return loads(fh.read())


def dump(mu: Measure, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(mu, indent=2))
        fh.write("\n")
