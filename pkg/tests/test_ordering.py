import json
import math

import numpy as np
import pytest

from conftest import dense_crossing_count
from quadorder.convexity import monomial, sample_test_functions
from quadorder.measure import Atom, DensityPiece, Interval, Measure, MeasureError, dirac, from_rule, mix, uniform
from quadorder.ordering import (
    Comparability,
    Direction,
    Sign,
    Verdict,
    certify_s_convex_order,
    crossing_scan,
    find_witnesses,
    incomparability_check,
    shared_moment_degree,
)
from quadorder.rules import chebyshev3, gauss, lobatto, radau_left, radau_right
from quadorder.sandwich import oracle_integral, random_moment_matched_measure, sandwich_rules

SQ3 = math.sqrt(3.0)


def G(m, I):
    return from_rule(gauss(m, I))


def L(m, I):
    return from_rule(lobatto(m, I))


def C3(I):
    return from_rule(chebyshev3(I))


def test_uniform_vs_g2_crossings(unit):
    rep = crossing_scan(uniform(unit), G(2, unit))
    assert rep.count == 3
    assert np.allclose(rep.crossings, [(3 - SQ3) / 6, 0.5, (3 + SQ3) / 6], atol=1e-12)
    # F_uniform - F_G2 starts positive, so F_second - F_first starts negative
    assert rep.initial_sign is Sign.MINUS
    assert rep.sign_sequence == (Sign.MINUS, Sign.PLUS, Sign.MINUS, Sign.PLUS)
    assert dense_crossing_count(uniform(unit), G(2, unit)) == 3


def test_c3_vs_g2_crossings(sym):
    rep = crossing_scan(C3(sym), G(2, sym))
    assert np.allclose(rep.crossings, [-1 / SQ3, 0.0, 1 / SQ3], atol=1e-12)
    assert rep.initial_sign is Sign.MINUS  # F_C3 - F_G2 = +1/3 first
    xs = np.array([-0.6, -0.3, 0.3, 0.6])
    assert np.allclose(C3(sym).cdf(xs) - G(2, sym).cdf(xs), [1 / 3, -1 / 6, 1 / 6, -1 / 3], atol=1e-14)


def test_identical_measures(unit):
    mu = mix([(0.4, uniform(unit)), (0.6, G(3, unit))])
    rep = crossing_scan(mu, mu)
    assert rep.count == 0 and rep.initial_sign is Sign.ZERO and rep.identical


def test_half_dirac_vs_uniform(unit):
    rep = crossing_scan(dirac(0.5, unit), uniform(unit))
    assert rep.crossings == (0.5,) and rep.initial_sign is Sign.PLUS


def test_touch_is_not_a_crossing(unit):
    # F_nu - F_mu = c x (1 - x) (x - 1/2)^2 >= 0 touches zero at 1/2
    P = np.polynomial.Polynomial
    diff = 0.5 * P([0, 1, -1]) * P([-0.5, 1]) ** 2
    nu = Measure(unit, pieces=(DensityPiece(unit, tuple((1 + diff.deriv()).coef)),))
    rep = crossing_scan(uniform(unit), nu)
    assert rep.count == 0 and rep.initial_sign is Sign.PLUS


def test_same_sign_plateau_is_not_a_crossing(unit):
    mu = Measure(unit, atoms=(Atom(0.2, 0.5), Atom(0.8, 0.5)))
    nu = Measure(unit, atoms=(Atom(0.3, 0.5), Atom(0.9, 0.5)))
    # -1/2 on [0.2,0.3), 0 on [0.3,0.8), -1/2 on [0.8,0.9)
    rep = crossing_scan(mu, nu)
    assert rep.count == 0 and rep.initial_sign is Sign.MINUS


def test_sign_change_across_atom(unit):
    rep = crossing_scan(Measure(unit, atoms=(Atom(0.2, 0.5), Atom(0.8, 0.5))),
                        Measure(unit, atoms=(Atom(0.2, 0.25), Atom(0.4, 0.25), Atom(0.6, 0.25), Atom(0.8, 0.25))))
    # -1/4 on [0.2,0.4), 0 on [0.4,0.6), +1/4 on [0.6,0.8): one crossing at the plateau's right end
    assert rep.crossings == (0.6,)


def test_plateau_between_opposite_signs(unit):
    mu = Measure(unit, atoms=(Atom(0.2, 0.5), Atom(0.8, 0.5)))
    nu = Measure(unit, atoms=(Atom(0.1, 0.5), Atom(0.9, 0.5)))
    rep = crossing_scan(mu, nu)
    # +1/2 on [0.1,0.2), 0 on [0.2,0.8), -1/2 on [0.8,0.9)
    assert rep.count == 1 and rep.crossings[0] == pytest.approx(0.8, abs=1e-12)
    assert rep.initial_sign is Sign.PLUS


def _pairs():
    out = []
    for I in (Interval(0, 1), Interval(-1, 1), Interval(-3, 5)):
        out += [
            (uniform(I), G(2, I)),
            (C3(I), L(3, I)),
            (G(3, I), L(4, I)),
            (from_rule(radau_left(3, I)), from_rule(radau_right(3, I))),
            (random_moment_matched_measure(3, I, 5), G(4, I)),
            (random_moment_matched_measure(2, I, 1), random_moment_matched_measure(4, I, 2)),
        ]
    return out


@pytest.mark.parametrize("mu,nu", _pairs())
def test_antisymmetry_and_dense_oracle(mu, nu):
    fwd, back = crossing_scan(mu, nu), crossing_scan(nu, mu)
    assert fwd.crossings == back.crossings
    assert back.sign_sequence == tuple(s.flipped() for s in fwd.sign_sequence)
    assert dense_crossing_count(mu, nu) == fwd.count


def test_different_intervals_rejected(unit, sym):
    with pytest.raises(MeasureError):
        crossing_scan(uniform(unit), uniform(sym))


def test_shared_moment_degree_examples(unit, sym):
    assert shared_moment_degree(G(3, sym), L(4, sym), 10) == 5
    assert shared_moment_degree(uniform(unit), G(2, unit), 10) == 3
    mu = random_moment_matched_measure(3, unit, 0)
    assert shared_moment_degree(mu, mu, 12) == 12


def test_certify_examples(unit, sym):
    c = certify_s_convex_order(dirac(0.5, unit), uniform(unit), 1)
    assert c.verdict is Verdict.CERTIFIED and c.direction is Direction.FIRST_BELOW_SECOND
    c = certify_s_convex_order(G(2, sym), C3(sym), 3)
    assert c.verdict is Verdict.CERTIFIED and c.direction is Direction.FIRST_BELOW_SECOND
    c = certify_s_convex_order(G(3, sym), L(4, sym), 3)
    assert c.verdict is not Verdict.CERTIFIED


def test_certify_reversed_pair_reports_other_direction(sym):
    c = certify_s_convex_order(C3(sym), G(2, sym), 3)
    assert c.verdict is Verdict.CERTIFIED and c.direction is Direction.SECOND_BELOW_FIRST


def test_certify_equal_measures(unit):
    mu = random_moment_matched_measure(2, unit, 3)
    c = certify_s_convex_order(mu, mu, 2)
    assert c.certified and "both directions" in c.notes


def test_certify_moment_mismatch_refutes(unit):
    c = certify_s_convex_order(dirac(0.5, unit), uniform(unit), 2)
    assert c.verdict is Verdict.REFUTED
    assert {w.refutes for w in c.witnesses} == set(Direction)
    assert all(w.violation > 0 for w in c.witnesses)


def test_certify_requires_probability(unit):
    half = Measure(unit, atoms=(Atom(0.5, 0.5),))
    with pytest.raises(MeasureError):
        certify_s_convex_order(half, uniform(unit), 1)


def test_certificate_json(sym):
    c = certify_s_convex_order(G(3, sym), L(4, sym), 3)
    data = json.loads(json.dumps(c.to_dict()))
    assert data["verdict"] == c.verdict.value and "convention" in data
    assert len(data["moment_residuals"]) == 3


def _integral(f, mu):
    if f.kind == "exponential":
        return float(oracle_integral(mu, f, dps=30))
    return f.integrate(mu)


def _certified_pairs():
    pairs = []
    for I in (Interval(0, 1), Interval(-1, 1), Interval(-3, 5)):
        pairs.append((G(2, I), C3(I), 3))
        pairs.append((C3(I), L(3, I), 3))
        pairs.append((dirac(I.midpoint, I), uniform(I), 1))
        for n in (1, 2, 3, 4, 5):
            mu = random_moment_matched_measure(n, I, [11, n])
            lo, hi = sandwich_rules(n, I)
            pairs.append((from_rule(lo), mu, n))
            pairs.append((mu, from_rule(hi), n))
    return pairs


@pytest.mark.parametrize("mu,nu,s", _certified_pairs())
def test_certificate_soundness(mu, nu, s):
    cert = certify_s_convex_order(mu, nu, s)
    assert cert.certified and cert.direction is Direction.FIRST_BELOW_SECOND
    for f in sample_test_functions(s, 100, [2024, s], mu.interval):
        assert _integral(f, mu) <= _integral(f, nu) + 1e-9 * f.max_abs(mu.interval), f.describe()


def test_one_crossing_reduction():
    rng = np.random.default_rng(42)
    for trial in range(50):
        a = rng.uniform(-3, 0)
        I = Interval(a, a + rng.uniform(0.5, 4))
        k = int(rng.integers(1, 4))
        xs = rng.uniform(I.a, I.b, k)
        ws = rng.dirichlet(np.ones(k + 1))
        nu = mix([(float(ws[0]), uniform(I)), *((float(w), dirac(float(x), I)) for w, x in zip(ws[1:], xs))])
        mean = nu.moment(1)
        mu = dirac(mean, I)
        if trial % 2:
            p = float(rng.uniform(0.1, 0.9))
            mu = mix([(p, dirac(mean, I)), (1 - p, nu)])
        cert = certify_s_convex_order(mu, nu, 1)
        assert cert.certified and cert.direction is Direction.FIRST_BELOW_SECOND
        assert cert.crossing_report.count == 1
        for f in (lambda x: (x - mean) ** 2, lambda x: np.abs(x - xs[0]), np.exp):
            assert mu.expect(f) <= nu.expect(f) + 1e-12


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_moment_mismatch_has_both_monomial_witnesses(s, unit):
    rng = np.random.default_rng(s)
    for _ in range(10):
        mu = random_moment_matched_measure(s, unit, rng.integers(1 << 30))
        nu = mix([(0.99, mu), (0.01, dirac(float(rng.uniform(0, 1)), unit))])
        j = shared_moment_degree(mu, nu, s) + 1
        assert j <= s
        plus, minus = monomial(j, s, 1), monomial(j, s, -1)
        d_plus = plus.integrate(mu) - plus.integrate(nu)
        d_minus = minus.integrate(mu) - minus.integrate(nu)
        assert d_plus * d_minus < 0  # one breaks each direction
        res = incomparability_check(mu, nu, s)
        assert res.verdict is Comparability.MOMENT_MISMATCH and res.failing_moment == j
        assert {w.refutes for w in res.witnesses} == set(Direction)
        cert = certify_s_convex_order(mu, nu, s)
        assert cert.verdict is Verdict.REFUTED


def test_incomparability_examples(unit, sym):
    r = incomparability_check(G(3, sym), L(4, sym), 3)
    assert r.verdict is Comparability.INCOMPARABLE and r.shared_moments == 5
    assert r.describe() == "incomparable (shared moments: 5)"
    r = incomparability_check(G(2, unit), uniform(unit), 3)
    assert r.verdict is Comparability.NECESSARY_HOLD
    r = incomparability_check(dirac(0.5, unit), uniform(unit), 2)
    assert r.verdict is Comparability.MOMENT_MISMATCH and r.failing_moment == 2


def test_incomparable_pairs_have_witnesses_both_ways(sym):
    # equal moments 1..n+1 rule out ordering; the witness search finds both violations
    ws = find_witnesses(G(3, sym), L(4, sym), 3)
    assert {w.refutes for w in ws} == set(Direction)


def test_identical_measures_are_not_incomparable(unit):
    mu = G(4, unit)
    assert incomparability_check(mu, mu, 3).verdict is Comparability.NECESSARY_HOLD
