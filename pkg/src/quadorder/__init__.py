"""Gauss/Lobatto/Radau quadrature and n-convex ordering of probability measures."""
from .convexity import (
    TestFunction,
    divided_difference,
    exponential,
    is_n_convex_on_grid,
    monomial,
    sample_test_functions,
    truncated_power,
)
from .measure import Atom, DensityPiece, Interval, Measure, MeasureError, cdf_eval, dirac, from_rule, mix, moment, uniform
from .ordering import (
    Comparability,
    CrossingReport,
    Direction,
    OrderCertificate,
    Sign,
    Verdict,
    certify_s_convex_order,
    crossing_scan,
    incomparability_check,
    shared_moment_degree,
)
from .rules import Family, QuadratureRule, apply, chebyshev3, gauss, lobatto, radau_left, radau_right, verify_exactness
from .sandwich import (
    SandwichResult,
    certify_sandwich,
    check_moment_hypothesis,
    oracle_integral,
    random_moment_matched_measure,
    sandwich_rules,
)

__version__ = "0.1.0"

__all__ = [
    "TestFunction",
    "divided_difference",
    "exponential",
    "is_n_convex_on_grid",
    "monomial",
    "sample_test_functions",
    "truncated_power",
    "Atom",
    "DensityPiece",
    "Interval",
    "Measure",
    "MeasureError",
    "cdf_eval",
    "dirac",
    "from_rule",
    "mix",
    "moment",
    "uniform",
    "Comparability",
    "CrossingReport",
    "Direction",
    "OrderCertificate",
    "Sign",
    "Verdict",
    "certify_s_convex_order",
    "crossing_scan",
    "incomparability_check",
    "shared_moment_degree",
    "Family",
    "QuadratureRule",
    "apply",
    "chebyshev3",
    "gauss",
    "lobatto",
    "radau_left",
    "radau_right",
    "verify_exactness",
    "SandwichResult",
    "certify_sandwich",
    "check_moment_hypothesis",
    "oracle_integral",
    "random_moment_matched_measure",
    "sandwich_rules",
]
