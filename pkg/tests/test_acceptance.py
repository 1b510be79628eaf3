"""Acceptance gate: ten criteria over the certified evaluation pipeline.

Each criterion is one test so the -v run shows one pass/fail line per
criterion.  Constants below were pinned after a full calibration run and
are not to be loosened; wall-clock budgets come from the criterion
statements.  Corpus construction lives in christoffel2d.corpus so the
same tables are reproducible from the command line (christoffel corpus).
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from christoffel2d import corpus
from christoffel2d.christoffel import christoffel_eval
from christoffel2d.geometry import ConvexPolygon

# pinned envelope constants (calibrated; see corpus.sandwich_table)
C_LOWER = 10.0  # value/lower stays >= 1/C_LOWER
C_UPPER = 10.0  # value/upper stays <= C_UPPER
CERT_RATIO_CAP = 1.0e4  # upper certificate / lower certificate, every instance

DISK_SPREAD_CAP = 25.0
TRAPEZOID_SPREAD_CAP = 30.0
DOUBLING_RATIO_CAP = 100.0
COVARIANCE_TOL = 1.0e-8
POSTCONDITION_TOL = 1.0e-10
ORACLE_K_TOL = 1.0e-6
COMPRESSION_RESIDUAL_TOL = 1.0e-8
NU_BOUND_CAP = 10.0
VERIFY_SLACK = 1.05
LAMBDA1_TOL = 1.0e-12
DIRICHLET_TOL = 1.0e-13


def _timed(fn, *args, **kwargs):
    t0 = time.monotonic()
    out = fn(*args, **kwargs)
    return out, time.monotonic() - t0


@pytest.fixture(scope="module")
def disk_run():
    return _timed(corpus.disk_table)


@pytest.fixture(scope="module")
def sandwich_run():
    return _timed(corpus.sandwich_table, count=200, points_per=10)


@pytest.fixture(scope="module")
def trapezoid_run():
    return _timed(corpus.trapezoid_table)


@pytest.fixture(scope="module")
def case3_run():
    return _timed(corpus.case3_table, count=200, points_per=10)


def test_criterion_01_disk_boundary_profile(disk_run):
    # lambda*n^2/sqrt(1-r) along a vertex ray of the 256-gon disk, four
    # degrees, forty radii: a single bounded window, and the degree-16
    # window overlaps the degree-4 window
    table, elapsed = disk_run
    assert table["window"]["spread"] <= DISK_SPREAD_CAP
    assert table["overlap_4_16"] is True
    assert elapsed <= 60.0


def test_criterion_02_sandwich_constants(sandwich_run):
    # 200 normalized polygons x 10 interior points x degrees {2,4,8}
    table, elapsed = sandwich_run
    assert table["instances"] == 6000
    r_lo, r_up = table["r_lower"], table["r_upper"]
    assert r_lo["min"] > 0
    assert r_lo["min"] >= 1.0 / C_LOWER
    assert r_up["max"] <= C_UPPER
    assert r_lo["windows_overlap"] is True
    assert r_up["windows_overlap"] is True
    assert elapsed <= 600.0


def test_criterion_03_certificate_ratio(sandwich_run):
    table, _ = sandwich_run
    ratio = table["certificate_ratio"]
    assert ratio["max"] <= CERT_RATIO_CAP
    assert 0 < ratio["p99"] <= ratio["max"]


def test_criterion_04_trapezoid_pinch(trapezoid_run):
    # lambda*n^2/sqrt(delta*(a+delta)) down the pinch of three trapezoids,
    # twelve depths each: one window of bounded spread
    table, elapsed = trapezoid_run
    assert table["window"]["spread"] <= TRAPEZOID_SPREAD_CAP
    assert elapsed <= 300.0


def test_criterion_05_degree_doubling():
    table = corpus.doubling_table(count=200, points_per=10)
    assert table["monotonicity_violation"] <= 1e-10
    assert table["ratio_max_overall"] <= DOUBLING_RATIO_CAP


def test_criterion_06_affine_covariance():
    table = corpus.covariance_table(count=100)
    assert table["count"] == 100
    assert table["worst_relative_defect"] <= COVARIANCE_TOL


def test_criterion_07_case3_envelope_postconditions(case3_run):
    # every fitted instance: envelope dominates the profile, touches it at
    # xi, the support line holds, and sqrt(delta+beta)/alpha <= 1/sqrt(k);
    # fitted k agrees with a dense sampling maximizer
    table, _ = case3_run
    assert table["instances"] >= 300
    assert table["domination_worst"] <= POSTCONDITION_TOL
    assert table["tangency_worst"] <= POSTCONDITION_TOL
    assert table["support_worst"] <= POSTCONDITION_TOL
    assert table["curvature_support_worst"] <= 1e-12
    assert table["k_oracle_checked"] >= 200
    assert table["k_oracle_worst_rel"] <= ORACLE_K_TOL


def test_criterion_08_compression_corpus():
    table, elapsed = _timed(corpus.compression_table, count=30)
    assert len(table["rows"]) == 30
    assert table["all_within_dim"] is True
    assert table["mn_max"] <= 15
    assert table["worst_residual"] <= COMPRESSION_RESIDUAL_TOL
    assert table["min_weight"] > 0
    assert elapsed <= 180.0


def test_criterion_09_mesh_verification():
    table, elapsed = _timed(corpus.mesh_table, trials=500)
    assert table["all_within_slack"] is True  # measured <= nu_bound * 1.05
    assert table["nu_bound_max"] <= NU_BOUND_CAP
    assert table["cardinality_ok"] is True
    assert elapsed <= 300.0


def _lambda1_sympy(x0, x1, y0, y1, a, b):
    """Exact degree-1 value on [x0,x1]x[y0,y1] via rational inversion."""
    import sympy as sp

    def m(p, q):
        mx = (sp.Rational(x1) ** (p + 1) - sp.Rational(x0) ** (p + 1)) / (p + 1)
        my = (sp.Rational(y1) ** (q + 1) - sp.Rational(y0) ** (q + 1)) / (q + 1)
        return mx * my

    gram = sp.Matrix(
        [
            [m(0, 0), m(1, 0), m(0, 1)],
            [m(1, 0), m(2, 0), m(1, 1)],
            [m(0, 1), m(1, 1), m(0, 2)],
        ]
    )
    v = sp.Matrix([1, sp.Rational(a), sp.Rational(b)])
    return float(1 / (v.T * gram.inv() * v)[0, 0])


def test_criterion_10_independent_oracles():
    # exact degree-1 values on three squares
    cases = [
        ((0, 1, 0, 1), (Fraction(1, 2), Fraction(1, 2))),
        ((-1, 1, -1, 1), (Fraction(1, 4), Fraction(-2, 3))),
        ((Fraction(1, 3), Fraction(7, 3), Fraction(-1, 5), Fraction(9, 5)),
         (Fraction(1, 2), Fraction(3, 4))),
    ]
    for (x0, x1, y0, y1), (a, b) in cases:
        poly = ConvexPolygon([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        exact = _lambda1_sympy(x0, x1, y0, y1, a, b)
        got = christoffel_eval(poly, 1, np.array([float(a), float(b)]))
        assert got == pytest.approx(exact, rel=LAMBDA1_TOL)

    table = corpus.oracle_table()
    assert table["triangle_dirichlet_worst_abs"] <= DIRICHLET_TOL
    assert table["brute_force_disk_center"] >= 0.9
