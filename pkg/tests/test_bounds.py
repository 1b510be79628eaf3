"""Parabola fitting on boundary charts and the two-sided certificates.

The fitted envelope k*t^2 + delta/2 must dominate the boundary profile,
touch it at xi, and admit the supporting line alpha*t - beta there.  The
worked examples below were derived by hand twice: once by maximizing the
quotient (f(t) - delta/2)/t^2 over breakpoints and edge tangencies, once
via the double-root formula m^2/(4*(delta/2 - c)) for an edge y = m*t + c.
"""

import numpy as np
import pytest

from christoffel2d.bounds import (
    BoundCertificate,
    ParabolaFit,
    fit_parabola,
    lower_certificate,
    upper_certificate,
)
from christoffel2d.errors import DegenerateTangency, NotCase3
from christoffel2d.geometry import (
    AffineMap2,
    LocalChart,
    local_chart,
    ray_boundary_gap,
)


def _chart(xs, ys, index0, delta):
    return LocalChart(
        map=AffineMap2(np.eye(2), np.zeros(2)),
        delta=delta,
        xs=np.asarray(xs, dtype=float),
        ys=np.asarray(ys, dtype=float),
        index0=index0,
    )


# --------------------------------------------------------------- fitting


def test_fit_single_wedge():
    # f(t) = max(0, 0.4*(t - 1/4)), delta = 0.1.
    # quotient route: max of (0.4t - 0.15)/t^2 sits at t = 0.75, value 4/15
    # double-root route: m=0.4, c=-0.1 give k = 0.16/(4*0.15) = 4/15
    chart = _chart([-1.0, 0.0, 0.25, 1.0], [0.0, 0.0, 0.0, 0.3], 1, 0.1)
    fit = fit_parabola(chart)
    assert fit.k == pytest.approx(4 / 15, rel=1e-12)
    assert fit.xi == pytest.approx(0.75, rel=1e-12)
    assert fit.alpha == pytest.approx(0.4, rel=1e-12)
    assert fit.beta == pytest.approx(0.1, rel=1e-12)
    assert not fit.reflected


def test_fit_steep_wedge():
    # f(t) = max(0, 2*(t - 1/4)), delta = 0.1: tangency lands mid-edge at
    # t = 2*(0.05 + 0.5)/2 = 0.55, k = 4/(4*0.55) = 20/11, and the support
    # line check reads sqrt(0.6)/2 <= sqrt(11/20)
    chart = _chart([-1.0, 0.0, 0.25, 1.0], [0.0, 0.0, 0.0, 1.5], 1, 0.1)
    fit = fit_parabola(chart)
    assert fit.k == pytest.approx(20 / 11, rel=1e-12)
    assert fit.xi == pytest.approx(0.55, rel=1e-12)
    assert fit.alpha == pytest.approx(2.0, rel=1e-12)
    assert fit.beta == pytest.approx(0.5, rel=1e-12)
    assert np.sqrt(chart.delta + fit.beta) / fit.alpha <= 1 / np.sqrt(fit.k)


def test_fit_single_wedge_mirrored():
    chart = _chart([-1.0, 0.0, 0.25, 1.0], [0.0, 0.0, 0.0, 0.3], 1, 0.1)
    fit = fit_parabola(chart.mirrored())
    assert fit.reflected
    assert fit.k == pytest.approx(4 / 15, rel=1e-12)
    assert fit.xi == pytest.approx(0.75, rel=1e-12)
    assert fit.alpha == pytest.approx(0.4, rel=1e-12)
    assert fit.beta == pytest.approx(0.1, rel=1e-12)


def test_fit_symmetric_trapezoid_profile():
    # f(t) = max(0, (|t| - 0.1)/0.9), delta = 0.05: the flat-bottom wedge
    # profile of the slanted trapezoid.  Quotient max at t = 2*0.1225 = 0.245,
    # k = 1/(3.6*0.1225); double-root route agrees.
    chart = _chart([-1.0, -0.1, 0.0, 0.1, 1.0], [1.0, 0.0, 0.0, 0.0, 1.0], 2, 0.05)
    fit = fit_parabola(chart)
    assert fit.k == pytest.approx(1 / 0.441, rel=1e-12)
    assert fit.xi == pytest.approx(0.245, rel=1e-12)
    assert fit.alpha == pytest.approx(1 / 0.9, rel=1e-12)
    assert fit.beta == pytest.approx(0.1 / 0.9, rel=1e-12)


def test_fit_corner_tangency():
    # when the per-edge tangency points fall outside their edges the best
    # candidate is a breakpoint: xi is that corner exactly and alpha is the
    # left slope there.  Quotient at the corner: (0.25 - 0.05)/0.45^2 = 80/81.
    chart = _chart(
        [-1.0, 0.0, 0.2, 0.45, 1.0], [0.0, 0.0, 0.0, 0.25, 0.2775], 1, 0.1
    )
    fit = fit_parabola(chart)
    assert fit.k == pytest.approx(80 / 81, rel=1e-12)
    assert fit.xi == 0.45
    assert fit.alpha == pytest.approx(1.0, rel=1e-12)
    assert fit.beta == pytest.approx(0.2, rel=1e-12)


def test_fit_rejects_flat_profile():
    with pytest.raises(NotCase3):
        fit_parabola(_chart([-1.0, 0.0, 1.0], [0.0, 0.0, 0.0], 1, 0.05))


def test_fit_degenerate_tangency():
    # profile never rises above delta/2 although the dispatch gate passes
    with pytest.raises(DegenerateTangency):
        fit_parabola(_chart([-1.0, 0.0, 1.0], [0.08, 0.0, 0.08], 1, 0.2))


def _fit_instances(corpus, count_needed):
    """Collect case-3 fits from near-boundary points of corpus bodies."""
    out = []
    for body in corpus:
        for ang in (0.4, 1.9, 2.8, 4.4, 5.6):
            exit_ = ray_boundary_gap(body, np.array([np.cos(ang), np.sin(ang)]) * 0.2)
            x = exit_.point * (1 - 0.015)
            try:
                chart = local_chart(body, x)
                fit = fit_parabola(chart)
            except (NotCase3, DegenerateTangency):
                continue
            out.append((chart, fit))
            if len(out) >= count_needed:
                return out
    return out


def test_fit_invariants_on_random_charts(small_corpus):
    instances = _fit_instances(small_corpus, 25)
    assert len(instances) >= 5
    for chart, fit in instances:
        assert isinstance(fit, ParabolaFit)
        assert 0 < fit.xi <= 1.0
        assert 0 < fit.alpha <= 2.0
        assert 0 < fit.beta <= 2.0
        assert np.sqrt(chart.delta + fit.beta) / fit.alpha <= (1 + 1e-9) / np.sqrt(fit.k)


def test_fit_envelope_dominates_profile(small_corpus):
    for chart, fit in _fit_instances(small_corpus, 12):
        work = chart.mirrored() if fit.reflected else chart
        half = 0.5 * work.delta
        ts = np.unique(np.concatenate([work.xs, np.linspace(work.xs[0], work.xs[-1], 401)]))
        for t in ts:
            assert work.profile(t) <= fit.k * t * t + half + 1e-10
        # tangency at xi, supporting line below the profile
        assert work.profile(fit.xi) == pytest.approx(fit.k * fit.xi**2 + half, abs=1e-10)
        right = ts[ts >= 0]
        prof = np.array([work.profile(t) for t in right])
        assert (fit.alpha * right - fit.beta <= prof + 1e-10).all()


# ----------------------------------------------------------- certificates


def test_certificates_deep_point_case1(john_square):
    x = np.zeros(2)
    lo = lower_certificate(john_square, x)
    up = upper_certificate(john_square, x)
    for cert in (lo, up):
        assert isinstance(cert, BoundCertificate)
        assert cert.case == 1
        assert cert.value > 0
        assert np.isfinite(cert.witness.det) and cert.witness.det != 0
    assert lo.kind != up.kind


def test_certificates_near_boundary(small_corpus):
    envelope = 0.0
    for body in small_corpus[:5]:
        for shrink in (0.9, 0.99, 0.999):
            exit_ = ray_boundary_gap(body, np.array([0.17, 0.09]))
            x = exit_.point * shrink
            lo = lower_certificate(body, x)
            up = upper_certificate(body, x)
            assert lo.value > 0
            assert up.value > 0
            assert lo.case in (1, 2, 3) and up.case in (1, 2, 3)
            envelope = max(envelope, up.value / lo.value)
    assert envelope <= 1e4


def test_certificate_to_dict_json_ready(john_square):
    import json

    cert = lower_certificate(john_square, np.array([0.2, -0.4]))
    text = json.dumps(cert.to_dict())
    assert "case" in text and "value" in text
