import math

import numpy as np
import pytest

from hardylab import closed_form
from hardylab.errors import NonIntegrable
from hardylab.geometry import default_ball_poles
from hardylab.models import MinimizingFamily, PolySmoothstep, QuotientReport, SmoothBump, SphericalHarmonicDeg1
from hardylab.quadrature import _sphere_rule, integrate_1d, sphere_area
from hardylab.rayleigh import (
    cutoff_eval,
    extrapolate_log_affine,
    extrapolate_power,
    family_quotient,
    harmonic_values,
    quotient_halfspace,
    quotient_hardy_interior,
    quotient_hardy_interior_at_pole,
    quotient_hardy_rellich,
    quotient_multipolar_ball,
    sweep,
)


# ---------- cutoffs ----------
@pytest.mark.parametrize("cutoff", [SmoothBump(R=1.0), SmoothBump(R=0.5), PolySmoothstep(R=2.0, order=3)])
def test_cutoff_shape_and_derivatives(cutoff):
    R = cutoff.R
    th, d1, d2 = cutoff_eval(cutoff, np.array([0.0, 0.5 * R, R, 2 * R, 3 * R]))
    assert th.tolist() == [1.0, 1.0, 1.0, 0.0, 0.0]
    assert np.all(d1 == 0.0) and np.all(d2 == 0.0)

    r = np.linspace(1.05 * R, 1.95 * R, 19)
    h = 1e-6 * R
    th, d1, d2 = cutoff_eval(cutoff, r)
    assert np.all((th > 0) & (th < 1))
    assert np.all(d1 <= 0)
    fd1 = (cutoff_eval(cutoff, r + h)[0] - cutoff_eval(cutoff, r - h)[0]) / (2 * h)
    fd2 = (cutoff_eval(cutoff, r + h)[1] - cutoff_eval(cutoff, r - h)[1]) / (2 * h)
    np.testing.assert_allclose(d1, fd1, atol=1e-6 / R)
    np.testing.assert_allclose(d2, fd2, atol=1e-5 / R ** 2)


def test_smoothstep_is_continuous_at_ends():
    c = PolySmoothstep(R=1.0, order=3)
    th, d1, d2 = cutoff_eval(c, np.array([1.0 + 1e-7, 2.0 - 1e-7]))
    assert th[0] == pytest.approx(1.0, abs=1e-12) and th[1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.abs(d1) < 1e-8) and np.all(np.abs(d2) < 1e-5)


# ---------- interior Hardy ----------
@pytest.mark.parametrize("d", [3, 4, 5])
def test_hardy_interior_sweep_converges(d):
    mu = closed_form.hardy_interior_constant(d).value
    result = sweep(MinimizingFamily(family="hardy_interior", d=d), [0.2, 0.1, 0.05, 0.02])
    q = [r.quotient for r in result.reports]
    assert all(a > b for a, b in zip(q, q[1:]))
    assert all(x > mu for x in q)
    assert result.monotone
    assert result.model == "log_affine"
    assert result.limit == pytest.approx(mu, rel=0.05)


def test_hardy_interior_scale_invariance():
    a = quotient_hardy_interior(4, 0.1, SmoothBump(R=1.0))
    b = quotient_hardy_interior(4, 0.2, SmoothBump(R=2.0))
    assert a.quotient == pytest.approx(b.quotient, rel=1e-8)


@pytest.mark.parametrize("pole", [(0.0, 0.0, 0.0), (5.0, -1.0, 2.0), (-30.0, 0.25, 7.0)])
def test_hardy_interior_translated_pole(pole):
    radial = quotient_hardy_interior(3, 0.5)
    cartesian = quotient_hardy_interior_at_pole(pole, 3, 0.5, n_samples=2 ** 20, seed=4)
    assert cartesian.quotient_err < 0.05 * radial.quotient
    assert abs(cartesian.quotient - radial.quotient) <= 5 * cartesian.quotient_err
    assert cartesian.denominator == pytest.approx(radial.denominator, rel=0.05)


def test_hardy_interior_translated_pole_rejects_bad_input():
    with pytest.raises(ValueError):
        quotient_hardy_interior_at_pole((0.0, 0.0), 3, 0.1)
    with pytest.raises(ValueError):
        quotient_hardy_interior_at_pole((0.0, 0.0, 0.0), 3, 0.0)


# ---------- half-space ----------
@pytest.mark.parametrize("d", [2, 3, 5])
def test_halfspace_closed_form_quotient(d):
    for eps in (0.5, 0.1, 0.01):
        rep = quotient_halfspace(d, eps)
        exact = d * d / 4 + (d / 4 + eps / 2) / (1 / d + 1 / (2 * eps))
        assert rep.quotient == pytest.approx(exact, rel=1e-12)


def test_halfspace_tail_quadrature_agrees():
    for eps in (0.3, 0.05):
        closed = quotient_halfspace(3, eps, method="closed")
        quad = quotient_halfspace(3, eps, method="quadrature")
        assert quad.quotient == pytest.approx(closed.quotient, rel=1e-8)


def test_halfspace_sweep_limit():
    result = sweep(MinimizingFamily(family="half_space", d=3), [0.1, 0.05, 0.02, 0.01])
    assert result.model == "power"
    assert result.limit == pytest.approx(2.25, rel=1e-3)


def test_halfspace_needs_positive_eps():
    with pytest.raises(NonIntegrable):
        quotient_halfspace(3, 0.0)


# ---------- Hardy-Rellich ----------
def test_harmonic_has_unit_norm():
    for d in (3, 4):
        pts, w = _sphere_rule(d, 4)
        vals = harmonic_values(SphericalHarmonicDeg1(d=d), pts)
        assert np.dot(w, vals ** 2) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("d,harmonic", [(3, True), (4, True), (5, False), (6, False)])
def test_hardy_rellich_sweep_converges(d, harmonic):
    mu = closed_form.hardy_rellich_constant(d).value
    fam = MinimizingFamily(family="hardy_rellich", d=d, harmonic=harmonic)
    result = sweep(fam, [0.004, 0.002, 0.001, 0.0005])
    q = [r.quotient for r in result.reports]
    assert all(x > mu for x in q)
    assert result.limit == pytest.approx(mu, rel=0.01)


def test_hardy_rellich_against_direct_radial_quadrature():
    # radial profile, d = 5, integrated from the origin instead of using the power-law inner part
    d, eps = 5, 0.3
    cutoff = SmoothBump()
    beta = -(d - 4) / 2 + eps

    def parts(r):
        th, t1, t2 = (float(v[0]) for v in cutoff_eval(cutoff, np.array([r])))
        f = r ** beta * th
        f1 = beta * r ** (beta - 1) * th + r ** beta * t1
        f2 = beta * (beta - 1) * r ** (beta - 2) * th + 2 * beta * r ** (beta - 1) * t1 + r ** beta * t2
        return f1, f2

    def lap_sq(r):
        f1, f2 = parts(r)
        return (f2 + (d - 1) * f1 / r) ** 2 * r ** (d - 1)

    def grad_sq(r):
        f1, _ = parts(r)
        return f1 * f1 * r ** (d - 3)

    num = integrate_1d(lap_sq, 0.0, 2.0, points=[1.0]).value * sphere_area(d)
    den = integrate_1d(grad_sq, 0.0, 2.0, points=[1.0]).value * sphere_area(d)
    rep = quotient_hardy_rellich(d, eps, cutoff)
    assert rep.numerator == pytest.approx(num, rel=1e-7)
    assert rep.denominator == pytest.approx(den, rel=1e-7)


def test_hardy_rellich_rejects_rough_cutoff_and_harmonic():
    with pytest.raises(ValueError):
        quotient_hardy_rellich(5, 0.1, PolySmoothstep(order=1))
    with pytest.raises(ValueError):
        quotient_hardy_rellich(6, 0.1, harmonic=True)


@pytest.mark.parametrize("d", [3, 4])
def test_hardy_rellich_low_dimensions_require_harmonic(d):
    with pytest.raises(ValueError):
        quotient_hardy_rellich(d, 0.1, harmonic=False)
    with pytest.raises(ValueError):
        family_quotient(MinimizingFamily(family="hardy_rellich", d=d, harmonic=False), 0.1)
    implicit = family_quotient(MinimizingFamily(family="hardy_rellich", d=d), 0.1)
    assert implicit.quotient == quotient_hardy_rellich(d, 0.1, harmonic=True).quotient


# ---------- multipolar ball minimizer ----------
@pytest.mark.slow
@pytest.mark.parametrize("n", [3, 4])
def test_ball_minimizer_attains_constant(n):
    rep = quotient_multipolar_ball(default_ball_poles(3, n))
    assert rep.quotient == pytest.approx(closed_form.multipolar_constant(3, n, "boundary").value, rel=0.02)


def test_ball_minimizer_two_poles_not_integrable():
    with pytest.raises(NonIntegrable):
        quotient_multipolar_ball([(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)], n_samples=2 ** 8)


def test_ball_minimizer_poles_must_be_on_sphere():
    with pytest.raises(ValueError):
        quotient_multipolar_ball([(1.0, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 1.0)], n_samples=2 ** 8)


# ---------- sweeps and extrapolation ----------
def test_power_extrapolation_recovers_model():
    eps = [0.1, 0.05, 0.025]
    q = [2.0 + 3.0 * e ** 1.5 for e in eps]
    limit, order = extrapolate_power(eps, q)
    assert limit == pytest.approx(2.0, abs=1e-10)
    assert order == pytest.approx(1.5, abs=1e-8)


def test_log_affine_extrapolation_recovers_model():
    reports = []
    for e in (0.1, 0.05, 0.02):
        L = math.log(1 / e)
        num, den = 3.0 * L + 1.0 + 2.0 * e * e, 12.0 * L - 0.5 + e * e
        reports.append(QuotientReport(epsilon=e, numerator=num, denominator=den, quotient=num / den))
    assert extrapolate_log_affine(reports) == pytest.approx(0.25, rel=1e-10)


def test_sweep_with_two_points_reports_last_value():
    result = sweep(MinimizingFamily(family="half_space", d=3), [0.1, 0.05])
    assert result.model == "last_value"
    assert result.limit == result.reports[-1].quotient


@pytest.mark.parametrize("eps", [[0.1, 0.2], [0.1, 0.1], [0.1, -0.05], []])
def test_sweep_rejects_bad_epsilons(eps):
    with pytest.raises(ValueError):
        sweep(MinimizingFamily(family="half_space", d=3), eps)


def test_family_without_epsilon():
    with pytest.raises(ValueError):
        family_quotient(MinimizingFamily(family="multipolar_ball", d=3), 0.1)
