# hardylab/rayleigh.py
"""
Rayleigh quotients of explicit minimizing families and their epsilon sweeps.

Radial families reduce to 1-D quadrature (times sphere area); the pieces that
are exact power laws are integrated in closed form. The ball minimizer of the
multipolar boundary problem goes through integrate_nd.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize, special

from hardylab import closed_form
from hardylab.errors import DimensionTooSmall, NonIntegrable, TooFewPoles
from hardylab.geometry import potential_eval_many
from hardylab.models import (
    CutoffSpec,
    Exclusion,
    IntegralResult,
    InverseSquare,
    MinimizingFamily,
    Multipolar,
    PoleSet,
    PolySmoothstep,
    QuotientReport,
    SmoothBump,
    SphericalHarmonicDeg1,
    SweepResult,
)
from hardylab.quadrature import angular_moment, integrate_1d, integrate_nd, radial_integral, sphere_area
from hardylab.utils.pool import ordered_map

logger = logging.getLogger("hardylab.rayleigh")

QUAD_TOL = 1e-11
BALL_POLE_EXCLUSION = 0.05
BALL_SAMPLES = 2 ** 18


# ---------------------------------------------------------------------------
# cutoffs: theta = 1 on [0, R], 0 on [2R, inf)
# ---------------------------------------------------------------------------
def _smoothstep_poly(order: int) -> Polynomial:
    # S(t) = t^{k+1} sum_j C(k+j, j) C(2k+1, k-j) (-t)^j : C^k, S(0)=0, S(1)=1
    k = order
    coeffs = np.zeros(2 * k + 2)
    for j in range(k + 1):
        coeffs[k + 1 + j] = math.comb(k + j, j) * math.comb(2 * k + 1, k - j) * (-1) ** j
    return Polynomial(coeffs)


def cutoff_eval(cutoff: CutoffSpec, r) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(theta, theta', theta'') at radius r."""
    r = np.asarray(r, dtype=float)
    R = cutoff.R
    t = (r - R) / R
    inside = t <= 0
    outside = t >= 1
    mid = ~(inside | outside)
    th = np.where(inside, 1.0, 0.0)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    tm = t[mid]

    if isinstance(cutoff, SmoothBump):
        # theta = 1 / (1 + exp(g)), g = 1/(1-t) - 1/t
        g = 1.0 / (1.0 - tm) - 1.0 / tm
        g1 = 1.0 / tm ** 2 + 1.0 / (1.0 - tm) ** 2
        g2 = -2.0 / tm ** 3 + 2.0 / (1.0 - tm) ** 3
        s = special.expit(-g)
        s1m = special.expit(g)
        th_t = -s * s1m * g1
        th_tt = -th_t * (1.0 - 2.0 * s) * g1 - s * s1m * g2
        th[mid] = s
        d1[mid] = th_t / R
        d2[mid] = th_tt / R ** 2
    elif isinstance(cutoff, PolySmoothstep):
        S = _smoothstep_poly(cutoff.order)
        th[mid] = 1.0 - S(tm)
        d1[mid] = -S.deriv(1)(tm) / R
        d2[mid] = -S.deriv(2)(tm) / R ** 2
    else:
        raise TypeError(f"unknown cutoff {type(cutoff).__name__}")
    return th, d1, d2


def _scalar_cutoff(cutoff: CutoffSpec):
    def at(r: float) -> Tuple[float, float, float]:
        th, d1, d2 = cutoff_eval(cutoff, np.asarray([r]))
        return float(th[0]), float(d1[0]), float(d2[0])
    return at


def _report(eps, num: IntegralResult, den: IntegralResult) -> QuotientReport:
    return QuotientReport(
        epsilon=eps,
        numerator=num.value,
        denominator=den.value,
        quotient=num.value / den.value,
        numerator_err=num.error_estimate,
        denominator_err=den.error_estimate,
    )


def _require_positive_eps(eps: float) -> None:
    if not eps > 0:
        raise NonIntegrable(f"epsilon must be positive, got {eps}")


# ---------------------------------------------------------------------------
# interior Hardy: u = (|x|^2 + eps^2)^{-(d-2)/4} theta(|x|)
# ---------------------------------------------------------------------------
def quotient_hardy_interior(d: int, eps: float, cutoff: Optional[CutoffSpec] = None) -> QuotientReport:
    if d < 3:
        raise DimensionTooSmall("interior Hardy family needs d >= 3")
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    cutoff = cutoff or SmoothBump()
    theta = _scalar_cutoff(cutoff)
    k = (d - 2) / 4.0
    R = cutoff.R

    def f(r):
        return (r * r + eps * eps) ** (-k) * theta(r)[0]

    def fprime(r):
        th, th1, _ = theta(r)
        base = (r * r + eps * eps) ** (-k)
        return -2.0 * k * r * base / (r * r + eps * eps) * th + base * th1

    brk = sorted({p for p in (eps, 10 * eps, R) if 0 < p < 2 * R})
    num = radial_integral(lambda r: fprime(r) ** 2, d, 0.0, 2 * R, tol=QUAD_TOL, points=brk)
    den = radial_integral(lambda r: f(r) ** 2 / (r * r), d, 0.0, 2 * R, tol=QUAD_TOL, points=brk)
    rep = _report(eps, num, den)
    logger.info("hardy_interior d=%d eps=%g: Q=%.10g", d, eps, rep.quotient)
    return rep


def quotient_hardy_interior_at_pole(
    pole: Sequence[float],
    d: int,
    eps: float,
    cutoff: Optional[CutoffSpec] = None,
    n_samples: int = BALL_SAMPLES,
    seed: int = 0,
) -> QuotientReport:
    """
    The interior family centred at a pole a, u = (|x-a|^2 + eps^2)^{-(d-2)/4}
    theta(|x-a|), against V = 1/|x-a|^2. Both integrals are taken in Cartesian
    coordinates over the box around a with integrate_nd, so the result is an
    independent check of the radial reduction.
    """
    if d < 3:
        raise DimensionTooSmall("interior Hardy family needs d >= 3")
    if len(pole) != d:
        raise ValueError("pole dimension does not match d")
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    cutoff = cutoff or SmoothBump()
    a = np.asarray(pole, dtype=float)
    V = InverseSquare(pole=tuple(a), scale=1.0)
    k = (d - 2) / 4.0
    R = cutoff.R

    def radial(X):
        s = np.linalg.norm(X - a, axis=1)
        th, th1, _ = cutoff_eval(cutoff, s)
        base = (s * s + eps * eps) ** (-k)
        return s, base * th, -2.0 * k * s * base / (s * s + eps * eps) * th + base * th1

    def numerator(X):
        _, _, du = radial(X)
        return du * du

    def denominator(X):
        _, u, _ = radial(X)
        return potential_eval_many(V, X) * u * u

    # u^2 V ~ eps^{-(d-2)} |x-a|^{-2} inside the exclusion ball
    rho = 0.1 * min(eps, R)
    excl = [Exclusion(center=tuple(a), radius=rho, exponent=-2.0)]
    box = (a - 2 * R, a + 2 * R)
    num = integrate_nd(numerator, box, n_samples=n_samples, seed=seed)
    den = integrate_nd(denominator, box, excl, n_samples=n_samples, seed=seed + 1)
    rep = _report(eps, num, den)
    logger.info(
        "hardy_interior at %s d=%d eps=%g: Q=%.6g (+/- %.2e)", a.tolist(), d, eps, rep.quotient, rep.quotient_err
    )
    return rep


# ---------------------------------------------------------------------------
# half-space: u = x_d on the unit half-ball, x_d |x|^{-d/2-eps} outside
# ---------------------------------------------------------------------------
def quotient_halfspace(d: int, eps: float, method: str = "closed") -> QuotientReport:
    """
    Numerator int |grad u|^2, denominator int u^2/|x|^2 over the half-space.
    The outer power-law tails are exact; `method="quadrature"` integrates them
    with integrate_1d instead.
    """
    if d < 2:
        raise DimensionTooSmall("half-space family needs d >= 2")
    _require_positive_eps(eps)
    h1 = angular_moment(d, "half_one")
    h2 = angular_moment(d, "half_last_coord_sq")
    s = d / 2.0 + eps

    inner_num = h1 / d
    inner_den = h2 / d
    # outer: |grad u|^2 = r^{-2s} [1 + (s^2 - 2s) sigma_d^2], u^2/r^2 = sigma_d^2 r^{-2s}
    if method == "closed":
        tail = IntegralResult(value=1.0 / (2.0 * eps), error_estimate=0.0, evaluations=0)
    elif method == "quadrature":
        tail = integrate_1d(lambda r: r ** (d - 1 - 2 * s), 1.0, math.inf, tol=QUAD_TOL)
    else:
        raise ValueError(f"unknown method {method!r}")

    num_value = inner_num + (h1 + (s * s - 2 * s) * h2) * tail.value
    den_value = inner_den + h2 * tail.value
    num = IntegralResult(
        value=num_value,
        error_estimate=abs(h1 + (s * s - 2 * s) * h2) * tail.error_estimate,
        evaluations=tail.evaluations,
    )
    den = IntegralResult(value=den_value, error_estimate=h2 * tail.error_estimate, evaluations=tail.evaluations)
    return _report(eps, num, den)


# ---------------------------------------------------------------------------
# Hardy-Rellich: u = |x|^{-(d-4)/2 + eps} theta(|x|) [phi_1(x/|x|)]
# ---------------------------------------------------------------------------
def harmonic_normalisation(d: int) -> float:
    """N with N x_d/|x| of unit L^2 norm on the sphere: N^2 = d / |S^{d-1}|."""
    return math.sqrt(d / sphere_area(d))


def harmonic_values(harmonic: SphericalHarmonicDeg1, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != harmonic.d:
        raise ValueError(f"points have dimension {X.shape[1]}, harmonic is for d={harmonic.d}")
    r = np.linalg.norm(X, axis=1)
    return harmonic_normalisation(harmonic.d) * X[:, harmonic.direction] / r


def quotient_hardy_rellich(
    d: int,
    eps: float,
    cutoff: Optional[CutoffSpec] = None,
    harmonic: Optional[bool] = None,
) -> QuotientReport:
    """
    int |Delta u|^2 / int |grad u|^2 / |x|^2. With the degree-1 harmonic factor
    (present exactly when d is 3 or 4) the angular integrals are 1 by normalisation.
    """
    if d < 3:
        raise DimensionTooSmall("Hardy-Rellich family needs d >= 3")
    if harmonic is None:
        harmonic = d in (3, 4)
    elif harmonic != (d in (3, 4)):
        raise ValueError("the harmonic factor is used exactly when d is 3 or 4")
    _require_positive_eps(eps)
    cutoff = cutoff or SmoothBump()
    if isinstance(cutoff, PolySmoothstep) and cutoff.order < 2:
        raise ValueError("Hardy-Rellich needs a C^2 cutoff (order >= 2)")
    theta = _scalar_cutoff(cutoff)
    R = cutoff.R
    beta = -(d - 4) / 2.0 + eps
    k = (d - 1) if harmonic else 0
    angular = 1.0 if harmonic else sphere_area(d)

    # on [0, R] theta = 1: L = c r^{beta-2}; both integrands are multiples of r^{2 eps - 1}
    c = beta * (beta + d - 2) - k
    inner = R ** (2 * eps) / (2 * eps)

    def parts(r):
        th, th1, th2 = theta(r)
        f = r ** beta * th
        f1 = beta * r ** (beta - 1) * th + r ** beta * th1
        f2 = beta * (beta - 1) * r ** (beta - 2) * th + 2 * beta * r ** (beta - 1) * th1 + r ** beta * th2
        return f, f1, f2

    def lap_sq(r):
        f, f1, f2 = parts(r)
        L = f2 + (d - 1) * f1 / r - k * f / (r * r)
        return L * L * r ** (d - 1)

    def grad_sq(r):
        f, f1, _ = parts(r)
        return (f1 * f1 + k * f * f / (r * r)) * r ** (d - 3)

    outer_num = integrate_1d(lap_sq, R, 2 * R, tol=QUAD_TOL)
    outer_den = integrate_1d(grad_sq, R, 2 * R, tol=QUAD_TOL)
    num = IntegralResult(
        value=angular * (c * c * inner + outer_num.value),
        error_estimate=angular * outer_num.error_estimate,
        evaluations=outer_num.evaluations,
    )
    den = IntegralResult(
        value=angular * ((beta * beta + k) * inner + outer_den.value),
        error_estimate=angular * outer_den.error_estimate,
        evaluations=outer_den.evaluations,
    )
    rep = _report(eps, num, den)
    logger.info("hardy_rellich d=%d eps=%g harmonic=%s: Q=%.10g", d, eps, harmonic, rep.quotient)
    return rep


# ---------------------------------------------------------------------------
# multipolar ball minimizer: phi = (r^2 - |x-c|^2) prod |x - a_i|^{-d/n}
# ---------------------------------------------------------------------------
def quotient_multipolar_ball(
    poles: Sequence[Sequence[float]],
    center: Optional[Sequence[float]] = None,
    radius: float = 1.0,
    n_samples: int = BALL_SAMPLES,
    seed: int = 0,
    exclusion: float = BALL_POLE_EXCLUSION,
) -> QuotientReport:
    """
    Rayleigh quotient int |grad phi|^2 / int V phi^2 of the explicit minimizer
    for poles on the boundary sphere; equals d^2/n^2 for n >= 3.
    """
    A = np.asarray(poles, dtype=float)
    n, d = A.shape
    if n < 2:
        raise TooFewPoles("the multipolar potential needs at least 2 poles")
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    on_sphere = np.abs(np.linalg.norm(A - c, axis=1) - radius)
    if np.any(on_sphere > 1e-9 * radius):
        raise ValueError("ball-minimizer poles must lie on the boundary sphere")
    beta = -d / n
    V = Multipolar(poles=PoleSet(points=[tuple(a) for a in A]), scale=1.0)

    def phi_and_grad(X):
        Y = X[:, None, :] - A[None, :, :]
        r2 = np.sum(Y * Y, axis=2)
        P = np.prod(r2 ** (beta / 2.0), axis=1)
        B = radius ** 2 - np.sum((X - c) ** 2, axis=1)
        G = beta * np.sum(Y / r2[:, :, None], axis=1)
        grad = P[:, None] * (-2.0 * (X - c) + B[:, None] * G)
        return B * P, grad

    def in_ball(X):
        return np.sum((X - c) ** 2, axis=1) < radius ** 2

    def numerator(X):
        _, g = phi_and_grad(X)
        return np.where(in_ball(X), np.sum(g * g, axis=1), 0.0)

    def denominator(X):
        val, _ = phi_and_grad(X)
        return np.where(in_ball(X), potential_eval_many(V, X) * val * val, 0.0)

    # phi^2 V and |grad phi|^2 both behave like s^{-2d/n} near each pole
    exponent = -2.0 * d / n
    if exponent + d <= 0:
        raise NonIntegrable(f"n={n} poles: the minimizer profile is not in the energy space")
    excl = [Exclusion(center=tuple(a), radius=exclusion, exponent=exponent) for a in A]
    box = (c - radius, c + radius)
    num = integrate_nd(numerator, box, excl, n_samples=n_samples, seed=seed)
    den = integrate_nd(denominator, box, excl, n_samples=n_samples, seed=seed + 1)
    rep = _report(None, num, den)
    logger.info("multipolar ball d=%d n=%d: Q=%.6g (+/- %.2e)", d, n, rep.quotient, rep.quotient_err)
    return rep


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------
def family_quotient(family: MinimizingFamily, eps: float) -> QuotientReport:
    if family.family == "hardy_interior":
        return quotient_hardy_interior(family.d, eps, family.cutoff)
    if family.family == "half_space":
        return quotient_halfspace(family.d, eps)
    if family.family == "hardy_rellich":
        return quotient_hardy_rellich(family.d, eps, family.cutoff, harmonic=family.harmonic)
    raise ValueError(f"family {family.family!r} has no epsilon parameter")


def family_constant(family: MinimizingFamily) -> float:
    if family.family == "hardy_interior":
        return closed_form.hardy_interior_constant(family.d).value
    if family.family == "half_space":
        return closed_form.hardy_boundary_constant(family.d).value
    if family.family == "hardy_rellich":
        return closed_form.hardy_rellich_constant(family.d).value
    raise ValueError(f"family {family.family!r} has no single constant")


def _validate_eps(eps_list: Sequence[float]) -> List[float]:
    eps = [float(e) for e in eps_list]
    if not eps:
        raise ValueError("epsilon list is empty")
    if any(e <= 0 for e in eps):
        raise ValueError("epsilon values must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon values must be strictly decreasing")
    return eps


def extrapolate_power(eps: Sequence[float], q: Sequence[float]) -> Tuple[float, Optional[float]]:
    """
    Fit q = mu + a eps^p through three points; falls back to a straight line
    through the last two when no positive p reproduces the ratios.
    """
    e1, e2, e3 = eps[-3:]
    q1, q2, q3 = q[-3:]
    d12, d23 = q1 - q2, q2 - q3
    if d23 != 0 and d12 / d23 > 0:
        target = d12 / d23

        def h(p):
            return (e1 ** p - e2 ** p) / (e2 ** p - e3 ** p) - target

        lo, hi = 1e-3, 10.0
        if h(lo) * h(hi) < 0:
            p = optimize.brentq(h, lo, hi, xtol=1e-12)
            a = d12 / (e1 ** p - e2 ** p)
            return q3 - a * e3 ** p, p
    logger.warning("power fit failed (ratios %.3g, %.3g); using linear extrapolation", d12, d23)
    slope = d23 / (e2 - e3)
    return q3 - slope * e3, 1.0


def extrapolate_log_affine(reports: Sequence[QuotientReport]) -> float:
    """
    Numerator and denominator each follow alpha log(1/eps) + beta + gamma eps^2;
    the quotient tends to alpha_num / alpha_den.
    """
    last = reports[-3:]
    M = np.array([[math.log(1.0 / r.epsilon), 1.0, r.epsilon ** 2] for r in last])
    a_num = np.linalg.solve(M, [r.numerator for r in last])[0]
    a_den = np.linalg.solve(M, [r.denominator for r in last])[0]
    return float(a_num / a_den)


def sweep(family: MinimizingFamily, eps_list: Sequence[float]) -> SweepResult:
    eps = _validate_eps(eps_list)
    reports = ordered_map(lambda e: family_quotient(family, e), eps)
    q = [r.quotient for r in reports]

    monotone = True
    for a, b in zip(reports, reports[1:]):
        if b.quotient > a.quotient + a.quotient_err + b.quotient_err:
            monotone = False
    if not monotone:
        logger.warning("sweep %s d=%d is not monotone: %s", family.family, family.d, q)

    if len(reports) < 3:
        logger.warning("sweep with %d points: reporting the last quotient as the limit", len(reports))
        return SweepResult(reports=reports, limit=q[-1], monotone=monotone, model="last_value")
    if family.family == "hardy_interior":
        limit = extrapolate_log_affine(reports)
        result = SweepResult(reports=reports, limit=limit, monotone=monotone, model="log_affine")
    else:
        limit, order = extrapolate_power(eps, q)
        result = SweepResult(reports=reports, limit=limit, monotone=monotone, model="power", order=order)
    logger.info("sweep %s d=%d: limit %.8g (%s)", family.family, family.d, result.limit, result.model)
    return result
