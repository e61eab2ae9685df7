# hardylab/identities.py
"""
Integral identities and inequalities checked on compactly supported test
functions. Test functions are polynomials on their support ball, so the
product Gauss rule from quadrature.ball_cubature integrates the polynomial
terms exactly; weighted terms converge geometrically because supports stay
well away from the weights' singular sets.
"""
import functools
import logging
from typing import Callable, Dict, List, Literal, Optional, Sequence, Union

import numpy as np

from hardylab import closed_form
from hardylab.errors import DimensionTooSmall, PositivityViolation
from hardylab.geometry import default_ball_poles
from hardylab.models import (
    IdentityCheck,
    InequalityCheck,
    LastCoord,
    SupersolutionAnsatz,
    TestFunction,
)
from hardylab.quadrature import ball_cubature
from hardylab.supersolution import ansatz_gradient_many, ansatz_laplacian_many, ansatz_value_many
from hardylab.utils.pool import ordered_map

logger = logging.getLogger("hardylab.identities")

BUMP_POWER = 3
CUBATURE_DEGREE = 20
IDENTITY_TOL = 1e-6
CHUNK = 1 << 17
# support radius as a fraction of the distance to the nearest singular set
SUPPORT_FRACTION = 0.4
MAX_TRIES = 1000

IdentityName = Literal["expansion_square", "geni", "second_derivative_sum", "ident_ip2"]
InequalityName = Literal["hardy", "rellich", "hardy_rellich", "weaker", "pushu", "first_hr"]

IDENTITIES = ("expansion_square", "geni", "second_derivative_sum", "ident_ip2")
INEQUALITIES = ("hardy", "rellich", "hardy_rellich", "weaker", "pushu", "first_hr")


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------
def _random_poly(d: int, rng: np.random.Generator):
    c0 = float(rng.uniform(0.5, 1.5))
    g = tuple(float(v) for v in 0.5 * rng.standard_normal(d))
    M = 0.3 * rng.standard_normal((d, d))
    Q = 0.5 * (M + M.T)
    return c0, g, tuple(tuple(float(v) for v in row) for row in Q)


def random_test_function(
    d: int,
    rng: np.random.Generator,
    avoid: Sequence[Sequence[float]] = (),
    half_space: bool = False,
    index: int = 0,
) -> TestFunction:
    """
    Random u supported in a ball inside the annulus 0.36 < |x| < 1.47, at
    distance >= 1.5 support radii from the origin, from every point in `avoid`
    and (with half_space) from the plane x_d = 0.
    """
    avoid = np.asarray(avoid, dtype=float).reshape(-1, d)
    for _ in range(MAX_TRIES):
        if half_space:
            v = np.append(0.3 * rng.standard_normal(d - 1), 1.0)
        else:
            v = rng.standard_normal(d)
        direction = v / np.linalg.norm(v)
        center = rng.uniform(0.6, 1.05) * direction
        room = np.linalg.norm(center)
        if half_space:
            room = min(room, center[-1])
        if len(avoid):
            room = min(room, float(np.min(np.linalg.norm(avoid - center, axis=1))))
        if room < 0.2:
            continue
        scale = float(rng.uniform(0.375, 1.0) * SUPPORT_FRACTION * room)
        c0, g, Q = _random_poly(d, rng)
        return TestFunction(center=tuple(center), scale=scale, c0=c0, g=g, Q=Q, index=index)
    raise ValueError("could not place a test function away from the singular set")


def random_radial_test_function(d: int, rng: np.random.Generator, index: int = 0) -> TestFunction:
    """u = (c0 + q |x|^2) (1 - |x|^2/s^2)^3 centered at the origin."""
    q = float(0.3 * rng.standard_normal())
    Q = tuple(tuple(q if i == j else 0.0 for j in range(d)) for i in range(d))
    return TestFunction(
        center=tuple([0.0] * d),
        scale=float(rng.uniform(0.5, 1.2)),
        c0=float(rng.uniform(0.5, 1.5)),
        g=tuple([0.0] * d),
        Q=Q,
        index=index,
    )


def evaluate(u: TestFunction, X: np.ndarray, hessian: bool = False) -> Dict[str, np.ndarray]:
    """u, grad u, Delta u (and the Hessian) at the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = X.shape[1]
    s2 = u.scale ** 2
    y = X - np.asarray(u.center)
    w = 1.0 - np.sum(y * y, axis=1) / s2
    w = np.where(w > 0, w, 0.0)
    k = BUMP_POWER

    dq = 2.0 * y / s2
    b = w ** k
    db = (-k * w ** (k - 1))[:, None] * dq
    lap_b = k * (k - 1) * w ** (k - 2) * np.sum(dq * dq, axis=1) - k * w ** (k - 1) * (2.0 * d / s2)

    g = np.asarray(u.g)
    Qs = np.asarray(u.Q) + np.asarray(u.Q).T
    p = u.c0 + X @ g + 0.5 * np.einsum("ni,ij,nj->n", X, Qs, X)
    dp = g[None, :] + X @ Qs
    lap_p = float(np.trace(Qs))

    out = {
        "u": p * b,
        "grad": b[:, None] * dp + p[:, None] * db,
        "lap": b * lap_p + 2.0 * np.sum(dp * db, axis=1) + p * lap_b,
    }
    if hessian:
        H_b = (k * (k - 1) * w ** (k - 2))[:, None, None] * np.einsum("ni,nj->nij", dq, dq)
        H_b -= (k * w ** (k - 1) * 2.0 / s2)[:, None, None] * np.eye(d)[None, :, :]
        out["hess"] = (
            b[:, None, None] * Qs[None, :, :]
            + np.einsum("ni,nj->nij", dp, db)
            + np.einsum("ni,nj->nij", db, dp)
            + p[:, None, None] * H_b
        )
    return out


@functools.lru_cache(maxsize=16)
def _unit_rule(d: int, degree: int):
    pts, w = ball_cubature(d, np.zeros(d), 1.0, degree)
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


def integrate_terms(
    u: TestFunction,
    terms: Callable[[Dict[str, np.ndarray], np.ndarray], Dict[str, np.ndarray]],
    hessian: bool = False,
    degree: int = CUBATURE_DEGREE,
) -> Dict[str, float]:
    """Integrate several integrands built from u's derivatives in one cubature pass."""
    d = u.dim
    unit_pts, unit_w = _unit_rule(d, degree)
    center = np.asarray(u.center)
    totals: Dict[str, float] = {}
    for start in range(0, len(unit_w), CHUNK):
        X = center + u.scale * unit_pts[start:start + CHUNK]
        w = unit_w[start:start + CHUNK] * u.scale ** d
        fields = evaluate(u, X, hessian=hessian)
        for name, values in terms(fields, X).items():
            totals[name] = totals.get(name, 0.0) + float(np.dot(w, values))
    return totals


def _support_excludes_origin(u: TestFunction) -> None:
    if np.linalg.norm(u.center) <= u.scale:
        raise ValueError("test function support must avoid the origin")


def _identity(name: str, u: TestFunction, lhs: float, rhs: float, scale: float) -> IdentityCheck:
    gap = abs(lhs - rhs)
    scale = max(scale, 1e-300)
    return IdentityCheck(
        name=name,
        index=u.index,
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        scale=scale,
        tolerance=IDENTITY_TOL,
        passed=bool(gap <= IDENTITY_TOL * scale),
    )


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------
def check_expansion_square(u: TestFunction, d: Optional[int] = None) -> IdentityCheck:
    """
    int |grad u|^2 - (d-2)^2/4 int u^2/|x|^2 = int |grad u + (d-2)/2 x u/|x|^2|^2
    """
    d = d or u.dim
    _support_excludes_origin(u)
    c = (d - 2) / 2.0

    def terms(f, X):
        r2 = np.sum(X * X, axis=1)
        v = f["grad"] + (c * f["u"] / r2)[:, None] * X
        return {
            "grad": np.sum(f["grad"] ** 2, axis=1),
            "weighted": f["u"] ** 2 / r2,
            "square": np.sum(v * v, axis=1),
        }

    t = integrate_terms(u, terms)
    lhs = t["grad"] - c * c * t["weighted"]
    return _identity("expansion_square", u, lhs, t["square"], max(t["grad"], c * c * t["weighted"], t["square"]))


def check_geni(u: TestFunction, phi: SupersolutionAnsatz, d: Optional[int] = None) -> IdentityCheck:
    """
    int |grad u|^2 + int (Delta phi / phi) u^2 = int |grad u - (grad phi / phi) u|^2
    for phi > 0 on the support of u.
    """
    def terms(f, X):
        val = ansatz_value_many(phi, X)
        if np.any(val <= 0):
            raise PositivityViolation("phi must be positive on the support of u")
        lap, _ = ansatz_laplacian_many(phi, X)
        grad, _ = ansatz_gradient_many(phi, X)
        v = f["grad"] - (f["u"] / val)[:, None] * grad
        return {
            "grad": np.sum(f["grad"] ** 2, axis=1),
            "potential": lap / val * f["u"] ** 2,
            "square": np.sum(v * v, axis=1),
        }

    t = integrate_terms(u, terms)
    lhs = t["grad"] + t["potential"]
    return _identity("geni", u, lhs, t["square"], max(t["grad"], abs(t["potential"]), t["square"]))


def check_second_derivative_sum(u: TestFunction, d: Optional[int] = None) -> IdentityCheck:
    """sum_ij int |d_ij u|^2 = int (Delta u)^2"""

    def terms(f, X):
        return {
            "hessian": np.einsum("nij,nij->n", f["hess"], f["hess"]),
            "laplacian": f["lap"] ** 2,
        }

    t = integrate_terms(u, terms, hessian=True)
    return _identity("second_derivative_sum", u, t["hessian"], t["laplacian"], max(t["hessian"], t["laplacian"]))


def check_ident_ip2(u: TestFunction, d: Optional[int] = None) -> IdentityCheck:
    """
    (d-4) int |grad u|^2/|x|^2
        = -4 int (x.grad u)^2/|x|^4 + 2 int (x.grad u) Delta u / |x|^2
    """
    d = d or u.dim
    if not u.is_radial:
        _support_excludes_origin(u)

    def terms(f, X):
        r2 = np.sum(X * X, axis=1)
        radial = np.sum(X * f["grad"], axis=1)
        return {
            "grad_w": np.sum(f["grad"] ** 2, axis=1) / r2,
            "radial_sq": radial ** 2 / r2 ** 2,
            "mixed": radial * f["lap"] / r2,
        }

    t = integrate_terms(u, terms)
    lhs = (d - 4) * t["grad_w"]
    rhs = -4.0 * t["radial_sq"] + 2.0 * t["mixed"]
    scale = max(abs(d - 4) * t["grad_w"], 4.0 * t["radial_sq"], 2.0 * abs(t["mixed"]))
    return _identity("ident_ip2", u, lhs, rhs, scale)


# ---------------------------------------------------------------------------
# inequalities
# ---------------------------------------------------------------------------
def inequality_constant(which: InequalityName, d: int, n: int = 2) -> float:
    if which == "hardy":
        return closed_form.hardy_interior_constant(d).value
    if which == "rellich":
        return closed_form.rellich_constant(d).value
    if which == "hardy_rellich":
        return closed_form.hardy_rellich_constant(d).value
    if which == "weaker":
        if d < 4:
            raise DimensionTooSmall("the radial-derivative inequality needs d >= 4")
        return d * d / 4.0
    if which == "pushu":
        return closed_form.multipolar_pushu_constant(d, n)[0]
    if which == "first_hr":
        return closed_form.first_hardy_rellich_constant(d)
    raise ValueError(f"unknown inequality {which!r}")


def check_inequality(
    u: TestFunction,
    which: InequalityName,
    d: Optional[int] = None,
    constant: Optional[float] = None,
    poles: Optional[Sequence[Sequence[float]]] = None,
) -> InequalityCheck:
    """
    margin = lhs - C * rhs for one of the functional inequalities; `constant`
    overrides the sharp C (used to test sharpness).
    """
    d = d or u.dim
    _support_excludes_origin(u)
    A = np.asarray(poles if poles is not None else default_ball_poles(d, 2), dtype=float)
    n = A.shape[0]
    C = inequality_constant(which, d, n) if constant is None else float(constant)
    extra = 0.0

    second_order = which in ("rellich", "hardy_rellich", "weaker", "first_hr")

    def terms(f, X):
        r2 = np.sum(X * X, axis=1)
        grad_sq = np.sum(f["grad"] ** 2, axis=1)
        if which == "hardy":
            return {"lhs": grad_sq, "rhs": f["u"] ** 2 / r2}
        if which == "rellich":
            return {"lhs": f["lap"] ** 2, "rhs": f["u"] ** 2 / r2 ** 2}
        if which in ("hardy_rellich", "first_hr"):
            return {"lhs": f["lap"] ** 2, "rhs": grad_sq / r2}
        if which == "weaker":
            radial = np.sum(X * f["grad"], axis=1)
            return {"lhs": f["lap"] ** 2, "rhs": radial ** 2 / r2 ** 2}
        # pushu: pair potential and single-pole terms
        Y = X[:, None, :] - A[None, :, :]
        ri2 = np.sum(Y * Y, axis=2)
        pair = np.zeros(len(X))
        for i in range(n):
            for j in range(i + 1, n):
                pair += np.sum((A[i] - A[j]) ** 2) / (ri2[:, i] * ri2[:, j])
        return {"lhs": grad_sq, "rhs": pair * f["u"] ** 2, "single": np.sum(1.0 / ri2, axis=1) * f["u"] ** 2}

    if which == "pushu":
        dist = np.linalg.norm(A - np.asarray(u.center), axis=1)
        if np.any(dist <= u.scale):
            raise ValueError("test function support must avoid the poles")
    t = integrate_terms(u, terms)
    if which == "pushu":
        extra = closed_form.multipolar_pushu_constant(d, n)[1] * t["single"]
    margin = t["lhs"] - C * t["rhs"] - extra
    scale = max(t["lhs"], C * t["rhs"] + extra, 1e-300)
    logger.debug("%s u#%d: lhs=%.6g rhs=%.6g margin=%.3e", which, u.index, t["lhs"], t["rhs"], margin)
    return InequalityCheck(
        name=which,
        index=u.index,
        lhs=t["lhs"],
        rhs=t["rhs"],
        constant=C,
        margin=margin,
        tolerance=IDENTITY_TOL,
        passed=bool(margin >= -IDENTITY_TOL * scale),
    )


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------
def default_geni_ansatz(d: int, half_space: bool = False) -> SupersolutionAnsatz:
    if half_space:
        return SupersolutionAnsatz(prefactors=[LastCoord()], power=-d / 2.0)
    return SupersolutionAnsatz(power=-(d - 2) / 2.0)


def run_identity_batch(
    which: str,
    d: int,
    count: int = 50,
    seed: int = 0,
    poles: Optional[Sequence[Sequence[float]]] = None,
    half_space: bool = False,
) -> List[Union[IdentityCheck, InequalityCheck]]:
    """`count` independent random test functions, deterministic in (seed, index)."""
    if which not in IDENTITIES + INEQUALITIES:
        raise ValueError(f"unknown identity or inequality {which!r}")
    if which == "pushu" and poles is None:
        poles = default_ball_poles(d, 2)
    avoid = list(poles) if (which == "pushu" and poles is not None) else []

    def one(i: int):
        rng = np.random.default_rng([seed, i])
        if which == "ident_ip2" and i % 2 == 1:
            u = random_radial_test_function(d, rng, index=i)
        else:
            u = random_test_function(d, rng, avoid=avoid, half_space=half_space, index=i)
        if which == "expansion_square":
            return check_expansion_square(u, d)
        if which == "geni":
            return check_geni(u, default_geni_ansatz(d, half_space), d)
        if which == "second_derivative_sum":
            return check_second_derivative_sum(u, d)
        if which == "ident_ip2":
            return check_ident_ip2(u, d)
        return check_inequality(u, which, d, poles=poles)

    results = ordered_map(one, range(count))
    failed = sum(1 for r in results if not r.passed)
    logger.info("%s d=%d: %d functions, %d failed", which, d, count, failed)
    return results
