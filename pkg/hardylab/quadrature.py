# hardylab/quadrature.py
"""
Integration with error estimates for singular integrands.

- integrate_1d: adaptive Gauss-Kronrod (QUADPACK) with endpoint extrapolation;
  infinite upper limits are mapped onto [0, 1).
- radial_integral / sphere_area / angular_moment: polar reduction.
- integrate_nd: scrambled Sobol replicates over a box with small balls around
  singular points removed and replaced by their power-law mass.
- ball_cubature: tensor Gauss-Jacobi rule on a ball, exact for polynomials.
"""
import logging
import math
from typing import Callable, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from hardylab import config
from hardylab.errors import ExponentMissing, MaxSubdivisions, NonIntegrable
from hardylab.geometry import sample_directions
from hardylab.models import Exclusion, IntegralResult

logger = logging.getLogger("hardylab.quadrature")

DEFAULT_TOL_1D = 1e-10
MAX_SUBDIVISIONS = 200
DEFAULT_SAMPLES = 2 ** 16
DEFAULT_BATCHES = 8
SPHERE_SAMPLES = 4096
# below this radius (relative to the box diameter) an exclusion needs no exponent
NEGLIGIBLE_EXCLUSION = 1e-12
ND_CHUNK = 1 << 15

AngularMoment = Literal["one", "last_coord_sq", "half_one", "half_last_coord_sq"]


# ---------------------------------------------------------------------------
# 1-D
# ---------------------------------------------------------------------------
def integrate_1d(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL_1D,
    points: Optional[Sequence[float]] = None,
    limit: int = MAX_SUBDIVISIONS,
) -> IntegralResult:
    """
    Integrate f over (a, b); b may be +inf. Integrable endpoint singularities
    are fine since nodes never touch the endpoints.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")

    if math.isinf(b):
        def g(t):
            one_minus = 1.0 - t
            return f(a + t / one_minus) / (one_minus * one_minus)

        lo, hi = 0.0, 1.0
        brk = None
        if points:
            brk = sorted((p - a) / (1.0 + p - a) for p in points if a < p)
    else:
        g, lo, hi = f, a, b
        brk = sorted(p for p in points if a < p < b) if points else None

    out = integrate.quad(
        g, lo, hi,
        epsabs=tol, epsrel=tol,
        limit=limit,
        points=brk or None,
        full_output=1,
    )
    value, abserr, info = out[0], out[1], out[2]
    neval = int(info.get("neval", 0))

    if len(out) > 3:
        message = out[3]
        if info.get("last", 0) >= limit or "maximum number of subdivisions" in str(message):
            logger.warning("quad hit %d subdivisions on [%g, %g]: %s", limit, a, b, message)
            raise MaxSubdivisions(
                f"subdivision limit {limit} reached before tolerance {tol:.1e} "
                f"(estimate {value:.6g} +/- {abserr:.2e})"
            )
        # roundoff-limited: accept only if the estimate is still usable
        if abserr > 1e3 * tol * max(1.0, abs(value)):
            raise MaxSubdivisions(f"quadrature failed on [{a}, {b}]: {message}")
        logger.info("quad accepted with warning on [%g, %g]: %s", a, b, message)

    return IntegralResult(value=float(value), error_estimate=float(abserr), evaluations=neval)


def sphere_area(d: int) -> float:
    """|S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return 2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0)


def angular_moment(d: int, kind: AngularMoment) -> float:
    """
    Integrals over the unit sphere (or upper half-sphere) of 1 and sigma_d^2.
    """
    area = sphere_area(d)
    if kind == "one":
        return area
    if kind == "last_coord_sq":
        return area / d
    if kind == "half_one":
        return area / 2.0
    if kind == "half_last_coord_sq":
        return area / (2.0 * d)
    raise ValueError(f"unknown angular moment {kind!r}")


def radial_integral(
    g: Callable[[float], float],
    d: int,
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL_1D,
    points: Optional[Sequence[float]] = None,
) -> IntegralResult:
    """Integral over the shell lo < |x| < hi of the radial function g."""
    res = integrate_1d(lambda r: g(r) * r ** (d - 1), lo, hi, tol=tol, points=points)
    area = sphere_area(d)
    return IntegralResult(
        value=area * res.value,
        error_estimate=area * res.error_estimate,
        evaluations=res.evaluations,
    )


# ---------------------------------------------------------------------------
# n-D Monte Carlo with excluded singular balls
# ---------------------------------------------------------------------------
def _excluded_mass(
    f: Callable[[np.ndarray], np.ndarray],
    ex: Exclusion,
    lo: np.ndarray,
    hi: np.ndarray,
    seed: int,
) -> Tuple[float, float]:
    """
    Mass of f inside the exclusion ball assuming f ~ A(sigma) s^p there:
    delta^d / (p + d) * integral over the sphere of f(center + delta sigma).
    """
    d = lo.size
    p = ex.exponent
    if p + d <= 0:
        raise NonIntegrable(
            f"local exponent {p} at {ex.center} is not integrable in d={d} (needs p > -d)"
        )
    dirs = sample_directions(d, SPHERE_SAMPLES, seed=seed)
    pts = np.asarray(ex.center) + ex.radius * dirs
    inside = np.all((pts >= lo) & (pts <= hi), axis=1)
    vals = np.zeros(len(pts))
    if inside.any():
        vals[inside] = f(pts[inside])
    area = sphere_area(d)
    scale = ex.radius ** d / (p + d) * area
    mass = scale * float(np.mean(vals))
    err = scale * float(np.std(vals)) / math.sqrt(len(vals))
    return mass, err


def integrate_nd(
    f: Callable[[np.ndarray], np.ndarray],
    box: Tuple[Sequence[float], Sequence[float]],
    exclusions: Sequence[Exclusion] = (),
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    batches: int = DEFAULT_BATCHES,
) -> IntegralResult:
    """
    Integrate a vectorised integrand f: (N, d) -> (N,) over an axis-aligned box.

    Samples inside an exclusion ball are never evaluated; the ball's content is
    restored from the declared local exponent. The error estimate is the
    standard error across independently scrambled Sobol replicates.
    """
    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    if lo.shape != hi.shape or np.any(hi <= lo):
        raise ValueError("box must satisfy lo < hi componentwise")
    d = lo.size
    diameter = float(np.linalg.norm(hi - lo))

    for ex in exclusions:
        if len(ex.center) != d:
            raise ValueError("exclusion center dimension does not match the box")
        if ex.exponent is None and ex.radius > NEGLIGIBLE_EXCLUSION * diameter:
            raise ExponentMissing(
                f"exclusion at {ex.center} (radius {ex.radius:g}) has no local exponent"
            )

    per_batch = max(1, n_samples // batches)
    m = int(math.ceil(math.log2(per_batch)))
    volume = float(np.prod(hi - lo))
    centers = np.asarray([ex.center for ex in exclusions], dtype=float).reshape(-1, d)
    radii = np.asarray([ex.radius for ex in exclusions], dtype=float)

    seeds = np.random.SeedSequence(seed).spawn(batches + len(exclusions))
    estimates = []
    evaluations = 0
    for b in range(batches):
        sampler = qmc.Sobol(d=d, scramble=True, seed=np.random.default_rng(seeds[b]))
        U = sampler.random_base2(m=m)
        X = lo + U * (hi - lo)
        total = 0.0
        for start in range(0, len(X), ND_CHUNK):
            chunk = X[start:start + ND_CHUNK]
            keep = np.ones(len(chunk), dtype=bool)
            if len(radii):
                dist = np.linalg.norm(chunk[:, None, :] - centers[None, :, :], axis=2)
                keep = np.all(dist >= radii[None, :], axis=1)
            if keep.any():
                total += float(np.sum(f(chunk[keep])))
                evaluations += int(keep.sum())
        estimates.append(volume * total / len(X))

    estimates = np.asarray(estimates)
    value = float(np.mean(estimates))
    err = float(np.std(estimates, ddof=1) / math.sqrt(batches)) if batches > 1 else abs(value)

    excluded = 0.0
    for k, ex in enumerate(exclusions):
        if ex.exponent is None:
            continue
        mass, mass_err = _excluded_mass(f, ex, lo, hi, seed=int(seeds[batches + k].generate_state(1)[0]))
        excluded += mass
        err = math.hypot(err, mass_err)
        evaluations += SPHERE_SAMPLES

    logger.info(
        "integrate_nd d=%d samples=%d batches=%d value=%.6g err=%.2e excluded=%.3g",
        d, batches * 2 ** m, batches, value + excluded, err, excluded,
    )
    return IntegralResult(
        value=value + excluded,
        error_estimate=err,
        evaluations=evaluations,
        excluded_mass=excluded,
    )


def default_exclusion_radius(box: Tuple[Sequence[float], Sequence[float]]) -> float:
    lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    return config.ND_EXCLUSION * float(np.linalg.norm(hi - lo))


# ---------------------------------------------------------------------------
# exact cubature on a ball
# ---------------------------------------------------------------------------
def _sphere_rule(d: int, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Product rule on S^{d-1} exact for polynomials of total degree <= degree."""
    m = degree + 1
    if d == 2:
        phi = 2.0 * np.pi * np.arange(m) / m
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(m, 2.0 * np.pi / m)
    # sigma = (t, sqrt(1-t^2) omega), d sigma = (1-t^2)^{(d-3)/2} dt d omega
    n_t = degree // 2 + 1
    a = (d - 3) / 2.0
    t, wt = special.roots_jacobi(n_t, a, a)
    sub_pts, sub_w = _sphere_rule(d - 1, degree)
    s = np.sqrt(1.0 - t * t)
    pts = np.concatenate(
        [np.column_stack([np.full(len(sub_pts), ti), si * sub_pts]) for ti, si in zip(t, s)]
    )
    w = np.concatenate([wi * sub_w for wi in wt])
    return pts, w


def ball_cubature(
    d: int,
    center: Sequence[float],
    radius: float,
    degree: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights on B_radius(center), exact for polynomials of total
    degree <= `degree`.
    """
    if d < 2:
        raise ValueError("ball cubature needs d >= 2")
    n_r = degree // 2 + 1
    # rho = radius (1 + tau) / 2, rho^{d-1} d rho ~ (1 + tau)^{d-1} d tau
    tau, w_tau = special.roots_jacobi(n_r, 0.0, d - 1.0)
    rho = radius * (1.0 + tau) / 2.0
    w_rho = w_tau * (radius / 2.0) ** d
    dirs, w_dir = _sphere_rule(d, degree)
    pts = np.asarray(center, dtype=float) + (rho[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    weights = (w_rho[:, None] * w_dir[None, :]).reshape(-1)
    return pts, weights
