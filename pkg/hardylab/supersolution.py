# hardylab/supersolution.py
"""
Super-solution certificates: for a pair (W, phi) with phi > 0, sample the
residual -Delta phi - W phi (or Delta^2 phi - W phi for fourth order) on a
grid and report its sign. A certificate is sample evidence, not a proof.

Derivatives come in closed form for pure powers, x_d |x|^alpha and pole
products; everything else goes through a Romberg finite-difference table.
"""
import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from hardylab import config
from hardylab.errors import (
    DimensionMismatch,
    DimensionTooSmall,
    PoleHit,
    PositivityViolation,
    UnsupportedOrder,
)
from hardylab.geometry import contains, potential_eval_many, sample_directions
from hardylab.models import (
    BallIntersection,
    BallWeight,
    Certificate,
    ConditionSummary,
    DomainSpec,
    ExteriorBall,
    FallLocal,
    GridSpec,
    InverseQuartic,
    InverseSquare,
    LastCoord,
    OnePrefactor,
    PoleProduct,
    PotentialSpec,
    RadialShells,
    AngularSampling,
    SupersolutionAnsatz,
    WholeSpace,
)
from hardylab.utils.pool import ordered_map

logger = logging.getLogger("hardylab.supersolution")

FD_BASE_STEP = 0.02
CLOSED_FORM_TOL = 1e-8
FD_SAFETY = 100.0
INCONCLUSIVE_TOL = 1e-3
DEFAULT_FALL_RADIUS = 1e-3
CHUNK = 4096


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------
def laplacian_power(d: int, alpha: float, r):
    """Delta |x|^alpha = alpha (alpha + d - 2) |x|^(alpha - 2)."""
    return alpha * (alpha + d - 2) * np.power(r, alpha - 2)


def bilaplacian_power(d: int, alpha: float, r):
    """Delta^2 |x|^alpha = alpha (alpha-2) (alpha+d-2) (alpha+d-4) |x|^(alpha-4)."""
    return alpha * (alpha - 2) * (alpha + d - 2) * (alpha + d - 4) * np.power(r, alpha - 4)


def laplacian_halfspace_ansatz(d: int, alpha: float, x):
    """Delta (x_d |x|^alpha) = alpha (alpha + d) x_d |x|^(alpha - 2)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    return alpha * (alpha + d) * x[..., -1] * np.power(r, alpha - 2)


# ---------------------------------------------------------------------------
# finite differences (Romberg over h0, h0/2, h0/4)
# ---------------------------------------------------------------------------
def _romberg(D: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    r1a = (4.0 * D[1] - D[0]) / 3.0
    r1b = (4.0 * D[2] - D[1]) / 3.0
    r2 = (16.0 * r1b - r1a) / 15.0
    return r2, np.abs(r2 - r1b)


def fd_laplacian(
    func: Callable[[np.ndarray], np.ndarray],
    X: np.ndarray,
    scale: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Laplacian of a vectorised func at the rows of X; returns (values, error estimates)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, d = X.shape
    h0 = FD_BASE_STEP * np.broadcast_to(np.asarray(scale, dtype=float), (N,))
    f0 = func(X)
    D = []
    for k in range(3):
        h = h0 / 2 ** k
        acc = -2.0 * d * f0
        for j in range(d):
            shift = np.zeros_like(X)
            shift[:, j] = h
            acc = acc + func(X + shift) + func(X - shift)
        D.append(acc / h ** 2)
    return _romberg(D)


def fd_gradient(
    func: Callable[[np.ndarray], np.ndarray],
    X: np.ndarray,
    scale: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, d = X.shape
    h0 = FD_BASE_STEP * np.broadcast_to(np.asarray(scale, dtype=float), (N,))
    grad = np.empty((N, d))
    err = np.zeros(N)
    for j in range(d):
        D = []
        for k in range(3):
            h = h0 / 2 ** k
            shift = np.zeros_like(X)
            shift[:, j] = h
            D.append((func(X + shift) - func(X - shift)) / (2.0 * h))
        grad[:, j], e = _romberg(D)
        err = np.maximum(err, e)
    return grad, err


# ---------------------------------------------------------------------------
# ansatz evaluation
# ---------------------------------------------------------------------------
def _closed_form_kind(phi: SupersolutionAnsatz) -> Optional[str]:
    if phi.log_half_power or phi.exp_rho_coeff is not None:
        return None
    nt = phi.nontrivial_prefactors
    if not nt:
        return "power"
    if len(nt) == 1 and isinstance(nt[0], LastCoord):
        return "last_coord"
    if len(nt) == 1 and isinstance(nt[0], PoleProduct) and phi.power == 0.0:
        return "pole_product"
    return None


def _fall_rho(pre: FallLocal, X: np.ndarray) -> np.ndarray:
    c = np.asarray(pre.domain.center)
    return np.linalg.norm(X - c, axis=1) - pre.domain.radius


def ansatz_value_many(phi: SupersolutionAnsatz, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.ones(X.shape[0])
    for pre in phi.prefactors:
        if isinstance(pre, OnePrefactor):
            continue
        if isinstance(pre, LastCoord):
            out = out * X[:, -1]
        elif isinstance(pre, BallWeight):
            c = np.asarray(pre.center)
            out = out * (pre.radius ** 2 - np.sum((X - c) ** 2, axis=1))
        elif isinstance(pre, PoleProduct):
            for a, beta in zip(pre.poles.points, pre.exponents):
                out = out * np.power(np.linalg.norm(X - np.asarray(a), axis=1), beta)
        elif isinstance(pre, FallLocal):
            out = out * _fall_rho(pre, X)
    r = np.linalg.norm(X, axis=1)
    if phi.power != 0.0:
        out = out * np.power(r, phi.power)
    if phi.log_half_power:
        L = -np.log(r)
        out = out * np.sqrt(np.where(L > 0, L, 0.0))
    if phi.exp_rho_coeff is not None:
        out = out * np.exp(phi.exp_rho_coeff * _fall_rho(phi.fall_local, X))
    return out


def singular_scale(phi: SupersolutionAnsatz, X) -> np.ndarray:
    """Distance from each row of X to the nearest point where phi is not smooth."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r = np.linalg.norm(X, axis=1)
    dist = np.full(X.shape[0], np.inf)
    if phi.origin_singular or phi.fall_local is not None:
        dist = np.minimum(dist, r)
    if phi.log_half_power:
        dist = np.minimum(dist, np.abs(r - 1.0))
    for a in phi.pole_points():
        dist = np.minimum(dist, np.linalg.norm(X - np.asarray(a), axis=1))
    return np.where(np.isfinite(dist), dist, np.maximum(r, 1.0))


def _pole_product_log_gradient(pre: PoleProduct, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    G = np.zeros_like(X)
    inv_sq = np.zeros(X.shape[0])
    for a, beta in zip(pre.poles.points, pre.exponents):
        y = X - np.asarray(a)
        r2 = np.sum(y * y, axis=1)
        G += beta * y / r2[:, None]
        inv_sq += beta / r2
    return G, inv_sq


def ansatz_gradient_many(phi: SupersolutionAnsatz, X) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    kind = _closed_form_kind(phi)
    d = X.shape[1]
    if kind == "power":
        r = np.linalg.norm(X, axis=1)
        grad = (phi.power * np.power(r, phi.power - 2))[:, None] * X
        return grad, np.zeros(len(X))
    if kind == "last_coord":
        r = np.linalg.norm(X, axis=1)
        a = phi.power
        grad = (a * X[:, -1] * np.power(r, a - 2))[:, None] * X
        grad[:, -1] += np.power(r, a)
        return grad, np.zeros(len(X))
    if kind == "pole_product":
        pre = phi.nontrivial_prefactors[0]
        G, _ = _pole_product_log_gradient(pre, X)
        return ansatz_value_many(phi, X)[:, None] * G, np.zeros(len(X))
    return fd_gradient(lambda Y: ansatz_value_many(phi, Y), X, singular_scale(phi, X))


def ansatz_laplacian_many(phi: SupersolutionAnsatz, X) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    kind = _closed_form_kind(phi)
    d = X.shape[1]
    if kind == "power":
        r = np.linalg.norm(X, axis=1)
        return laplacian_power(d, phi.power, r), np.zeros(len(X))
    if kind == "last_coord":
        return laplacian_halfspace_ansatz(d, phi.power, X), np.zeros(len(X))
    if kind == "pole_product":
        pre = phi.nontrivial_prefactors[0]
        G, inv_sq = _pole_product_log_gradient(pre, X)
        val = ansatz_value_many(phi, X)
        return val * (np.sum(G * G, axis=1) + (d - 2) * inv_sq), np.zeros(len(X))
    return fd_laplacian(lambda Y: ansatz_value_many(phi, Y), X, singular_scale(phi, X))


def ansatz_bilaplacian_many(phi: SupersolutionAnsatz, X) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if _closed_form_kind(phi) != "power":
        raise UnsupportedOrder("fourth-order derivatives are available for pure powers |x|^alpha only")
    r = np.linalg.norm(X, axis=1)
    return bilaplacian_power(X.shape[1], phi.power, r), np.zeros(len(X))


def _check_not_singular(phi: SupersolutionAnsatz, X: np.ndarray) -> None:
    pts = list(phi.pole_points())
    if phi.origin_singular or phi.fall_local is not None:
        pts.append(tuple([0.0] * X.shape[1]))
    for a in pts:
        dist = np.linalg.norm(X - np.asarray(a), axis=1)
        if np.any(dist < config.POLE_EXCLUSION):
            raise PoleHit(f"evaluation point within {config.POLE_EXCLUSION:g} of singular point {a}")


def ansatz_eval(phi: SupersolutionAnsatz, x, derivative_order: int = 0) -> Tuple[float, float]:
    """
    phi(x), Delta phi(x) or Delta^2 phi(x) at a single point, with an error
    estimate (zero for closed forms).
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    _check_not_singular(phi, X)
    if derivative_order == 0:
        return float(ansatz_value_many(phi, X)[0]), 0.0
    if derivative_order == 2:
        v, e = ansatz_laplacian_many(phi, X)
        return float(v[0]), float(e[0])
    if derivative_order == 4:
        v, e = ansatz_bilaplacian_many(phi, X)
        return float(v[0]), float(e[0])
    raise UnsupportedOrder(f"derivative order {derivative_order} (supported: 0, 2, 4)")


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------
def grid_points(grid: GridSpec, d: int) -> np.ndarray:
    rad = grid.radial
    if rad.spacing == "log":
        radii = np.geomspace(rad.lo, rad.hi, rad.shells)
    else:
        radii = np.linspace(rad.lo, rad.hi, rad.shells)
    dirs = sample_directions(d, grid.angular.directions, seed=grid.angular.seed)
    center = np.zeros(d) if grid.center is None else np.asarray(grid.center, dtype=float)
    if center.size != d:
        raise DimensionMismatch(f"grid center has dimension {center.size}, expected {d}")
    return center + (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)


def _select_samples(domain: DomainSpec, X: np.ndarray) -> np.ndarray:
    mask = contains(domain, X)
    dropped = int((~mask).sum())
    if dropped:
        logger.info("dropped %d of %d grid points outside %s", dropped, len(X), domain.kind)
    return X[mask]


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------
def _summarise(
    residual: np.ndarray,
    tol: np.ndarray,
    grid: GridSpec,
    conditions: Optional[Dict[str, ConditionSummary]] = None,
) -> Certificate:
    n = int(residual.size)
    if n == 0:
        logger.warning("certificate has no samples inside the domain")
        return Certificate(
            min_residual=0.0, max_residual=0.0, samples_checked=0,
            grid_descriptor=grid.describe(), verdict="Inconclusive",
            tolerance=0.0, conditions=conditions or {},
        )
    tolerance = float(tol.max())
    min_res, max_res = float(residual.min()), float(residual.max())
    if min_res < -tolerance:
        verdict = "Violated"
    elif tolerance > INCONCLUSIVE_TOL:
        verdict = "Inconclusive"
    else:
        verdict = "CertifiedNonnegative"
    logger.info(
        "certificate: %d samples min=%.3e max=%.3e tol=%.1e -> %s",
        n, min_res, max_res, tolerance, verdict,
    )
    return Certificate(
        min_residual=min_res,
        max_residual=max_res,
        samples_checked=n,
        grid_descriptor=grid.describe(),
        verdict=verdict,
        tolerance=tolerance,
        conditions=conditions or {},
    )


def _hardy_residual_chunk(W: PotentialSpec, phi: SupersolutionAnsatz, X: np.ndarray):
    val = ansatz_value_many(phi, X)
    if np.any(val <= 0):
        i = int(np.argmin(val))
        raise PositivityViolation(f"phi({X[i].tolist()}) = {val[i]:.3e} is not positive")
    lap, err = ansatz_laplacian_many(phi, X)
    wphi = potential_eval_many(W, X) * val
    norm = np.abs(lap) + np.abs(wphi)
    residual = (-lap - wphi) / norm
    tol = np.maximum(CLOSED_FORM_TOL, FD_SAFETY * err / norm)
    return residual, tol


def _chunks(X: np.ndarray) -> List[np.ndarray]:
    return [X[i:i + CHUNK] for i in range(0, len(X), CHUNK)]


def _gather(parts) -> Tuple[np.ndarray, np.ndarray]:
    if not parts:
        return np.empty(0), np.empty(0)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def certify_hardy(
    W: PotentialSpec,
    phi: SupersolutionAnsatz,
    grid: GridSpec,
    domain: Optional[DomainSpec] = None,
) -> Certificate:
    """Sign of -Delta phi - W phi, normalised by |Delta phi| + |W phi|, over the grid."""
    d = W.dim
    domain = domain or WholeSpace(d=d)
    if domain.dim != d:
        raise DimensionMismatch(f"domain dimension {domain.dim} does not match potential dimension {d}")
    X = _select_samples(domain, grid_points(grid, d))
    _check_not_singular(phi, X)
    # potential poles raise PoleHit inside potential_eval_many
    parts = ordered_map(lambda chunk: _hardy_residual_chunk(W, phi, chunk), _chunks(X))
    residual, tol = _gather(parts)
    return _summarise(residual, tol, grid)


def _rellich_chunk(W: InverseQuartic, phi: SupersolutionAnsatz, X: np.ndarray):
    val = ansatz_value_many(phi, X)
    if np.any(val <= 0):
        i = int(np.argmin(val))
        raise PositivityViolation(f"phi({X[i].tolist()}) = {val[i]:.3e} is not positive")
    bilap, _ = ansatz_bilaplacian_many(phi, X)
    lap, _ = ansatz_laplacian_many(phi, X)
    wphi = potential_eval_many(W, X) * val
    fourth = (bilap - wphi) / (np.abs(bilap) + np.abs(wphi))
    r2 = np.sum(X * X, axis=1)
    sign = -lap / (np.abs(lap) + val / r2)
    positive = val / (val + r2 * np.abs(lap))
    return fourth, sign, positive


def certify_rellich(W: PotentialSpec, phi: SupersolutionAnsatz, grid: GridSpec) -> Certificate:
    """
    Fourth-order certificate: Delta^2 phi - W phi >= 0, -Delta phi >= 0 and
    phi > 0 at every sample.
    """
    if not isinstance(W, InverseQuartic):
        raise ValueError("Rellich certificates take an inverse-quartic weight")
    d = W.dim
    if d < 5:
        raise DimensionTooSmall(f"Rellich certificate needs d >= 5, got {d}")
    if _closed_form_kind(phi) != "power":
        raise UnsupportedOrder("fourth-order certificate needs phi = |x|^alpha")
    X = grid_points(grid, d)
    _check_not_singular(phi, X)
    parts = ordered_map(lambda chunk: _rellich_chunk(W, phi, chunk), _chunks(X))
    fourth, sign = _gather([p[:2] for p in parts])
    positive = np.concatenate([p[2] for p in parts]) if parts else np.empty(0)
    both = np.concatenate([fourth, sign])
    conditions = {
        "fourth_order": ConditionSummary(min_residual=float(fourth.min()), max_residual=float(fourth.max())),
        "laplacian_sign": ConditionSummary(min_residual=float(sign.min()), max_residual=float(sign.max())),
        "positivity": ConditionSummary(min_residual=float(positive.min()), max_residual=float(positive.max())),
    }
    return _summarise(both, np.full(both.shape, CLOSED_FORM_TOL), grid, conditions)


def fall_local_pair(d: int) -> Tuple[InverseSquare, SupersolutionAnsatz, ExteriorBall]:
    """
    The simplified local pair for the exterior of B_1(-e_d):
    W = d^2 / (4 |x|^2), phi = rho |x|^{-d/2} exp((1-d) rho) log(1/|x|)^{1/2}.
    """
    origin = tuple([0.0] * d)
    center = tuple([0.0] * (d - 1) + [-1.0])
    omega = ExteriorBall(center=center, radius=1.0)
    W = InverseSquare(pole=origin, scale=d * d / 4.0)
    phi = SupersolutionAnsatz(
        prefactors=[FallLocal(domain=omega)],
        power=-d / 2.0,
        log_half_power=True,
        exp_rho_coeff=1.0 - d,
    )
    return W, phi, omega


def default_fall_grid(r: float, seed: int = 0) -> GridSpec:
    """64 log shells on [r/1000, r) times 128 directions."""
    return GridSpec(
        radial=RadialShells(lo=r * 1e-3, hi=r * (1.0 - 1e-6), shells=64, spacing="log"),
        angular=AngularSampling(directions=128, seed=seed),
    )


def certify_fall_local(d: int, r: float = DEFAULT_FALL_RADIUS, grid: Optional[GridSpec] = None) -> Certificate:
    """
    Certificate for the local pair on Omega intersected with B_r(0). Grid points
    outside that set are dropped; the default grid is default_fall_grid(r).
    """
    if d < 2:
        raise DimensionTooSmall("fall-type check needs d >= 2")
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    W, phi, omega = fall_local_pair(d)
    grid = grid or default_fall_grid(r)
    logger.info("fall-local certificate d=%d r=%g", d, r)
    return certify_hardy(W, phi, grid, domain=BallIntersection(inner=omega, radius=r))
