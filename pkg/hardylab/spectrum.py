# hardylab/spectrum.py
"""
Discrete radial Hardy eigenproblem on [delta, R]:

    min  int u'^2 r^{d-1} dr / int u^2 r^{d-3} dr,   u(delta) = u(R) = 0

P1 elements on a (typically log-spaced) mesh; the smallest generalized
eigenvalue of the resulting tridiagonal pencil is found by inverse iteration.
Every estimate is an upper bound for the Dirichlet eigenvalue on [delta, R],
which itself decreases to (d-2)^2/4 as delta -> 0.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from hardylab.errors import DimensionTooSmall, MeshTooCoarse, NoConvergence
from hardylab.models import EigEstimate, RadialMesh

logger = logging.getLogger("hardylab.spectrum")

MIN_NODES = 8
EIG_TOL = 1e-10
MAX_ITER = 5000

# 4-point Gauss-Legendre on [-1, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


def log_mesh(nodes: int, delta: float, R: float) -> RadialMesh:
    if not 0 < delta < R:
        raise ValueError("need 0 < delta < R")
    return RadialMesh(nodes=tuple(np.geomspace(delta, R, nodes)))


def euler_dirichlet_reference(d: int, delta: float, R: float) -> float:
    """Exact smallest Dirichlet eigenvalue: (d-2)^2/4 + pi^2 / log(R/delta)^2."""
    return (d - 2) ** 2 / 4.0 + math.pi ** 2 / math.log(R / delta) ** 2


def assemble_forms(
    mesh: RadialMesh,
    stiffness_power: float,
    mass_power: float,
) -> Tuple[sparse.csc_matrix, sparse.csc_matrix]:
    """
    Stiffness int u'v' r^{stiffness_power} and mass int u v r^{mass_power}
    restricted to interior nodes (Dirichlet at both ends).
    """
    r = np.asarray(mesh.nodes)
    n = r.size
    if n < MIN_NODES:
        raise MeshTooCoarse(f"mesh has {n} nodes, at least {MIN_NODES} are required")
    a, b = r[:-1], r[1:]
    h = b - a

    # stiffness: exact integral of r^p over each element, divided by h^2
    p = stiffness_power
    if p == -1:
        k = np.log(b / a) / h ** 2
    else:
        k = (b ** (p + 1) - a ** (p + 1)) / ((p + 1) * h ** 2)

    # mass: Gauss quadrature of w(r) * hat functions
    rq = 0.5 * (a + b)[:, None] + 0.5 * h[:, None] * _GL_X[None, :]
    wq = 0.5 * h[:, None] * _GL_W[None, :] * rq ** mass_power
    left = (b[:, None] - rq) / h[:, None]
    right = (rq - a[:, None]) / h[:, None]
    m_ll = np.sum(wq * left * left, axis=1)
    m_rr = np.sum(wq * right * right, axis=1)
    m_lr = np.sum(wq * left * right, axis=1)

    A_diag = np.zeros(n)
    B_diag = np.zeros(n)
    A_diag[:-1] += k
    A_diag[1:] += k
    B_diag[:-1] += m_ll
    B_diag[1:] += m_rr
    A_off = -k
    B_off = m_lr

    # interior nodes 1..n-2
    A = sparse.diags([A_off[1:-1], A_diag[1:-1], A_off[1:-1]], [-1, 0, 1], format="csc")
    B = sparse.diags([B_off[1:-1], B_diag[1:-1], B_off[1:-1]], [-1, 0, 1], format="csc")
    return A, B


def assemble_hardy_forms(d: int, mesh: RadialMesh):
    return assemble_forms(mesh, d - 1, d - 3)


def smallest_generalized_eig(
    A,
    B,
    tol: float = EIG_TOL,
    max_iter: int = MAX_ITER,
    seed: Optional[int] = 0,
) -> EigEstimate:
    """
    Smallest eigenvalue of A u = mu B u (A, B symmetric positive definite) by
    inverse iteration with a sparse LU of A. Stops when
    ||A u - mu B u|| <= tol ||A u||.
    """
    A = sparse.csc_matrix(A)
    B = sparse.csc_matrix(B)
    n = A.shape[0]
    lu = splu(A)
    rng = np.random.default_rng(seed)
    # positive start overlaps the positive ground state
    x = 1.0 + 0.1 * rng.random(n)
    x /= math.sqrt(x @ (B @ x))

    rel = math.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(B @ x)
        y /= math.sqrt(y @ (B @ y))
        Ay = A @ y
        By = B @ y
        mu = float(y @ Ay)
        rel = float(np.linalg.norm(Ay - mu * By) / np.linalg.norm(Ay))
        if rel <= tol:
            logger.info("inverse iteration converged: mu=%.12g after %d steps", mu, it)
            return EigEstimate(value=mu, iterations=it, residual_norm=rel)
        x = y
        if it % 500 == 0:
            logger.info("inverse iteration step %d: mu=%.12g residual=%.2e", it, mu, rel)
    raise NoConvergence(f"inverse iteration did not reach {tol:.1e} in {max_iter} steps (residual {rel:.2e})")


def hardy_constant_estimate(d: int, mesh: RadialMesh, tol: float = EIG_TOL) -> EigEstimate:
    if d < 3:
        raise DimensionTooSmall("the radial Hardy problem needs d >= 3")
    A, B = assemble_hardy_forms(d, mesh)
    est = smallest_generalized_eig(A, B, tol=tol)
    logger.info(
        "hardy estimate d=%d nodes=%d delta=%g R=%g: %.10g",
        d, len(mesh.nodes), mesh.delta, mesh.R, est.value,
    )
    return est.model_copy(update={"mesh": mesh.describe()})
