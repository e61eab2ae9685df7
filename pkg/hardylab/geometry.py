# hardylab/geometry.py
import logging
from typing import List, Sequence, Union

import numpy as np
from scipy.stats import norm, qmc

from hardylab import config
from hardylab.errors import DegeneratePoles, DimensionMismatch, PoleHit, UnsupportedDomain
from hardylab.models import (
    Ball,
    BallIntersection,
    DomainSpec,
    ExteriorBall,
    HalfSpace,
    InverseQuartic,
    InverseSquare,
    Multipolar,
    MultipolarSum,
    PoleSet,
    PotentialSpec,
    WholeSpace,
)

logger = logging.getLogger("hardylab.geometry")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------
def _as_points(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[-1] != d:
        raise DimensionMismatch(f"expected points in R^{d}, got shape {X.shape}")
    return X


def _pole_array(poles: Union[PoleSet, Sequence[Sequence[float]], np.ndarray]) -> np.ndarray:
    if isinstance(poles, PoleSet):
        return np.asarray(poles.points, dtype=float)
    return np.atleast_2d(np.asarray(poles, dtype=float))


def potential_poles(V: PotentialSpec) -> np.ndarray:
    if isinstance(V, (InverseSquare, InverseQuartic)):
        return np.asarray([V.pole], dtype=float)
    return _pole_array(V.poles)


def _squared_distances(X: np.ndarray, A: np.ndarray) -> np.ndarray:
    # (N, n) matrix of |x - a_i|^2
    diff = X[:, None, :] - A[None, :, :]
    return np.einsum("nik,nik->ni", diff, diff)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------
def potential_eval_many(V: PotentialSpec, X, exclusion: float = None) -> np.ndarray:
    """Vectorised potential; raises PoleHit if any point sits within `exclusion` of a pole."""
    exclusion = config.POLE_EXCLUSION if exclusion is None else exclusion
    A = potential_poles(V)
    X = _as_points(X, A.shape[1])
    r2 = _squared_distances(X, A)

    closest = np.sqrt(r2.min(axis=1))
    if np.any(closest < exclusion):
        i = int(np.argmin(closest))
        raise PoleHit(
            f"point {X[i].tolist()} is {closest[i]:.3e} from a pole (exclusion {exclusion:.1e})"
        )

    if isinstance(V, InverseSquare):
        return V.scale / r2[:, 0]
    if isinstance(V, InverseQuartic):
        return V.scale / r2[:, 0] ** 2
    if isinstance(V, MultipolarSum):
        return V.scale * np.sum(1.0 / r2, axis=1)
    if isinstance(V, Multipolar):
        n = A.shape[0]
        pair_d2 = _squared_distances(A, A)
        total = np.zeros(X.shape[0])
        for i in range(n):
            for j in range(i + 1, n):
                total += pair_d2[i, j] / (r2[:, i] * r2[:, j])
        return V.scale * total
    raise TypeError(f"unknown potential {type(V).__name__}")


def potential_eval(V: PotentialSpec, x) -> float:
    return float(potential_eval_many(V, np.asarray(x, dtype=float))[0])


def pole_separation(poles) -> float:
    """Half the minimum pairwise distance between distinct poles."""
    A = _pole_array(poles)
    n = A.shape[0]
    if n < 2:
        raise DegeneratePoles("pole separation needs at least two poles")
    d2 = _squared_distances(A, A)
    iu = np.triu_indices(n, k=1)
    sep = float(np.sqrt(d2[iu].min()))
    if sep == 0.0:
        raise DegeneratePoles("coincident poles")
    return 0.5 * sep


def multipolar_identity_residual(poles, X) -> np.ndarray:
    """
    n * sum_i 1/|x-a_i|^2 - sum_{i<j} |a_i-a_j|^2/(|x-a_i|^2 |x-a_j|^2)
        - |sum_i (x-a_i)/|x-a_i|^2|^2

    Vanishes identically; used to validate the multipolar potential.
    """
    A = _pole_array(poles)
    X = _as_points(X, A.shape[1])
    n = A.shape[0]
    r2 = _squared_distances(X, A)
    v = potential_eval_many(Multipolar(poles=PoleSet(points=[tuple(a) for a in A]), scale=1.0), X)
    grad_sum = np.einsum("nik,ni->nk", X[:, None, :] - A[None, :, :], 1.0 / r2)
    return n * np.sum(1.0 / r2, axis=1) - v - np.einsum("nk,nk->n", grad_sum, grad_sum)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------
def distance_to_boundary_many(domain: DomainSpec, X) -> np.ndarray:
    if isinstance(domain, HalfSpace):
        X = _as_points(X, domain.d)
        return np.abs(X[:, -1])
    if isinstance(domain, (Ball, ExteriorBall)):
        c = np.asarray(domain.center)
        X = _as_points(X, c.size)
        return np.abs(np.linalg.norm(X - c, axis=1) - domain.radius)
    raise UnsupportedDomain(f"distance to boundary is not defined for {domain.kind}")


def distance_to_boundary(domain: DomainSpec, x) -> float:
    return float(distance_to_boundary_many(domain, x)[0])


def contains(domain: DomainSpec, X) -> np.ndarray:
    """Boolean mask of points in the open domain."""
    if isinstance(domain, WholeSpace):
        X = _as_points(X, domain.d)
        return np.ones(X.shape[0], dtype=bool)
    if isinstance(domain, HalfSpace):
        X = _as_points(X, domain.d)
        return X[:, -1] > 0
    if isinstance(domain, Ball):
        c = np.asarray(domain.center)
        X = _as_points(X, c.size)
        return np.linalg.norm(X - c, axis=1) < domain.radius
    if isinstance(domain, ExteriorBall):
        c = np.asarray(domain.center)
        X = _as_points(X, c.size)
        return np.linalg.norm(X - c, axis=1) > domain.radius
    if isinstance(domain, BallIntersection):
        X = _as_points(X, domain.dim)
        return contains(domain.inner, X) & (np.linalg.norm(X, axis=1) < domain.radius)
    raise UnsupportedDomain(f"unknown domain {type(domain).__name__}")


def domain_dimension(domain: DomainSpec) -> int:
    return domain.dim


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------
def sample_directions(d: int, n: int, seed: int = 0) -> np.ndarray:
    """
    n unit vectors in R^d from a scrambled Sobol sequence pushed through the
    Gaussian inverse CDF. Deterministic for a given seed.
    """
    if d < 2:
        raise DimensionMismatch("directions need d >= 2")
    m = max(0, int(np.ceil(np.log2(max(n, 1)))))
    sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
    U = sampler.random_base2(m=m)[:n]
    U = np.clip(U, 1e-12, 1 - 1e-12)
    G = norm.ppf(U)
    lengths = np.linalg.norm(G, axis=1, keepdims=True)
    return G / lengths


def default_ball_poles(d: int, n: int, radius: float = 1.0) -> List[tuple]:
    """
    n well-separated points on the sphere of the given radius: the vertices of
    a regular simplex when n <= d + 1, otherwise a deterministic Fibonacci-type
    spread (d = 3) or Sobol directions.
    """
    if n < 1:
        raise ValueError("need at least one pole")
    if n <= d + 1:
        # regular simplex: center the standard basis of R^n, embed in R^d
        E = np.eye(n) - 1.0 / n
        if n == 1:
            P = np.zeros((1, d))
            P[0, 0] = 1.0
        else:
            U, S, _ = np.linalg.svd(E, full_matrices=False)
            coords = (U * S)[:, : n - 1]
            P = np.zeros((n, d))
            P[:, : n - 1] = coords
            P /= np.linalg.norm(P, axis=1, keepdims=True)
    elif d == 3:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        phi = np.pi * (1 + 5 ** 0.5) * k
        rho = np.sqrt(1 - z ** 2)
        P = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    else:
        P = sample_directions(d, n, seed=0)
    return [tuple(float(c) for c in radius * p) for p in P]
