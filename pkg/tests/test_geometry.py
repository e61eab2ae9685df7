import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardylab.errors import DegeneratePoles, PoleHit, UnsupportedDomain
from hardylab.geometry import (
    contains,
    default_ball_poles,
    distance_to_boundary,
    multipolar_identity_residual,
    pole_separation,
    potential_eval,
    potential_eval_many,
    sample_directions,
)
from hardylab.models import (
    Ball,
    BallIntersection,
    ExteriorBall,
    HalfSpace,
    InverseQuartic,
    InverseSquare,
    Multipolar,
    MultipolarSum,
    PoleSet,
    WholeSpace,
)

coord = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def multipolar(points, scale=1.0):
    return Multipolar(poles=PoleSet(points=[tuple(p) for p in points]), scale=scale)


# ---------- potentials ----------
def test_inverse_square_unit_point():
    V = InverseSquare(pole=(0.0, 0.0, 0.0), scale=1.0)
    assert potential_eval(V, [1.0, 0.0, 0.0]) == pytest.approx(1.0, rel=1e-15)


def test_inverse_quartic_scaled():
    V = InverseQuartic(pole=(0.0,) * 5, scale=2.0)
    assert potential_eval(V, [0.5, 0, 0, 0, 0]) == pytest.approx(2.0 / 0.0625, rel=1e-14)


def test_multipolar_two_poles_at_origin():
    V = multipolar([(1, 0, 0), (-1, 0, 0)])
    # |a1 - a2|^2 / (1 * 1)
    assert potential_eval(V, [0.0, 0.0, 0.0]) == pytest.approx(4.0, rel=1e-15)


def test_multipolar_sum():
    V = MultipolarSum(poles=PoleSet(points=[(1.0, 0.0), (-1.0, 0.0)]), scale=3.0)
    assert potential_eval(V, [0.0, 1.0]) == pytest.approx(3.0 * (0.5 + 0.5))


def test_pole_hit():
    V = InverseSquare(pole=(0.0, 0.0, 0.0), scale=1.0)
    with pytest.raises(PoleHit):
        potential_eval(V, [1e-12, 0.0, 0.0])


def test_multipolar_needs_two_poles():
    with pytest.raises(ValueError):
        multipolar([(1.0, 0.0, 0.0)])


def test_vectorised_matches_pointwise(rng):
    V = multipolar([(1, 0, 0), (0, 1, 0), (0, 0, 1)], scale=0.7)
    X = rng.uniform(-2, 2, size=(50, 3))
    many = potential_eval_many(V, X)
    single = np.array([potential_eval(V, x) for x in X])
    np.testing.assert_allclose(many, single, rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(coord, coord, coord), min_size=3, max_size=5, unique=True),
    st.tuples(coord, coord, coord),
    st.randoms(use_true_random=False),
)
def test_multipolar_permutation_symmetry(points, x, random):
    A = np.asarray(points)
    if pole_separation_or_none(A) is None:
        return
    x = np.asarray(x)
    if np.min(np.linalg.norm(A - x, axis=1)) < 1e-3:
        return
    perm = list(range(len(points)))
    random.shuffle(perm)
    v1 = potential_eval(multipolar(A), x)
    v2 = potential_eval(multipolar(A[perm]), x)
    assert v1 == pytest.approx(v2, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(coord, coord, coord), min_size=2, max_size=4, unique=True),
    st.tuples(coord, coord, coord),
    st.floats(min_value=0.1, max_value=10.0),
)
def test_multipolar_dilation_scaling(points, x, lam):
    A = np.asarray(points)
    if pole_separation_or_none(A) is None:
        return
    x = np.asarray(x)
    if np.min(np.linalg.norm(A - x, axis=1)) < 1e-2:
        return
    v = potential_eval(multipolar(A), x)
    v_scaled = potential_eval(multipolar(lam * A), lam * x)
    assert v_scaled == pytest.approx(v / lam ** 2, rel=1e-10)


def pole_separation_or_none(A):
    try:
        sep = pole_separation(A)
    except DegeneratePoles:
        return None
    return sep if sep > 1e-3 else None


def test_multipolar_identity_vanishes(rng):
    A = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [-1.0, -1.0, 0.5]])
    X = rng.uniform(-2, 2, size=(200, 3))
    res = multipolar_identity_residual(A, X)
    scale = np.sum(1.0 / np.sum((X[:, None, :] - A[None]) ** 2, axis=2), axis=1)
    assert np.max(np.abs(res) / scale) < 1e-12


# ---------- pole separation ----------
def test_pole_separation_examples():
    assert pole_separation([(0.0, 0.0, 0.0), (3.0, 4.0, 0.0)]) == pytest.approx(2.5)
    assert pole_separation(PoleSet(points=[(0.0, 0.0), (1.0, 0.0), (0.0, 0.5)])) == pytest.approx(0.25)
    assert pole_separation([(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)]) == pytest.approx(1.0)
    assert pole_separation([(0.0, 0.0, 0.0), (0.0, 3.0, 0.0), (4.0, 0.0, 0.0)]) == pytest.approx(1.5)


def test_pole_separation_degenerate():
    with pytest.raises(DegeneratePoles):
        pole_separation([(1.0, 2.0, 3.0)])
    with pytest.raises(DegeneratePoles):
        pole_separation([(1.0, 0.0), (1.0, 0.0)])


def test_pole_set_rejects_duplicates():
    with pytest.raises(ValueError):
        PoleSet(points=[(1.0, 0.0), (1.0, 0.0)])


# ---------- domains ----------
def test_distance_to_boundary_examples():
    assert distance_to_boundary(HalfSpace(d=3), [0.3, -2.0, 0.25]) == pytest.approx(0.25)
    assert distance_to_boundary(Ball(center=(0.0, 0.0, 0.0), radius=1.0), [0.0, 0.6, 0.0]) == pytest.approx(0.4)
    ext = ExteriorBall(center=(0.0, 0.0, -1.0), radius=1.0)
    assert distance_to_boundary(ext, [0.0, 0.0, 0.5]) == pytest.approx(0.5)


def test_distance_to_boundary_unsupported():
    with pytest.raises(UnsupportedDomain):
        distance_to_boundary(WholeSpace(d=3), [1.0, 0.0, 0.0])


def test_contains():
    ext = ExteriorBall(center=(0.0, 0.0, -1.0), radius=1.0)
    X = np.array([[0.0, 0.0, 0.1], [0.0, 0.0, -0.1], [0.5, 0.0, -0.05]])
    assert contains(ext, X).tolist() == [True, False, True]
    local = BallIntersection(inner=ext, radius=0.2)
    assert contains(local, X).tolist() == [True, False, False]
    assert contains(HalfSpace(d=3), X).tolist() == [True, False, False]


# ---------- sampling ----------
def test_sample_directions_unit_and_deterministic():
    a = sample_directions(4, 100, seed=3)
    b = sample_directions(4, 100, seed=3)
    assert a.shape == (100, 4)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, rtol=1e-12)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("d,n", [(3, 3), (3, 4), (5, 4), (3, 7)])
def test_default_ball_poles_on_sphere(d, n):
    P = np.asarray(default_ball_poles(d, n))
    assert P.shape == (n, d)
    np.testing.assert_allclose(np.linalg.norm(P, axis=1), 1.0, atol=1e-12)
    assert pole_separation(P) > 0.15


def test_default_ball_poles_regular_simplex():
    P = np.asarray(default_ball_poles(3, 4))
    D = np.linalg.norm(P[:, None] - P[None], axis=2)
    off = D[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, off[0], rtol=1e-12)
