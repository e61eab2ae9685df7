import numpy as np
import pytest

from hardylab import closed_form, config
from hardylab.errors import DimensionTooSmall, PoleHit, PositivityViolation, UnsupportedOrder
from hardylab.geometry import default_ball_poles
from hardylab.models import (
    AngularSampling,
    Ball,
    BallWeight,
    GridSpec,
    HalfSpace,
    InverseQuartic,
    InverseSquare,
    LastCoord,
    Multipolar,
    PoleProduct,
    PoleSet,
    RadialShells,
    SupersolutionAnsatz,
)
from hardylab.supersolution import (
    ansatz_eval,
    bilaplacian_power,
    certify_fall_local,
    certify_hardy,
    certify_rellich,
    fall_local_pair,
    fd_laplacian,
    laplacian_power,
)


def grid(lo=1e-3, hi=10.0, shells=32, directions=64, seed=0):
    return GridSpec(
        radial=RadialShells(lo=lo, hi=hi, shells=shells),
        angular=AngularSampling(directions=directions, seed=seed),
    )


def origin(d):
    return tuple([0.0] * d)


def hardy_pair(d, factor=1.0):
    W = InverseSquare(pole=origin(d), scale=factor * closed_form.hardy_interior_constant(d).value)
    return W, SupersolutionAnsatz(power=-(d - 2) / 2)


# ---------- derivative oracles ----------
@pytest.mark.parametrize("d,alpha", [(3, -0.5), (4, -1.0), (5, 0.7), (7, -2.5)])
def test_fd_laplacian_matches_closed_form(d, alpha, rng):
    X = rng.normal(size=(40, d))
    r = np.linalg.norm(X, axis=1)
    vals, err = fd_laplacian(lambda Y: np.linalg.norm(Y, axis=1) ** alpha, X, r)
    exact = laplacian_power(d, alpha, r)
    np.testing.assert_allclose(vals, exact, rtol=1e-7)
    assert np.all(err <= 1e-6 * np.abs(exact) + 1e-12)


@pytest.mark.parametrize("d,alpha", [(5, -0.5), (6, -1.0), (8, -2.0)])
def test_bilaplacian_matches_fd_of_laplacian(d, alpha, rng):
    X = rng.normal(size=(30, d))
    r = np.linalg.norm(X, axis=1)
    vals, _ = fd_laplacian(lambda Y: laplacian_power(d, alpha, np.linalg.norm(Y, axis=1)), X, r)
    np.testing.assert_allclose(vals, bilaplacian_power(d, alpha, r), rtol=1e-6)


def test_ansatz_eval_orders():
    phi = SupersolutionAnsatz(power=-0.5)
    x = [0.0, 2.0, 0.0]
    assert ansatz_eval(phi, x, 0) == pytest.approx((2.0 ** -0.5, 0.0))
    lap, err = ansatz_eval(phi, x, 2)
    assert lap == pytest.approx(-0.5 * 0.5 * 2.0 ** -2.5)
    assert err == 0.0
    bi, _ = ansatz_eval(phi, x, 4)
    assert bi == pytest.approx(bilaplacian_power(3, -0.5, 2.0))


def test_ansatz_eval_fourth_order_unsupported():
    phi = SupersolutionAnsatz(prefactors=[LastCoord()], power=-1.5)
    with pytest.raises(UnsupportedOrder):
        ansatz_eval(phi, [0.1, 0.2, 0.3], 4)
    with pytest.raises(UnsupportedOrder):
        ansatz_eval(SupersolutionAnsatz(power=-0.5), [1.0, 0.0, 0.0], 3)


def test_ansatz_eval_at_singularity():
    with pytest.raises(PoleHit):
        ansatz_eval(SupersolutionAnsatz(power=-0.5), [0.0, 0.0, 0.0], 0)


def test_fall_local_fd_laplacian_has_error_estimate():
    _, phi, _ = fall_local_pair(3)
    lap, err = ansatz_eval(phi, [0.0, 0.0, 5e-4], 2)
    assert np.isfinite(lap)
    assert 0.0 < err < 1e-6 * abs(lap)


# ---------- second-order certificates ----------
@pytest.mark.parametrize("d", range(3, 9))
def test_hardy_pair_is_certified(d):
    W, phi = hardy_pair(d)
    cert = certify_hardy(W, phi, grid())
    assert cert.verdict == "CertifiedNonnegative"
    assert cert.samples_checked == 32 * 64
    assert abs(cert.min_residual) < 1e-12
    assert cert.evidence == "sampled"


@pytest.mark.parametrize("d", [3, 5])
def test_hardy_pair_above_constant_is_violated(d):
    W, phi = hardy_pair(d, factor=1.01)
    cert = certify_hardy(W, phi, grid())
    assert cert.verdict == "Violated"
    assert cert.min_residual < -1e-3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_multipolar_pair_is_certified(n):
    d = 3
    A = [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.5, 0.0), (0.0, 0.0, -0.7)][:n]
    poles = PoleSet(points=A)
    W = Multipolar(poles=poles, scale=closed_form.multipolar_constant(d, n, "interior").value)
    phi = SupersolutionAnsatz(prefactors=[PoleProduct(poles=poles, exponents=[-(d - 2) / n] * n)])
    cert = certify_hardy(W, phi, grid(lo=0.05, hi=5.0))
    assert cert.verdict == "CertifiedNonnegative"
    assert cert.min_residual > -1e-10


def test_half_space_pair_is_certified():
    d = 4
    W = InverseSquare(pole=origin(d), scale=closed_form.hardy_boundary_constant(d).value)
    phi = SupersolutionAnsatz(prefactors=[LastCoord()], power=-d / 2)
    cert = certify_hardy(W, phi, grid(), domain=HalfSpace(d=d))
    assert cert.verdict == "CertifiedNonnegative"
    assert 0 < cert.samples_checked < 32 * 64


def test_positivity_violation():
    W = InverseSquare(pole=origin(3), scale=2.25)
    phi = SupersolutionAnsatz(prefactors=[LastCoord()], power=-1.5)
    with pytest.raises(PositivityViolation):
        certify_hardy(W, phi, grid())


def test_certificate_is_thread_count_independent(monkeypatch):
    W, phi = hardy_pair(4, factor=0.9)
    g = grid(shells=80, directions=128)
    serial = certify_hardy(W, phi, g)
    monkeypatch.setattr(config, "HF_THREADS", 4)
    assert certify_hardy(W, phi, g) == serial


# ---------- fourth order ----------
@pytest.mark.parametrize("d", range(5, 11))
def test_rellich_pair_is_certified(d):
    W = InverseQuartic(pole=origin(d), scale=closed_form.rellich_constant(d).value)
    phi = SupersolutionAnsatz(power=-(d - 4) / 2)
    cert = certify_rellich(W, phi, grid())
    assert cert.verdict == "CertifiedNonnegative"
    assert set(cert.conditions) == {"fourth_order", "laplacian_sign", "positivity"}
    assert cert.conditions["laplacian_sign"].min_residual > 0
    # phi / (phi + r^2 |Delta phi|) is constant for a pure power
    expected = 1.0 / (1.0 + d * (d - 4) / 4)
    assert cert.conditions["positivity"].min_residual == pytest.approx(expected, rel=1e-12)
    assert cert.conditions["positivity"].max_residual == pytest.approx(expected, rel=1e-12)


def test_rellich_above_constant_is_violated():
    d = 6
    W = InverseQuartic(pole=origin(d), scale=1.01 * closed_form.rellich_constant(d).value)
    cert = certify_rellich(W, SupersolutionAnsatz(power=-1.0), grid())
    assert cert.verdict == "Violated"
    assert cert.conditions["fourth_order"].min_residual < 0


def test_rellich_needs_dimension_five():
    W = InverseQuartic(pole=origin(4), scale=1.0)
    with pytest.raises(DimensionTooSmall):
        certify_rellich(W, SupersolutionAnsatz(power=-0.5), grid())


# ---------- fall-type local pair ----------
@pytest.mark.parametrize("d", [3, 4])
def test_fall_local_small_radius_is_certified(d):
    cert = certify_fall_local(d, r=1e-3)
    assert cert.verdict == "CertifiedNonnegative"
    assert cert.samples_checked > 0


def test_fall_local_large_radius_is_violated():
    cert = certify_fall_local(3, r=0.05)
    assert cert.verdict == "Violated"


def test_fall_local_rejects_radius():
    with pytest.raises(ValueError):
        certify_fall_local(3, r=1.5)


def test_grid_needs_two_shells():
    with pytest.raises(ValueError):
        RadialShells(lo=0.1, hi=1.0, shells=1)


def test_fall_local_accepts_grid():
    r = 1e-3
    inside = GridSpec(
        radial=RadialShells(lo=1e-5, hi=0.9 * r, shells=8),
        angular=AngularSampling(directions=16, seed=2),
    )
    cert = certify_fall_local(3, r=r, grid=inside)
    assert cert.verdict == "CertifiedNonnegative"
    assert 0 < cert.samples_checked <= 8 * 16
    assert cert.grid_descriptor == inside.describe()

    # shells beyond r fall outside B_r(0) and are dropped
    wide = inside.model_copy(update={"radial": RadialShells(lo=1e-5, hi=10 * r, shells=8)})
    assert certify_fall_local(3, r=r, grid=wide).samples_checked < 8 * 16


def test_ball_minimizer_residual_vanishes():
    d, n = 3, 3
    poles = PoleSet(points=default_ball_poles(d, n))
    W = Multipolar(poles=poles, scale=closed_form.multipolar_constant(d, n, "boundary").value)
    phi = SupersolutionAnsatz(
        prefactors=[BallWeight(center=origin(d), radius=1.0), PoleProduct(poles=poles, exponents=[-d / n] * n)]
    )
    cert = certify_hardy(W, phi, grid(lo=0.05, hi=0.9, shells=16, directions=64), domain=Ball(center=origin(d), radius=1.0))
    assert cert.verdict == "CertifiedNonnegative"
    assert abs(cert.min_residual) <= cert.tolerance
    assert abs(cert.max_residual) <= cert.tolerance
