import numpy as np
import pytest
from scipy import linalg, sparse

from hardylab.errors import DimensionTooSmall, MeshTooCoarse, NoConvergence
from hardylab.models import RadialMesh
from hardylab.spectrum import (
    assemble_forms,
    euler_dirichlet_reference,
    hardy_constant_estimate,
    log_mesh,
    smallest_generalized_eig,
)


def random_spd_tridiagonal(n, rng):
    off = rng.uniform(-1.0, 1.0, n - 1)
    diag = np.abs(np.concatenate([[0.0], off])) + np.abs(np.concatenate([off, [0.0]])) + rng.uniform(0.5, 2.0, n)
    return sparse.diags([off, diag, off], [-1, 0, 1], format="csc")


@pytest.mark.parametrize("n", [10, 60, 200])
def test_inverse_iteration_matches_dense_solver(n, rng):
    A = random_spd_tridiagonal(n, rng)
    B = random_spd_tridiagonal(n, rng)
    est = smallest_generalized_eig(A, B, tol=1e-11)
    exact = linalg.eigh(A.toarray(), B.toarray(), eigvals_only=True)[0]
    assert est.value == pytest.approx(exact, rel=1e-9)
    assert est.residual_norm <= 1e-11


def test_inverse_iteration_budget():
    rng = np.random.default_rng(1)
    A = random_spd_tridiagonal(50, rng)
    B = random_spd_tridiagonal(50, rng)
    with pytest.raises(NoConvergence):
        smallest_generalized_eig(A, B, tol=1e-15, max_iter=1)


def test_mass_form_is_exact_for_constant_weight():
    mesh = log_mesh(16, 0.1, 1.0)
    _, B = assemble_forms(mesh, 2.0, 0.0)
    r = np.asarray(mesh.nodes)
    # sum of all entries = integral of the interior hat functions' sum
    one = np.ones(B.shape[0])
    h = np.diff(r)
    expected = np.sum(h) - h[0] / 2 - h[-1] / 2
    assert one @ (B @ one) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("d,delta", [(3, 1e-4), (3, 1e-6), (5, 1e-6)])
def test_estimate_is_upper_bound_close_to_dirichlet_value(d, delta):
    ref = euler_dirichlet_reference(d, delta, 1.0)
    mesh = log_mesh(2048, delta, 1.0)
    est = hardy_constant_estimate(d, mesh)
    assert est.value >= ref - 1e-9
    assert est.mesh == mesh.describe() == f"2048 nodes on [{delta:.3g}, 1]"
    assert est.value == pytest.approx(ref, rel=1e-3)


def test_estimates_decrease_toward_hardy_constant():
    values = [hardy_constant_estimate(3, log_mesh(2048, delta, 1.0)).value for delta in (1e-4, 1e-6, 1e-8)]
    assert values[0] > values[1] > values[2] > 0.25
    assert values[0] == pytest.approx(0.366, abs=2e-3)
    assert values[2] == pytest.approx(0.279, abs=2e-3)


def test_coarse_mesh_rejected():
    with pytest.raises(MeshTooCoarse):
        hardy_constant_estimate(3, log_mesh(5, 1e-3, 1.0))


def test_dimension_two_rejected():
    with pytest.raises(DimensionTooSmall):
        hardy_constant_estimate(2, log_mesh(64, 1e-3, 1.0))


@pytest.mark.parametrize("nodes", [(0.0, 1.0), (0.5, 0.2), (0.1,)])
def test_mesh_validation(nodes):
    with pytest.raises(ValueError):
        RadialMesh(nodes=nodes)


def test_log_mesh_endpoints():
    mesh = log_mesh(100, 1e-5, 2.0)
    assert mesh.delta == pytest.approx(1e-5)
    assert mesh.R == pytest.approx(2.0)
    with pytest.raises(ValueError):
        log_mesh(100, 2.0, 1.0)
