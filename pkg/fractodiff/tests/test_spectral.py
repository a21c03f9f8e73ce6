import math

import numpy as np
import pytest

from ..numerics import spectral
from ..numerics.spectral import GridFunction
from ..numerics.exc import DomainError, AliasingError, ResolutionError, AccuracyError


@pytest.fixture(scope='module')
def sfl():
    return spectral.build_interval_sfl(16, 1.0)


@pytest.fixture(scope='module')
def rfl():
    return spectral.build_interval_rfl(40, 0.5)


def test_sfl_eigenpairs(sfl):
    assert sfl.n_modes == 16
    assert sfl.n_nodes == 128
    assert abs(sfl.eigenvalues[0] - math.pi ** 2) < 1e-12
    assert sfl.orthonormality_residual() < 1e-12
    assert sfl.gamma == 1.0


def test_sfl_fractional_power():
    dom = spectral.build_interval_sfl(4, 0.5, length=2.0)
    assert np.allclose(dom.eigenvalues, np.arange(1, 5) * math.pi / 2.0)
    assert dom.boundary_sites[1].coord == 2.0


def test_sfl_aliasing():
    with pytest.raises(AliasingError):
        spectral.build_interval_sfl(16, 1.0, n_nodes=100)
    with pytest.raises(DomainError):
        spectral.build_interval_sfl(16, 1.5)


def test_project_synthesize(sfl):
    coeffs = np.zeros(sfl.n_modes)
    coeffs[[0, 3]] = [1.0, -2.0]
    assert np.allclose(sfl.project(sfl.synthesize(coeffs)), coeffs, atol=1e-12)


def test_grid_function_algebra(sfl):
    phi1 = GridFunction(sfl, sfl.eigenvectors[0])
    phi2 = GridFunction(sfl, sfl.eigenvectors[1])
    assert abs(phi1.norm() - 1.0) < 1e-12
    assert abs(phi1.inner(phi2)) < 1e-12
    assert abs((2.0 * phi1 - phi1).norm() - 1.0) < 1e-12
    with pytest.raises(DomainError):
        GridFunction(sfl, np.ones(3))


def test_matrix_domain_rejects_non_symmetric():
    m = np.array([[2.0, 1.0], [0.0, 2.0]])
    with pytest.raises(DomainError):
        spectral.build_matrix_domain(m, [1.0 / 3, 2.0 / 3], [0.5, 0.5], gamma=1.0)


def test_matrix_domain_rejects_indefinite():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(DomainError):
        spectral.build_matrix_domain(m, [1.0 / 3, 2.0 / 3], [0.5, 0.5], gamma=1.0)


def test_finite_difference_laplacian():
    """The three-point Laplacian has eigenvalues (2/h sin(j pi h/2))^2."""
    n = 40
    h = 1.0 / n
    m = (2.0 * np.eye(n - 1) - np.eye(n - 1, k=1) - np.eye(n - 1, k=-1)) / h ** 2
    x = h * np.arange(1, n)
    dom = spectral.build_matrix_domain(m, x, np.full(n - 1, h), gamma=1.0)
    j = np.arange(1, n)
    assert np.allclose(dom.eigenvalues, (2.0 / h * np.sin(j * math.pi * h / 2.0)) ** 2, rtol=1e-10)
    assert dom.eigen_residual() < 1e-10
    assert np.all(dom.eigenvectors[0] > 0)


def test_jacobi_matches_lapack():
    rng = np.random.RandomState(7)
    a = rng.rand(12, 12)
    a = a + a.T + 12.0 * np.eye(12)
    lam, vec = spectral.jacobi_eigh(a)
    assert np.allclose(lam, np.linalg.eigvalsh(a), atol=1e-10)
    assert np.allclose(a.dot(vec), vec * lam, atol=1e-9)


def test_rfl_domain(rfl):
    assert rfl.gamma == 0.5
    assert rfl.n_nodes == 39
    assert rfl.eigen_residual() < 1e-10
    assert rfl.orthonormality_residual() < 1e-10
    # the first eigenvalue of the restricted half Laplacian on (0, 1) is close to 2.3156
    assert abs(rfl.eigenvalues[0] - 2.3156) < 0.25


def test_rfl_jacobi_eigensolver():
    lapack = spectral.build_interval_rfl(16, 0.5)
    jacobi = spectral.build_interval_rfl(16, 0.5, eigensolver='jacobi')
    assert np.allclose(lapack.eigenvalues, jacobi.eigenvalues, rtol=1e-10)


def test_rfl_needs_fractional_s():
    with pytest.raises(DomainError):
        spectral.build_interval_rfl(40, 1.0)


def test_green_apply_constant(sfl):
    """G[1] = x (1 - x) / 2 for the Dirichlet Laplacian, up to modal truncation."""
    dom = spectral.build_interval_sfl(64, 1.0)
    g = spectral.green_apply(dom, np.ones(dom.n_nodes)).values
    exact = dom.coords * (1.0 - dom.coords) / 2.0
    assert np.max(np.abs(g - exact)) < 5e-5


def test_martin_derivative_of_constant():
    """D_1 G[1] at 0 is the slope 1/2; the sine tail costs about 0.2 / n_modes."""
    dom = spectral.build_interval_sfl(256, 1.0)
    assert abs(spectral.martin_derivative(dom, 'left', np.ones(dom.n_nodes)) - 0.5) < 2e-3
    assert abs(spectral.martin_derivative(dom, 'right', np.ones(dom.n_nodes)) - 0.5) < 2e-3


def test_martin_derivative_strict_tolerance():
    dom = spectral.build_interval_sfl(64, 1.0)
    with pytest.raises(AccuracyError):
        spectral.martin_derivative(dom, 'left', np.ones(dom.n_nodes), tol=0.0)


def test_unknown_site(sfl):
    with pytest.raises(DomainError):
        sfl.site('top')
    assert sfl.site(1).name == 'right'


def test_annulus_and_schedule():
    dom = spectral.build_interval_sfl(32, 1.0, n_nodes=1024)
    idx = spectral.annulus(dom, 8, 'left')
    assert np.all((dom.coords[idx] > 1.0 / 8) & (dom.coords[idx] < 2.0 / 8))
    schedule = spectral.concentration_schedule(dom)
    assert schedule[0] == 4
    assert all(b == 2 * a for a, b in zip(schedule, schedule[1:]))
    assert all(spectral.annulus(dom, j, 'right').shape[0] >= 3 for j in schedule)


def test_concentrated_profile_has_unit_weighted_mass():
    dom = spectral.build_interval_sfl(32, 1.0, n_nodes=1024)
    profile = spectral.concentrated_profile(dom, 16, 'left')
    assert abs(np.sum(profile * dom.delta_gamma * dom.weights) - 1.0) < 1e-12


def test_concentration_needs_nodes():
    dom = spectral.build_interval_sfl(1, 1.0, n_nodes=8)
    with pytest.raises(ResolutionError):
        spectral.concentration_limit(dom, 1e-3)


@pytest.mark.slow
def test_u_star_is_one():
    dom = spectral.build_interval_sfl(400, 1.0, n_nodes=16000)
    ustar = spectral.u_star(dom, 1e-3).values
    mask = dom.interior_mask()
    target = dom.synthesize(dom.project(np.ones(dom.n_nodes)))
    assert np.max(np.abs(ustar - target)[mask]) <= 1e-3
    assert spectral.interior_l1(dom, ustar - 1.0)[0] <= 1e-3


def test_concentration_metadata():
    dom = spectral.build_interval_sfl(64, 1.0, n_nodes=4096)
    limit = spectral.concentration_limit(dom, 1e-3)
    assert limit.schedule[-1] == limit.j
    assert len(limit.raw_gaps) == len(limit.schedule) - 1
    assert limit.gaps[-1] < 1e-3
    assert spectral.concentration_limit(dom, 1e-3) is limit


def test_export_import_roundtrip(tmpdir, rfl):
    path = str(tmpdir.join('domain.json'))
    spectral.export_domain(rfl, path)
    back = spectral.import_domain(path)
    assert np.array_equal(back.eigenvalues, rfl.eigenvalues)
    assert np.array_equal(back.eigenvectors, rfl.eigenvectors)
    assert back.gamma == rfl.gamma
    assert back.family == 'interval_rfl'


def test_import_malformed(tmpdir):
    path = tmpdir.join('broken.json')
    path.write('{"coords": []}')
    with pytest.raises(DomainError):
        spectral.import_domain(str(path))
