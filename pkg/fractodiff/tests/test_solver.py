import json
import math

import numpy as np
import pytest

from ..numerics import solver, spectral
from ..numerics.configuration import config
from ..numerics.fraccalc import TimeGrid, TimeSeries
from ..numerics.solver import ProblemSpec
from ..numerics.specfun import ml
from ..numerics.exc import DomainError, SingularityError, ResolutionError


@pytest.fixture(scope='module')
def dom():
    return spectral.build_interval_sfl(16, 1.0)


@pytest.fixture(scope='module')
def grid():
    return TimeGrid.over(1.0, 200)


def test_problem_validation(dom, grid):
    with pytest.raises(DomainError):
        ProblemSpec('caputo', 1.2, dom)
    with pytest.raises(DomainError):
        ProblemSpec('caputo', 0.5, dom, T=-1.0)
    with pytest.raises(DomainError):
        ProblemSpec('caputo', 0.5, dom, h={'top': 1.0})
    p = ProblemSpec('caputo', 0.5, dom, T=2.0)
    with pytest.raises(DomainError):
        solver.solve(p, grid)


def test_single_mode_is_mittag_leffler(dom, grid):
    p = ProblemSpec('caputo', 0.5, dom, u0=dom.eigenvectors[0])
    coeffs = solver.solve(p, grid).spectral_coeffs.values
    exact = ml(0.5, 1.0, -math.pi ** 2 * grid.nodes ** 0.5)
    assert np.max(np.abs(coeffs[:, 0] - exact)) < 1e-10
    assert np.max(np.abs(coeffs[:, 1:])) < 1e-10


def test_constant_forcing_mode(dom, grid):
    p = ProblemSpec('caputo', 0.5, dom, f=dom.eigenvectors[0])
    coeffs = solver.solve(p, grid).spectral_coeffs.values
    lam1 = dom.eigenvalues[0]
    exact = (1.0 - ml(0.5, 1.0, -lam1 * grid.nodes ** 0.5)) / lam1
    assert np.max(np.abs(coeffs[:, 0] - exact)) < 1e-9


def test_superposition(dom, grid):
    ones = np.ones(dom.n_nodes)
    p = ProblemSpec('caputo', 0.4, dom, u0=dom.eigenvectors[0], f=ones)
    both = solver.solve(p, grid).spectral_coeffs.values
    parts = (solver.solve(p.with_data(u0=dom.eigenvectors[0]), grid).spectral_coeffs.values
             + solver.solve(p.with_data(f=ones), grid).spectral_coeffs.values)
    assert np.max(np.abs(both - parts)) < 1e-12


def test_riemann_initial_term(dom, grid):
    p = ProblemSpec('rl', 0.5, dom, u0=dom.eigenvectors[0])
    sol = solver.solve(p, grid)
    t = grid.nodes[1:]
    lam1 = dom.eigenvalues[0]
    assert np.all(np.isnan(sol.spectral_coeffs.values[0]))
    exact = t ** -0.5 * ml(0.5, 0.5, -lam1 * t ** 0.5)
    assert np.max(np.abs(sol.spectral_coeffs.values[1:, 0] - exact)) < 1e-10


def test_time_dependent_forcing(dom, grid):
    """f = t phi_1 gives t^(1+a) E_{a,a+2}(-lam t^a), the product rule being exact for linear data."""
    alpha = 0.5
    f = TimeSeries(grid, np.outer(grid.nodes, dom.eigenvectors[0]))
    coeffs = solver.solve(ProblemSpec('caputo', alpha, dom, f=f), grid).spectral_coeffs.values
    lam1 = dom.eigenvalues[0]
    t = grid.nodes
    exact = t ** (1.0 + alpha) * ml(alpha, alpha + 2.0, -lam1 * t ** alpha)
    assert np.max(np.abs(coeffs[:, 0] - exact)) < 1e-9


def test_solution_at(dom, grid):
    sol = solver.solve(ProblemSpec('caputo', 0.5, dom, u0=1.0), grid)
    assert sol.at(0.5).values.shape == (dom.n_nodes,)
    with pytest.raises(DomainError):
        sol.at(0.5001)


def test_mode_convolutions_drop_negligible_stiff_modes():
    grid = TimeGrid.over(1.0, 100)
    lam = np.array([1.0, 1e8, 1e8])
    w = TimeSeries(grid, np.outer(np.ones(len(grid)), [1.0, 1e-6, 1.0]))
    out = solver.mode_convolutions(0.5, lam, w)
    assert abs(out[-1, 0] - (1.0 - ml(0.5, 1.0, -1.0))) < 1e-12
    assert not np.any(out[:, 1])
    assert abs(out[-1, 2] / 1e-8 - 1.0) < 1e-2
    config.apply_overrides('tolerances.mode_cutoff=1.0e12')
    assert out[-1, 1] < solver.mode_convolutions(0.5, lam, w)[-1, 1]


def test_s_alpha_apply(dom):
    v = dom.eigenvectors[2]
    assert np.array_equal(solver.s_alpha_apply(dom, 0.5, 0.0, v).values, v)
    out = solver.s_alpha_apply(dom, 0.5, 0.3, v).values
    assert np.allclose(out, ml(0.5, 1.0, -dom.eigenvalues[2] * 0.3 ** 0.5) * v, atol=1e-12)
    with pytest.raises(DomainError):
        solver.s_alpha_apply(dom, 0.5, -1.0, v)


def test_p_alpha_apply(dom):
    with pytest.raises(SingularityError):
        solver.p_alpha_apply(dom, 0.5, 0.0, dom.eigenvectors[0])
    out = solver.p_alpha_apply(dom, 0.5, 0.5, dom.eigenvectors[0]).values
    lam1 = dom.eigenvalues[0]
    expected = 0.5 ** -0.5 * ml(0.5, 0.5, -lam1 * 0.5 ** 0.5) * dom.eigenvectors[0]
    assert np.allclose(out, expected, atol=1e-12)


def test_heat_apply(dom):
    out = solver.heat_apply(dom, 0.1, dom.eigenvectors[1]).values
    assert np.allclose(out, math.exp(-0.1 * dom.eigenvalues[1]) * dom.eigenvectors[1], atol=1e-12)


@pytest.mark.parametrize('t', [0.1, 1.0])
def test_s_alpha_near_one_is_heat_semigroup(dom, t):
    v = dom.coords * (1.0 - dom.coords)
    fractional = solver.s_alpha_apply(dom, 0.999, t, v).values
    assert np.max(np.abs(fractional - solver.heat_apply(dom, t, v).values)) < 1e-2


@pytest.mark.parametrize('t', [0.1, 1.0])
def test_subordination(dom, t):
    v = dom.coords * (1.0 - dom.coords)
    direct = solver.s_alpha_apply(dom, 0.5, t, v).values
    assert np.max(np.abs(solver.subordinated_s_alpha(dom, 0.5, t, v).values - direct)) < 1e-6
    direct = solver.p_alpha_apply(dom, 0.5, t, v).values
    assert np.max(np.abs(solver.subordinated_p_alpha(dom, 0.5, t, v).values - direct)) < 1e-6


def test_positivity(dom, grid):
    """phi_1 + 0.2 phi_3 is positive and its higher mode decays faster."""
    phi = dom.eigenvectors
    p = ProblemSpec('caputo', 0.5, dom, u0=phi[0] + 0.2 * phi[2], f=phi[0])
    field = solver.solve(p, grid).field.values
    assert np.min(field) >= -1e-12 * np.max(np.abs(field))


def test_concentrate_h():
    dom = spectral.build_interval_sfl(32, 1.0, n_nodes=1024)
    grid = TimeGrid.over(1.0, 10)
    source = solver.concentrate_h(dom, {'left': 1.0, 'right': lambda t: t}, 16, grid)
    assert source.values.shape == (11, dom.n_nodes)
    left = np.sum(source.values[5] * dom.delta_gamma * dom.weights * (dom.coords < 0.5))
    right = np.sum(source.values[5] * dom.delta_gamma * dom.weights * (dom.coords > 0.5))
    assert abs(left - 1.0) < 1e-12
    assert abs(right - 0.5) < 1e-12
    with pytest.raises(ResolutionError):
        solver.concentrate_h(dom, {'left': 1.0}, 4096, grid)


def test_test_weight_bound(dom):
    solver.check_test_weight(dom, dom.eigenvectors[0])
    with pytest.raises(DomainError):
        solver.check_test_weight(dom, np.ones(dom.n_nodes))
    with pytest.raises(DomainError):
        solver.check_test_weight(dom, np.full(dom.n_nodes, np.inf))


@pytest.fixture(scope='module')
def weak_dom():
    return spectral.build_interval_sfl(32, 0.5)


@pytest.fixture(scope='module')
def weak_grid():
    return TimeGrid.over(1.0, 1000)


@pytest.mark.parametrize('kind,initial,forcing', [
    ('caputo', 0.0, 0.0),
    ('caputo', 1.0, 0.0),
    ('rl', 1.0, 0.0),
    ('caputo', 0.0, 1.0),
])
def test_weak_dual_residual(weak_dom, weak_grid, kind, initial, forcing):
    phi1, phi2 = weak_dom.eigenvectors[0], weak_dom.eigenvectors[1]
    p = ProblemSpec(kind, 0.5, weak_dom, u0=initial * phi1, f=forcing * (phi1 + 0.5 * phi2))
    sol = solver.solve(p, weak_grid)
    assert solver.weak_dual_residual(sol, p, phi1) <= 1e-4


def test_weak_dual_time_dependent_test(weak_dom, weak_grid):
    phi1, phi2 = weak_dom.eigenvectors[0], weak_dom.eigenvectors[1]
    p = ProblemSpec('caputo', 0.5, weak_dom, u0=phi1 + phi2, f=phi1)
    sol = solver.solve(p, weak_grid)
    terms = solver.weak_dual_terms(sol, p, lambda t, x: (1.0 + t) * phi1)
    assert terms.residual <= 1e-4
    assert terms.boundary == 0.0


def test_weak_dual_rejects_unweighted_test(weak_dom, weak_grid):
    p = ProblemSpec('caputo', 0.5, weak_dom, u0=weak_dom.eigenvectors[0])
    sol = solver.solve(p, weak_grid)
    with pytest.raises(DomainError):
        solver.weak_dual_residual(sol, p, np.ones(weak_dom.n_nodes))


def test_weak_dual_detects_wrong_solution(weak_dom, weak_grid):
    phi1, phi2 = weak_dom.eigenvectors[0], weak_dom.eigenvectors[1]
    p = ProblemSpec('caputo', 0.5, weak_dom, u0=phi1)
    sol = solver.solve(p, weak_grid)
    w = 0.05 * (phi1 + phi2)
    battery = solver.sign_indicator_battery(weak_dom, weak_grid, w)
    assert len(battery) == 3
    assert solver.uniqueness_indicator(sol, p, battery) <= 1e-4
    perturbed = TimeSeries(weak_grid, sol.field.values + w)
    assert solver.uniqueness_indicator(perturbed, p, battery) > 1e-4


def test_compactness_modulus():
    t = np.linspace(0.0, 2.0, 21)
    out = solver.compactness_modulus(0.5, 0.0, 0.5, 1.0, t)
    assert out[0] == 0.0
    assert abs(out[10] - (0.5 ** 0.5) / math.gamma(1.5)) < 1e-14
    assert np.all(solver.compactness_modulus(0.5, 9.0, 0.5, 1.0, t) >= 0)
    with pytest.raises(DomainError):
        solver.compactness_modulus(0.5, 1.0, 1.0, 0.5, t)


def test_compactness_step_coefficient(dom):
    grid = TimeGrid.over(1.0, 400)
    t = grid.nodes
    eps = 1e-9 * grid.dt
    inside = (t > 0.25 + eps) & (t <= 0.5 + eps)
    f = TimeSeries(grid, np.outer(inside, dom.eigenvectors[0]), kind='cellwise')
    coeff = solver.solve(ProblemSpec('caputo', 0.5, dom, f=f), grid).spectral_coeffs.values[:, 0]
    exact = solver.compactness_modulus(0.5, dom.eigenvalues[0], 0.25, 0.5, t)
    assert np.max(np.abs(coeff - exact)) < 1e-6


@pytest.mark.parametrize('window', [(0.0, 0.1), (0.25, 0.5), (0.5, 1.0)])
def test_compactness_check(dom, window):
    grid = TimeGrid.over(1.0, 200)
    ones = np.ones(dom.n_nodes)
    p = ProblemSpec('caputo', 0.5, dom, u0=ones, f=ones)
    check = solver.compactness_check(p, grid, window[0], window[1], lambda x: (x > 0.2) & (x < 0.6))
    assert check.holds
    assert check.comparability >= 1.0


def test_compactness_needs_zero_boundary_data(dom, grid):
    p = ProblemSpec('caputo', 0.5, dom, h={'left': 1.0})
    with pytest.raises(DomainError):
        solver.compactness_check(p, grid, 0.1, 0.2)


@pytest.mark.parametrize('kind', ['caputo', 'rl'])
def test_decay_report(dom, grid, kind):
    p = ProblemSpec(kind, 0.5, dom, u0=dom.eigenvectors[0] + dom.eigenvectors[3], f=np.ones(dom.n_nodes))
    report = solver.decay_report(solver.solve(p, grid), p)
    assert len(report) == len(grid)
    assert report['initial_ok'].all()
    assert report['forcing_ok'].all()


def test_boundary_term_metadata():
    dom = spectral.build_interval_sfl(64, 1.0, n_nodes=4096)
    grid = TimeGrid.over(1.0, 20)
    sol = solver.solve(ProblemSpec('caputo', 0.5, dom, h={'left': 1.0, 'right': 1.0}), grid)
    meta = sol.metadata['concentration']
    assert meta['j'] == meta['schedule'][-1]
    assert meta['cauchy_gaps'][-1] < meta['tolerance']
    assert len(meta['solution_gaps']) == len(meta['schedule']) - 1
    assert np.any(sol.parts['boundary'])


@pytest.mark.slow
def test_boundary_ratio_uniform_data():
    dom = spectral.build_interval_sfl(128, 1.0, n_nodes=8192)
    grid = TimeGrid.over(20.0, 200)
    sol = solver.solve(ProblemSpec('caputo', 0.5, dom, h={'left': 1.0, 'right': 1.0}), grid)
    for site in ('left', 'right'):
        ratio = solver.boundary_ratio(sol, dom, 20.0, site)
        assert 0.9 <= ratio.value <= 1.1


@pytest.mark.slow
def test_upsilon_normalization():
    dom = spectral.build_interval_sfl(400, 1.0, n_nodes=16000)
    upsilon = solver.upsilon_normalization(dom, 0.5)
    assert np.max(np.abs(upsilon - 1.0)) <= 0.02


def test_h_star_proxy_is_a_table():
    dom = spectral.build_interval_sfl(32, 1.0)
    table = solver.h_star_proxy(dom, 0.5, 'left', deltas=(0.1, 1.0))
    assert list(table.columns) == ['delta', 'node_index', 'distance', 'value']
    assert len(table) == 8


def test_export_solution(tmpdir, dom, grid):
    p = ProblemSpec('caputo', 0.5, dom, u0=dom.eigenvectors[0])
    paths = solver.export_solution(solver.solve(p, grid), str(tmpdir.join('solution.csv')))
    assert [p.split('/')[-1] for p in paths] == ['solution.csv', 'solution_modes.csv', 'solution.json']
    with open(paths[2]) as f:
        sidecar = json.load(f)
    assert sidecar['metadata']['kind'] == 'caputo'
    with open(paths[0]) as f:
        header = f.readline().strip()
    assert header == 't,node_index,x,value'
