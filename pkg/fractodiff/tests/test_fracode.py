import math

import numpy as np
import pytest
from scipy import integrate, special

from ..numerics import fracode, fraccalc
from ..numerics.fraccalc import TimeGrid
from ..numerics.fracode import OdeProblem, DerivativeKind
from ..numerics.specfun import ml
from ..numerics.exc import DomainError, SingularityError


def test_derivative_kind_aliases():
    assert DerivativeKind.parse('rl') is DerivativeKind.riemann_liouville
    assert DerivativeKind.parse('Riemann_Liouville') is DerivativeKind.riemann_liouville
    with pytest.raises(DomainError):
        DerivativeKind.parse('grunwald')


def test_problem_validation():
    with pytest.raises(DomainError):
        OdeProblem('caputo', 0.5, -1.0, 1.0)
    with pytest.raises(DomainError):
        OdeProblem('caputo', 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        OdeProblem('caputo', 0.5, 1.0, 1.0, T=0.0)


@pytest.mark.parametrize('alpha,lam', [(0.3, 1.0), (0.5, 5.0), (0.7, 0.0)])
def test_caputo_relaxation(alpha, lam):
    grid = TimeGrid.over(2.0, 100)
    u = fracode.solve_caputo(OdeProblem('caputo', alpha, lam, 2.0), grid).values
    assert u[0] == 2.0
    assert np.max(np.abs(u - 2.0 * ml(alpha, 1.0, -lam * grid.nodes ** alpha))) < 1e-12


def test_caputo_constant_forcing():
    """f = 1, u0 = 0: u = (1 - E_alpha(-lam t^alpha)) / lam, reproduced by the product rule."""
    alpha, lam = 0.5, 2.0
    grid = TimeGrid.over(1.0, 50)
    u = fracode.solve_caputo(OdeProblem('caputo', alpha, lam, 0.0, 1.0), grid).values
    exact = (1.0 - ml(alpha, 1.0, -lam * grid.nodes ** alpha)) / lam
    assert np.max(np.abs(u - exact)) < 1e-12


def test_riemann_initial_term():
    alpha, lam = 0.5, 1.0
    grid = TimeGrid.over(1.0, 50)
    v = fracode.solve_riemann(OdeProblem('rl', alpha, lam, 3.0), grid).values
    t = grid.nodes[1:]
    assert np.isnan(v[0])
    assert np.max(np.abs(v[1:] - 3.0 * t ** (alpha - 1.0) * ml(alpha, alpha, -lam * t ** alpha))) < 1e-12


def test_riemann_origin():
    grid = TimeGrid.over(1.0, 10)
    with pytest.raises(SingularityError):
        fracode.solve_riemann(OdeProblem('rl', 0.5, 1.0, 1.0), grid, include_origin=True)
    v = fracode.solve_riemann(OdeProblem('rl', 0.5, 1.0, 0.0, 1.0), grid, include_origin=True)
    assert v.values[0] == 0.0


def test_solvers_reject_wrong_kind():
    grid = TimeGrid.over(1.0, 10)
    with pytest.raises(DomainError):
        fracode.solve_caputo(OdeProblem('rl', 0.5, 1.0, 1.0), grid)
    with pytest.raises(DomainError):
        fracode.solve_riemann(OdeProblem('caputo', 0.5, 1.0, 1.0), grid)


def test_caputo_and_riemann_agree_without_initial_datum():
    grid = TimeGrid.over(1.0, 100)
    u = fracode.solve_caputo(OdeProblem('caputo', 0.4, 3.0, 0.0, np.cos), grid).values
    v = fracode.solve_riemann(OdeProblem('rl', 0.4, 3.0, 0.0, np.cos), grid).values
    assert np.array_equal(u, v)


def test_caputo_solution_solves_equation():
    """The L1 derivative of the closed form balances the equation up to discretisation error."""
    alpha, lam = 0.5, 1.0
    grid = TimeGrid.over(1.0, 2000)
    u = fracode.solve_caputo(OdeProblem('caputo', alpha, lam, 1.0, 1.0), grid)
    residual = fraccalc.caputo_derivative(u, alpha).values + lam * u.values - 1.0
    assert np.max(np.abs(residual[grid.n_steps // 2:])) < 1e-2


def test_ml_caputo_against_l1():
    alpha, lam = 0.5, 1.0
    grid = TimeGrid.over(1.0, 1000)

    def f(t):
        return 2.0 * t ** (2.0 - alpha) / special.gamma(3.0 - alpha) + lam * (1.0 + t ** 2)

    closed = fracode.solve_caputo(OdeProblem('caputo', alpha, lam, 1.0, f), grid).values
    stepped = fraccalc.l1_solve(alpha, lam, 1.0, f, grid).values
    assert np.max(np.abs(closed - (1.0 + grid.nodes ** 2))) < 1e-5
    assert np.max(np.abs(closed - stepped)) / np.max(np.abs(closed)) < 5e-3


@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.7])
@pytest.mark.parametrize('lam', [0.0, 1.0, 5.0])
def test_duality_residual(alpha, lam):
    grid = TimeGrid.over(1.0, 400)
    residual = fracode.duality_residual(alpha, lam, 1.0, 1.0, lambda t: np.ones_like(t), lambda t: t, 1.0, grid)
    assert residual <= 1e-4


@pytest.mark.parametrize('forcing', [1.0, np.cos])
def test_caputo_value_at_matches_grid_solution(forcing):
    p = OdeProblem('caputo', 0.5, 2.0, 1.0, forcing)
    grid = TimeGrid.over(1.0, 2000)
    closed = fracode.caputo_value_at(p, 1.0)
    assert abs(closed - fracode.solve_caputo(p, grid).values[-1]) < 1e-6
    assert fracode.caputo_value_at(p, 0.0) == 1.0


def test_caputo_value_at_needs_closed_form_data():
    grid = TimeGrid.over(1.0, 10)
    with pytest.raises(DomainError):
        fracode.caputo_value_at(OdeProblem('caputo', 0.5, 1.0, 1.0, np.ones(len(grid))), 1.0)
    with pytest.raises(DomainError):
        fracode.caputo_value_at(OdeProblem('rl', 0.5, 1.0, 1.0), 1.0)


def test_duality_approaches_classical_integration_by_parts():
    """alpha -> 1 with lam = 1, u0 = v0 = 1, f = 1, g = t: u = 1 and v = t - 1 + 2 e^(-t)."""
    def v(t):
        return t - 1.0 + 2.0 * math.exp(-t)

    lhs = integrate.quad(lambda t: v(1.0 - t) * (-1.0 + 1.0), 0.0, 1.0)[0] + v(1.0)
    rhs = integrate.quad(lambda t: -v(1.0 - t) + (1.0 - t), 0.0, 1.0)[0] + 1.0
    classical = abs(lhs - rhs)
    grid = TimeGrid.over(1.0, 400)
    residual = fracode.duality_residual(0.999, 1.0, 1.0, 1.0, lambda t: np.ones_like(t), lambda t: t, 1.0, grid)
    assert abs(residual - classical) <= 1e-3


def test_duality_regular_case():
    grid = TimeGrid.over(1.0, 200)
    residual = fracode.duality_residual(0.5, 1.0, 1.0, 0.0, np.cos, np.sin, 1.0, grid)
    assert residual <= 1e-4


def test_duality_grid_mismatch():
    with pytest.raises(DomainError):
        fracode.duality_residual(0.5, 1.0, 1.0, 1.0, np.cos, np.sin, 2.0, TimeGrid.over(1.0, 10))


@pytest.mark.parametrize('alpha', [0.3, 0.8])
def test_adjoint_defect(alpha):
    assert fracode.adjoint_defect(TimeGrid.over(1.0, 50), alpha) < 1e-10 * 50 ** alpha


def test_rl_initial_limit():
    alpha = 0.5
    grid = TimeGrid.over(1.0, 2000)
    v = fracode.solve_riemann(OdeProblem('rl', alpha, 1.0, 2.0), grid)
    assert abs(fraccalc.rl_frac_integral_at_zero(v, alpha, alpha - 1.0) - 2.0) < 1e-3
    assert math.isnan(v.values[0])
