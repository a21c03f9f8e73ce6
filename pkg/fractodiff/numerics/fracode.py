"""Closed-form solutions of the scalar fractional relaxation equations.

Caputo:   D^C u + lam u = f,  u(0) = u0
R-L:      D^R v + lam v = g,  lim I^(1-alpha) v(h) = v0

Both solutions are ``initial term + P_alpha(.; lam) * forcing``. The
convolution uses :class:`fraccalc.ProductRule` with the exact moments of
``P_alpha``.
"""
import enum
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import fraccalc
from .fraccalc import TimeGrid, TimeSeries, ProductRule
from .specfun import as_alpha, ml, p_alpha_values
from .exc import DomainError, SingularityError
from .log import logger


class DerivativeKind(enum.Enum):
    caputo = 'caputo'
    riemann_liouville = 'riemann-liouville'

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace('_', '-')
        aliases = {'caputo': cls.caputo, 'riemann-liouville': cls.riemann_liouville, 'rl': cls.riemann_liouville}
        if key not in aliases:
            raise DomainError('Unknown derivative kind {}'.format(name))
        return aliases[key]


class OdeProblem(object):
    """A scalar fractional ODE with its initial datum and forcing.

    ``initial`` is ``u(0)`` for Caputo problems and the limit of
    ``I^(1-alpha) v`` at 0 for Riemann-Liouville problems.
    """

    def __init__(self, kind, alpha, lam, initial, forcing=0.0, T=1.0):
        self.kind = DerivativeKind.parse(kind)  # type: DerivativeKind
        self.alpha = as_alpha(alpha)  # type: float
        self.lam = float(lam)  # type: float
        if self.lam < 0:
            raise DomainError('lambda must be non-negative, got {}'.format(lam))
        self.initial = float(initial)  # type: float
        self.forcing = forcing
        self.T = float(T)  # type: float
        if not self.T > 0:
            raise DomainError('Horizon T must be positive, got {}'.format(T))

    def grid(self, n_steps):
        return TimeGrid.over(self.T, n_steps)

    def __repr__(self):
        return 'OdeProblem(kind={}, alpha={}, lam={}, initial={}, T={})'.format(
            self.kind.value, self.alpha, self.lam, self.initial, self.T)


@lru_cache(maxsize=256)
def kernel_rule(alpha, lam, grid):
    """Product rule for ``P_alpha(.; lam)`` on ``grid``.

    The moments are ``s^a E_{a,a+1}(-lam s^a)`` and ``s^(a+1) E_{a,a+2}(-lam s^a)``.
    """
    s = grid.dt * np.arange(len(grid))
    z = -lam * s ** alpha
    k0 = s ** alpha * ml(alpha, alpha + 1.0, z)
    k1 = s ** (alpha + 1.0) * ml(alpha, alpha + 2.0, z)
    return ProductRule(grid, k0, k1)


def relaxation(alpha, lam, grid):
    """``E_alpha(-lam t^alpha)`` at the grid nodes."""
    return ml(alpha, 1.0, -lam * grid.nodes ** alpha)


def solve_caputo(p, grid):
    """Closed-form solution of the Caputo problem; ``u(0) = u0`` exactly."""
    if p.kind is not DerivativeKind.caputo:
        raise DomainError('solve_caputo needs a Caputo problem, got {}'.format(p.kind.value))
    forcing = fraccalc.as_series(p.forcing, grid)
    u = p.initial * relaxation(p.alpha, p.lam, grid)
    u = u + kernel_rule(p.alpha, p.lam, grid).apply(forcing)
    u[0] = p.initial
    return TimeSeries(grid, u)


def solve_riemann(p, grid, include_origin=False):
    """Closed-form solution of the Riemann-Liouville problem.

    Node 0 is nan when ``v0 != 0``; asking for it with ``include_origin``
    raises :class:`SingularityError`.
    """
    if p.kind is not DerivativeKind.riemann_liouville:
        raise DomainError('solve_riemann needs a Riemann-Liouville problem, got {}'.format(p.kind.value))
    if include_origin and p.initial != 0.0:
        raise SingularityError('v(0) is singular when v0 = {}'.format(p.initial))
    forcing = fraccalc.as_series(p.forcing, grid)
    v = kernel_rule(p.alpha, p.lam, grid).apply(forcing)
    if p.initial != 0.0:
        v[1:] = v[1:] + p.initial * p_alpha_values(p.alpha, grid.nodes[1:], p.lam)
        v[0] = np.nan
    return TimeSeries(grid, v)


def caputo_value_at(p, t):
    """``u(t)`` of the Caputo problem ``p`` from the closed form, off any grid.

    The forcing must be a constant or a callable; the convolution with
    ``P_alpha`` is then integrated adaptively against its ``(t - r)^(alpha-1)``
    endpoint singularity.
    """
    if p.kind is not DerivativeKind.caputo:
        raise DomainError('caputo_value_at needs a Caputo problem, got {}'.format(p.kind.value))
    t = float(t)
    z = -p.lam * t ** p.alpha
    value = p.initial * ml(p.alpha, 1.0, z)
    if t == 0.0:
        return value
    if callable(p.forcing):
        def integrand(r):
            return ml(p.alpha, p.alpha, -p.lam * (t - r) ** p.alpha) * float(np.asarray(p.forcing(r)))

        conv, _ = integrate.quad(integrand, 0.0, t, weight='alg', wvar=(0.0, p.alpha - 1.0),
                                 epsabs=1e-13, epsrel=1e-12, limit=200)
        return value + conv
    if np.ndim(p.forcing) == 0:
        return value + float(p.forcing) * t ** p.alpha * ml(p.alpha, p.alpha + 1.0, z)
    raise DomainError('A closed-form value needs a constant or callable forcing')


def _reversed(series):
    return series.with_values(series.values[::-1])


def duality_terms(alpha, lam, u0, v0, f, g, grid):
    """Both sides of the Caputo/Riemann-Liouville integration by parts.

    ``f`` is a constant or a callable so that ``u(T)`` in the final term
    comes from the closed form. Returns a dict with the individual
    integrals, ``lhs``, ``rhs`` and ``weakly_singular`` (set when ``v0 != 0``
    makes the forcing integral singular at ``t = T``).
    """
    alpha = as_alpha(alpha)
    caputo = OdeProblem('caputo', alpha, lam, u0, f, grid.T)
    u = solve_caputo(caputo, grid)
    v = solve_riemann(OdeProblem('riemann-liouville', alpha, lam, v0, g, grid.T), grid)
    exponent = alpha - 1.0 if v0 != 0.0 else None
    f_series = fraccalc.as_series(f, grid)
    g_series = fraccalc.as_series(g, grid)

    coupling = fraccalc.singular_product_integral(v, _reversed(u), exponent)
    forcing_f = fraccalc.singular_product_integral(v, _reversed(f_series), exponent)
    initial_u = u0 * float(fraccalc.rl_integral(v, 1.0 - alpha, exponent).values[-1])
    forcing_g = float(integrate.trapezoid(u.values * g_series.values[::-1], grid.nodes))
    final = caputo_value_at(caputo, grid.T) * v0 if v0 != 0.0 else 0.0

    lhs = -lam * coupling + forcing_f + initial_u
    rhs = -lam * coupling + forcing_g + final
    return {
        'coupling': coupling,
        'forcing_f': forcing_f,
        'initial_u': initial_u,
        'forcing_g': forcing_g,
        'final': final,
        'lhs': lhs,
        'rhs': rhs,
        'weakly_singular': v0 != 0.0,
    }


def duality_residual(alpha, lam, u0, v0, f, g, T, grid):
    """``|LHS - RHS|`` of the integration by parts, Richardson-extrapolated.

    The defect is computed on ``grid`` and on its refinement and
    extrapolated assuming an error of order ``dt^(1+alpha)``.
    """
    alpha = as_alpha(alpha)
    if abs(grid.T - T) > 1e-12 * max(1.0, T):
        raise DomainError('Grid ends at {} but T = {}'.format(grid.T, T))
    coarse = duality_terms(alpha, lam, u0, v0, f, g, grid)
    fine = duality_terms(alpha, lam, u0, v0, f, g, grid.refine(2))
    d_coarse = coarse['lhs'] - coarse['rhs']
    d_fine = fine['lhs'] - fine['rhs']
    q = 1.0 + alpha
    extrapolated = d_fine + (d_fine - d_coarse) / (2.0 ** q - 1.0)
    if fine['weakly_singular']:
        logger.debug('Duality check with v0={} integrates a weakly singular forcing term'.format(v0))
    logger.debug('Duality defect alpha={} lam={}: {:.3g} (n={}), {:.3g} (n={}), extrapolated {:.3g}'.format(
        alpha, lam, d_coarse, grid.n_steps, d_fine, 2 * grid.n_steps, extrapolated))
    return abs(extrapolated)


def adjoint_defect(grid, alpha):
    """``max |C^T - J R J|`` for the discrete Caputo and R-L operators.

    ``J`` reverses time; nodes 1..n are compared since node 0 carries the
    initial datum.
    """
    c = fraccalc.caputo_matrix(grid, alpha)[1:, 1:]
    r = fraccalc.rl_matrix(grid, alpha)[1:, 1:]
    return float(np.max(np.abs(c.T - r[::-1, ::-1])))
