"""Time-fractional problems on a :class:`spectral.SpectralDomain`.

The problem ``D^alpha u + L u = f`` with initial datum ``u0`` and singular
boundary data ``h`` decouples along the eigenbasis into the scalar equations
of :mod:`fracode`:

    u_k(t) = initial_k(t) + (P_alpha(.; lam_k) * (f_k + sum_zeta h_zeta g_zeta,k))(t)

where ``g_zeta,k`` are the limits of the coefficients of the concentrated
sources ``f_j`` at each boundary site. The Caputo and Riemann-Liouville
problems differ only in the initial term.
"""
import math
from collections import namedtuple

import numpy as np
import pandas as pd
from scipy import integrate

from .configuration import config
from .exc import DomainError, SingularityError, ResolutionError
from . import fraccalc, spectral, reports
from .fraccalc import TimeSeries, ProductRule
from .fracode import DerivativeKind, kernel_rule
from .spectral import GridFunction
from .specfun import as_alpha, ml, mainardi_values, mainardi_support
from .log import logger


def _nodal(dom, v):
    values = spectral.nodal_values(dom, v)
    if values.ndim == 0:
        return np.full(dom.n_nodes, float(values))
    if values.shape != (dom.n_nodes,):
        raise DomainError('Expected {} nodal values, got shape {}'.format(dom.n_nodes, values.shape))
    return np.array(values, dtype=float)


def field_series(dom, value, grid):
    """Coerce space-time data into a field TimeSeries ``(n_steps + 1, n_nodes)``.

    ``value`` may be a field TimeSeries, a callable ``value(t, x)`` or any
    time-independent nodal data.
    """
    if isinstance(value, TimeSeries):
        series = fraccalc.as_series(value, grid)
        if not series.is_field or series.values.shape[1] != dom.n_nodes:
            raise DomainError('Field series must have {} columns, got shape {}'.format(
                dom.n_nodes, series.values.shape))
        return series
    if callable(value) and not isinstance(value, GridFunction):
        rows = [np.broadcast_to(np.asarray(value(t, dom.coords), dtype=float), (dom.n_nodes,)) for t in grid.nodes]
        return TimeSeries(grid, np.array(rows))
    return TimeSeries(grid, np.tile(_nodal(dom, value), (len(grid), 1)))


class ProblemSpec(object):
    """Data of ``D^alpha u + L u = f`` on ``(0, T) x Omega``.

    Parameters
    ----------
    kind : DerivativeKind or str
    alpha : float or FractionalOrder
    domain : SpectralDomain
    u0 : GridFunction, array, callable of x or float
        ``u(0)`` for Caputo problems; the limit of ``I^(1-alpha) u`` at 0 for
        Riemann-Liouville problems.
    f : TimeSeries, GridFunction, array, float or callable ``f(t, x)``
    h : dict, optional
        Boundary data per site; floats, callables of ``t`` or scalar TimeSeries.
    T : float
    """

    def __init__(self, kind, alpha, domain, u0=0.0, f=0.0, h=None, T=1.0):
        self.kind = DerivativeKind.parse(kind)  # type: DerivativeKind
        self.alpha = as_alpha(alpha)  # type: float
        self.domain = domain
        self.u0 = GridFunction(domain, _nodal(domain, u0))  # type: GridFunction
        self.f = f
        self.h = dict((domain.site(name).name, value) for name, value in (h or {}).items())
        self.T = float(T)  # type: float
        if not self.T > 0:
            raise DomainError('Horizon T must be positive, got {}'.format(T))
        grids = [s.grid for s in [f] + list(self.h.values()) if isinstance(s, TimeSeries)]
        if any(g != grids[0] for g in grids[1:]):
            raise DomainError('Grids of f and h do not match')
        if grids and abs(grids[0].T - self.T) > 1e-12 * max(1.0, self.T):
            raise DomainError('Data grids end at {} but T = {}'.format(grids[0].T, self.T))

    def check_grid(self, grid):
        if abs(grid.T - self.T) > 1e-12 * max(1.0, self.T):
            raise DomainError('Grid ends at {} but T = {}'.format(grid.T, self.T))

    def forcing_series(self, grid):
        return field_series(self.domain, self.f, grid)

    def boundary_series(self, grid):
        """Scalar TimeSeries of the boundary data per site name."""
        out = {}
        for name, value in self.h.items():
            series = fraccalc.as_series(value, grid)
            if series.is_field:
                raise DomainError('Boundary data at {} must be a scalar series'.format(name))
            out[name] = series
        return out

    def with_data(self, u0=None, f=None, h=None):
        """Same operator and order with other data; omitted data are zero."""
        return ProblemSpec(self.kind, self.alpha, self.domain, 0.0 if u0 is None else u0,
                           0.0 if f is None else f, h, self.T)

    def __repr__(self):
        return 'ProblemSpec(kind={}, alpha={}, domain={!r}, T={}, boundary={})'.format(
            self.kind.value, self.alpha, self.domain, self.T, sorted(self.h))


class Solution(object):
    """Spectral coefficients of a solution, with its parts and metadata.

    ``parts`` holds the coefficients of the ``initial``, ``forcing`` and
    ``boundary`` terms; their sum is ``spectral_coeffs``.
    """

    def __init__(self, problem, grid, coeffs, parts=None, metadata=None):
        self.problem = problem  # type: ProblemSpec
        self.domain = problem.domain
        self.grid = grid
        self.spectral_coeffs = TimeSeries(grid, coeffs)  # type: TimeSeries
        self.parts = parts or {}
        self.metadata = metadata or {}
        self._field = None

    @property
    def field(self):
        if self._field is None:
            self._field = TimeSeries(self.grid, self.domain.synthesize(self.spectral_coeffs.values))
        return self._field

    def time_index(self, t):
        k = int(round((float(t) - self.grid.t0) / self.grid.dt))
        if not 0 <= k < len(self.grid) or abs(self.grid.nodes[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError('t={} is not a node of {}'.format(t, self.grid))
        return k

    def at(self, t):
        return GridFunction(self.domain, self.field.values[self.time_index(t)])

    def __repr__(self):
        return 'Solution({!r}, {!r})'.format(self.problem, self.grid)


# Solution operators

def s_alpha_apply(dom, alpha, t, v):
    """``E_alpha(-t^alpha L) v``; ``t = 0`` returns ``v`` unchanged."""
    alpha = as_alpha(alpha)
    t = float(t)
    if t < 0:
        raise DomainError('S_alpha(t) needs t >= 0, got {}'.format(t))
    values = _nodal(dom, v)
    if t == 0.0:
        return GridFunction(dom, values)
    return GridFunction(dom, dom.apply_multiplier(ml(alpha, 1.0, -dom.eigenvalues * t ** alpha), values))


def p_alpha_apply(dom, alpha, t, v):
    """``t^(alpha-1) E_{alpha,alpha}(-t^alpha L) v`` for ``t > 0``."""
    alpha = as_alpha(alpha)
    t = float(t)
    if t == 0.0:
        raise SingularityError('P_alpha(t) is singular at t=0')
    if t < 0:
        raise DomainError('P_alpha(t) needs t > 0, got {}'.format(t))
    mult = t ** (alpha - 1.0) * ml(alpha, alpha, -dom.eigenvalues * t ** alpha)
    return GridFunction(dom, dom.apply_multiplier(mult, _nodal(dom, v)))


def heat_apply(dom, t, v):
    """Heat semigroup ``exp(-t L) v``."""
    t = float(t)
    if t < 0:
        raise DomainError('Heat semigroup needs t >= 0, got {}'.format(t))
    values = _nodal(dom, v)
    if t == 0.0:
        return GridFunction(dom, values)
    return GridFunction(dom, dom.apply_multiplier(np.exp(-dom.eigenvalues * t), values))


def _subordinate(alpha, lam, scale, moment):
    """``int_0^inf tau^moment Phi_alpha(tau) exp(-tau scale lam) dtau`` for every mode."""
    lam = np.asarray(lam, dtype=float)

    def integrand(tau):
        return tau ** moment * float(mainardi_values(alpha, tau)) * np.exp(-tau * scale * lam)

    total = np.zeros(lam.shape)
    for a, b in ((0.0, 1.0), (1.0, mainardi_support(alpha))):
        value, _ = integrate.quad_vec(integrand, a, b, epsabs=1e-13, epsrel=1e-11, norm='max', limit=400)
        total = total + value
    return total


def subordinated_s_alpha(dom, alpha, t, v):
    """``S_alpha(t) v`` as the average of ``exp(-tau t^alpha L) v`` against ``Phi_alpha``."""
    alpha = as_alpha(alpha)
    t = float(t)
    if t < 0:
        raise DomainError('S_alpha(t) needs t >= 0, got {}'.format(t))
    values = _nodal(dom, v)
    if t == 0.0:
        return GridFunction(dom, values)
    return GridFunction(dom, dom.apply_multiplier(_subordinate(alpha, dom.eigenvalues, t ** alpha, 0), values))


def subordinated_p_alpha(dom, alpha, t, v):
    """``P_alpha(t) v = alpha t^(alpha-1) int tau Phi_alpha(tau) exp(-tau t^alpha L) v dtau``."""
    alpha = as_alpha(alpha)
    t = float(t)
    if t == 0.0:
        raise SingularityError('P_alpha(t) is singular at t=0')
    if t < 0:
        raise DomainError('P_alpha(t) needs t > 0, got {}'.format(t))
    mult = alpha * t ** (alpha - 1.0) * _subordinate(alpha, dom.eigenvalues, t ** alpha, 1)
    return GridFunction(dom, dom.apply_multiplier(mult, _nodal(dom, v)))


def mode_convolutions(alpha, lam, series):
    """``(P_alpha(.; lam_k) * w_k)(t)`` at every node, one column per mode.

    A scalar ``series`` is convolved with every kernel; a field series holds
    one column per mode. All-zero columns are skipped. A mode with
    ``lam_k dt^alpha`` above ``tolerances.mode_cutoff`` is dropped when
    ``max|w_k| / lam_k``, which bounds its convolution, is below
    ``tolerances.mode_contribution``.
    """
    grid = series.grid
    lam = np.asarray(lam, dtype=float)
    stiff = lam * grid.dt ** alpha > float(config.tolerances.mode_cutoff)
    floor = float(config.tolerances.mode_contribution)
    out = np.zeros((len(grid), lam.shape[0]))
    dropped = 0
    for k, lam_k in enumerate(lam):
        column = series.values if series.values.ndim == 1 else series.values[:, k]
        if not np.any(column):
            continue
        if stiff[k] and np.max(np.abs(column)) / lam_k < floor:
            dropped += 1
            continue
        out[:, k] = kernel_rule(alpha, float(lam_k), grid).apply(TimeSeries(grid, column, series.kind))
    if dropped:
        logger.debug('Dropped {} stiff modes contributing less than {:.1g}'.format(dropped, floor))
    return out


def _initial_term(p, grid):
    dom = p.domain
    u0_hat = dom.project(p.u0.values)
    out = np.zeros((len(grid), dom.n_modes))
    if not np.any(u0_hat):
        return out
    t = grid.nodes
    z = -np.outer(t ** p.alpha, dom.eigenvalues)
    if p.kind is DerivativeKind.caputo:
        out[:] = ml(p.alpha, 1.0, z) * u0_hat
        out[0] = u0_hat
    else:
        out[1:] = t[1:, None] ** (p.alpha - 1.0) * ml(p.alpha, p.alpha, z[1:]) * u0_hat
        out[0] = np.nan
    return out


def _interior_time_l1(dom, coeffs, grid):
    rows = spectral.interior_l1(dom, dom.synthesize(coeffs))
    return float(integrate.trapezoid(rows, grid.nodes))


def solve(p, grid, tol=None):
    """Spectral representation of the solution of ``p`` on ``grid``.

    The boundary term uses :func:`spectral.concentration_limit` with Cauchy
    tolerance ``tol`` (default ``tolerances.concentration_cauchy``); the
    j schedule, the Cauchy gaps and the observed orders are kept in
    ``metadata['concentration']``.

    Raises
    ------
    ConcentrationError
        When the boundary concentration does not settle.
    """
    p.check_grid(grid)
    dom = p.domain
    alpha = p.alpha
    lam = dom.eigenvalues

    initial = _initial_term(p, grid)
    f_hat = p.forcing_series(grid)
    forcing = mode_convolutions(alpha, lam, f_hat.with_values(dom.project(f_hat.values)))
    boundary = np.zeros(initial.shape)
    metadata = {
        'kind': p.kind.value,
        'alpha': alpha,
        'family': dom.family,
        'n_modes': dom.n_modes,
        'n_nodes': dom.n_nodes,
        'n_steps': grid.n_steps,
        'dt': grid.dt,
        'T': grid.T,
    }

    active = dict((name, s) for name, s in p.boundary_series(grid).items() if np.any(s.values))
    if active:
        tol = float(config.tolerances.concentration_cauchy if tol is None else tol)
        limit = spectral.concentration_limit(dom, tol)
        convolved = dict((name, mode_convolutions(alpha, lam, s)) for name, s in active.items())
        for name, conv in convolved.items():
            boundary += conv * limit.coeffs[name]
        # Cauchy gaps of H[0, f_j, 0] in L1(0, T; L1(interior, delta^gamma))
        h_gaps = []
        for i in range(1, len(limit.schedule)):
            diff = sum(conv * (limit.history[name][i] - limit.history[name][i - 1])
                       for name, conv in convolved.items())
            h_gaps.append(_interior_time_l1(dom, diff, grid))
        metadata['concentration'] = {
            'schedule': list(limit.schedule),
            'j': limit.j,
            'cauchy_gaps': list(limit.gaps),
            'raw_gaps': list(limit.raw_gaps),
            'solution_gaps': h_gaps,
            'orders': list(limit.orders),
            'tolerance': limit.tolerance,
        }
        logger.debug('Boundary term concentrated at j={} (gaps {})'.format(limit.j, limit.gaps))

    coeffs = initial + forcing + boundary
    logger.info('Solved {} problem alpha={} on {} modes over {} steps'.format(
        p.kind.value, alpha, dom.n_modes, grid.n_steps))
    return Solution(p, grid, coeffs, {'initial': initial, 'forcing': forcing, 'boundary': boundary}, metadata)


def concentrate_h(dom, h, j, grid):
    """Interior source ``f_j = sum_zeta h(t, zeta) chi_{A_j} / (|A_j| delta^gamma)``.

    Raises
    ------
    ResolutionError
        When some ``A_j`` holds fewer than 3 nodes.
    """
    for site in dom.boundary_sites:
        if spectral.annulus(dom, j, site).shape[0] < 3:
            raise ResolutionError('A_{} holds fewer than 3 nodes at {}'.format(j, site.name))
    total = np.zeros((len(grid), dom.n_nodes))
    for name, value in h.items():
        series = fraccalc.as_series(value, grid)
        total += np.outer(series.values, spectral.concentrated_profile(dom, j, name))
    return TimeSeries(grid, total)


# Weak-dual formulation

def check_test_weight(dom, values):
    """Reject test functions that blow up faster than ``delta^gamma`` at the boundary.

    At every site the ratio ``|phi| / delta^gamma`` at the nearest node may not
    exceed ``spectral.weight_blowup`` times its maximum over nodes 3..8.
    """
    values = np.atleast_2d(values)
    if not np.all(np.isfinite(values)):
        raise DomainError('Test function is not finite')
    factor = float(config.spectral.weight_blowup)
    ratio = np.abs(values) / dom.delta_gamma
    for site in dom.boundary_sites:
        idx = dom.side_nodes(site)
        if idx.shape[0] < 8:
            continue
        near = ratio[:, idx[0]]
        reference = np.max(ratio[:, idx[2:8]], axis=1)
        if np.any(near > factor * reference):
            raise DomainError('Test function is not bounded by delta^gamma near {}'.format(site.name))


WeakDualTerms = namedtuple('WeakDualTerms', ['lhs', 'initial', 'forcing', 'boundary', 'rhs', 'residual'])


def weak_dual_terms(u, p, phi):
    """Both sides of the weak-dual identity for ``u`` tested against ``phi``.

    ``lhs = int_0^T <u(t), phi(T-t)> dt``; the right side has the ``u0`` term
    (``I^(1-alpha) H[0,phi,0](T)`` for Caputo, ``H[0,phi,0](T)`` for
    Riemann-Liouville), the forcing term and the boundary term through
    ``D_gamma H[0,phi,0]``.

    Parameters
    ----------
    u : Solution or TimeSeries
        A solution or any field series on the grid of the test.
    p : ProblemSpec
    phi : TimeSeries, GridFunction, array or callable ``phi(t, x)``
    """
    dom = p.domain
    field = u.field if isinstance(u, Solution) else u
    grid = field.grid
    p.check_grid(grid)
    alpha = p.alpha
    lam = dom.eigenvalues
    phi = field_series(dom, phi, grid)
    if phi.kind != 'nodal':
        raise DomainError('Test functions must be nodal series')
    check_test_weight(dom, phi.values)
    phi_hat = dom.project(phi.values)
    w = mode_convolutions(alpha, lam, TimeSeries(grid, phi_hat))
    ones = TimeSeries(grid, np.ones(len(grid)))

    pair = np.sum(field.values * phi.values[::-1] * dom.weights, axis=1)
    exponent = alpha if np.all(np.isfinite(field.values[0])) else alpha - 1.0
    lhs = fraccalc.singular_product_integral(TimeSeries(grid, pair), ones, exponent)

    u0_hat = dom.project(p.u0.values)
    if p.kind is DerivativeKind.caputo:
        # I^(1-alpha) H[0,phi,0] = E_alpha(-lam t^alpha) * phi
        s = grid.dt * np.arange(len(grid))
        iw = np.empty(dom.n_modes)
        for k, lam_k in enumerate(lam):
            rule = ProductRule(grid, s * ml(alpha, 2.0, -lam_k * s ** alpha),
                               s ** 2 * ml(alpha, 3.0, -lam_k * s ** alpha))
            iw[k] = rule.apply(TimeSeries(grid, phi_hat[:, k]))[-1] if np.any(u0_hat[k]) else 0.0
        initial = float(np.dot(u0_hat, iw))
    else:
        initial = float(np.dot(u0_hat, w[-1]))

    f_series = p.forcing_series(grid)
    if f_series.kind != 'nodal':
        raise DomainError('The weak-dual forcing term needs nodal forcing')
    f_hat = dom.project(f_series.values)
    forcing_pair = np.sum(w * f_hat[::-1], axis=1)
    forcing = fraccalc.singular_product_integral(TimeSeries(grid, forcing_pair), ones, alpha)

    boundary = 0.0
    for name, series in p.boundary_series(grid).items():
        if not np.any(series.values):
            continue
        d_gamma = w.dot(spectral.mode_boundary_derivatives(dom, name))
        boundary += fraccalc.singular_product_integral(
            TimeSeries(grid, d_gamma * series.values[::-1]), ones, alpha)

    rhs = initial + forcing + boundary
    return WeakDualTerms(lhs, initial, forcing, boundary, rhs, abs(lhs - rhs))


def weak_dual_residual(u, p, phi):
    """``|LHS - RHS|`` of the weak-dual identity; see :func:`weak_dual_terms`.

    Raises
    ------
    DomainError
        When ``phi`` violates the ``delta^gamma`` weight bound.
    """
    return weak_dual_terms(u, p, phi).residual


def _smooth_cutoff(dom, margin):
    """Smoothed indicator of ``K = {delta >= 2 margin L}``, zero on ``delta <= margin L``."""
    width = margin * dom.length
    r = np.clip((dom.delta - width) / width, 0.0, 1.0)
    return r * r * (3.0 - 2.0 * r)


def sign_indicator_battery(dom, grid, field, margins=(0.05, 0.1, 0.2), eps=None):
    """Mollified sign indicators ``phi(tau) = tanh(w(T - tau) / eps) chi_K``.

    Testing ``w`` against each member gives ``int int |w| chi_K`` up to the
    mollification, one member per cutoff margin.
    """
    series = field_series(dom, field, grid)
    values = np.nan_to_num(series.values)
    if eps is None:
        eps = 0.1 * max(float(np.max(np.abs(values))), 1e-300)
    battery = []
    for margin in margins:
        cut = _smooth_cutoff(dom, margin)
        battery.append(TimeSeries(grid, np.tanh(values[::-1] / eps) * cut))
    return battery


def uniqueness_indicator(u, p, battery):
    """Largest weak-dual residual of ``u`` over a test battery."""
    return max(weak_dual_residual(u, p, phi) for phi in battery)


# Compactness

def compactness_modulus(alpha, lambda1, t0, t1, t):
    """``H[0, chi_[t0,t1] phi_1, 0](t) / phi_1``.

    ``[E_a(-lam (t - t1)_+^a) - E_a(-lam (t - t0)_+^a)] / lam``, with the
    ``lam -> 0`` limit for ``lam = 0``.
    """
    alpha = as_alpha(alpha)
    if not 0 <= t0 < t1:
        raise DomainError('Need 0 <= t0 < t1, got t0={} t1={}'.format(t0, t1))
    lam = float(lambda1)
    if lam < 0:
        raise DomainError('lambda1 must be non-negative, got {}'.format(lambda1))
    t = np.asarray(t, dtype=float)
    late = np.maximum(t - t1, 0.0) ** alpha
    early = np.maximum(t - t0, 0.0) ** alpha
    if lam == 0.0:
        out = (early - late) / math.gamma(1.0 + alpha)
    else:
        out = (np.asarray(ml(alpha, 1.0, -lam * late)) - np.asarray(ml(alpha, 1.0, -lam * early))) / lam
    return float(out) if out.ndim == 0 else out


def _modulus_rl_integral(alpha, lam, t0, t1, T):
    """``I^(1-alpha)`` of the compactness modulus, evaluated at ``T``."""
    if lam == 0.0:
        return max(T - t0, 0.0) - max(T - t1, 0.0)

    def j(r):
        if r <= 0:
            return 0.0
        return r ** (1.0 - alpha) * (ml(alpha, 2.0 - alpha, -lam * r ** alpha) - 1.0 / math.gamma(2.0 - alpha))

    return (j(T - t1) - j(T - t0)) / lam


CompactnessCheck = namedtuple('CompactnessCheck', ['lhs', 'rhs', 'omega', 'comparability', 'holds'])


def _region_mask(dom, region):
    if region is None:
        return np.ones(dom.n_nodes, dtype=bool)
    if callable(region):
        return np.asarray(region(dom.coords), dtype=bool)
    return np.asarray(region, dtype=bool)


def compactness_check(p, grid, t0, t1, region=None, solution=None):
    """Weighted-L1 compactness estimate on ``(t0, t1) x A``.

    ``lhs = int_t0^t1 int_A |u| delta^gamma``. The right side is
    ``(C / c) omega (||u0||_{L1(delta^gamma)} + ||f||_{L1 L1(delta^gamma)})``
    where ``c <= phi_1 / delta^gamma <= C`` and ``omega`` bounds the modulus
    of the test ``chi_[T-t1, T-t0] phi_1`` and its ``I^(1-alpha)`` at ``T``.
    ``t0`` and ``t1`` must be grid nodes.
    """
    if any(np.any(s.values) for s in p.boundary_series(grid).values()):
        raise DomainError('The compactness estimate covers h = 0 only')
    dom = p.domain
    sol = solution if solution is not None else solve(p, grid)
    k0, k1 = sol.time_index(t0), sol.time_index(t1)
    if not k0 < k1:
        raise DomainError('Need t0 < t1, got t0={} t1={}'.format(t0, t1))
    mask = _region_mask(dom, region)
    field = sol.field.values[k0:k1 + 1]
    if not np.all(np.isfinite(field)):
        raise SingularityError('The solution is singular on [{}, {}]'.format(t0, t1))
    weights = (dom.delta_gamma * dom.weights)[mask]
    lhs = float(integrate.trapezoid(np.sum(np.abs(field[:, mask]) * weights, axis=1), grid.nodes[k0:k1 + 1]))

    T = grid.T
    alpha = p.alpha
    lam1 = float(dom.eigenvalues[0])
    s0, s1 = T - t1, T - t0
    samples = np.union1d(grid.nodes, np.linspace(s1, T, 257))
    omega = float(np.max(compactness_modulus(alpha, lam1, s0, s1, samples)))
    if p.kind is DerivativeKind.caputo:
        omega = max(omega, _modulus_rl_integral(alpha, lam1, s0, s1, T))

    ratio = np.abs(dom.eigenvectors[0]) / dom.delta_gamma
    comparability = float(np.max(ratio) / np.min(ratio))
    f_series = p.forcing_series(grid)
    f_rows = np.sum(np.abs(f_series.values) * dom.delta_gamma * dom.weights, axis=1)
    if f_series.kind == 'cellwise':
        f_norm = float(np.sum(f_rows[1:]) * grid.dt)
    else:
        f_norm = float(integrate.trapezoid(f_rows, grid.nodes))
    rhs = comparability * omega * (p.u0.weighted_l1() + f_norm)
    return CompactnessCheck(lhs, rhs, omega, comparability, lhs <= rhs)


# Boundary behaviour

def upsilon_normalization(dom, alpha, sigma_max=None, tol=None):
    """``int_0^sigma_max sum_zeta D_gamma P_alpha(s, x, zeta) ds / u*(x)`` at interior nodes.

    ``sigma_max=None`` integrates over ``(0, inf)``.
    """
    alpha = as_alpha(alpha)
    lam = dom.eigenvalues
    d_gamma = sum(spectral.mode_boundary_derivatives(dom, site) for site in dom.boundary_sites)
    if sigma_max is None:
        moment = 1.0 / lam
    else:
        moment = sigma_max ** alpha * ml(alpha, alpha + 1.0, -lam * sigma_max ** alpha)
    mask = dom.interior_mask()
    numerator = dom.synthesize(moment * d_gamma)
    return numerator[mask] / spectral.u_star(dom, tol).values[mask]


def h_star_proxy(dom, alpha, zeta, deltas=(0.01, 0.1, 1.0)):
    """Time-tail share of ``D_gamma S`` at the nodes nearest ``zeta``.

    For each ``delta`` the value at ``x`` is
    ``sum_k E_alpha(-lam_k delta^alpha) phi_k(x) D_k / lam_k`` over
    ``sum_k phi_k(x) D_k / lam_k``. Reported only; values should decay as
    ``x`` approaches ``zeta``.
    """
    alpha = as_alpha(alpha)
    lam = dom.eigenvalues
    d_gamma = sum(spectral.mode_boundary_derivatives(dom, site) for site in dom.boundary_sites)
    total = dom.synthesize(d_gamma / lam)
    idx = dom.side_nodes(zeta)[:4]
    rows = []
    for delta in deltas:
        tail = dom.synthesize(ml(alpha, 1.0, -lam * delta ** alpha) * d_gamma / lam)
        for i in idx:
            rows.append({'delta': float(delta), 'node_index': int(i), 'distance': float(dom.delta[i]),
                         'value': float(tail[i] / total[i])})
    table = pd.DataFrame(rows, columns=['delta', 'node_index', 'distance', 'value'])
    for delta, group in table.groupby('delta'):
        logger.info('Tail share at {} for delta={}: {}'.format(
            dom.site(zeta).name, delta, ', '.join('{:.4g}'.format(v) for v in group['value'])))
    return table


def decay_report(sol, p):
    """L2 estimates at every time node.

    Columns: the initial-term norm and its bound (``t^(1-alpha)`` scaled for
    Riemann-Liouville), the squared forcing-term norm and both readings of
    its bound, and a pass flag per estimate. The forcing estimate passes
    under the weaker reading ``max(c, c^2) sup ||f||^2``.
    """
    dom = p.domain
    grid = sol.grid
    t = grid.nodes
    alpha = p.alpha
    lam1 = float(dom.eigenvalues[0])
    u0_norm = p.u0.norm()
    init_norm = np.linalg.norm(sol.parts['initial'], axis=1)
    if p.kind is DerivativeKind.caputo:
        init_bound = ml(alpha, 1.0, -lam1 * t ** alpha) * u0_norm
    else:
        with np.errstate(divide='ignore', invalid='ignore'):
            init_norm = t ** (1.0 - alpha) * init_norm
        init_norm[0] = np.nan
        init_bound = ml(alpha, alpha, -lam1 * t ** alpha) * u0_norm

    f_series = p.forcing_series(grid)
    f_rows = np.sqrt(np.sum(f_series.values ** 2 * dom.weights, axis=1))
    f_sup = float(np.max(f_rows[1:] if f_series.kind == 'cellwise' else f_rows))
    c = (1.0 - ml(alpha, 1.0, -lam1 * t ** alpha)) / lam1
    forcing_sq = np.sum(sol.parts['forcing'] ** 2, axis=1)
    printed = c * f_sup ** 2
    unsquared = c ** 2 * f_sup ** 2
    slack = 1.0 + 1e-9
    table = pd.DataFrame({
        't': t,
        'initial_norm': init_norm,
        'initial_bound': init_bound,
        'initial_ok': ~(init_norm > init_bound * slack + 1e-300),
        'forcing_norm_sq': forcing_sq,
        'forcing_bound_printed': printed,
        'forcing_bound_unsquared': unsquared,
        'forcing_ok': forcing_sq <= np.maximum(printed, unsquared) * slack + 1e-300,
    }, columns=['t', 'initial_norm', 'initial_bound', 'initial_ok', 'forcing_norm_sq',
                'forcing_bound_printed', 'forcing_bound_unsquared', 'forcing_ok'])
    logger.info('Forcing estimate holds at {}/{} nodes as printed and at {}/{} nodes unsquared'.format(
        int(np.sum(forcing_sq <= printed * slack + 1e-300)), len(t),
        int(np.sum(forcing_sq <= unsquared * slack + 1e-300)), len(t)))
    return table


BoundaryRatio = namedtuple('BoundaryRatio', ['value', 'spread', 'low_confidence'])


def boundary_ratio(sol, dom, t, zeta, tol=None):
    """Extrapolated ``u(t, x) / u*(x)`` as ``x -> zeta``.

    ``spread`` is the gap between the 4- and 3-node extrapolations relative
    to ``max(|value|, 1)``; above ``tolerances.boundary_ratio_spread`` the
    result is flagged ``low_confidence``. ``u*`` uses the concentration
    tolerance of ``sol`` when it has a boundary term.
    """
    k = sol.time_index(t)
    if not sol.grid.nodes[k] > 0:
        raise DomainError('boundary_ratio needs t > 0, got {}'.format(t))
    if tol is None:
        tol = sol.metadata.get('concentration', {}).get('tolerance', config.tolerances.ustar_cauchy)
    ustar = spectral.u_star(dom, tol).values
    four, three = spectral.boundary_extrapolation(dom, zeta, sol.field.values[k] / ustar)
    value = float(four[0])
    spread = abs(value - float(three[0])) / max(abs(value), 1.0)
    low = spread > float(config.tolerances.boundary_ratio_spread)
    if low:
        logger.warn('Boundary ratio at {} and t={} has spread {:.3g}'.format(dom.site(zeta).name, t, spread))
    return BoundaryRatio(value, spread, low)


def export_solution(sol, path):
    """Write the field as ``t, node_index, x, value`` rows plus a JSON sidecar.

    A second table ``<stem>_modes.csv`` holds one column per spectral
    coefficient. Returns the written paths.
    """
    dom = sol.domain
    grid = sol.grid
    n_x = dom.n_nodes
    table = pd.DataFrame({
        't': np.repeat(grid.nodes, n_x),
        'node_index': np.tile(np.arange(n_x), len(grid)),
        'x': np.tile(dom.coords, len(grid)),
        'value': sol.field.values.ravel(),
    }, columns=['t', 'node_index', 'x', 'value'])
    reports.write_csv(path, table)

    modes_path = reports.sidecar_path(path)[:-len('.json')] + '_modes.csv'
    modes = pd.DataFrame(sol.spectral_coeffs.values,
                         columns=['mode_{}'.format(k + 1) for k in range(dom.n_modes)])
    modes.insert(0, 't', grid.nodes)
    reports.write_csv(modes_path, modes)

    sidecar = reports.write_json(reports.sidecar_path(path), {
        'metadata': sol.metadata,
        'times': grid.nodes,
        'eigenvalues': dom.eigenvalues,
        'spectral_coeffs': sol.spectral_coeffs.values,
    })
    return [path, modes_path, sidecar]
