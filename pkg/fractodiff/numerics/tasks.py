import os
import math
import itertools
import traceback
from collections import OrderedDict

import numpy as np
import pandas as pd
import tqdm
from scipy import optimize

from . import reports, fracode, fraccalc, spectral, solver, kernelest
from .configuration import config
from .exc import ConfigurationError, UnknownExperimentError, DomainError
from .fraccalc import TimeGrid, TimeSeries
from .fracode import OdeProblem
from .quality.battery import IdentityBattery
from .solver import ProblemSpec
from .specfun import as_alpha, ml
from .log import logger


class ExperimentTask(object):
    """Base class for the tasks run by an :class:`ExperimentPipeline`.

    ``_run`` returns a table and a summary dict with a ``passed`` entry; ``run``
    writes them as ``<name>.csv`` and ``<name>.json``. A non-critical task that
    raises still writes a failing summary carrying the error.

    Parameters
    ----------
    params : dict, optional
        Experiment parameters; defaults to ``config.experiments[NAME]``.
    critical : bool
        Re-raise errors instead of recording them.
    """

    NAME = None
    REQUIRED = ()

    def __init__(self, params=None, critical=False):
        self.critical = critical
        self.name = self.NAME
        if params is None:
            params = config.experiments[self.NAME].as_dict() if self.NAME in config.experiments else {}
        self.params = params
        self.pipeline = None
        self.destination = None
        self.error = None
        self.passed = None

    def set_pipeline(self, pipeline):
        self.pipeline = pipeline

    def validate(self):
        """Check parameters before any compute; raises ConfigurationError or DomainError."""
        missing = [k for k in self.REQUIRED if k not in self.params]
        if missing:
            raise ConfigurationError('Experiment {} is missing parameters {}'.format(self.name, missing))
        self._validate(self.params)

    def _validate(self, params):
        pass

    def create_file(self, filename, contents, label, index_file=True):
        path = os.path.join(self.destination, filename)
        if isinstance(contents, pd.DataFrame):
            reports.write_csv(path, contents)
        else:
            reports.write_json(path, contents)
        if index_file:
            self.pipeline.register_output(filename, label)

    def run(self, destination):
        self.destination = destination
        try:
            table, summary = self._run(self.params)
        except Exception as e:
            if self.critical:
                raise
            logger.debug(traceback.format_exc())
            self.error = e
            table = pd.DataFrame()
            summary = {'passed': False, 'error': '{}: {}'.format(type(e).__name__, e)}
        summary['experiment'] = self.name
        summary['parameters'] = self.params
        self.passed = bool(summary['passed'])
        self.create_file('{}.csv'.format(self.name), table, self.name)
        self.create_file('{}.json'.format(self.name), summary, '{}_summary'.format(self.name))

    def _run(self, params):
        raise NotImplementedError()


def _check(checks, name, value, tolerance, passed=None):
    """Record a measured value against its tolerance; returns whether it passed."""
    value = float(value)
    if passed is None:
        passed = math.isfinite(value) and value <= tolerance
    checks[name] = {'value': value, 'tolerance': tolerance, 'passed': bool(passed)}
    return bool(passed)


def _summary(checks, **extra):
    summary = {'passed': all(c['passed'] for c in checks.values()), 'checks': checks}
    summary.update(extra)
    return summary


def _grid(params, steps_key='n_steps', T_key='T'):
    n_steps = int(params[steps_key])
    if n_steps < 1:
        raise DomainError('{} must be at least 1, got {}'.format(steps_key, n_steps))
    return TimeGrid.over(float(params[T_key]), n_steps)


def _sfl(params, modes_key='n_modes', nodes_key='n_nodes', s=None):
    return spectral.build_interval_sfl(int(params[modes_key]), float(params.get('s', 1.0) if s is None else s),
                                       n_nodes=params.get(nodes_key))


def _unit(t):
    return np.ones_like(np.asarray(t, dtype=float))


def _linear(t):
    return np.asarray(t, dtype=float)


# Scalar equations

class DualitySweepTask(ExperimentTask):
    NAME = 'duality-sweep'
    REQUIRED = ('alphas', 'lambdas', 'u0', 'v0', 'T', 'n_steps', 'tol')

    def _validate(self, params):
        for alpha in params['alphas']:
            as_alpha(alpha)

    def _run(self, params):
        grid = _grid(params)
        tol = float(params['tol'])
        rows = []
        cases = list(itertools.product(params['alphas'], params['lambdas']))
        for alpha, lam in tqdm.tqdm(cases, desc=self.name, leave=False):
            residual = fracode.duality_residual(alpha, lam, float(params['u0']), float(params['v0']),
                                                _unit, _linear, grid.T, grid)
            rows.append({'alpha': alpha, 'lambda': lam, 'residual': residual, 'passed': residual <= tol})
        table = pd.DataFrame(rows, columns=['alpha', 'lambda', 'residual', 'passed'])
        checks = {}
        _check(checks, 'max_residual', table['residual'].max(), tol)
        return table, _summary(checks, weakly_singular=float(params['v0']) != 0.0)


def _manufactured_forcing(alpha, lam, u0):
    """Forcing whose Caputo solution is ``u0 + t^2``."""
    scale = 2.0 / math.gamma(3.0 - alpha)

    def f(t):
        t = np.asarray(t, dtype=float)
        return scale * t ** (2.0 - alpha) + lam * (u0 + t ** 2)
    return f


class OdeOracleTask(ExperimentTask):
    """Closed-form Caputo solutions against implicit L1 time stepping.

    Uses the manufactured solution ``u = u0 + t^2`` so that the observed order
    of the L1 scheme is not limited by the ``t^alpha`` layer at 0; the plain
    relaxation ``f = 0`` is reported alongside.
    """
    NAME = 'ode-oracle'
    REQUIRED = ('alphas', 'lambdas', 'u0', 'T', 'n_steps', 'rel_tol', 'order_alpha', 'min_order')

    def _validate(self, params):
        for alpha in list(params['alphas']) + [params['order_alpha']]:
            as_alpha(alpha)
        if int(params['n_steps']) % 4:
            raise DomainError('n_steps must be divisible by 4 for the order estimate')

    def _run(self, params):
        grid = _grid(params)
        u0 = float(params['u0'])
        rel_tol = float(params['rel_tol'])
        rows = []
        cases = list(itertools.product(params['alphas'], params['lambdas']))
        for alpha, lam in tqdm.tqdm(cases, desc=self.name, leave=False):
            f = _manufactured_forcing(alpha, lam, u0)
            closed = fracode.solve_caputo(OdeProblem('caputo', alpha, lam, u0, f, grid.T), grid).values
            stepped = fraccalc.l1_solve(alpha, lam, u0, f, grid).values
            exact = u0 + grid.nodes ** 2
            relax_closed = fracode.solve_caputo(OdeProblem('caputo', alpha, lam, u0, 0.0, grid.T), grid).values
            relax_stepped = fraccalc.l1_solve(alpha, lam, u0, 0.0, grid).values
            rel_error = float(np.max(np.abs(closed - stepped)) / np.max(np.abs(closed)))
            rows.append({
                'alpha': alpha,
                'lambda': lam,
                'rel_error': rel_error,
                'closed_form_error': float(np.max(np.abs(closed - exact)) / np.max(np.abs(exact))),
                'relaxation_rel_error': float(np.max(np.abs(relax_closed - relax_stepped))
                                              / max(np.max(np.abs(relax_closed)), 1e-300)),
                'passed': rel_error <= rel_tol,
            })
        table = pd.DataFrame(rows, columns=['alpha', 'lambda', 'rel_error', 'closed_form_error',
                                            'relaxation_rel_error', 'passed'])

        alpha = float(params['order_alpha'])
        orders = []
        for lam in params['lambdas']:
            f = _manufactured_forcing(alpha, lam, u0)
            errors = []
            for n in (grid.n_steps // 4, grid.n_steps // 2, grid.n_steps):
                g = TimeGrid.over(grid.T, n)
                errors.append(float(np.max(np.abs(fraccalc.l1_solve(alpha, lam, u0, f, g).values
                                                  - (u0 + g.nodes ** 2)))))
            orders.append(math.log2(errors[1] / errors[2]))
            logger.debug('L1 errors for alpha={} lambda={}: {}'.format(alpha, lam, errors))
        checks = {}
        _check(checks, 'max_rel_error', table['rel_error'].max(), rel_tol)
        min_order = float(params['min_order'])
        _check(checks, 'observed_order', min(orders), min_order, passed=min(orders) >= min_order)
        return table, _summary(checks, orders=orders)


class InitialConditionsTask(ExperimentTask):
    NAME = 'initial-conditions'
    REQUIRED = ('alpha', 'lambda', 'u0', 'v0', 'T', 'n_steps', 'tol')

    def _validate(self, params):
        as_alpha(params['alpha'])

    def _run(self, params):
        grid = _grid(params)
        alpha, lam = float(params['alpha']), float(params['lambda'])
        u0, v0 = float(params['u0']), float(params['v0'])
        tol = float(params['tol'])
        u = fracode.solve_caputo(OdeProblem('caputo', alpha, lam, u0, 0.0, grid.T), grid)
        v = fracode.solve_riemann(OdeProblem('riemann-liouville', alpha, lam, v0, 0.0, grid.T), grid)
        limit = fraccalc.rl_frac_integral_at_zero(v, alpha, alpha - 1.0)
        checks = {}
        _check(checks, 'caputo_initial_value', abs(u.values[0] - u0), 0.0)
        _check(checks, 'riemann_initial_limit', abs(limit - v0), tol)
        table = pd.DataFrame([
            {'kind': 'caputo', 'expected': u0, 'measured': float(u.values[0]), 'tolerance': 0.0},
            {'kind': 'riemann-liouville', 'expected': v0, 'measured': limit, 'tolerance': tol},
        ], columns=['kind', 'expected', 'measured', 'tolerance'])
        table['error'] = (table['measured'] - table['expected']).abs()
        return table, _summary(checks)


# Spectral problems

def stationary_horizon(alpha, lam1, level):
    """Smallest ``T`` with ``E_alpha(-lam1 T^alpha) = level``."""
    x = math.exp(optimize.brentq(lambda y: ml(alpha, 1.0, -math.exp(y)) - level, -20.0, 40.0, xtol=1e-12))
    return (x / lam1) ** (1.0 / alpha)


class SpectralPdeTask(ExperimentTask):
    NAME = 'spectral-pde'
    REQUIRED = ('alpha', 's', 'n_modes', 'T', 'n_steps', 'tol_mode', 'tol_superposition',
                'stationary_level', 'tol_stationary')

    def _validate(self, params):
        as_alpha(params['alpha'])

    def _run(self, params):
        dom = _sfl(params)
        grid = _grid(params)
        alpha = float(params['alpha'])
        tol_mode = float(params['tol_mode'])
        t = grid.nodes
        phi1 = dom.eigenvectors[0]
        lam1 = float(dom.eigenvalues[0])
        ones = np.ones(dom.n_nodes)
        relaxation = ml(alpha, 1.0, -lam1 * t ** alpha)
        checks = {}

        p_init = ProblemSpec('caputo', alpha, dom, u0=phi1, T=grid.T)
        init = solver.solve(p_init, grid).spectral_coeffs.values
        _check(checks, 'single_mode', max(np.max(np.abs(init[:, 0] - relaxation)), np.max(np.abs(init[:, 1:]))),
               tol_mode)

        p_force = ProblemSpec('caputo', alpha, dom, f=phi1, T=grid.T)
        force = solver.solve(p_force, grid).spectral_coeffs.values
        _check(checks, 'forcing_mode', np.max(np.abs(force[:, 0] - (1.0 - relaxation) / lam1)), tol_mode)

        p_both = ProblemSpec('caputo', alpha, dom, u0=phi1, f=ones, T=grid.T)
        both = solver.solve(p_both, grid)
        parts = (solver.solve(p_both.with_data(u0=phi1), grid).spectral_coeffs.values
                 + solver.solve(p_both.with_data(f=ones), grid).spectral_coeffs.values)
        _check(checks, 'superposition', np.max(np.abs(both.spectral_coeffs.values - parts)),
               float(params['tol_superposition']))
        rl = solver.solve(ProblemSpec('riemann-liouville', alpha, dom, f=ones, T=grid.T), grid)
        cap = solver.solve(p_both.with_data(f=ones), grid)
        _check(checks, 'caputo_equals_riemann_without_u0',
               np.max(np.abs(rl.spectral_coeffs.values - cap.spectral_coeffs.values)), 0.0)
        field = both.field.values
        _check(checks, 'positivity', max(-float(np.min(field)), 0.0), 1e-12 * float(np.max(np.abs(field))))

        decay = solver.decay_report(both, p_both)
        _check(checks, 'l2_decay', int(np.sum(~decay['initial_ok'])), 0)
        _check(checks, 'forcing_estimate', int(np.sum(~decay['forcing_ok'])), 0)

        horizon = stationary_horizon(alpha, lam1, float(params['stationary_level']))
        long_grid = TimeGrid.over(horizon, grid.n_steps)
        p_long = ProblemSpec('caputo', alpha, dom, f=ones, T=horizon)
        final = solver.solve(p_long, long_grid).field.values[-1]
        gap = dom.function(final - spectral.green_apply(dom, ones).values).norm()
        _check(checks, 'stationary_limit', gap, float(params['tol_stationary']))

        table = pd.DataFrame({
            't': t,
            'mode_1': init[:, 0],
            'mode_1_exact': relaxation,
            'forcing_mode_1': force[:, 0],
            'forcing_mode_1_exact': (1.0 - relaxation) / lam1,
        }, columns=['t', 'mode_1', 'mode_1_exact', 'forcing_mode_1', 'forcing_mode_1_exact'])
        table = table.join(decay.drop(columns='t'))
        return table, _summary(checks, stationary_horizon=horizon, lambda_1=lam1)


COMPACTNESS_WINDOWS = ((0.0, 0.1), (0.1, 0.3), (0.25, 0.5), (0.5, 1.0), (0.0, 1.0))
COMPACTNESS_REGIONS = ((0.0, 1.0), (0.2, 0.6))


class CompactnessTask(ExperimentTask):
    NAME = 'compactness'
    REQUIRED = ('alpha', 's', 'n_modes', 'T', 'n_steps', 'window', 'tol')

    def _validate(self, params):
        as_alpha(params['alpha'])
        t0, t1 = params['window']
        if not 0 <= t0 < t1 <= params['T']:
            raise DomainError('Compactness window {} must satisfy 0 <= t0 < t1 <= T'.format(params['window']))

    def _run(self, params):
        dom = _sfl(params)
        grid = _grid(params)
        alpha = float(params['alpha'])
        t = grid.nodes
        lam1 = float(dom.eigenvalues[0])
        t0, t1 = [float(v) for v in params['window']]
        checks = {}

        eps = 1e-9 * grid.dt
        inside = (t > t0 + eps) & (t <= t1 + eps)
        f = TimeSeries(grid, np.outer(inside, dom.eigenvectors[0]), kind='cellwise')
        coeff = solver.solve(ProblemSpec('caputo', alpha, dom, f=f, T=grid.T), grid).spectral_coeffs.values[:, 0]
        exact = solver.compactness_modulus(alpha, lam1, t0, t1, t)
        _check(checks, 'step_coefficient', np.max(np.abs(coeff - exact)), float(params['tol']))

        ones = np.ones(dom.n_nodes)
        p = ProblemSpec('caputo', alpha, dom, u0=ones, f=ones, T=grid.T)
        sol = solver.solve(p, grid)
        rows = []
        cases = [(w, r) for w in COMPACTNESS_WINDOWS for r in COMPACTNESS_REGIONS if w[1] <= grid.T]
        for (a, b), (lo, hi) in tqdm.tqdm(cases, desc=self.name, leave=False):
            check = solver.compactness_check(p, grid, a, b, lambda x, lo=lo, hi=hi: (x > lo) & (x < hi), sol)
            rows.append({'t0': a, 't1': b, 'region_lo': lo, 'region_hi': hi, 'lhs': check.lhs, 'rhs': check.rhs,
                         'omega': check.omega, 'comparability': check.comparability, 'holds': check.holds})
        table = pd.DataFrame(rows, columns=['t0', 't1', 'region_lo', 'region_hi', 'lhs', 'rhs', 'omega',
                                            'comparability', 'holds'])
        _check(checks, 'weighted_l1_bound', int(np.sum(~table['holds'])), 0)
        return table, _summary(checks)


# Boundary concentration

def projection_of_one(dom):
    """``sum_j <1, phi_j> phi_j``: the constant 1 as seen by the modes of ``dom``."""
    return dom.synthesize(dom.project(np.ones(dom.n_nodes)))


class ConcentrationTask(ExperimentTask):
    """Green potentials of the concentrated sources ``f_j`` with ``h = 1``.

    Truncated sine series cannot reach 1 in max norm near the boundary, so
    potentials are compared with the projection of 1 onto the modes; the
    distance to 1 itself is reported.
    """
    NAME = 'concentration'
    REQUIRED = ('s', 'n_modes', 'n_nodes', 'tol', 'alpha', 'T', 'n_steps')

    def _run(self, params):
        dom = _sfl(params)
        tol = float(params['tol'])
        limit = spectral.concentration_limit(dom, tol)
        mask = dom.interior_mask()
        target = projection_of_one(dom)
        sites = [b.name for b in dom.boundary_sites]
        rows = []
        for i, j in enumerate(limit.schedule):
            g = spectral.potential(dom, sum(limit.history[name][i] for name in sites))
            rows.append({
                'j': j,
                'raw_gap': limit.raw_gaps[i - 1] if i else np.nan,
                'max_error_to_projection': float(np.max(np.abs(g - target)[mask])),
                'max_error_to_one': float(np.max(np.abs(g - 1.0)[mask])),
                'weighted_l1_error': float(spectral.interior_l1(dom, g - 1.0)[0]),
            })
        table = pd.DataFrame(rows, columns=['j', 'raw_gap', 'max_error_to_projection', 'max_error_to_one',
                                            'weighted_l1_error'])
        ustar = spectral.potential(dom, sum(limit.coeffs.values()))
        checks = {}
        _check(checks, 'converged_max_error', np.max(np.abs(ustar - target)[mask]), tol)
        raw = np.asarray(limit.raw_gaps)
        _check(checks, 'raw_gaps_decreasing', int(np.sum(np.diff(raw) >= 0)), 0)

        grid = _grid(params)
        sol = solver.solve(ProblemSpec('caputo', float(params['alpha']), dom,
                                       h=dict((name, 1.0) for name in sites), T=grid.T), grid, tol=tol)
        h_gaps = np.asarray(sol.metadata['concentration']['solution_gaps'])
        _check(checks, 'solution_gaps_decreasing', int(np.sum(np.diff(h_gaps) >= 0)), 0)
        return table, _summary(checks, converged_j=limit.j, cauchy_gaps=limit.gaps, orders=limit.orders,
                               solution_gaps=h_gaps, max_error_to_one=float(np.max(np.abs(ustar - 1.0)[mask])))


class UstarLaplacianTask(ExperimentTask):
    NAME = 'ustar-laplacian'
    REQUIRED = ('n_modes', 'n_nodes', 'tol', 'alpha', 'upsilon_tol', 'deltas')

    def _run(self, params):
        dom = _sfl(params, s=1.0)
        tol = float(params['tol'])
        ustar = spectral.u_star(dom).values
        mask = dom.interior_mask()
        target = projection_of_one(dom)
        upsilon = solver.upsilon_normalization(dom, float(params['alpha']))
        checks = {}
        _check(checks, 'max_error_to_projection', np.max(np.abs(ustar - target)[mask]), tol)
        _check(checks, 'weighted_l1_error', spectral.interior_l1(dom, ustar - 1.0)[0], tol)
        _check(checks, 'upsilon_normalization', np.max(np.abs(upsilon - 1.0)), float(params['upsilon_tol']))
        proxy = solver.h_star_proxy(dom, float(params['alpha']), 'left', params['deltas'])

        idx = np.nonzero(mask)[0]
        stride = max(1, idx.shape[0] // 200)
        idx = idx[::stride]
        upsilon_at = dict(zip(np.nonzero(mask)[0], upsilon))
        table = pd.DataFrame({
            'x': dom.coords[idx],
            'u_star': ustar[idx],
            'projection_of_one': target[idx],
            'upsilon': [upsilon_at[i] for i in idx],
        }, columns=['x', 'u_star', 'projection_of_one', 'upsilon'])
        return table, _summary(checks, max_error_to_one=float(np.max(np.abs(ustar - 1.0)[mask])),
                               h_star_proxy=proxy.to_dict(orient='records'))


class BoundaryRatioTask(ExperimentTask):
    """Extrapolated ``u(T)/u*`` at both endpoints for three boundary data sets.

    A numeric proxy of the singular boundary condition at a fixed resolution.
    """
    NAME = 'boundary-ratio'
    REQUIRED = ('alpha', 'n_modes', 'n_nodes', 'T', 'n_steps', 'h_left', 'h_right', 'rel_tol')

    def _validate(self, params):
        as_alpha(params['alpha'])

    def _run(self, params):
        dom = _sfl(params, s=1.0)
        grid = _grid(params)
        alpha = float(params['alpha'])
        rel_tol = float(params['rel_tol'])
        tol = float(config.tolerances.concentration_cauchy)
        cases = OrderedDict([
            ('uniform', {'left': 1.0, 'right': 1.0}),
            ('two-sided', {'left': float(params['h_left']), 'right': float(params['h_right'])}),
            ('zero', {'left': 0.0, 'right': 0.0}),
        ])
        rows = []
        for case, h in cases.items():
            sol = solver.solve(ProblemSpec('caputo', alpha, dom, h=h, T=grid.T), grid, tol=tol)
            for site, expected in h.items():
                ratio = solver.boundary_ratio(sol, dom, grid.T, site, tol=tol)
                rows.append({'case': case, 'site': site, 't': grid.T, 'expected': expected, 'ratio': ratio.value,
                             'spread': ratio.spread, 'low_confidence': ratio.low_confidence,
                             'passed': abs(ratio.value - expected) <= rel_tol * max(abs(expected), 1.0)})
        table = pd.DataFrame(rows, columns=['case', 'site', 't', 'expected', 'ratio', 'spread', 'low_confidence',
                                            'passed'])
        checks = {}
        _check(checks, 'ratios_within_tolerance', int(np.sum(~table['passed'])), 0)
        return table, _summary(checks, low_confidence=int(np.sum(table['low_confidence'])))


# Kernels and duality

FOURIER_SAMPLES = ((1.0, 1.0), (0.5, 2.0), (2.0, 0.5))


class KernelSandwichTask(ExperimentTask):
    NAME = 'kernel-sandwich'
    REQUIRED = ('n_cells', 's', 't_values', 'ratio_cap', 'semigroup_tol', 'fourier_tol', 'green_s', 'green_cells')

    def _validate(self, params):
        kernelest.KernelBoundSpec('rfl', 1, float(params['s']))
        if not 0 < float(params['green_s']) < 0.5:
            raise DomainError('Green sandwich needs s < 1/2 in one dimension, got {}'.format(params['green_s']))

    def _run(self, params):
        s = float(params['s'])
        cap = float(params['ratio_cap'])
        semigroup_tol = float(params['semigroup_tol'])
        dom = spectral.build_interval_rfl(int(params['n_cells']), s)
        checks = {}
        fit = kernelest.sandwich_window(dom, kernelest.KernelBoundSpec('rfl', 1, s), params['t_values'])
        _check(checks, 'heat_kernel_ratio', fit.ratio, cap)
        _check(checks, 'chapman_kolmogorov', kernelest.chapman_kolmogorov_defect(dom, 0.1, 0.2), semigroup_tol)
        _check(checks, 'expm_consistency',
               np.max(np.abs(kernelest.semigroup_matrix(dom, 0.1) - kernelest.semigroup_expm(dom, 0.1))),
               semigroup_tol)
        _check(checks, 'cauchy_fourier', max(abs(kernelest.cauchy_kernel(t, r) - kernelest.inverse_fourier_kernel(t, r))
                                             for t, r in FOURIER_SAMPLES), float(params['fourier_tol']))
        green_dom = spectral.build_interval_rfl(int(params['green_cells']), float(params['green_s']))
        c1, c2 = kernelest.green_sandwich(green_dom)
        _check(checks, 'green_kernel_ratio', c2 / c1, cap)
        return fit.table, _summary(checks, c1=fit.c1, c2=fit.c2, window=fit.window, green_c1=c1, green_c2=c2)


class WeakDualTask(ExperimentTask):
    NAME = 'weak-dual'
    REQUIRED = ('alpha', 's', 'n_modes', 'T', 'n_steps', 'tol', 'perturbation', 'boundary_n_modes',
                'boundary_n_nodes', 'boundary_n_steps', 'boundary_tol')

    def _validate(self, params):
        as_alpha(params['alpha'])

    def _run(self, params):
        dom = _sfl(params)
        grid = _grid(params)
        alpha = float(params['alpha'])
        tol = float(params['tol'])
        phi1, phi2 = dom.eigenvectors[0], dom.eigenvectors[1]

        def growing(t, x):
            return (1.0 + t) * phi1

        cases = [
            ('zero', ProblemSpec('caputo', alpha, dom, T=grid.T), phi1),
            ('caputo-initial', ProblemSpec('caputo', alpha, dom, u0=phi1, T=grid.T), phi1),
            ('riemann-initial', ProblemSpec('riemann-liouville', alpha, dom, u0=phi1, T=grid.T), phi1),
            ('forcing', ProblemSpec('caputo', alpha, dom, f=phi1 + 0.5 * phi2, T=grid.T), phi1),
            ('time-dependent-test', ProblemSpec('caputo', alpha, dom, u0=phi1 + phi2, f=phi1, T=grid.T), growing),
        ]
        rows = []
        solutions = {}
        for name, p, phi in tqdm.tqdm(cases, desc=self.name, leave=False):
            sol = solver.solve(p, grid)
            solutions[name] = (sol, p)
            terms = solver.weak_dual_terms(sol, p, phi)
            rows.append({'case': name, 'lhs': terms.lhs, 'rhs': terms.rhs, 'residual': terms.residual,
                         'tolerance': tol, 'passed': terms.residual <= tol})

        b_params = {'n_modes': params['boundary_n_modes'], 'n_nodes': params['boundary_n_nodes']}
        b_dom = _sfl(b_params, s=1.0)
        b_grid = TimeGrid.over(grid.T, int(params['boundary_n_steps']))
        b_tol = float(params['boundary_tol'])
        p_b = ProblemSpec('caputo', alpha, b_dom, h={'left': 1.0, 'right': 1.0}, T=grid.T)
        terms = solver.weak_dual_terms(solver.solve(p_b, b_grid), p_b, b_dom.eigenvectors[0])
        rows.append({'case': 'boundary', 'lhs': terms.lhs, 'rhs': terms.rhs, 'residual': terms.residual,
                     'tolerance': b_tol, 'passed': terms.residual <= b_tol})
        table = pd.DataFrame(rows, columns=['case', 'lhs', 'rhs', 'residual', 'tolerance', 'passed'])

        sol, p = solutions['caputo-initial']
        w = float(params['perturbation']) * (phi1 + phi2)
        battery = solver.sign_indicator_battery(dom, grid, w)
        perturbed = TimeSeries(grid, sol.field.values + w)
        indicator = solver.uniqueness_indicator(sol, p, battery)
        detected = solver.uniqueness_indicator(perturbed, p, battery)
        checks = {}
        _check(checks, 'residuals', int(np.sum(~table['passed'])), 0)
        _check(checks, 'uniqueness_indicator', indicator, tol)
        _check(checks, 'perturbation_detected', detected, tol, passed=detected > tol)
        return table, _summary(checks)


class SubordinationTask(ExperimentTask):
    NAME = 'subordination'
    REQUIRED = ('alpha', 's', 'n_modes', 't_values', 'tol')

    def _validate(self, params):
        as_alpha(params['alpha'])

    def _run(self, params):
        dom = _sfl(params)
        alpha = float(params['alpha'])
        tol = float(params['tol'])
        v = dom.coords * (dom.length - dom.coords)
        rows = []
        for t in tqdm.tqdm(params['t_values'], desc=self.name, leave=False):
            t = float(t)
            direct_s = solver.s_alpha_apply(dom, alpha, t, v).values
            direct_p = solver.p_alpha_apply(dom, alpha, t, v).values
            rows.append({'t': t, 'operator': 'S_alpha',
                         'error': float(np.max(np.abs(solver.subordinated_s_alpha(dom, alpha, t, v).values
                                                      - direct_s)))})
            rows.append({'t': t, 'operator': 'P_alpha',
                         'error': float(np.max(np.abs(solver.subordinated_p_alpha(dom, alpha, t, v).values
                                                      - direct_p)))})
        table = pd.DataFrame(rows, columns=['t', 'operator', 'error'])
        table['passed'] = table['error'] <= tol
        checks = {}
        _check(checks, 'max_error', table['error'].max(), tol)
        return table, _summary(checks)


EXPERIMENTS = OrderedDict((cls.NAME, cls) for cls in (
    DualitySweepTask,
    OdeOracleTask,
    InitialConditionsTask,
    SpectralPdeTask,
    CompactnessTask,
    ConcentrationTask,
    UstarLaplacianTask,
    BoundaryRatioTask,
    KernelSandwichTask,
    WeakDualTask,
    SubordinationTask,
))


def experiment_tasks(names):
    """Tasks for the named experiments; ``all`` expands to every experiment."""
    if not names:
        raise ConfigurationError('Name at least one experiment, or all. Valid experiments are {}'.format(
            list(EXPERIMENTS)))
    if 'all' in names:
        names = list(EXPERIMENTS)
    unknown = [name for name in names if name not in EXPERIMENTS]
    if unknown:
        raise UnknownExperimentError('Unknown experiments {}. Valid experiments are {}'.format(
            unknown, list(EXPERIMENTS)))
    return [EXPERIMENTS[name]() for name in OrderedDict.fromkeys(names)]


# Commands other than experiments

class SpecfunVerifyTask(ExperimentTask):
    NAME = 'specfun-verify'

    def __init__(self, only=None, critical=False):
        super(SpecfunVerifyTask, self).__init__({'only': list(only or [])}, critical)

    def _validate(self, params):
        IdentityBattery.select(params['only'])

    def _run(self, params):
        measurements, msgs = IdentityBattery(params['only']).check()
        table = pd.DataFrame([m._asdict() for m in measurements], columns=['identity', 'error', 'tolerance', 'passed'])
        return table, {'passed': not msgs, 'messages': msgs}


def _preset(dom, value, name):
    phi1 = dom.eigenvectors[0]
    presets = {'zero': 0.0, 'one': np.ones(dom.n_nodes), 'phi1': phi1}
    if isinstance(value, str):
        if value not in presets:
            raise ConfigurationError('Unknown {} preset {}. Valid presets are {}'.format(name, value, sorted(presets)))
        return presets[value]
    if isinstance(value, (list, tuple)):
        values = np.asarray(value, dtype=float)
        if values.shape != (dom.n_nodes,):
            raise ConfigurationError('Inline {} needs {} values, got {}'.format(name, dom.n_nodes, values.shape[0]))
        return values
    return float(value)


class SolveTask(ExperimentTask):
    """Builds the problem described by the ``solve`` section and exports its solution."""

    NAME = 'solve'
    FILENAME = 'solution.csv'

    def __init__(self, critical=True):
        super(SolveTask, self).__init__(config.solve.as_dict(), critical)
        self.problem = None
        self.grid = None

    def _validate(self, params):
        family = params['domain']
        if family == 'interval_sfl':
            dom = spectral.build_interval_sfl(int(params['n_modes']), float(params['s']),
                                              float(params['length']), params.get('n_nodes'))
        elif family == 'interval_rfl':
            dom = spectral.build_interval_rfl(int(params['n_cells']), float(params['s']))
        else:
            raise ConfigurationError('Unknown domain family {}. Valid families are interval_sfl, '
                                     'interval_rfl'.format(family))
        h = params['h']
        if h == 'zero':
            h_data = {}
        elif h == 'one':
            h_data = dict((b.name, 1.0) for b in dom.boundary_sites)
        elif h == 'custom':
            h_data = {'left': float(params['h_left']), 'right': float(params['h_right'])}
        else:
            raise ConfigurationError('Unknown h preset {}. Valid presets are zero, one, custom'.format(h))
        self.grid = _grid(params)
        self.problem = ProblemSpec(params['kind'], params['alpha'], dom, u0=_preset(dom, params['u0'], 'u0'),
                                   f=_preset(dom, params['f'], 'f'), h=h_data, T=self.grid.T)

    def run(self, destination):
        self.destination = destination
        try:
            sol = solver.solve(self.problem, self.grid)
            paths = solver.export_solution(sol, os.path.join(destination, self.FILENAME))
        except Exception as e:
            if self.critical:
                raise
            self.error = e
            self.passed = False
            return
        for label, path in zip(('solution', 'solution_modes', 'solution_metadata'), paths):
            self.pipeline.register_output(os.path.basename(path), label)
        self.passed = True
