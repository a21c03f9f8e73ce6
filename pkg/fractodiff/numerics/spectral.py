"""Bounded domains described by their eigenpairs.

A :class:`SpectralDomain` holds nodes, quadrature weights and the first
eigenpairs of a positive self-adjoint operator ``L`` with Dirichlet-type
boundary behaviour ``phi ~ delta**gamma``. Three one-dimensional families are
built in:

* ``interval_sfl``: spectral fractional Laplacian on ``(0, L)``, analytic sines;
* ``interval_rfl``: restricted fractional Laplacian on ``(0, 1)``, finite differences;
* ``matrix``: any symmetric positive-definite discretisation.
"""
import json
import math
from collections import namedtuple

import numpy as np
from scipy import special, linalg

from .configuration import config
from .exc import DomainError, AliasingError, AccuracyError, ConcentrationError, ResolutionError
from .log import logger
from . import fileutil

BoundarySite = namedtuple('BoundarySite', ['name', 'coord'])

FAMILIES = ('interval_sfl', 'interval_rfl', 'matrix')


class SpectralDomain(object):
    """Eigen-structure of ``L`` sampled on quadrature nodes.

    ``eigenvectors[j]`` holds ``phi_{j+1}`` at the nodes, orthonormal under
    ``sum_i u_i v_i w_i``.
    """

    def __init__(self, coords, weights, eigenvalues, eigenvectors, gamma, s, delta,
                 boundary_sites, family='matrix', length=None, matrix=None):
        self.coords = np.asarray(coords, dtype=float)  # type: np.ndarray
        self.weights = np.asarray(weights, dtype=float)  # type: np.ndarray
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)  # type: np.ndarray
        self.eigenvectors = np.asarray(eigenvectors, dtype=float)  # type: np.ndarray
        self.gamma = float(gamma)  # type: float
        self.s = float(s)  # type: float
        self.delta = np.asarray(delta, dtype=float)  # type: np.ndarray
        self.boundary_sites = tuple(BoundarySite(str(b[0]), float(b[1])) for b in boundary_sites)
        self.family = family  # type: str
        self.length = float(length) if length is not None else float(self.coords[-1] + self.coords[0])
        self.matrix = matrix
        self._cache = {}

        n = self.coords.shape[0]
        if self.weights.shape != (n,) or self.delta.shape != (n,):
            raise DomainError('coords, weights and delta must have the same length')
        if self.eigenvectors.shape != (self.eigenvalues.shape[0], n):
            raise DomainError('eigenvectors must have shape (n_modes, n_nodes)')
        if not np.all(self.weights > 0):
            raise DomainError('Quadrature weights must be positive')
        if not self.eigenvalues[0] > 0 or np.any(np.diff(self.eigenvalues) < 0):
            raise DomainError('Eigenvalues must be positive and nondecreasing')
        if not 0 < self.gamma <= 1 or not 0 < self.s <= 1:
            raise DomainError('gamma={} and s={} must lie in (0, 1]'.format(self.gamma, self.s))
        if not np.all(self.delta > 0):
            raise DomainError('delta must be positive at every node')
        self.delta_gamma = self.delta ** self.gamma  # type: np.ndarray

    @property
    def n_nodes(self):
        return self.coords.shape[0]

    @property
    def n_modes(self):
        return self.eigenvalues.shape[0]

    def function(self, values):
        return GridFunction(self, values)

    def project(self, values):
        """Spectral coefficients ``<v, phi_j>`` along the last axis."""
        values = np.asarray(values, dtype=float)
        return (values * self.weights).dot(self.eigenvectors.T)

    def synthesize(self, coeffs):
        """Nodal values of ``sum_j c_j phi_j`` along the last axis."""
        return np.asarray(coeffs, dtype=float).dot(self.eigenvectors)

    def apply_multiplier(self, multiplier, values):
        """``sum_j m_j <v, phi_j> phi_j`` for per-mode multipliers ``m``."""
        return self.synthesize(self.project(values) * multiplier)

    def orthonormality_residual(self):
        gram = (self.eigenvectors * self.weights).dot(self.eigenvectors.T)
        return float(np.max(np.abs(gram - np.eye(self.n_modes))))

    def eigen_residual(self):
        """``max_j |M v_j - lam_j v_j| / lam_j`` for matrix-built domains."""
        if self.matrix is None:
            raise DomainError('Domain {} carries no matrix'.format(self.family))
        v = self.eigenvectors * np.sqrt(self.weights)
        res = self.matrix.dot(v.T) - v.T * self.eigenvalues
        return float(np.max(np.linalg.norm(res, axis=0) / self.eigenvalues))

    def site(self, zeta):
        """Resolve a boundary site from its name, index or the site itself."""
        if isinstance(zeta, BoundarySite):
            return zeta
        for i, site in enumerate(self.boundary_sites):
            if zeta == site.name or zeta == i:
                return site
        raise DomainError('Unknown boundary site {}; available {}'.format(
            zeta, [b.name for b in self.boundary_sites]))

    def side_nodes(self, zeta):
        """Indices of nodes closest to ``zeta``, nearest first."""
        site = self.site(zeta)
        coords = np.array([b.coord for b in self.boundary_sites])
        nearest = np.argmin(np.abs(self.coords[:, None] - coords[None, :]), axis=1)
        idx = np.nonzero(nearest == self.boundary_sites.index(site))[0]
        return idx[np.argsort(self.delta[idx], kind='stable')]

    def interior_mask(self):
        return self.delta >= float(config.spectral.interior_margin) * self.length

    def __repr__(self):
        return 'SpectralDomain(family={}, n_nodes={}, n_modes={}, s={}, gamma={})'.format(
            self.family, self.n_nodes, self.n_modes, self.s, self.gamma)


class GridFunction(object):
    """Nodal values on a :class:`SpectralDomain` with its weighted inner product."""

    def __init__(self, domain, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (domain.n_nodes,):
            raise DomainError('GridFunction needs {} values, got shape {}'.format(domain.n_nodes, values.shape))
        self.domain = domain  # type: SpectralDomain
        self.values = values  # type: np.ndarray

    def inner(self, other):
        other = other.values if isinstance(other, GridFunction) else np.asarray(other, dtype=float)
        return float(np.sum(self.values * other * self.domain.weights))

    def norm(self):
        return math.sqrt(self.inner(self))

    def weighted_l1(self, mask=None):
        """``int |u| delta^gamma`` over the nodes in ``mask``."""
        terms = np.abs(self.values) * self.domain.delta_gamma * self.domain.weights
        return float(np.sum(terms if mask is None else terms[mask]))

    def coefficients(self):
        return self.domain.project(self.values)

    def _wrap(self, values):
        return GridFunction(self.domain, values)

    def _other(self, other):
        return other.values if isinstance(other, GridFunction) else other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __mul__(self, scalar):
        return self._wrap(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.values)

    def __repr__(self):
        return 'GridFunction({!r})'.format(self.domain)


def nodal_values(dom, f):
    """Nodal values of a GridFunction, callable of x, array or scalar."""
    if isinstance(f, GridFunction):
        return f.values
    if callable(f):
        return np.asarray(f(dom.coords), dtype=float) * np.ones(dom.n_nodes)
    return np.asarray(f, dtype=float)


def _interval_sites(length):
    return (BoundarySite('left', 0.0), BoundarySite('right', float(length)))


def build_interval_sfl(n_modes, s, length=1.0, n_nodes=None):
    """Spectral fractional Laplacian on ``(0, length)`` with analytic eigenpairs.

    ``lam_j = (j pi / L)**(2 s)``, ``phi_j = sqrt(2/L) sin(j pi x / L)``,
    sampled on ``n = max(8 n_modes, n_nodes)`` equispaced interior nodes.
    """
    if int(n_modes) != n_modes or n_modes < 1:
        raise DomainError('n_modes must be a positive integer, got {}'.format(n_modes))
    if not 0 < s <= 1:
        raise DomainError('s={} must lie in (0, 1]'.format(s))
    if not length > 0:
        raise DomainError('length must be positive, got {}'.format(length))
    per_mode = int(config.spectral.nodes_per_mode)
    if n_nodes is not None and n_nodes < per_mode * n_modes:
        raise AliasingError('{} nodes cannot resolve {} modes; need at least {}'.format(
            n_nodes, n_modes, per_mode * n_modes))
    n = max(per_mode * int(n_modes), int(n_nodes or 0))
    h = length / (n + 1.0)
    x = h * np.arange(1, n + 1)
    j = np.arange(1, int(n_modes) + 1)
    phi = math.sqrt(2.0 / length) * np.sin(np.outer(j, x) * math.pi / length)
    lam = (j * math.pi / length) ** (2.0 * s)
    delta = np.minimum(x, length - x)
    return SpectralDomain(x, np.full(n, h), lam, phi, 1.0, s, delta, _interval_sites(length),
                          family='interval_sfl', length=length)


def jacobi_eigh(a, threshold=None, max_sweeps=None):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Pairs are swept in row order. Returns ascending eigenvalues and the
    eigenvectors as columns.
    """
    threshold = float(config.spectral.jacobi_threshold if threshold is None else threshold)
    max_sweeps = int(config.spectral.jacobi_max_sweeps if max_sweeps is None else max_sweeps)
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), 1e-300)
    for sweep in range(max_sweeps):
        off = math.sqrt(max(np.sum(a ** 2) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= threshold * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * ap - sn * aq, sn * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * ap - sn * aq, sn * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p], v[:, q] = c * vp - sn * vq, sn * vp + c * vq
    else:
        raise AccuracyError('Jacobi sweeps did not converge in {} sweeps'.format(max_sweeps))
    logger.debug('Jacobi eigendecomposition of size {} converged after {} sweeps'.format(n, sweep))
    order = np.argsort(np.diag(a), kind='stable')
    return np.diag(a)[order], v[:, order]


def build_matrix_domain(matrix, coords, weights, gamma, s=None, delta=None, length=None,
                        boundary_sites=None, eigensolver=None, family='matrix'):
    """Domain from a symmetric positive-definite matrix.

    ``matrix`` is ``W^(1/2) L W^(-1/2)`` for the nodal operator ``L`` and
    quadrature weights ``W``, so ``phi_j = v_j / sqrt(w)``.

    Raises
    ------
    DomainError
        If ``matrix`` is not symmetric within 1e-12 or not positive-definite.
    """
    m = np.asarray(matrix, dtype=float)
    coords = np.asarray(coords, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != coords.shape[0]:
        raise DomainError('Matrix of shape {} does not match {} nodes'.format(m.shape, coords.shape[0]))
    if np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
        raise DomainError('Operator matrix is not symmetric')
    eigensolver = eigensolver or config.spectral.eigensolver
    if eigensolver == 'jacobi':
        lam, vec = jacobi_eigh(m)
    elif eigensolver == 'lapack':
        lam, vec = linalg.eigh(m)
    else:
        raise DomainError('Unknown eigensolver {}'.format(eigensolver))
    if not lam[0] > 0:
        raise DomainError('Operator matrix is not positive-definite (smallest eigenvalue {})'.format(lam[0]))
    phi = (vec / np.sqrt(weights)[:, None]).T
    # fix signs so that each mode has nonnegative weighted mean
    signs = np.where(phi.dot(weights) < 0, -1.0, 1.0)
    phi = phi * signs[:, None]
    if length is None:
        length = float(coords[-1] + coords[0])
    if delta is None:
        delta = np.minimum(coords, length - coords)
    if boundary_sites is None:
        boundary_sites = _interval_sites(length)
    return SpectralDomain(coords, weights, lam, phi, gamma, 1.0 if s is None else s, delta,
                          boundary_sites, family=family, length=length, matrix=m)


def rfl_constant(s):
    """Normalisation of the one-dimensional fractional Laplacian kernel."""
    return s * 4.0 ** s * special.gamma(0.5 + s) / (math.sqrt(math.pi) * special.gamma(1.0 - s))


def _hat_tail_weights(n, s):
    """``int hat_k(y) y^(-1-2s) dy`` over ``y >= 1`` for ``k = 1..n`` on a unit grid."""
    k = np.arange(1, n + 1, dtype=float)

    def f(y):
        return y ** (-2.0 * s) / (-2.0 * s)

    def g(y):
        if abs(s - 0.5) < 1e-14:
            return np.log(y)
        return y ** (1.0 - 2.0 * s) / (1.0 - 2.0 * s)

    falling = (k + 1.0) * (f(k + 1.0) - f(k)) - (g(k + 1.0) - g(k))
    lower = np.maximum(k - 1.0, 1.0)
    rising = (g(k) - g(lower)) - (k - 1.0) * (f(k) - f(lower))
    return falling + np.where(k > 1.0, rising, 0.0)


def rfl_matrix(n_cells, s):
    """Stiffness matrix of the restricted fractional Laplacian on ``(0, 1)``.

    The solution is interpolated piecewise linearly and extended by zero. Near
    the diagonal the second difference is integrated against ``|y|^(1-2s)``;
    further away the kernel is integrated exactly against hat functions, and
    ``int_h^inf y^(-1-2s) dy`` enters the diagonal.
    """
    n = int(n_cells) - 1
    h = 1.0 / n_cells
    scale = h ** (-2.0 * s)
    near = scale / (2.0 - 2.0 * s)
    tail = scale * _hat_tail_weights(n, s)
    first = np.zeros(n)
    first[0] = near * 2.0 + scale / s
    first[1:] = -tail[:n - 1]
    first[1] -= near
    return rfl_constant(s) * linalg.toeplitz(first)


def build_interval_rfl(n_cells, s, eigensolver=None):
    """Restricted fractional Laplacian on ``(0, 1)`` with ``gamma = s``."""
    if not 0 < s < 1:
        raise DomainError('Restricted fractional Laplacian needs s in (0, 1), got {}; '
                          'use build_interval_sfl for s = 1'.format(s))
    if int(n_cells) != n_cells or n_cells < 8:
        raise DomainError('n_cells must be an integer >= 8, got {}'.format(n_cells))
    h = 1.0 / n_cells
    x = h * np.arange(1, n_cells)
    m = rfl_matrix(n_cells, s)
    return build_matrix_domain(m, x, np.full(x.shape, h), gamma=s, s=s, length=1.0,
                               eigensolver=eigensolver, family='interval_rfl')


# Green operator and boundary limits

def green_apply(dom, f):
    """``L^(-1) f = sum_j <f, phi_j> phi_j / lam_j``; ``f`` may be a stack of rows."""
    values = nodal_values(dom, f)
    out = dom.apply_multiplier(1.0 / dom.eigenvalues, values)
    return GridFunction(dom, out) if out.ndim == 1 else out


def boundary_extrapolation(dom, zeta, ratios):
    """Extrapolate nodal ratios to ``delta = 0`` at ``zeta``.

    A cubic in ``delta**gamma`` through the four nearest nodes and a
    quadratic through the three nearest are both evaluated at 0.

    Returns
    -------
    (np.ndarray, np.ndarray)
        The four-node and three-node estimates, one per row of ``ratios``.
    """
    ratios = np.atleast_2d(np.asarray(ratios, dtype=float))
    idx = dom.side_nodes(zeta)[:4]
    if idx.shape[0] < 4:
        raise DomainError('Boundary site {} has fewer than 4 nearby nodes'.format(zeta))
    d = dom.delta_gamma[idx]
    vander = np.vander(d, 4, increasing=True)
    four = np.linalg.solve(vander, ratios[:, idx].T)[0]
    three = np.linalg.solve(vander[:3, :3], ratios[:, idx[:3]].T)[0]
    return four, three


def martin_derivative(dom, zeta, f, tol=None):
    """``lim_{x -> zeta} G[f](x) / delta(x)**gamma``.

    Rows of a 2D ``f`` are handled independently and an array is returned.

    Raises
    ------
    AccuracyError
        When the 3- and 4-node extrapolations differ by more than ``tol``
        (relative, default ``tolerances.martin_rel``).
    """
    values = nodal_values(dom, f)
    green = np.atleast_2d(dom.apply_multiplier(1.0 / dom.eigenvalues, values))
    ratios = green / dom.delta_gamma
    four, three = boundary_extrapolation(dom, zeta, ratios)
    tol = float(config.tolerances.martin_rel if tol is None else tol)
    idx = dom.side_nodes(zeta)[:4]
    scale = np.maximum(np.abs(four), np.max(np.abs(ratios[:, idx]), axis=1))
    gap = np.abs(four - three)
    bad = gap > tol * np.maximum(scale, 1e-300)
    if bad.any():
        worst = int(np.argmax(gap))
        raise AccuracyError('Martin limit at {} does not settle: {} vs {}'.format(zeta, four[worst], three[worst]),
                            best_estimate=four if values.ndim > 1 else float(four[0]),
                            est_abs_error=float(gap[worst]))
    return four if values.ndim > 1 else float(four[0])


# Concentration towards the boundary

def annulus(dom, j, zeta):
    """Nodes of ``A_j = {1/j < delta < 2/j}`` on the side of ``zeta``."""
    idx = dom.side_nodes(zeta)
    d = dom.delta[idx]
    return np.sort(idx[(d > 1.0 / j) & (d < 2.0 / j)])


def concentration_schedule(dom, j0=None):
    """``j = j0, 2 j0, 4 j0, ...`` while every ``A_j`` keeps at least 3 nodes."""
    j = int(config.spectral.j0 if j0 is None else j0)
    schedule = []
    while all(annulus(dom, j, site).shape[0] >= 3 for site in dom.boundary_sites):
        schedule.append(j)
        j *= 2
    return schedule


def concentrated_profile(dom, j, zeta):
    """``chi_{A_j} / (|A_j| delta**gamma)`` with ``|A_j|`` measured by the quadrature."""
    idx = annulus(dom, j, zeta)
    out = np.zeros(dom.n_nodes)
    if idx.shape[0] == 0:
        return out
    out[idx] = 1.0 / (np.sum(dom.weights[idx]) * dom.delta_gamma[idx])
    return out


def interior_l1(dom, values):
    """Weighted L1 norm over the interior nodes, row by row."""
    terms = np.abs(np.atleast_2d(values)) * dom.delta_gamma * dom.weights
    return np.sum(terms[:, dom.interior_mask()], axis=1)


def potential(dom, coeffs):
    """Nodal values of ``G[f]`` from the coefficients of ``f``."""
    return dom.synthesize(np.asarray(coeffs) / dom.eigenvalues)


def richardson_order(dom, first, second, third, min_order=0.5, max_order=4.0):
    """Observed order of three potentials at ``j, 2j, 4j``, clipped."""
    prev = float(interior_l1(dom, second - first)[0])
    last = float(interior_l1(dom, third - second)[0])
    if last <= 0.0:
        return max_order
    return float(np.clip(math.log2(max(prev / last, 1.0 + 1e-12)), min_order, max_order))


ConcentrationLimit = namedtuple('ConcentrationLimit',
                                ['coeffs', 'schedule', 'j', 'gaps', 'raw_gaps', 'orders', 'tolerance', 'history'])


def concentration_limit(dom, tol):
    """Limit of the concentrated profiles ``f_j`` in coefficient space.

    For every boundary site the coefficients of ``chi_{A_j}/(|A_j| delta^gamma)``
    are computed over the j schedule and Richardson-extrapolated with the
    observed order. The limit is accepted when successive extrapolations of
    ``G[f_j]`` differ by less than ``tol`` in the interior weighted L1 norm.

    Raises
    ------
    ResolutionError
        When not even ``A_j0`` holds 3 nodes per side.
    ConcentrationError
        When the schedule is exhausted before the Cauchy test passes.
    """
    tol = float(tol)
    key = ('concentration', tol)
    if key in dom._cache:
        return dom._cache[key]
    schedule = concentration_schedule(dom)
    if not schedule:
        raise ResolutionError('Concentration annuli hold fewer than 3 nodes on {}'.format(dom))
    sites = [b.name for b in dom.boundary_sites]
    history = dict((name, []) for name in sites)
    raw_gaps, gaps, orders = [], [], []
    previous = None
    for i, j in enumerate(schedule):
        for name in sites:
            history[name].append(dom.project(concentrated_profile(dom, j, name)))
        if i >= 1:
            raw_gaps.append(max(float(interior_l1(dom, potential(dom, history[n][-1] - history[n][-2]))[0])
                                for n in sites))
        if i < 2:
            continue
        current = {}
        step_orders = []
        for name in sites:
            g1, g2, g3 = history[name][-3:]
            order = richardson_order(dom, potential(dom, g1), potential(dom, g2), potential(dom, g3))
            step_orders.append(order)
            current[name] = g3 + (g3 - g2) / (2.0 ** order - 1.0)
        orders.append(min(step_orders))
        if previous is not None:
            gap = max(float(interior_l1(dom, potential(dom, current[n] - previous[n]))[0]) for n in sites)
            gaps.append(gap)
            logger.debug('Concentration at j={}: order {:.3g}, Cauchy gap {:.3g}'.format(j, orders[-1], gap))
            if gap < tol:
                limit = ConcentrationLimit(current, schedule[:i + 1], j, gaps, raw_gaps, orders, tol, history)
                dom._cache[key] = limit
                return limit
        previous = current
    last = potential(dom, sum(previous.values())) if previous else None
    before = potential(dom, sum(history[n][-1] for n in sites))
    raise ConcentrationError('Concentration did not reach {} over j in {} (gaps {})'.format(tol, schedule, gaps),
                             last=last, previous=before)


def u_star(dom, tol=None):
    """Canonical singular solution ``u* = lim_j G[f_j]`` with ``h = 1``.

    ``f_j`` puts unit boundary mass in ``A_j`` at every site; the Cauchy
    tolerance defaults to ``tolerances.ustar_cauchy``.
    """
    limit = concentration_limit(dom, config.tolerances.ustar_cauchy if tol is None else tol)
    return GridFunction(dom, potential(dom, sum(limit.coeffs.values())))


def mode_boundary_derivatives(dom, zeta):
    """``D_gamma phi_j`` at ``zeta`` for every mode, by boundary extrapolation."""
    site = dom.site(zeta)
    key = ('mode_derivatives', site.name)
    if key not in dom._cache:
        four, _ = boundary_extrapolation(dom, site, dom.eigenvectors / dom.delta_gamma)
        dom._cache[key] = four
    return dom._cache[key]


# Export / import

def _encode(values):
    return [repr(float(v)) for v in np.ravel(values)]


def export_domain(dom, path):
    """Write the domain as JSON with every real as a round-tripping string."""
    data = {
        'family': dom.family,
        'length': repr(dom.length),
        'coords': _encode(dom.coords),
        'quad_weights': _encode(dom.weights),
        'eigenvalues': _encode(dom.eigenvalues),
        'eigenvectors': [_encode(row) for row in dom.eigenvectors],
        'gamma': repr(dom.gamma),
        's': repr(dom.s),
        'delta': _encode(dom.delta),
        'boundary_sites': [{'name': b.name, 'coord': repr(b.coord)} for b in dom.boundary_sites],
    }
    with fileutil.write_atomic(path) as f:
        json.dump(data, f, indent=2, sort_keys=True)
    return path


def import_domain(path):
    """Read a domain written by :func:`export_domain`."""
    try:
        with open(path) as f:
            data = json.load(f)
        return SpectralDomain(
            coords=[float(v) for v in data['coords']],
            weights=[float(v) for v in data['quad_weights']],
            eigenvalues=[float(v) for v in data['eigenvalues']],
            eigenvectors=[[float(v) for v in row] for row in data['eigenvectors']],
            gamma=float(data['gamma']),
            s=float(data['s']),
            delta=[float(v) for v in data['delta']],
            boundary_sites=[(b['name'], float(b['coord'])) for b in data['boundary_sites']],
            family=data.get('family', 'matrix'),
            length=float(data['length']),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError('Malformed domain file {}: {}'.format(path, e))
