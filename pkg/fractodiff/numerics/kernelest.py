"""Heat-kernel comparison functions and sandwich fits of discrete kernels.

Two positive functions are comparable when their ratio stays between two
constants. The constants are never known in closed form, so discrete
kernels are checked by fitting ``c1 = min ratio`` and ``c2 = max ratio``
over a sample and capping ``c2 / c1``.
"""
import enum
import math
from collections import namedtuple

import numpy as np
import pandas as pd
from scipy import integrate, linalg

from .exc import DomainError
from .log import logger


class Family(enum.Enum):
    whole_space = 'whole_space'
    rfl = 'rfl'
    cfl = 'cfl'
    sfl = 'sfl'

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower().replace('-', '_'))
        except ValueError:
            raise DomainError('Unknown kernel family {}'.format(name))


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError('Heat kernels need t > 0')
    return t


def whole_space_bound(d, s, t, r, form='min'):
    """Comparison function of the fractional heat kernel in ``R^d``.

    ``form='min'`` gives ``t^(-d/2s) ^ t / r^(d+2s)``, ``'product'`` the
    equivalent ``t^(-d/2s) (1 ^ t^(1/2s) / r)^(d+2s)`` and ``'sum'``
    ``t^(-d/2s) (1 + r / t^(1/2s))^-(d+2s)``, which is within ``2^(d+2s)``
    of the other two.
    """
    t = _check_time(t)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError('Distances must be non-negative')
    on_diagonal = t ** (-d / (2.0 * s))
    scale = t ** (1.0 / (2.0 * s))
    with np.errstate(divide='ignore'):
        if form == 'min':
            out = np.minimum(on_diagonal, t / r ** (d + 2.0 * s))
        elif form == 'product':
            out = on_diagonal * np.minimum(1.0, scale / r) ** (d + 2.0 * s)
        elif form == 'sum':
            out = on_diagonal * (1.0 + r / scale) ** (-(d + 2.0 * s))
        else:
            raise DomainError('Unknown form {}'.format(form))
    return float(out) if np.ndim(out) == 0 else out


def cauchy_kernel(t, r):
    """Exact heat kernel of ``(-Delta)^(1/2)`` on the line."""
    t = _check_time(t)
    out = t / (math.pi * (np.asarray(r, dtype=float) ** 2 + t ** 2))
    return float(out) if np.ndim(out) == 0 else out


def inverse_fourier_kernel(t, r, s=0.5):
    """``(1/pi) int_0^inf exp(-t xi^(2s)) cos(xi r) dxi`` by oscillatory quadrature."""
    t = float(_check_time(t))
    r = abs(float(r))

    def integrand(xi):
        return math.exp(-t * xi ** (2.0 * s))

    if r == 0.0:
        value, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12)
    else:
        value, _ = integrate.quad(integrand, 0.0, np.inf, weight='cos', wvar=r, epsabs=1e-13, limlst=200)
    return value / math.pi


class KernelBoundSpec(object):
    """Comparison function ``b(t, r, delta_x, delta_y)`` of a heat-kernel family."""

    def __init__(self, family, d=1, s=0.5):
        self.family = Family.parse(family)  # type: Family
        if int(d) != d or d < 1:
            raise DomainError('d must be a positive integer, got {}'.format(d))
        if not 0 < s < 1:
            raise DomainError('s={} must lie in (0, 1)'.format(s))
        if self.family is Family.cfl and not s > 0.5:
            raise DomainError('The censored fractional Laplacian needs s > 1/2, got {}'.format(s))
        self.d = int(d)  # type: int
        self.s = float(s)  # type: float

    def bound(self, t, r, delta_x=np.inf, delta_y=np.inf):
        return boundary_bound(self, t, r, delta_x, delta_y)

    def __repr__(self):
        return 'KernelBoundSpec(family={}, d={}, s={})'.format(self.family.value, self.d, self.s)


def boundary_bound(spec, t, r, delta_x, delta_y):
    """Boundary factors of ``spec.family`` times :func:`whole_space_bound`."""
    t = _check_time(t)
    r = np.asarray(r, dtype=float)
    dx = np.asarray(delta_x, dtype=float)
    dy = np.asarray(delta_y, dtype=float)
    if np.any(dx < 0) or np.any(dy < 0):
        raise DomainError('Boundary distances must be non-negative')
    scale = t ** (1.0 / (2.0 * spec.s))
    family = spec.family
    if family is Family.whole_space:
        factor = 1.0
    elif family in (Family.rfl, Family.cfl):
        power = spec.s if family is Family.rfl else 2.0 * spec.s - 1.0
        factor = (np.minimum(1.0, dx / scale) * np.minimum(1.0, dy / scale)) ** power
    else:
        reach = r + scale
        factor = np.minimum(1.0, dx / reach) * np.minimum(1.0, dy / reach)
    out = factor * whole_space_bound(spec.d, spec.s, t, r)
    return float(out) if np.ndim(out) == 0 else out


def sandwich_fit(samples, bound):
    """Fitted constants ``(c1, c2)`` with ``c1 <= value / bound <= c2``.

    Parameters
    ----------
    samples : iterable of (t, x, y, value)
    bound : callable
        ``bound(t, x, y)``.

    Raises
    ------
    DomainError
        When a kernel value or a bound is not positive.
    """
    samples = list(samples)
    if not samples:
        raise DomainError('No samples to fit')
    ratios = []
    for t, x, y, value in samples:
        b = float(bound(t, x, y))
        if not value > 0 or not b > 0 or not math.isfinite(value) or not math.isfinite(b):
            raise DomainError('Sandwich fit needs positive values; got kernel {} and bound {} at '
                              't={} x={} y={}'.format(value, b, t, x, y))
        ratios.append(value / b)
    return float(min(ratios)), float(max(ratios))


# Discrete kernels

def discrete_heat_kernel(dom, t):
    """``sum_j exp(-lam_j t) phi_j(x) phi_j(y)`` on the nodes of ``dom``."""
    t = float(_check_time(t))
    return (dom.eigenvectors.T * np.exp(-dom.eigenvalues * t)).dot(dom.eigenvectors)


def semigroup_matrix(dom, t):
    """Nodal matrix of ``exp(-t L)``: the kernel times the quadrature weights."""
    return discrete_heat_kernel(dom, t) * dom.weights


def semigroup_expm(dom, t):
    """``W^(-1/2) expm(-t M) W^(1/2)`` for a matrix-built domain."""
    if dom.matrix is None:
        raise DomainError('Domain {} carries no matrix'.format(dom.family))
    root = np.sqrt(dom.weights)
    return linalg.expm(-float(t) * dom.matrix) / root[:, None] * root[None, :]


def chapman_kolmogorov_defect(dom, t, s):
    """``max |S(t) S(s) - S(t + s)|`` for the discrete semigroup."""
    return float(np.max(np.abs(semigroup_matrix(dom, t).dot(semigroup_matrix(dom, s))
                               - semigroup_matrix(dom, t + s))))


SandwichResult = namedtuple('SandwichResult', ['c1', 'c2', 'ratio', 'window', 'table'])


def _sample_nodes(dom, stride):
    if stride is None:
        stride = max(1, dom.n_nodes // 20)
    return np.arange(0, dom.n_nodes, stride)


def sandwich_window(dom, spec, t_values, stride=None):
    """Fit a discrete heat kernel against ``spec`` on off-diagonal node pairs.

    Times below ``10 h^2`` (``h`` the smallest node spacing) are dropped; the
    retained window is returned with the fit.
    """
    h = float(np.min(np.diff(np.sort(dom.coords)))) if dom.n_nodes > 1 else dom.length
    t_min = 10.0 * h * h
    times = [float(t) for t in t_values if t >= t_min]
    if not times:
        raise DomainError('No time in {} lies above 10 h^2 = {:.3g}'.format(list(t_values), t_min))
    dropped = [t for t in t_values if t < t_min]
    if dropped:
        logger.info('Sandwich fit drops t={} below 10 h^2 = {:.3g}'.format(dropped, t_min))
    nodes = _sample_nodes(dom, stride)
    rows = []
    for t in times:
        kernel = discrete_heat_kernel(dom, t)
        for i in nodes:
            for j in nodes:
                if i == j:
                    continue
                r = abs(dom.coords[i] - dom.coords[j])
                b = spec.bound(t, r, dom.delta[i], dom.delta[j])
                rows.append({'t': t, 'x': float(dom.coords[i]), 'y': float(dom.coords[j]),
                             'kernel': float(kernel[i, j]), 'bound': float(b)})
    table = pd.DataFrame(rows, columns=['t', 'x', 'y', 'kernel', 'bound'])
    bounds = dict(((row.t, row.x, row.y), row.bound) for row in table.itertuples())
    c1, c2 = sandwich_fit(zip(table['t'], table['x'], table['y'], table['kernel']),
                          lambda t, x, y: bounds[(t, x, y)])
    table['ratio'] = table['kernel'] / table['bound']
    logger.info('Heat kernel sandwich for {}: c1={:.4g} c2={:.4g} over t in [{}, {}]'.format(
        spec, c1, c2, min(times), max(times)))
    return SandwichResult(c1, c2, c2 / c1, (min(times), max(times)), table)


def green_bound(d, s, gamma, r, delta_x, delta_y):
    """``r^(2s-d) [(1 ^ delta_x / r)(1 ^ delta_y / r)]^gamma``."""
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError('Green comparison needs r > 0')
    factor = np.minimum(1.0, np.asarray(delta_x) / r) * np.minimum(1.0, np.asarray(delta_y) / r)
    out = r ** (2.0 * s - d) * factor ** gamma
    return float(out) if np.ndim(out) == 0 else out


def green_sandwich(dom, stride=None, d=1):
    """Fit the discrete Green kernel of ``dom`` against :func:`green_bound`.

    Needs ``d > 2s`` so that the comparison function decays off the diagonal.
    """
    if not d > 2.0 * dom.s:
        raise DomainError('Green two-sided estimates need d > 2s, got d={} s={}'.format(d, dom.s))
    kernel = (dom.eigenvectors.T / dom.eigenvalues).dot(dom.eigenvectors)
    nodes = _sample_nodes(dom, stride)
    samples = []
    for i in nodes:
        for j in nodes:
            if i != j:
                samples.append((0.0, i, j, float(kernel[i, j])))

    def bound(_, i, j):
        return green_bound(d, dom.s, dom.gamma, abs(dom.coords[i] - dom.coords[j]), dom.delta[i], dom.delta[j])

    c1, c2 = sandwich_fit(samples, bound)
    logger.info('Green sandwich for {!r}: c1={:.4g} c2={:.4g}'.format(dom, c1, c2))
    return c1, c2
