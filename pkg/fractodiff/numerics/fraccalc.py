"""Fractional calculus on uniform time grids.

Everything here works on :class:`TimeSeries` sampled on a :class:`TimeGrid`.
Convolutions against weakly singular kernels use a product rule: the data is
interpolated piecewise linearly and the kernel is integrated exactly through
its first two moments, so the rule only needs

    K0(s) = int_0^s k(r) dr,    K1(s) = int_0^s (s - r) k(r) dr.

Data behaving like ``t**e`` with ``-1 < e < 0`` near the origin is split into
a few fitted monomials, integrated exactly, plus a regular remainder.
"""
import math

import numpy as np
from scipy import special, integrate, linalg

from .configuration import config
from .exc import DomainError, AccuracyError, DivergenceError
from .specfun import as_alpha
from .log import logger

_MIN_SPLIT_STEPS = 6


class TimeGrid(object):
    """Uniform mesh ``t_k = t0 + k dt`` for ``k = 0..n_steps``."""

    __slots__ = ('_dt', '_n_steps', '_t0')

    def __init__(self, dt, n_steps, t0=0.0):
        dt = float(dt)
        if not dt > 0 or not math.isfinite(dt):
            raise DomainError('Time step must be positive, got {}'.format(dt))
        if int(n_steps) != n_steps or n_steps < 0:
            raise DomainError('n_steps must be a non-negative integer, got {}'.format(n_steps))
        self._dt = dt
        self._n_steps = int(n_steps)
        self._t0 = float(t0)

    @classmethod
    def over(cls, T, n_steps):
        """Grid on ``[0, T]`` with ``n_steps`` cells."""
        if not T > 0:
            raise DomainError('Horizon T must be positive, got {}'.format(T))
        if n_steps < 1:
            raise DomainError('n_steps must be positive, got {}'.format(n_steps))
        return cls(float(T) / n_steps, n_steps)

    @property
    def dt(self):
        return self._dt

    @property
    def n_steps(self):
        return self._n_steps

    @property
    def t0(self):
        return self._t0

    @property
    def T(self):
        return self._t0 + self._n_steps * self._dt

    @property
    def nodes(self):
        return self._t0 + self._dt * np.arange(self._n_steps + 1)

    def refine(self, factor=2):
        return TimeGrid(self._dt / factor, self._n_steps * factor, self._t0)

    def __len__(self):
        return self._n_steps + 1

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and \
            (self._dt, self._n_steps, self._t0) == (other._dt, other._n_steps, other._t0)

    def __hash__(self):
        return hash((self._dt, self._n_steps, self._t0))

    def __repr__(self):
        return 'TimeGrid(dt={!r}, n_steps={}, t0={!r})'.format(self._dt, self._n_steps, self._t0)


class TimeSeries(object):
    """Values on a :class:`TimeGrid`.

    ``values`` has shape ``(n_steps + 1,)`` for a scalar series or
    ``(n_steps + 1, n_nodes)`` for a field series. ``kind`` is ``'nodal'``
    (piecewise linear between nodes) or ``'cellwise'`` (``values[k]`` holds on
    ``(t_{k-1}, t_k]``; ``values[0]`` is ignored).
    """

    KINDS = ('nodal', 'cellwise')

    def __init__(self, grid, values, kind='nodal'):
        values = np.asarray(values, dtype=float)
        if values.ndim not in (1, 2) or values.shape[0] != len(grid):
            raise DomainError('TimeSeries needs {} values per component, got shape {}'.format(
                len(grid), values.shape))
        if kind not in self.KINDS:
            raise DomainError('Unknown TimeSeries kind {}'.format(kind))
        self.grid = grid  # type: TimeGrid
        self.values = values  # type: np.ndarray
        self.kind = kind  # type: str

    @classmethod
    def sample(cls, grid, fn, skip_origin=False):
        """Evaluate ``fn`` at the grid nodes; with ``skip_origin`` node 0 is nan."""
        t = grid.nodes
        if skip_origin:
            inner = np.asarray(_evaluate(fn, t[1:]), dtype=float)
            first = np.full((1,) + inner.shape[1:], np.nan)
            return cls(grid, np.concatenate([first, inner]))
        return cls(grid, _evaluate(fn, t))

    @property
    def is_field(self):
        return self.values.ndim == 2

    @property
    def final(self):
        return self.values[-1]

    def with_values(self, values):
        return TimeSeries(self.grid, values, self.kind)

    def __len__(self):
        return self.values.shape[0]

    def __repr__(self):
        return 'TimeSeries({!r}, shape={}, kind={})'.format(self.grid, self.values.shape, self.kind)


def _evaluate(fn, t):
    """Call ``fn`` on an array, falling back to pointwise evaluation."""
    try:
        out = np.asarray(fn(t), dtype=float)
        if out.shape[:1] == t.shape:
            return out
        if out.ndim == 0:
            return np.full(t.shape, float(out))
    except (TypeError, ValueError):
        pass
    return np.array([np.asarray(fn(float(ti)), dtype=float) for ti in t])


def as_series(w, grid=None):
    """Coerce a TimeSeries, an array or a callable into a TimeSeries."""
    if isinstance(w, TimeSeries):
        if grid is not None and w.grid != grid:
            raise DomainError('TimeSeries lives on {}, expected {}'.format(w.grid, grid))
        return w
    if grid is None:
        raise DomainError('A grid is needed to sample {!r}'.format(w))
    if callable(w):
        return TimeSeries.sample(grid, w)
    if np.ndim(w) == 0:
        return TimeSeries(grid, np.full(len(grid), float(w)))
    return TimeSeries(grid, w)


# Product integration

def causal_convolve(kernel, values):
    """``out[k] = sum_{j<=k} kernel[j] values[k-j]`` for 1D or column-wise 2D values.

    The summation order is fixed so repeated runs are bit-identical.
    """
    n = values.shape[0]
    kernel = np.asarray(kernel, dtype=float)[:n]
    if values.ndim == 1:
        return np.convolve(kernel, values)[:n]
    out = np.empty(values.shape)
    for col in range(values.shape[1]):
        out[:, col] = np.convolve(kernel, values[:, col])[:n]
    return out


class ProductRule(object):
    """Exact integration of a kernel against piecewise-linear data.

    ``apply`` returns ``int_0^{t_k} k(t_k - r) w(r) dr`` at every node.

    Parameters
    ----------
    grid : TimeGrid
    k0, k1 : np.ndarray
        The kernel moments at ``s_l = l dt``, ``l = 0..n_steps`` (both zero at 0).
    """

    def __init__(self, grid, k0, k1):
        self.grid = grid  # type: TimeGrid
        k0 = np.asarray(k0, dtype=float)
        k1 = np.asarray(k1, dtype=float)
        if k0.shape != (len(grid),) or k1.shape != (len(grid),):
            raise DomainError('Kernel moments must have {} entries'.format(len(grid)))
        dt = grid.dt
        # weight of the left node of the cell at lag l (w_{k-l}), then of the right node (w_{k-l+1})
        self.left = np.zeros(len(grid))
        self.right = np.zeros(len(grid))
        self.left[1:] = (dt * k0[1:] - k1[1:] + k1[:-1]) / dt
        self.right[1:] = (k1[1:] - k1[:-1] - dt * k0[:-1]) / dt
        self.cell = np.zeros(len(grid))
        self.cell[1:] = np.diff(k0)

    @classmethod
    def for_power(cls, grid, mu):
        """Rule for the Riemann-Liouville kernel ``s**(mu-1)/Gamma(mu)``."""
        s = grid.dt * np.arange(len(grid))
        return cls(grid, s ** mu * special.rgamma(mu + 1), s ** (mu + 1) * special.rgamma(mu + 2))

    def apply(self, w):
        """Convolve a series with the kernel.

        Parameters
        ----------
        w : TimeSeries
            Nodal series are interpolated linearly, cellwise ones held constant.

        Returns
        -------
        np.ndarray
            Convolution values at every node, 0 at node 0.
        """
        values = w.values
        out = np.zeros(values.shape)
        if len(w) < 2:
            return out
        if w.kind == 'cellwise':
            out[1:] = causal_convolve(self.cell[1:], values[1:])
            return out
        out[1:] = causal_convolve(self.left, values)[1:] + causal_convolve(self.right[1:], values[1:])
        return out

    def matrix(self):
        """Lower-triangular matrix ``M`` with ``apply(w) == M @ w``."""
        n = len(self.grid)
        diag = np.zeros(n)
        diag[:-1] = self.left[:-1] + self.right[1:]
        m = linalg.toeplitz(diag, np.zeros(n))
        m[:, 0] = self.left
        m[0, :] = 0.0
        return m


# Singular splitting

def _split_powers(exponent):
    step = exponent + 1.0
    powers = []
    for p in [exponent, exponent + step, exponent + 2 * step, 0.0, exponent + 3 * step]:
        if all(abs(p - q) > 1e-9 for q in powers):
            powers.append(p)
    return sorted(powers[:4])


def split_singular(w, exponent):
    """Split ``w ~ t**exponent`` near 0 into fitted monomials and a remainder.

    The monomials ``t**p`` use ``p = e + i (e + 1)`` and the constant; their
    coefficients interpolate ``w`` at nodes ``1..4``.

    Returns
    -------
    powers : list of float
    coeffs : np.ndarray
        Shape ``(len(powers),)`` or ``(len(powers), n_nodes)``.
    remainder : TimeSeries
        Regular remainder with node 0 set to 0.
    """
    exponent = float(exponent)
    if not -1.0 < exponent:
        raise DomainError('Singular exponent {} is not integrable'.format(exponent))
    if w.grid.n_steps < _MIN_SPLIT_STEPS:
        raise DomainError('Singular splitting needs at least {} steps'.format(_MIN_SPLIT_STEPS))
    powers = _split_powers(exponent)
    t = w.grid.nodes
    fit_t = t[1:len(powers) + 1]
    basis = fit_t[:, None] ** np.array(powers)[None, :]
    coeffs = np.linalg.solve(basis, w.values[1:len(powers) + 1])
    remainder = np.array(w.values, dtype=float)
    inner = t[1:, None] ** np.array(powers)[None, :]
    remainder[1:] = remainder[1:] - inner.dot(coeffs)
    remainder[0] = 0.0
    return powers, coeffs, w.with_values(remainder)


def _resolve_exponent(w, exponent, default):
    if exponent is not None:
        return float(exponent)
    if np.all(np.isfinite(w.values[0])):
        return None
    if default is None:
        raise DomainError('Series is not finite at t=0; a singular exponent is required')
    return float(default)


def _powdiff(a, q):
    """``(a + 1)**q - a**q`` for integers ``a >= 0`` without cancellation."""
    a = np.asarray(a, dtype=float)
    safe = np.where(a > 0, a, 1.0)
    with np.errstate(divide='ignore', invalid='ignore'):
        out = safe ** q * np.expm1(q * np.log1p(1.0 / safe))
    return np.where(a > 0, out, 1.0)


def monomial_weights(p, grid):
    """Weights ``W`` with ``int_0^T t**p z(t) dt = W @ z`` for piecewise-linear ``z``."""
    n = grid.n_steps
    a = np.arange(n)
    full = _powdiff(a, p + 1.0) / (p + 1.0)
    right = _powdiff(a, p + 2.0) / (p + 2.0) - a * _powdiff(a, p + 1.0) / (p + 1.0)
    left = full - right
    w = np.zeros(n + 1)
    w[:-1] += left
    w[1:] += right
    return w * grid.dt ** (p + 1.0)


def singular_product_integral(y, z, exponent=None):
    """``int_0^T y(t) z(t) dt`` with ``y`` possibly like ``t**exponent`` at 0.

    ``z`` must be regular. Both are scalar series on the same grid.
    """
    y = as_series(y)
    z = as_series(z, y.grid)
    exponent = _resolve_exponent(y, exponent, None)
    if exponent is None:
        return float(integrate.trapezoid(y.values * z.values, y.grid.nodes))
    powers, coeffs, remainder = split_singular(y, exponent)
    total = float(integrate.trapezoid(remainder.values * z.values, y.grid.nodes))
    for p, c in zip(powers, coeffs):
        total += float(c) * float(monomial_weights(p, y.grid).dot(z.values))
    return total


# Riemann-Liouville integral and derivatives

def rl_integral(w, alpha, singular_exponent=None):
    """Riemann-Liouville integral ``I^alpha w`` on the grid of ``w``.

    Parameters
    ----------
    w : TimeSeries
    alpha : float
        Any positive order.
    singular_exponent : float, optional
        Behaviour ``t**e`` of ``w`` at 0. Required when ``w`` is not finite at
        node 0; the leading monomials are then integrated exactly.

    Returns
    -------
    TimeSeries
        Node 0 holds 0 for regular data, the limit value otherwise.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError('Riemann-Liouville order must be positive, got {}'.format(alpha))
    w = as_series(w)
    exponent = _resolve_exponent(w, singular_exponent, None)
    rule = ProductRule.for_power(w.grid, alpha)
    if exponent is None:
        return w.with_values(rule.apply(w))
    powers, coeffs, remainder = split_singular(w, exponent)
    out = rule.apply(remainder)
    t = w.grid.nodes
    with np.errstate(divide='ignore'):
        for p, c in zip(powers, coeffs):
            scale = math.exp(special.gammaln(p + 1.0) - special.gammaln(p + 1.0 + alpha))
            out = out + np.multiply.outer(scale * t ** (p + alpha), c)
    return TimeSeries(w.grid, out)


def _l1_coefficients(n, alpha):
    j = np.arange(n, dtype=float)
    return (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)


def _l1(values, dt, alpha):
    out = np.zeros(values.shape)
    if values.shape[0] < 2:
        return out
    c0 = dt ** (-alpha) * special.rgamma(2.0 - alpha)
    b = _l1_coefficients(values.shape[0] - 1, alpha)
    out[1:] = c0 * causal_convolve(b, np.diff(values, axis=0))
    return out


def caputo_derivative(u, alpha):
    """L1 approximation of the Caputo derivative, 0 at node 0.

    Exact for piecewise-linear ``u``; ``O(dt**(2-alpha))`` for smooth ``u``.
    """
    alpha = as_alpha(alpha)
    u = as_series(u)
    if u.grid.n_steps == 0:
        raise DomainError('Caputo derivative needs at least one time step')
    return u.with_values(_l1(u.values, u.grid.dt, alpha))


def rl_derivative_parts(u, alpha, singular_exponent=None):
    """Decompose the discrete Riemann-Liouville derivative.

    Returns ``(monomials, regular)``: a list of ``(coefficient, power)``
    terms differentiated exactly, and the central difference of the
    discrete ``I^{1-alpha}`` of the remainder (0 at node 0).
    """
    alpha = as_alpha(alpha)
    u = as_series(u)
    if u.grid.n_steps == 0:
        raise DomainError('Riemann-Liouville derivative needs at least one time step')
    exponent = _resolve_exponent(u, singular_exponent, alpha - 1.0)
    if exponent is None:
        powers, coeffs, remainder = [0.0], np.array([u.values[0]]), u.with_values(u.values - u.values[0])
    else:
        powers, coeffs, remainder = split_singular(u, exponent)
    monomials = []
    for p, c in zip(powers, coeffs):
        scale = math.exp(special.gammaln(p + 1.0)) * special.rgamma(p + 1.0 - alpha)
        if scale != 0.0:
            monomials.append((scale * np.asarray(c), p - alpha))
    integral = ProductRule.for_power(u.grid, 1.0 - alpha).apply(remainder)
    regular = np.gradient(integral, u.grid.dt, axis=0, edge_order=2 if u.grid.n_steps > 1 else 1)
    regular[0] = 0.0
    return monomials, regular


def rl_derivative(u, alpha, singular_exponent=None):
    """Discrete Riemann-Liouville derivative ``d/dt I^{1-alpha} u``.

    A series that is not finite at node 0 is taken to behave like
    ``t**(alpha-1)`` unless ``singular_exponent`` says otherwise. Node 0 of
    the result is nan.
    """
    u = as_series(u)
    monomials, out = rl_derivative_parts(u, alpha, singular_exponent)
    t = u.grid.nodes[1:]
    for c, q in monomials:
        out[1:] = out[1:] + np.multiply.outer(t ** q, c)
    out[0] = np.nan
    return TimeSeries(u.grid, out)


def rl_frac_integral_at_zero(u, alpha, singular_exponent=None):
    """Estimate ``lim_{h->0+} I^{1-alpha} u(h)``.

    The discrete integral at nodes 1..4 is extrapolated to 0 as a cubic in
    ``t**alpha`` and compared with the same extrapolation from nodes 2..5.

    Raises
    ------
    AccuracyError
        When the two estimates differ by more than ``tolerances.ic_extrapolation``.
    """
    alpha = as_alpha(alpha)
    u = as_series(u)
    if u.is_field:
        raise DomainError('rl_frac_integral_at_zero expects a scalar series')
    if u.grid.n_steps < _MIN_SPLIT_STEPS:
        raise DomainError('Extrapolation needs at least {} steps'.format(_MIN_SPLIT_STEPS))
    exponent = _resolve_exponent(u, singular_exponent, alpha - 1.0)
    integral = rl_integral(u, 1.0 - alpha, exponent).values
    s = u.grid.nodes[1:6] ** alpha
    first = float(np.polyval(np.polyfit(s[:4], integral[1:5], 3), 0.0))
    second = float(np.polyval(np.polyfit(s[1:], integral[2:6], 3), 0.0))
    gap = abs(first - second)
    tol = float(config.tolerances.ic_extrapolation)
    logger.debug('I^(1-{}) u at 0: {} (successive estimate {}, gap {:.3g})'.format(alpha, first, second, gap))
    if gap > tol * max(1.0, abs(first)):
        raise AccuracyError('Limit of I^(1-alpha) u at 0 does not settle: estimates {} and {}'.format(first, second),
                            best_estimate=first, est_abs_error=gap)
    return first


# Laplace transforms

_LAPLACE_PROBE = np.geomspace(1.0, 1.0e3, 61)


def laplace_numeric(fn, s):
    """``int_0^inf fn(t) exp(-s t) dt`` by adaptive quadrature split at t=1.

    The tail is cut at ``T*`` with ``exp(-s T*) max|fn| < 1e-14``.

    Raises
    ------
    DivergenceError
        When ``fn exp(-s t)`` does not decay.
    """
    s = float(s)
    if not s > 0:
        raise DomainError('Laplace variable must be positive, got {}'.format(s))
    with np.errstate(over='ignore', invalid='ignore'):
        probe = np.abs(np.asarray(_evaluate(fn, _LAPLACE_PROBE), dtype=float))
    if not np.all(np.isfinite(probe)):
        raise DivergenceError('Laplace integrand is not finite on [1, 1000]')
    bound = max(float(np.max(probe)), 1e-300)
    t_star = max(1.0, (math.log(bound) + 14.0 * math.log(10.0)) / s)
    with np.errstate(over='ignore', invalid='ignore'):
        tail = abs(float(np.asarray(fn(t_star)))) * math.exp(-s * t_star)
    if not math.isfinite(tail) or tail > 1e-10 * max(bound, 1.0):
        raise DivergenceError('Laplace integrand does not decay at s={} (|fn e^(-st)| = {} at t={})'.format(
            s, tail, t_star))

    def integrand(t):
        return float(np.asarray(fn(t))) * math.exp(-s * t)

    head, head_err = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    rest, rest_err = integrate.quad(integrand, 1.0, t_star, epsabs=1e-13, epsrel=1e-12, limit=500)
    err = head_err + rest_err
    if err > float(config.tolerances.laplace_abs):
        logger.warn('Laplace transform at s={} has estimated error {:.3g}'.format(s, err))
    return head + rest


def caputo_laplace_check(u_fn, alpha, s, grid):
    """``|L[D^C u](s) - (s^alpha L[u](s) - s^(alpha-1) u(0))|``.

    The left side integrates the L1 derivative on ``grid``, which must be
    long enough for ``exp(-s T)`` to be negligible.
    """
    alpha = as_alpha(alpha)
    u = TimeSeries.sample(grid, u_fn)
    d = caputo_derivative(u, alpha).values
    t = grid.nodes
    lhs = float(integrate.trapezoid(d * np.exp(-s * t), t))
    _check_truncation(d, s, grid)
    rhs = s ** alpha * laplace_numeric(u_fn, s) - s ** (alpha - 1.0) * float(u.values[0])
    return abs(lhs - rhs)


def rl_laplace_check(u_fn, alpha, s, grid, singular_exponent=None):
    """``|L[D^R u](s) - (s^alpha L[u](s) - lim_{h->0} I^(1-alpha) u(h))|``.

    Singular monomials of the discrete derivative are transformed exactly.
    """
    alpha = as_alpha(alpha)
    regular = singular_exponent is None
    u = TimeSeries.sample(grid, u_fn, skip_origin=not regular)
    monomials, d = rl_derivative_parts(u, alpha, singular_exponent)
    t = grid.nodes
    lhs = float(integrate.trapezoid(d * np.exp(-s * t), t))
    for c, q in monomials:
        lhs += float(c) * math.exp(special.gammaln(q + 1.0)) * special.gammainc(q + 1.0, s * grid.T) / s ** (q + 1.0)
    _check_truncation(d, s, grid)
    # I^(1-alpha) of bounded data vanishes at 0
    limit = 0.0 if regular else rl_frac_integral_at_zero(u, alpha, singular_exponent)
    rhs = s ** alpha * laplace_numeric(u_fn, s) - limit
    return abs(lhs - rhs)


def _check_truncation(values, s, grid):
    tail = float(np.max(np.abs(values[-10:]))) * math.exp(-s * grid.T) / s
    if tail > 1e-8:
        logger.warn('Laplace check truncated at T={} leaves a tail of about {:.3g}'.format(grid.T, tail))


# L1 time stepping and operator matrices

def l1_solve(alpha, lam, u0, f, grid):
    """Implicit L1 scheme for ``D^C u + lam u = f``, ``u(0) = u0``.

    Parameters
    ----------
    f : TimeSeries, callable, array or float
        Forcing sampled at the nodes.
    """
    alpha = as_alpha(alpha)
    lam = float(lam)
    if lam < 0:
        raise DomainError('lambda must be non-negative, got {}'.format(lam))
    if grid.n_steps == 0:
        raise DomainError('L1 time stepping needs at least one step')
    f = as_series(f, grid).values
    n = grid.n_steps
    c0 = grid.dt ** (-alpha) * special.rgamma(2.0 - alpha)
    b = _l1_coefficients(n, alpha)
    u = np.zeros(n + 1)
    delta = np.zeros(n + 1)
    u[0] = u0
    for k in range(1, n + 1):
        history = np.dot(b[k - 1:0:-1], delta[1:k]) if k > 1 else 0.0
        u[k] = (f[k] + c0 * u[k - 1] - c0 * history) / (c0 + lam)
        delta[k] = u[k] - u[k - 1]
    return TimeSeries(grid, u)


def caputo_matrix(grid, alpha):
    """Matrix of the L1 Caputo operator; row 0 is zero."""
    alpha = as_alpha(alpha)
    n = grid.n_steps
    c0 = grid.dt ** (-alpha) * special.rgamma(2.0 - alpha)
    b = _l1_coefficients(n + 1, alpha)
    tau = np.empty(n + 1)
    tau[0] = b[0]
    tau[1:] = b[1:] - b[:-1]
    m = c0 * linalg.toeplitz(tau, np.zeros(n + 1))
    m[1:, 0] = -c0 * b[:n]
    m[0, :] = 0.0
    return m


def rl_matrix(grid, alpha):
    """Matrix of the L1 Riemann-Liouville operator on regular data.

    Equals the Caputo matrix plus the ``u(0) t**(-alpha)/Gamma(1-alpha)``
    column; row 0 is nan. This is the operator of the discrete adjoint check,
    not :func:`rl_derivative`.
    """
    alpha = as_alpha(alpha)
    m = caputo_matrix(grid, alpha)
    t = grid.nodes
    m[1:, 0] += t[1:] ** (-alpha) * special.rgamma(1.0 - alpha)
    m[0, :] = np.nan
    return m
