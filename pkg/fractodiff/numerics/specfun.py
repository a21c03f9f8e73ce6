"""Scalar special functions for fractional-in-time problems.

The two-parameter Mittag-Leffler function is evaluated in three regimes:

* the power series for small ``|z|`` (and for every ``z >= 0``),
* an integral representation on the negative axis for intermediate ``|z|``,
* the optimally truncated asymptotic expansion for large ``|z|``.

Arrays are evaluated with :func:`ml_array`; the scalar entry points return
:class:`EvalResult` so the method and error estimate stay visible.
"""
import math
import enum
from collections import namedtuple
from functools import lru_cache

import numpy as np
from scipy import special, integrate

from .configuration import config
from .exc import DomainError, PoleError, SingularityError, AccuracyError
from .log import logger

_EPS = np.finfo(float).eps
_ASYMPTOTIC_TERMS = 80
_CHUNK = 4096


class Method(enum.Enum):
    series = 'series'
    asymptotic = 'asymptotic'
    integral = 'integral'


_METHODS = (Method.series, Method.asymptotic, Method.integral)

EvalResult = namedtuple('EvalResult', ['value', 'est_abs_error', 'method'])


class FractionalOrder(object):
    """Validated fractional order ``0 < alpha < 1`` with an optional ``beta > 0``."""

    __slots__ = ('_alpha', '_beta')

    def __init__(self, alpha, beta=None):
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise DomainError('Fractional order alpha={} is outside (0, 1)'.format(alpha))
        if beta is not None:
            beta = float(beta)
            if not beta > 0.0:
                raise DomainError('Mittag-Leffler beta={} must be positive'.format(beta))
        self._alpha = alpha
        self._beta = beta

    @property
    def alpha(self):
        return self._alpha

    @property
    def beta(self):
        return self._beta

    def __eq__(self, other):
        return isinstance(other, FractionalOrder) and (self._alpha, self._beta) == (other._alpha, other._beta)

    def __hash__(self):
        return hash((self._alpha, self._beta))

    def __repr__(self):
        if self._beta is None:
            return 'FractionalOrder(alpha={!r})'.format(self._alpha)
        return 'FractionalOrder(alpha={!r}, beta={!r})'.format(self._alpha, self._beta)


def as_alpha(order, allow_one=False):
    """Extract a float order from a :class:`FractionalOrder` or a number."""
    if isinstance(order, FractionalOrder):
        return order.alpha
    alpha = float(order)
    upper_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (alpha > 0.0 and upper_ok):
        raise DomainError('Fractional order alpha={} is outside the admissible range'.format(alpha))
    return alpha


def as_alpha_beta(order, beta=None):
    """Resolve ``(alpha, beta)`` from an order object or a pair.

    ``alpha = 1`` is admitted here so that exponential sanity cases work.
    """
    if isinstance(order, FractionalOrder):
        alpha, beta = order.alpha, order.beta if beta is None else beta
    elif isinstance(order, (tuple, list)):
        alpha, beta = order
    else:
        alpha = order
    alpha = float(alpha)
    beta = 1.0 if beta is None else float(beta)
    if not 0.0 < alpha <= 1.0:
        raise DomainError('Mittag-Leffler alpha={} is outside (0, 1]'.format(alpha))
    if not beta > 0.0:
        raise DomainError('Mittag-Leffler beta={} must be positive'.format(beta))
    return alpha, beta


# Gamma function

def _is_pole(x):
    x = np.asarray(x, dtype=float)
    return (x <= 0) & (x == np.round(x))


def log_gamma(x):
    """Natural logarithm of the gamma function for ``x > 0``.

    Raises
    ------
    PoleError
        At non-positive integers.
    DomainError
        For negative arguments where ``Gamma(x) < 0``; use
        :func:`signed_log_gamma` there.
    """
    x = float(x)
    if _is_pole(x):
        raise PoleError('Gamma has a pole at x={}'.format(x))
    if special.gammasgn(x) < 0:
        raise DomainError('Gamma({}) is negative; use signed_log_gamma'.format(x))
    return float(special.gammaln(x))


def signed_log_gamma(x):
    """Return ``(sign, ln|Gamma(x)|)``, valid for negative non-integer ``x``."""
    x = float(x)
    if _is_pole(x):
        raise PoleError('Gamma has a pole at x={}'.format(x))
    return float(special.gammasgn(x)), float(special.gammaln(x))


def _signed_log_gamma_array(x):
    """Vectorised signed log-gamma; poles come back with sign 0."""
    x = np.asarray(x, dtype=float)
    pole = _is_pole(x)
    sign = np.where(pole, 0.0, special.gammasgn(np.where(pole, 0.5, x)))
    logabs = np.where(pole, np.inf, special.gammaln(np.where(pole, 0.5, x)))
    return sign, logabs


# Mittag-Leffler: series regime

def series_radius(alpha):
    """Largest |z| at which the alternating series keeps ~13 digits."""
    return min(float(config.specfun.series_radius), 6.0 ** alpha)


def _series(alpha, beta, z):
    """Power series with compensated summation.

    Returns values, error estimates and a convergence mask.
    """
    tol = config.tolerances
    n_terms = int(tol.series_max_terms)
    cutoff = float(tol.series_cutoff)
    k = np.arange(n_terms)
    log_coef = -special.gammaln(alpha * k + beta)

    vals = np.empty(z.shape)
    errs = np.empty(z.shape)
    converged = np.zeros(z.shape, dtype=bool)
    for start in range(0, z.size, _CHUNK):
        zc = z[start:start + _CHUNK]
        with np.errstate(divide='ignore', invalid='ignore'):
            logz = np.log(np.abs(zc))[:, None]
            log_terms = np.where(k[None, :] == 0, log_coef[None, :], k[None, :] * logz + log_coef[None, :])
        signs = np.where((zc[:, None] < 0) & (k[None, :] % 2 == 1), -1.0, 1.0)
        terms = signs * np.exp(log_terms)
        partial = np.abs(np.cumsum(terms, axis=1))
        small = np.abs(terms) < cutoff * partial
        stop = small[:, :-1] & small[:, 1:]
        has_stop = stop.any(axis=1)
        first = np.where(has_stop, np.argmax(stop, axis=1) + 2, n_terms)
        for i, row in enumerate(terms):
            used = row[:first[i]]
            vals[start + i] = math.fsum(used)
            omitted = abs(row[first[i]]) if first[i] < n_terms else 0.0
            errs[start + i] = 4 * _EPS * math.fsum(np.abs(used)) + omitted
        converged[start:start + zc.size] = has_stop
    errs = np.where(converged, errs, np.inf)
    return vals, errs, converged


# Mittag-Leffler: asymptotic regime on the negative axis

@lru_cache(maxsize=256)
def _asymptotic_table(alpha, beta):
    k = np.arange(1, _ASYMPTOTIC_TERMS + 1)
    coef = special.rgamma(beta - alpha * k)
    with np.errstate(divide='ignore'):
        log_coef = np.log(np.abs(coef))
    reflected = alpha * k - beta + 1
    log_env = np.where(reflected > 0,
                       np.maximum(log_coef, special.gammaln(np.where(reflected > 0, reflected, 1.0)) - np.log(np.pi)),
                       log_coef)
    coef.flags.writeable = False
    log_env.flags.writeable = False
    return coef, log_env


def _asymptotic(alpha, beta, x):
    """E_{alpha,beta}(-x) for x > 0 via optimal truncation of the algebraic expansion."""
    coef, log_env = _asymptotic_table(alpha, beta)
    k = np.arange(1, _ASYMPTOTIC_TERMS + 1)
    signs = np.where(k % 2 == 1, 1.0, -1.0)
    vals = np.empty(x.shape)
    errs = np.empty(x.shape)
    for start in range(0, x.size, _CHUNK):
        logx = np.log(x[start:start + _CHUNK])[:, None]
        env = log_env[None, :] - k[None, :] * logx
        cut = np.argmin(env, axis=1)
        terms = signs[None, :] * coef[None, :] * np.exp(-k[None, :] * logx)
        terms = np.where(np.arange(k.size)[None, :] < cut[:, None], terms, 0.0)
        vals[start:start + logx.shape[0]] = np.sum(terms, axis=1)
        errs[start:start + logx.shape[0]] = (np.exp(env[np.arange(cut.size), cut])
                                             + 4 * _EPS * np.sum(np.abs(terms), axis=1))
    return vals, errs


@lru_cache(maxsize=256)
def asymptotic_threshold(alpha, beta=1.0):
    """Smallest x from which the asymptotic expansion of E_{alpha,beta}(-x) is trusted.

    Tabulated on a geometric grid and cached; the integral representation
    covers the gap between the series radius and this point.
    """
    target = float(config.specfun.asymptotic_target)
    xs = np.geomspace(0.5, 1.0e4, 3000)
    _, errs = _asymptotic(alpha, beta, xs)
    bad = np.nonzero(errs > target)[0]
    if bad.size == 0:
        return float(xs[0])
    if bad[-1] + 1 >= xs.size:
        return np.inf
    x_star = float(xs[bad[-1] + 1])
    logger.debug('Asymptotic threshold for E_({}, {}) is x*={:.4g}'.format(alpha, beta, x_star))
    return x_star


# Mittag-Leffler: integral regime on the negative axis

def _integral_kernel(alpha, beta):
    p = alpha - beta + 1.0
    s1 = math.sin(math.pi * (1.0 - beta))
    s2 = math.sin(math.pi * (1.0 - beta + alpha))
    c = math.cos(math.pi * alpha)
    a = alpha / p

    def kernel(v, z):
        va = v ** a
        num = va * s1 - z * s2
        den = va * va - 2.0 * va * z * c + z * z
        return np.exp(-v ** (1.0 / p)) * num / den / (p * math.pi)

    return kernel, p


def _integral(alpha, beta, x):
    """E_{alpha,beta}(-x) for ``beta <= 1`` from the real-axis integral representation.

    In ``chi = r**alpha``, ``r = v**(1/p)``, ``p = alpha - beta + 1`` the
    integrand is bounded on the finite interval ``[0, cutoff**p]``.
    """
    kernel, p = _integral_kernel(alpha, beta)
    v_max = float(config.specfun.integral_cutoff) ** p
    chunk = int(config.specfun.integral_chunk)
    c = abs(math.cos(math.pi * alpha))
    order = np.argsort(x)
    vals = np.empty(x.shape)
    errs = np.empty(x.shape)
    for start in range(0, x.size, chunk):
        idx = order[start:start + chunk]
        z = -x[idx]
        if alpha > 0.5:
            v_peak = np.minimum((x[idx] * c) ** (p / alpha), v_max)
        else:
            v_peak = np.full(idx.size, v_max)
        width = v_max - v_peak

        def left(u):
            return v_peak * kernel(u * v_peak, z)

        def right(u):
            return width * kernel(v_peak + u * width, z)

        with np.errstate(invalid='ignore', divide='ignore'):
            i1, e1 = integrate.quad_vec(left, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, norm='max', limit=20000)
            i2, e2 = integrate.quad_vec(right, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, norm='max', limit=20000)
        vals[idx] = i1 + i2
        errs[idx] = e1 + e2
    return vals, errs


def _integral_any_beta(alpha, beta, x):
    """Integral regime for any beta, lowering beta by the recurrence first."""
    steps = int(math.ceil((beta - 1.0) / alpha - 1e-12)) if beta > 1.0 else 0
    low = beta - steps * alpha
    vals, errs = _integral(alpha, low, x)
    z = -x
    for i in range(steps):
        b = low + i * alpha
        vals = (vals - special.rgamma(b)) / z
        errs = errs / np.abs(z)
    return vals, errs


def _alpha_one_integral(beta, x):
    """E_{1,beta}(-x), beta > 1, from a smooth integral over [0, 1]."""
    q = 1.0 / (beta - 1.0)

    def integrand(w):
        return np.exp(-x * (1.0 - w ** q))

    val, err = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, norm='max')
    scale = special.rgamma(beta)
    return scale * val, scale * err


def _alpha_one(beta, z):
    """E_{1,beta}: exponential closed forms for integer beta, an integral otherwise."""
    vals, errs, converged = _series(1.0, beta, z)
    methods = np.zeros(z.shape, dtype=int)
    far = (np.abs(z) > float(config.specfun.series_radius)) | ~converged
    if not far.any():
        return vals, errs, methods
    zf = z[far]
    if beta == round(beta):
        v = np.exp(zf)
        for b in range(1, int(round(beta))):
            v = (v - special.rgamma(b)) / zf
        vals[far] = v
        errs[far] = 8 * _EPS * (np.abs(v) + 1.0)
        return vals, errs, methods
    negative = zf < 0
    if negative.any():
        xf = -zf[negative]
        shift = 1 if beta < 1.0 else 0
        v, e = _alpha_one_integral(beta + shift, xf)
        if shift:
            v = -xf * v + special.rgamma(beta)
            e = xf * e + 4 * _EPS
        idx = np.nonzero(far)[0][negative]
        vals[idx], errs[idx], methods[idx] = v, e, 2
    return vals, errs, methods


def ml_array(alpha, beta, z, strict=True, method=None):
    """Vectorised two-parameter Mittag-Leffler function.

    Parameters
    ----------
    alpha : float
        Order in ``(0, 1]``.
    beta : float
        Second parameter, positive.
    z : array_like
        Real arguments.
    strict : bool
        Raise :class:`AccuracyError` when an estimate misses the tolerance.
    method : Method, optional
        Force a regime for ``z < 0`` (used to compare regimes).

    Returns
    -------
    values, est_abs_error, methods : ndarray
        ``methods`` holds indices into ``(series, asymptotic, integral)``.
    """
    alpha, beta = as_alpha_beta((alpha, beta))
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = z.ravel()
    if np.isnan(z).any():
        raise DomainError('Mittag-Leffler argument contains NaN')

    if alpha == 1.0:
        vals, errs, methods = _alpha_one(beta, z)
    else:
        vals = np.empty(z.shape)
        errs = np.empty(z.shape)
        methods = np.empty(z.shape, dtype=int)
        x = -z
        if method is None:
            series = (z >= 0) | (np.abs(z) <= series_radius(alpha))
            asym = ~series & (x >= asymptotic_threshold(alpha, beta))
        else:
            series = (z >= 0) | (method == Method.series)
            asym = ~series & (method == Method.asymptotic)

        if series.any():
            sv, se, ok = _series(alpha, beta, z[series])
            idx = np.nonzero(series)[0]
            retry = ~ok & (z[idx] < 0) & (method is None)
            vals[idx], errs[idx], methods[idx] = sv, se, 0
            series[idx[retry]] = False
        if asym.any():
            vals[asym], errs[asym] = _asymptotic(alpha, beta, x[asym])
            methods[asym] = 1
        integ = ~series & ~asym
        if integ.any():
            vals[integ], errs[integ] = _integral_any_beta(alpha, beta, x[integ])
            methods[integ] = 2
        logger.debug('E_({}, {}) on {} points: series={} asymptotic={} integral={}'.format(
            alpha, beta, z.size, int(np.sum(methods == 0)), int(np.sum(methods == 1)), int(np.sum(methods == 2))))

    if strict:
        tol = config.tolerances
        allowed = np.maximum(float(tol.ml_abs), float(tol.ml_rel) * np.abs(vals))
        missed = ~(errs <= allowed)
        if missed.any():
            worst = int(np.argmax(np.where(missed, errs, -np.inf)))
            raise AccuracyError('E_({}, {})({}) misses tolerance: estimated error {:.3g}'.format(
                alpha, beta, z[worst], errs[worst]),
                best_estimate=vals.reshape(shape), est_abs_error=errs.reshape(shape))
    return vals.reshape(shape), errs.reshape(shape), methods.reshape(shape)


def ml(alpha, beta, z):
    """Values of E_{alpha,beta}(z) as an array (or float for scalar input)."""
    vals, _, _ = ml_array(alpha, beta, z)
    return vals if np.ndim(vals) else float(vals)


def mittag_leffler(order, z, beta=None, method=None):
    """Evaluate E_{alpha,beta}(z) at a real scalar.

    ``order`` may be a :class:`FractionalOrder` carrying beta, or an
    ``(alpha, beta)`` pair; ``alpha = 1`` is accepted here.
    """
    alpha, beta = as_alpha_beta(order, beta)
    vals, errs, methods = ml_array(alpha, beta, np.array([float(z)]), method=method)
    return EvalResult(float(vals[0]), float(errs[0]), _METHODS[int(methods[0])])


def ml_recurrence_check(order, z):
    """Residual of ``z E_{a,b}(z) = E_{a,b-a}(z) - 1/Gamma(b-a)``."""
    alpha, beta = as_alpha_beta(order)
    if not beta - alpha > 0:
        raise DomainError('Recurrence needs beta - alpha > 0, got {}'.format(beta - alpha))
    if _is_pole(beta - alpha):
        raise PoleError('beta - alpha = {} is a pole'.format(beta - alpha))
    lhs = z * mittag_leffler((alpha, beta), z).value
    rhs = mittag_leffler((alpha, beta - alpha), z).value - float(special.rgamma(beta - alpha))
    return abs(lhs - rhs)


# Bounds

def ml_global_bound_constant(alpha, lambdas, t):
    """Empirical C with ``E_a(-lam t^a) (1 + Gamma(1-a) lam t^a) <= C``."""
    alpha = as_alpha(alpha)
    lam = np.asarray(lambdas, dtype=float)[:, None]
    s = lam * np.asarray(t, dtype=float)[None, :] ** alpha
    vals = ml(alpha, 1.0, -s)
    return float(np.max(vals * (1.0 + special.gamma(1.0 - alpha) * s)))


def ml_bound_report(alpha, t):
    """Report the conjectured two-sided bounds and the second global bound.

    Nothing is asserted; the observed ratios are logged and returned.
    """
    alpha = as_alpha(alpha)
    t = np.asarray(t, dtype=float)
    ta = t ** alpha
    e = ml(alpha, 1.0, -ta)
    lower = 1.0 / (1.0 + ta / special.gamma(1.0 + alpha))
    upper = 1.0 / (1.0 + special.gamma(1.0 - alpha) * ta)
    e_aa = ml(alpha, alpha, -ta)
    second = 1.0 / (1.0 + abs(special.gamma(-alpha)) * ta ** 2)
    report = {
        'alpha': alpha,
        'min_ratio_to_lower': float(np.min(e / lower)),
        'max_ratio_to_upper': float(np.max(e / upper)),
        'lower_holds': bool(np.all(e >= lower * (1 - 1e-12))),
        'upper_holds': bool(np.all(e <= upper * (1 + 1e-12))),
        'second_bound_constant': float(np.max(e_aa / second)),
        'global_bound_constant': float(np.max(e * (1.0 + special.gamma(1.0 - alpha) * ta))),
    }
    logger.info('ML bounds for alpha={alpha}: lower holds {lower_holds} (min ratio {min_ratio_to_lower:.4g}), '
                'upper holds {upper_holds} (max ratio {max_ratio_to_upper:.4g}), '
                'second-bound constant {second_bound_constant:.4g}'.format(**report))
    return report


# Mainardi function

def _mainardi_constant(alpha):
    return (1.0 - alpha) * alpha ** (alpha / (1.0 - alpha))


def mainardi_support(alpha):
    """Upper end of the reliable range: beyond it Phi_alpha underflows."""
    alpha = as_alpha(alpha)
    return (float(config.specfun.mainardi_exponent) / _mainardi_constant(alpha)) ** (1.0 - alpha)


def _mainardi_series(alpha, t):
    tol = config.tolerances
    n_terms = int(tol.series_max_terms)
    cutoff = float(tol.series_cutoff)
    terms = []
    total = 0.0
    small = 0
    for k in range(n_terms):
        sign, logabs = _signed_log_gamma_array(1.0 - alpha * (k + 1))
        if sign == 0.0:
            term = 0.0
        elif t == 0.0:
            term = float(sign) * math.exp(-logabs) if k == 0 else 0.0
        else:
            term = ((-1.0) ** k) * float(sign) * math.exp(k * math.log(t) - math.lgamma(k + 1) - logabs)
        terms.append(term)
        total += term
        small = small + 1 if abs(term) < cutoff * max(abs(total), 1e-300) else 0
        if small >= 2 and k > 2:
            break
    value = math.fsum(terms)
    return value, 4 * _EPS * math.fsum(abs(v) for v in terms)


def _mainardi_integral(alpha, t):
    """Zolotarev-type integral with the minimum of the exponent factored out."""
    b = _mainardi_constant(alpha)
    tau = t ** (1.0 / (1.0 - alpha))
    expo = 1.0 / (1.0 - alpha)

    def integrand(u):
        log_a = (expo * math.log(math.sin(alpha * u) / math.sin(u))
                 + math.log(math.sin((1.0 - alpha) * u) / math.sin(alpha * u)))
        if log_a > 700.0:
            return 0.0
        a = math.exp(log_a)
        arg = (a - b) * tau
        if arg > 745.0:
            return 0.0
        return a * math.exp(-arg)

    val, err = integrate.quad(integrand, 0.0, math.pi, epsabs=0.0, epsrel=1e-12, limit=400)
    scale = t ** (alpha / (1.0 - alpha)) * math.exp(-b * tau) / (math.pi * (1.0 - alpha))
    return scale * val, scale * err + 1e-16


def mainardi(alpha, t):
    """Mainardi (Wright-type) function Phi_alpha(t) for ``t >= 0``.

    The alternating series is used up to ``specfun.mainardi_series_t``;
    beyond it an integral representation. For ``t > mainardi_support(alpha)``
    the value underflows and :class:`AccuracyError` is raised with estimate 0.
    """
    alpha = as_alpha(alpha)
    t = float(t)
    if t < 0 or np.isnan(t):
        raise DomainError('Mainardi function needs t >= 0, got {}'.format(t))
    t_max = mainardi_support(alpha)
    if t > t_max:
        raise AccuracyError('Phi_{}({}) is beyond the reliable range t <= {:.4g}'.format(alpha, t, t_max),
                            best_estimate=0.0, est_abs_error=1e-300)
    if t <= float(config.specfun.mainardi_series_t):
        value, err = _mainardi_series(alpha, t)
        method = Method.series
    else:
        value, err = _mainardi_integral(alpha, t)
        method = Method.integral
    return EvalResult(max(value, 0.0), err, method)


def mainardi_values(alpha, t):
    """Phi_alpha on an array; zero beyond the reliable range."""
    t = np.asarray(t, dtype=float)
    t_max = mainardi_support(alpha)
    out = np.zeros(t.shape)
    for i, ti in np.ndenumerate(t):
        if ti <= t_max:
            out[i] = mainardi(alpha, ti).value
    return out


# Scalar kernel

def p_alpha_scalar(alpha, t, lam):
    """``t**(alpha-1) E_{alpha,alpha}(-lam t**alpha)`` for ``t > 0``.

    ``alpha = 1`` is accepted and reduces to ``exp(-lam t)``.
    """
    alpha = as_alpha(alpha, allow_one=True)
    t = float(t)
    lam = float(lam)
    if lam < 0:
        raise DomainError('lambda must be non-negative, got {}'.format(lam))
    if t == 0.0:
        raise SingularityError('P_alpha(t; lambda) is singular at t=0')
    if t < 0:
        raise DomainError('P_alpha needs t > 0, got {}'.format(t))
    return t ** (alpha - 1.0) * ml(alpha, alpha, -lam * t ** alpha)


def p_alpha_values(alpha, t, lam):
    """Vectorised P_alpha kernel on ``t > 0``."""
    alpha = as_alpha(alpha, allow_one=True)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise SingularityError('P_alpha(t; lambda) is singular at t=0')
    return t ** (alpha - 1.0) * ml(alpha, alpha, -float(lam) * t ** alpha)
