import math

import mpmath
import numpy as np
import pytest
from scipy import special

from ..numerics import specfun
from ..numerics.specfun import FractionalOrder, Method
from ..numerics.exc import DomainError, PoleError, SingularityError, AccuracyError

def mp_mittag_leffler(alpha, beta, z):
    """Direct power series at 150 digits; the cancellation stays far below that."""
    with mpmath.workdps(150):
        alpha, beta, z = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
        total = mpmath.mpf(0)
        for k in range(4000):
            term = z ** k * mpmath.rgamma(alpha * k + beta)
            total += term
            if k > 10 and abs(term) < mpmath.mpf(10) ** -40:
                break
        return float(total)


def test_log_gamma_known_values():
    assert specfun.log_gamma(1.0) == 0.0
    assert abs(specfun.log_gamma(5.0) - math.log(24.0)) < 1e-13
    assert abs(specfun.log_gamma(0.5) - 0.5 * math.log(math.pi)) < 1e-13


@pytest.mark.parametrize('x', [0.0, -1.0, -3.0])
def test_log_gamma_poles(x):
    with pytest.raises(PoleError):
        specfun.log_gamma(x)


def test_signed_log_gamma_negative_argument():
    sign, logabs = specfun.signed_log_gamma(-0.5)
    assert sign == -1.0
    assert abs(logabs - math.log(2.0 * math.sqrt(math.pi))) < 1e-13


@pytest.mark.parametrize('alpha', [0.0, 1.0, -0.2, 1.5])
def test_fractional_order_range(alpha):
    with pytest.raises(DomainError):
        FractionalOrder(alpha)


def test_ml_zero_argument():
    result = specfun.mittag_leffler(FractionalOrder(0.7, 2.3), 0.0)
    assert abs(result.value - special.rgamma(2.3)) < 1e-14
    assert result.method is Method.series


def test_ml_alpha_one_is_exponential():
    z = np.linspace(-20.0, 2.0, 23)
    assert np.allclose(specfun.ml(1.0, 1.0, z), np.exp(z), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('x', [0.01, 0.5, 2.0, 10.0, 80.0])
def test_ml_half_is_erfcx(x):
    assert abs(specfun.ml(0.5, 1.0, -x) - special.erfcx(x)) < 1e-10


@pytest.mark.parametrize('alpha,beta', [(0.3, 1.0), (0.5, 0.5), (0.7, 0.7), (0.9, 1.8)])
@pytest.mark.parametrize('z', [-0.5, -2.0, -5.0, 1.0])
def test_ml_against_mpmath(alpha, beta, z):
    expected = mp_mittag_leffler(alpha, beta, z)
    assert abs(specfun.ml(alpha, beta, z) - expected) <= 1e-10 + 1e-10 * abs(expected)


def test_ml_regimes_selected():
    alpha = 0.6
    x_star = specfun.asymptotic_threshold(alpha)
    assert np.isfinite(x_star)
    _, _, methods = specfun.ml_array(alpha, 1.0, np.array([-0.1, -2.0 * x_star]))
    assert methods[0] == 0
    assert methods[1] == 1


def test_ml_array_preserves_shape():
    z = -np.linspace(0.0, 50.0, 12).reshape(3, 4)
    values, errors, methods = specfun.ml_array(0.5, 1.0, z)
    assert values.shape == errors.shape == methods.shape == (3, 4)


def test_ml_nan_rejected():
    with pytest.raises(DomainError):
        specfun.ml(0.5, 1.0, np.array([np.nan]))


@pytest.mark.parametrize('order', [(0.6, 1.0), (0.5, 1.5), (0.9, 1.8)])
def test_ml_recurrence(order):
    for z in np.linspace(-40.0, 0.0, 9):
        assert specfun.ml_recurrence_check(order, z) < 1e-9


def test_ml_recurrence_pole():
    with pytest.raises(DomainError):
        specfun.ml_recurrence_check((0.5, 0.5), -1.0)


def test_ml_global_bound_is_moderate():
    t = np.linspace(0.0, 100.0, 201)
    constant = specfun.ml_global_bound_constant(0.5, [0.1, 1.0, 10.0], t)
    assert 1.0 <= constant < 10.0


def test_ml_bound_report_is_reported_only():
    report = specfun.ml_bound_report(0.5, np.linspace(0.01, 20.0, 100))
    assert report['alpha'] == 0.5
    assert report['min_ratio_to_lower'] > 0
    assert {'lower_holds', 'upper_holds', 'second_bound_constant'} <= set(report)


def test_mainardi_half_closed_form():
    for t in [0.0, 0.3, 1.0, 2.5, 5.0]:
        assert abs(specfun.mainardi(0.5, t).value - math.exp(-t * t / 4.0) / math.sqrt(math.pi)) < 1e-9


def test_mainardi_regimes():
    assert specfun.mainardi(0.3, 0.5).method is Method.series
    assert specfun.mainardi(0.3, 3.0).method is Method.integral


def test_mainardi_domain():
    with pytest.raises(DomainError):
        specfun.mainardi(0.5, -1.0)


def test_mainardi_beyond_support():
    support = specfun.mainardi_support(0.5)
    with pytest.raises(AccuracyError) as e:
        specfun.mainardi(0.5, 2.0 * support)
    assert e.value.best_estimate == 0.0
    assert specfun.mainardi_values(0.5, [2.0 * support])[0] == 0.0


def test_p_alpha_values():
    assert abs(specfun.p_alpha_scalar(0.5, 4.0, 0.0) - 1.0 / (2.0 * math.sqrt(math.pi))) < 1e-14
    assert abs(specfun.p_alpha_scalar(1.0, 2.0, 3.0) - math.exp(-6.0)) < 1e-14
    assert specfun.p_alpha_scalar(0.5, 2.0, 1.0) < specfun.p_alpha_scalar(0.5, 1.0, 1.0)


def test_p_alpha_singular_at_zero():
    with pytest.raises(SingularityError):
        specfun.p_alpha_scalar(0.5, 0.0, 1.0)
    with pytest.raises(DomainError):
        specfun.p_alpha_scalar(0.5, 1.0, -1.0)
