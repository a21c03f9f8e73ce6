import math
from collections import namedtuple
from functools import wraps

from ..configuration import config

Measurement = namedtuple('Measurement', ['identity', 'error', 'tolerance', 'passed'])


def identity_name(function):
    name = function.__name__
    return name[len('test_'):] if name.startswith('test_') else name


def tolerance_for(name):
    """Tolerance of an identity, honouring the global ``verify.tolerance`` override."""
    override = config.verify.get('tolerance')
    if override is not None:
        return float(override)
    return float(config.verify.tolerances[name])


def measured(function):
    """Turn a function returning a measured error into a checked identity."""

    @wraps(function)
    def wrapped():
        name = identity_name(function)
        tolerance = tolerance_for(name)
        error = float(function())
        passed = math.isfinite(error) and error <= tolerance
        return Measurement(name, error, tolerance, passed)
    return wrapped


def relative_error(value, reference):
    return abs(value - reference) / max(abs(reference), 1e-300)
