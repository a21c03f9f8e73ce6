import traceback

import numpy as np

from . import specfun_tests
from .util import Measurement, identity_name, tolerance_for
from ..exc import ConfigurationError
from ..log import logger


class IdentityBattery(object):
    """Runs the special-function identities and collects their measurements."""

    _TESTS = specfun_tests.TESTS

    def __init__(self, only=None):
        self.tests = self.select(only)

    @classmethod
    def names(cls):
        return [identity_name(test) for test in cls._TESTS]

    @classmethod
    def select(cls, only=None):
        if not only:
            return list(cls._TESTS)
        unknown = [name for name in only if name not in cls.names()]
        if unknown:
            raise ConfigurationError('Unknown identities {}. Valid identities are {}'.format(unknown, cls.names()))
        return [test for test in cls._TESTS if identity_name(test) in only]

    def check(self):
        """
        Runs every selected identity.
        :return: list of Measurements and a list of messages from failing identities
        """
        measurements = []
        msgs = []
        for test in self.tests:
            name = identity_name(test)
            logger.set_label(name)
            try:
                measurement = test()
            except Exception as e:
                logger.debug(traceback.format_exc())
                measurement = Measurement(name, np.nan, tolerance_for(name), False)
                msgs.append('{}.{}: {}'.format(type(self).__name__, test.__name__, str(e)))
            else:
                if not measurement.passed:
                    msgs.append('{}.{}: measured error {:.3g} exceeds tolerance {:.3g}'.format(
                        type(self).__name__, test.__name__, measurement.error, measurement.tolerance))
            logger.info('{} error {:.3g} (tolerance {:.3g}) {}'.format(
                name, measurement.error, measurement.tolerance, 'passed' if measurement.passed else 'FAILED'))
            measurements.append(measurement)
        logger.set_label(None)
        return measurements, msgs
