"""Command line entry point.

    fractodiff specfun-verify [--only NAME ...]
    fractodiff solve [--set solve.alpha=0.3]
    fractodiff experiment NAME [NAME ...] | all

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
usage or configuration error.
"""
import sys
import logging

from .configuration import config
from .exc import ConfigurationError, UnknownExperimentError, DomainError, VerificationError
from .pipelines import ExperimentPipeline
from .tasks import SpecfunVerifyTask, SolveTask, experiment_tasks
from .log import logger
from .. import __version__

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _flatten(values):
    out = []
    for value in values or []:
        out.extend(v for v in value.split(',') if v)
    return out


def _no_names(config):
    if config.names:
        raise ConfigurationError('{} takes no positional names, got {}'.format(config.command, config.names))


def _pipeline(config, tasks):
    pipeline = ExperimentPipeline(config.out_dir, *tasks, command=config.command, version=__version__,
                                  config=config.snapshot())
    pipeline.validate()
    return pipeline


def cmd_specfun_verify(config):
    """Identity battery; one report row per identity."""
    _no_names(config)
    return _pipeline(config, [SpecfunVerifyTask(_flatten(config.only))])


def cmd_solve(config):
    """Solution CSV, per-mode CSV and metadata JSON for the ``solve`` section."""
    _no_names(config)
    return _pipeline(config, [SolveTask()])


def cmd_experiment(config):
    """One CSV table and one JSON summary per named experiment."""
    return _pipeline(config, experiment_tasks(list(config.names)))


COMMANDS = {
    'specfun-verify': cmd_specfun_verify,
    'solve': cmd_solve,
    'experiment': cmd_experiment,
}


def run(argv=None):
    config.reset()
    try:
        config.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except ConfigurationError as e:
        logger.error('Configuration error: {}'.format(e))
        return EXIT_USAGE

    if config.log_debug:
        logger.set_stdout_level(logging.DEBUG)
    else:
        logger.set_stdout_level(logging.INFO)

    command = config.command
    try:
        pipeline = COMMANDS[command](config)
    except (ConfigurationError, UnknownExperimentError, DomainError) as e:
        logger.error('{}: {}'.format(type(e).__name__, e))
        return EXIT_USAGE

    logger.set_output_dir(config.out_dir, run=command)
    try:
        try:
            if not pipeline.run():
                raise VerificationError('Checks failed: {}'.format(
                    sorted(name for name, passed in pipeline.results.items() if not passed)))
        except VerificationError as e:
            logger.error(str(e))
            return EXIT_FAILED
        except Exception as e:
            logger.error('{} failed with {}: {}'.format(command, type(e).__name__, e))
            return EXIT_FAILED
        logger.info('All checks passed')
        return EXIT_OK
    finally:
        logger.unset_output_dir()


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
