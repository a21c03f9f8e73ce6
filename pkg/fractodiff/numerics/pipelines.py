import os
import traceback

from . import fileutil, reports
from .log import logger


class ExperimentPipeline(object):
    """Runs a sequence of tasks into one output directory and indexes their files.

    ``index.json`` maps every registered label to a path relative to the
    destination and records the run information passed as keyword arguments.
    """

    INDEX_FILE = 'index.json'

    def __init__(self, destination, *pipeline_tasks, **info):
        self.destination = destination
        self.pipeline_tasks = pipeline_tasks
        for task in self.pipeline_tasks:
            task.set_pipeline(self)
        self.output_files = {}
        self.output_info = info
        self.results = {}

    def register_output(self, filename, label):
        self.output_files[label] = os.path.join(self.destination, filename)

    def register_info(self, info_key, info_value):
        self.output_info[info_key] = info_value

    def create_index(self):
        index = {}
        if len(self.output_files) > 0:
            index['files'] = {}
            for name, path in list(self.output_files.items()):
                index['files'][name] = os.path.relpath(path, self.destination)
        if len(self.output_info) > 0:
            index['info'] = self.output_info
        reports.write_json(os.path.join(self.destination, self.INDEX_FILE), index)

    def validate(self):
        """Validate every task before any of them runs."""
        for task in self.pipeline_tasks:
            logger.set_label(task.name)
            task.validate()
        logger.set_label(None)

    def _execute_tasks(self):
        pipeline_task = None
        try:
            for i, pipeline_task in enumerate(self.pipeline_tasks):

                logger.info('Executing task {}: {}'.format(i+1, pipeline_task.name))
                logger.set_label(pipeline_task.name)
                pipeline_task.run(self.destination)
                self.results[pipeline_task.name] = bool(pipeline_task.passed)
                if pipeline_task.error:
                    logger.info('Task {} failed with message {}. Continuing'.format(
                        pipeline_task.name, pipeline_task.error))
                elif not pipeline_task.passed:
                    logger.warn('Task {} finished but its checks did not pass'.format(pipeline_task.name))
                else:
                    logger.info('Task {} finished successfully'.format(pipeline_task.name))
        except Exception as e:
            logger.error('Task {} failed with message {}'.format(
                pipeline_task.name if pipeline_task else 'initialization', e))
            logger.debug(traceback.format_exc())
            if pipeline_task is not None:
                self.results[pipeline_task.name] = False
            raise
        finally:
            logger.set_label(None)

    def run(self):
        """Run every task and write the index.

        :return: True when every task passed
        """
        fileutil.makedirs(self.destination)
        logger.info('Pipeline to {} started'.format(self.destination))
        try:
            self._execute_tasks()
        finally:
            self.register_info('results', self.results)
            self.register_info('passed', bool(self.results) and all(self.results.values()))
            self.create_index()
        logger.info('Pipeline ended normally')
        return self.output_info['passed']
