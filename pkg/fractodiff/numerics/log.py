import os
import logging
import traceback as tb

from . import fileutil


class Logger(object):
    def __init__(self):
        self.label = None  # type: str
        self.run = None  # type: str
        self.output_dir = None  # type: str
        self.run_handler = None  # type: logging.Handler

        self._logger = logging.getLogger('fractodiff')
        self._logger.setLevel(logging.DEBUG)
        self._logger.propagate = False

        self.formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

        self.stdout_handler = logging.StreamHandler()
        self.stdout_handler.setLevel(logging.INFO)
        self.stdout_handler.setFormatter(self.formatter)
        self._logger.addHandler(self.stdout_handler)

    def set_stdout_level(self, level):
        """Set the log level for the stream handler."""
        self.stdout_handler.setLevel(level)

    def _set_run_handler(self):
        """Add a file handler to log to the output directory."""
        if self.run_handler:
            self._logger.removeHandler(self.run_handler)
        filename = os.path.join(self.output_dir, 'log.txt')
        fileutil.makedirs(self.output_dir)
        self.run_handler = logging.FileHandler(filename)
        self.run_handler.setLevel(logging.DEBUG)
        self.run_handler.setFormatter(self.formatter)
        self._logger.addHandler(self.run_handler)
        self.debug("Log file {} opened".format(filename))

    def set_label(self, label):
        """Set the label to be attached to log messages."""
        self.label = label

    def set_output_dir(self, output_dir, run=None):
        """Log to ``output_dir/log.txt`` and tag messages with ``run``."""
        self.output_dir = output_dir
        self.run = run
        self._set_run_handler()

    def unset_output_dir(self):
        """Stop logging to the current output directory."""
        self.output_dir = None
        self.run = None
        if self.run_handler:
            self._logger.removeHandler(self.run_handler)
            self.run_handler.close()
            self.run_handler = None

    @staticmethod
    def _format_msg(msg, **kwargs):
        return '{run} - {label} - {msg}'.format(msg=msg, **kwargs)

    def debug(self, msg):
        self._logger.debug(self._format_msg(msg, run=self.run, label=self.label))

    def info(self, msg):
        self._logger.info(self._format_msg(msg, run=self.run, label=self.label))

    def warn(self, msg):
        self._logger.warning(self._format_msg(" ****** " + msg, run=self.run, label=self.label))

    def error(self, msg):
        self._logger.error(self._format_msg(" ************ " + msg, run=self.run, label=self.label))

    def critical(self, msg):
        self._logger.critical(self._format_msg(" ********************* " + msg, run=self.run, label=self.label))

try:
    logger = Logger()
except Exception:
    tb.print_exc()
    logger = None
