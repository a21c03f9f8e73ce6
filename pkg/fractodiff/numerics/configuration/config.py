import os
import copy
import argparse

import yaml

from ..exc import ConfigurationError

SECTIONS = ('tolerances', 'specfun', 'spectral', 'verify', 'solve', 'experiments')


def parse_value(text):
    """Interpret an override value the way the config file would.

    Exponent literals without a dot (``1e-20``) are read as floats.
    """
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError:
        return text
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    return value


class ConfigOption(object):

    def __init__(self, options):
        self.options = {}
        for k, v in list(options.items()):
            self.options[k] = ConfigOption(v) if isinstance(v, dict) else v
            setattr(self, self._attr(k), self.options[k])

    @staticmethod
    def _attr(k):
        return str(k).replace('-', '_')

    def set(self, k, v):
        head, _, rest = str(k).partition('.')
        if head not in self.options:
            raise ConfigurationError("Attempted to set invalid option {}. "
                                     "Valid options are {}".format(k, list(self.options.keys())))
        if rest:
            if not isinstance(self.options[head], ConfigOption):
                raise ConfigurationError("Option {} has no sub-options".format(head))
            self.options[head].set(rest, v)
            return
        if isinstance(self.options[head], ConfigOption):
            if not isinstance(v, dict):
                raise ConfigurationError("Option {} expects a mapping".format(head))
            for sub_k, sub_v in v.items():
                self.options[head].set(sub_k, sub_v)
            return
        self.options[head] = v
        setattr(self, self._attr(head), v)

    def get(self, k, default=None):
        return self.options.get(k, default)

    def as_dict(self):
        return {k: v.as_dict() if isinstance(v, ConfigOption) else copy.deepcopy(v)
                for k, v in self.options.items()}

    def __getitem__(self, item):
        return self.options[item]

    def __str__(self):
        return repr(self) + '(' + ', '.join('{}={}'.format(k, getattr(self, self._attr(k)))
                                            for k in list(self.options.keys())) + ')'

    def __contains__(self, item):
        return item in self.options


class Configuration(object):

    DEFAULT_CONFIG_FILE = os.path.join(os.path.dirname(__file__), 'config.yml')

    def __init__(self, config_file=None):
        self.config_file = config_file or self.DEFAULT_CONFIG_FILE

        self.config_dict = {}
        self.options = {}
        self.parser = argparse.ArgumentParser(prog='fractodiff')

        self.load_config(self.config_file)

    def load_config(self, config_file):
        self.config_file = config_file
        with open(self.config_file) as f:
            self.config_dict = yaml.safe_load(f)

        for section in SECTIONS:
            self.options[section] = ConfigOption(self.config_dict.get(section) or {})

        for option in self.config_dict['options']:
            if option.get('arg') is not None:
                self.add_argument(option)
            self.options[option['dest']] = option.get('default', False)

    def reset(self):
        """Restore every section to the packaged defaults."""
        self.parser = argparse.ArgumentParser(prog='fractodiff')
        self.options = {}
        self.load_config(self.DEFAULT_CONFIG_FILE)

    def add_argument(self, option):
        cpy = copy.copy(option)
        del cpy['arg']
        positional = cpy.pop('positional', False)

        if 'action' not in cpy:
            cpy['action'] = 'store_true'

        if cpy['action'] == 'store_true':
            cpy['default'] = cpy.get('default', False)

        if positional:
            del cpy['dest']
            self.parser.add_argument(option['dest'], **cpy)
        else:
            self.parser.add_argument('--{arg}'.format(**option), **cpy)

    def parse_args(self, *args, **kwargs):
        parsed = self.parser.parse_args(*args, **kwargs)

        for k in list(self.options.keys()):
            if k in SECTIONS:
                continue
            self.options[k] = getattr(parsed, k)

        if self.options.get('config_file'):
            self.load_run_config(self.options['config_file'])
        for val in self.options.get('overrides') or []:
            self.apply_overrides(val)
        return parsed

    def load_run_config(self, filename):
        """Overlay a JSON or YAML run configuration on the current sections."""
        try:
            with open(filename) as f:
                run_config = yaml.safe_load(f) or {}
        except (IOError, OSError) as e:
            raise ConfigurationError("Could not read run config {}: {}".format(filename, e))
        except yaml.YAMLError as e:
            raise ConfigurationError("Malformed run config {}: {}".format(filename, e))
        if not isinstance(run_config, dict):
            raise ConfigurationError("Run config {} must be a mapping".format(filename))
        for section, values in run_config.items():
            if section not in SECTIONS:
                raise ConfigurationError("Unknown run config section {}. "
                                         "Valid sections are {}".format(section, list(SECTIONS)))
            if not isinstance(values, dict):
                raise ConfigurationError("Section {} must be a mapping".format(section))
            for k, v in values.items():
                self.options[section].set(k, v)

    def apply_overrides(self, text):
        """Apply ``section.key=value`` overrides separated by colons."""
        for item in text.split(':'):
            if not item:
                continue
            key, sep, value = item.partition('=')
            if not sep:
                raise ConfigurationError("Override {} is not of the form key=value".format(item))
            section, _, rest = key.strip().partition('.')
            if section not in SECTIONS or not rest:
                raise ConfigurationError("Override key {} must start with one of {}".format(key, list(SECTIONS)))
            self.options[section].set(rest, parse_value(value.strip()))

    def snapshot(self):
        """Plain-dict copy of the run sections, suitable for reports."""
        return {section: self.options[section].as_dict() for section in SECTIONS}

    def __str__(self):
        return repr(self) + '(' + ', '.join('{}={}'.format(k, v) for k, v in list(self.options.items())) + ')'

    def __getattr__(self, item):
        if item in ('options', 'config_dict', 'parser'):
            raise AttributeError(item)
        try:
            return vars(self)[item]
        except KeyError:
            try:
                return self.options[item]
            except KeyError:
                raise AttributeError(item)
