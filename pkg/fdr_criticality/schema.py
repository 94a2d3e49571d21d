'''
Attributes
----------
RUN_CONFIG_SCHEMA : dict
    Run configuration format as `json-schema`_.  Unknown keys are rejected at
    every level.


.. _`json-schema`: https://python-jsonschema.readthedocs.org/en/latest/
'''
from dataclasses import dataclass, field
from enum import Enum
import copy
import json
import math
import os

import jsonschema
import jsonschema.exceptions
import numpy as np
import pandas as pd
import yaml

CONFIG_VERSION = '1'
COMMANDS = ('crit', 'dist', 'simulate', 'pi0', 'fdp-law', 'ttest')
#: Level grid used when a configuration specifies neither ``alpha_grid`` nor
#: ``alpha_range``.
DEFAULT_ALPHA_RANGE = {'start': 0.01, 'stop': 0.5, 'num': 50}

RUN_CONFIG_SCHEMA = {
    'definitions':
    {'probability': {'type': 'number', 'minimum': 0, 'maximum': 1},
     'level': {'type': 'number', 'minimum': 0, 'exclusiveMinimum': True,
               'maximum': 1,
               'description': 'Target FDR level in (0, 1].'},
     'positive_integer': {'type': 'integer', 'minimum': 1},
     'alpha_range':
     {'type': 'object',
      'description': '`num` evenly spaced levels from `start` to `stop` '
      '(inclusive).',
      'properties': {'start': {'$ref': '#/definitions/level'},
                     'stop': {'$ref': '#/definitions/level'},
                     'num': {'$ref': '#/definitions/positive_integer'}},
      'required': ['start', 'stop', 'num'],
      'additionalProperties': False},
     'estimator':
     {'type': 'object',
      'properties':
      {'kind': {'type': 'string',
                'enum': ['storey_fixed', 'storey_bandwidth', 'kernel']},
       'lambda': {'type': 'number', 'minimum': 0, 'exclusiveMinimum': True,
                  'maximum': 1, 'exclusiveMaximum': True},
       'k': {'$ref': '#/definitions/positive_integer'},
       'order': {'type': 'integer', 'minimum': 0},
       'eta_exponent': {'type': 'number', 'minimum': 0,
                        'exclusiveMinimum': True,
                        'description': 'eta_m = (ln m)**(-eta_exponent)'},
       'eta': {'type': 'number', 'minimum': 0, 'exclusiveMinimum': True,
               'description': 'Constant eta_m.'}},
      'required': ['kind'],
      'additionalProperties': False},
     'model':
     {'type': 'object',
      'description': 'Mixture model.  Student models are given either by '
      '`theta` and `k` or by the effect `delta` and group sizes `n_x`, `n_y`.',
      'properties':
      {'family': {'type': 'string',
                  'enum': ['gaussian', 'laplace', 'subbotin', 'student']},
       'theta': {'type': 'number', 'minimum': 0},
       'gamma': {'type': 'number', 'minimum': 0, 'exclusiveMinimum': True},
       'k': {'$ref': '#/definitions/positive_integer'},
       'delta': {'type': 'number', 'minimum': 0},
       'n_x': {'type': 'integer', 'minimum': 2},
       'n_y': {'type': 'integer', 'minimum': 2},
       'pi0': {'$ref': '#/definitions/probability'},
       'sided': {'type': 'string', 'enum': ['one', 'two'],
                 'default': 'one'}},
      'required': ['family', 'pi0'],
      'additionalProperties': False},
     'experiment':
     {'type': 'object',
      'properties':
      {'m': {'$ref': '#/definitions/positive_integer'},
       'B': {'$ref': '#/definitions/positive_integer'},
       'seed': {'type': 'integer', 'minimum': -2 ** 63,
                'maximum': 2 ** 64 - 1},
       'alpha_grid': {'type': 'array', 'minItems': 1,
                      'items': {'$ref': '#/definitions/level'}},
       'alpha_range': {'$ref': '#/definitions/alpha_range'},
       'quantiles': {'type': 'array', 'minItems': 1,
                     'items': {'type': 'number', 'minimum': 0,
                               'exclusiveMinimum': True, 'maximum': 1,
                               'exclusiveMaximum': True}},
       'estimator': {'$ref': '#/definitions/estimator'},
       'm_list': {'type': 'array', 'minItems': 1,
                  'items': {'type': 'integer', 'minimum': 2}},
       'rates': {'type': 'array', 'minItems': 1,
                 'items': {'type': 'number', 'minimum': 0,
                           'exclusiveMinimum': True, 'maximum': 1}},
       'points': {'type': 'integer', 'minimum': 2,
                  'description': 'Grid size of `dist` tables.'},
       'theta_grid': {'type': 'array', 'minItems': 1,
                      'items': {'type': 'number', 'minimum': 0},
                      'description': 'Shifts of the `crit` surface.'},
       'pi0_grid': {'type': 'array', 'minItems': 1,
                    'items': {'$ref': '#/definitions/probability'},
                    'description': 'Null proportions of the `crit` '
                    'surface.'},
       'bernoulli_labels': {'type': 'boolean', 'default': False},
       'strict_level': {'type': 'boolean', 'default': False},
       'pvalues': {'type': 'string',
                   'description': 'CSV file of p-values (`pi0`).'},
       'data': {'type': 'string',
                'description': 'Data matrix CSV (`ttest`).'},
       'labels': {'type': 'string',
                  'description': 'Sample label CSV (`ttest`).'}},
      'additionalProperties': False},
     'output':
     {'type': 'object',
      'properties': {'dir': {'type': 'string'}},
      'additionalProperties': False}},
    'type': 'object',
    'properties':
    {'version': {'type': 'string', 'enum': [CONFIG_VERSION]},
     'command': {'type': 'string', 'enum': list(COMMANDS)},
     'model': {'$ref': '#/definitions/model'},
     'experiment': {'$ref': '#/definitions/experiment'},
     'output': {'$ref': '#/definitions/output'}},
    'required': ['version', 'command', 'model'],
    'additionalProperties': False,
}

# Pre-construct the validator.
RUN_CONFIG_VALIDATOR = jsonschema.Draft4Validator(RUN_CONFIG_SCHEMA)


class ConfigError(ValueError):
    '''
    Invalid run configuration.

    Attributes
    ----------
    path : str
        JSON path of the offending field (``'$'`` for the document itself).
    '''
    def __init__(self, message, path='$'):
        self.path = path
        super(ConfigError, self).__init__('%s: %s' % (path, message))


def _json_path(parts):
    return ''.join(['$'] + ['[%d]' % p if isinstance(p, int) else '.%s' % p
                            for p in parts])


def _check_model(model):
    family = model['family']
    if 'delta' in model or 'n_x' in model or 'n_y' in model:
        if family != 'student':
            raise ConfigError('`delta`, `n_x` and `n_y` describe Student '
                              'models only.', '$.model')
        missing = [k for k in ('delta', 'n_x', 'n_y') if k not in model]
        if missing:
            raise ConfigError('missing %s' % ', '.join(missing), '$.model')
        if 'theta' in model or 'k' in model:
            raise ConfigError('give either `theta`/`k` or `delta`/`n_x`/'
                              '`n_y`, not both.', '$.model')
        return
    if 'theta' not in model:
        raise ConfigError('`theta` is required.', '$.model')
    if family == 'subbotin' and 'gamma' not in model:
        raise ConfigError('`gamma` is required for Subbotin models.',
                          '$.model')
    if family == 'student' and 'k' not in model:
        raise ConfigError('`k` is required for Student models.', '$.model')


def _check_experiment(experiment):
    if 'alpha_grid' in experiment and 'alpha_range' in experiment:
        raise ConfigError('give either `alpha_grid` or `alpha_range`.',
                          '$.experiment')
    for key in ('alpha_grid', 'quantiles'):
        values = experiment.get(key)
        if values is not None and np.any(np.diff(values) <= 0):
            raise ConfigError('must be strictly increasing.',
                              '$.experiment.%s' % key)
    estimator = experiment.get('estimator')
    if estimator is not None:
        if estimator['kind'] == 'storey_fixed' and 'lambda' not in estimator:
            raise ConfigError('`lambda` is required.',
                              '$.experiment.estimator')
        if estimator['kind'] != 'storey_fixed' and 'k' not in estimator:
            raise ConfigError('`k` is required.', '$.experiment.estimator')
        if 'eta' in estimator and 'eta_exponent' in estimator:
            raise ConfigError('give either `eta` or `eta_exponent`.',
                              '$.experiment.estimator')
    if ('data' in experiment) != ('labels' in experiment):
        raise ConfigError('`data` and `labels` go together.', '$.experiment')


def validate(config):
    '''
    Validate a run configuration document.

    Parameters
    ----------
    config : dict

    Returns
    -------
    dict
        The configuration.

    Raises
    ------
    ConfigError
        If the document does not match :data:`RUN_CONFIG_SCHEMA` or combines
        fields inconsistently.
    '''
    error = jsonschema.exceptions.best_match(
        RUN_CONFIG_VALIDATOR.iter_errors(config))
    if error is not None:
        raise ConfigError(error.message, _json_path(error.absolute_path))
    _check_model(config['model'])
    _check_experiment(config.get('experiment', {}))
    return config


def read_config(path):
    '''
    Read an (unvalidated) configuration document from a JSON or YAML file.

    Files ending in ``.yaml`` or ``.yml`` are parsed as YAML.
    '''
    try:
        with open(path, 'r') as input_:
            text = input_.read()
    except (IOError, OSError) as exception:
        raise ConfigError('cannot read `%s`: %s' % (path, exception))
    try:
        if os.path.splitext(path)[1].lower() in ('.yaml', '.yml'):
            document = yaml.safe_load(text)
        else:
            document = json.loads(text)
    except (ValueError, yaml.YAMLError) as exception:
        raise ConfigError('cannot parse `%s`: %s' % (path, exception))
    if not isinstance(document, dict):
        raise ConfigError('`%s` does not hold a mapping.' % path)
    return document


def load_config(path):
    '''
    Read and validate a configuration file.

    Returns
    -------
    RunConfig
    '''
    return RunConfig.from_dict(read_config(path))


@dataclass
class RunConfig:
    '''
    Validated run configuration.

    The builders translate the configuration blocks into the objects the
    experiment functions take.
    '''
    command: str
    model: dict
    experiment: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    version: str = CONFIG_VERSION

    @classmethod
    def from_dict(cls, value):
        validate(value)
        value = copy.deepcopy(value)
        return cls(value['command'], value['model'],
                   value.get('experiment', {}), value.get('output', {}),
                   value['version'])

    def to_dict(self):
        value = {'version': self.version, 'command': self.command,
                 'model': copy.deepcopy(self.model)}
        if self.experiment:
            value['experiment'] = copy.deepcopy(self.experiment)
        if self.output:
            value['output'] = copy.deepcopy(self.output)
        return value

    def effect_spec(self):
        '''
        :class:`EffectSpec` of a Student model given by ``delta``, or
        ``None``.
        '''
        from .distributions import EffectSpec

        if 'delta' not in self.model:
            return None
        return EffectSpec(self.model['delta'], self.model['n_x'],
                          self.model['n_y'])

    def family(self):
        from .distributions import AlternativeFamily

        effect = self.effect_spec()
        if effect is not None:
            return effect.family()
        return AlternativeFamily.from_dict(self.model)

    def mixture_model(self):
        from .pvalues import MixtureModel

        return MixtureModel(self.model['pi0'], self.family(),
                            self.model.get('sided', 'one'))

    def alpha_grid(self):
        if 'alpha_grid' in self.experiment:
            return tuple(float(a) for a in self.experiment['alpha_grid'])
        spec = self.experiment.get('alpha_range', DEFAULT_ALPHA_RANGE)
        return tuple(np.linspace(spec['start'], spec['stop'],
                                 spec['num']).tolist())

    def estimator(self):
        from .pi0 import Pi0Estimator

        if 'estimator' not in self.experiment:
            return None
        return Pi0Estimator.from_dict(self.experiment['estimator'])

    def get(self, key, default=None):
        '''
        Experiment setting ``key``.
        '''
        return self.experiment.get(key, default)


class ResultJsonEncoder(json.JSONEncoder):
    '''
    JSON encoder for results.

    * ``numpy`` scalars and arrays become Python numbers and lists;
    * ``nan`` becomes ``null`` and infinities the strings ``"inf"`` and
      ``"-inf"``;
    * objects with a ``to_dict`` method are encoded through it;
    * ``pandas`` frames are encoded as a list of records and series as a
      mapping.

    Example
    -------

    >>> json.dumps({'a': np.float64('inf'), 'b': [np.nan, np.int64(2)]},
    ...            cls=ResultJsonEncoder, sort_keys=True)
    '{"a": "inf", "b": [null, 2]}'
    '''
    def iterencode(self, o, _one_shot=False):
        return super(ResultJsonEncoder, self).iterencode(self.clean(o),
                                                         _one_shot)

    def clean(self, o):
        if isinstance(o, dict):
            return {str(k): self.clean(v) for k, v in o.items()}
        elif isinstance(o, (list, tuple)):
            return [self.clean(v) for v in o]
        elif isinstance(o, np.ndarray):
            return self.clean(o.tolist())
        elif isinstance(o, np.generic):
            return self.clean(o.item())
        elif isinstance(o, float):
            if math.isnan(o):
                return None
            elif math.isinf(o):
                return 'inf' if o > 0 else '-inf'
            return o
        elif isinstance(o, pd.DataFrame):
            # Use `.values.tolist()`, which converts `numpy` types.
            return [self.clean(dict(zip(o.columns, row)))
                    for row in o.values.tolist()]
        elif isinstance(o, pd.Series):
            return self.clean(dict(zip(o.index.tolist(), o.values.tolist())))
        elif isinstance(o, Enum):
            return o.value
        elif hasattr(o, 'to_dict') and not isinstance(o, type):
            return self.clean(o.to_dict())
        return o
