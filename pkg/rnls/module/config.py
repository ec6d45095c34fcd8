"""
Run configuration: sectioned key-value text ([grid] [model] [solver] [experiment] [output]) in TOML,
or the same structure in JSON, with defaults, strict key checking and command line overrides.
"""
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, List, Optional, Sequence
import copy
import json
import math
import os
import re
try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
from ..util import InvocationDebug
from ..util.errors import ConfigError, InvalidFieldError, ParameterDomainError

EXPERIMENTS = ('solve', 'solve-energy', 'sweep', 'rates', 'omega-c', 'loop', 'scan', 'tf', 'lambda0', 'info')
FORMATS = ('csv', 'json-lines')

DEFAULTS = {
    'grid': {
        'dim': 2,
        'bounds': [-12.0, 12.0],
        'points': 256,
        'device': 'cpu'
    },
    'model': {
        'p': 3.0,
        'beta': 1.0,
        'Omega': 0.0,
        'omega': None,
        'omega_list': None,
        'Omega_list': None,
        'potential': 'harmonic',
        'coefficients': None
    },
    'solver': {
        'tau': None,
        'stabilization': 'auto',
        'tol_step': 1e-10,
        'tol_residual': 1e-8,
        'max_iters': 100000,
        'init': 'auto',
        'seed': 0,
        'max_restarts': 6,
        'display': False,
        'display_every': 100
    },
    'experiment': {
        'name': None,
        # sweep
        'axis': 'omega',
        'warm_start': None,
        'multistart': False,
        # solve-energy, loop
        'mass': None,
        'direction': 'action',
        # rates
        'window': None,
        'regime': 'threshold',
        # omega-c
        'bracket_tol': 1e-3,
        'omega_list': None,
        # scan
        'omega_range': None,
        'step': 0.01,
        'resolution': 1e-3,
        'factor': 5.0
    },
    'output': {
        'directory': 'out',
        'formats': ['csv'],
        'name': 'gs'
    }
}

RANGE_PATTERN = re.compile(r'^\s*range\s*\(\s*([^,]+),([^,]+),([^,]+)\)\s*$')


@dataclass
class RunConfig:
    grid: Any
    params: Any
    solver: Any
    experiment: str
    options: Dict[str, Any] = dataclass_field(default_factory=dict)
    omega_list: Optional[List[float]] = None
    Omega_list: Optional[List[float]] = None
    output_dir: str = 'out'
    formats: List[str] = dataclass_field(default_factory=lambda: ['csv'])
    name: str = 'gs'
    raw: Dict[str, Dict[str, Any]] = dataclass_field(default_factory=dict)


def load_json(path: str):
    with open(path) as f:
        cfg = json.load(f)
    return cfg


def load_text(text: str) -> Dict:
    """Parse TOML text, or JSON when the text is a JSON object."""
    if text.lstrip().startswith('{'):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError('malformed JSON: {0}'.format(e), rule='well-formed config')
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError('malformed TOML: {0}'.format(e), rule='well-formed config')


def parse_value(text: str):
    """A TOML literal, or the raw string when the text is not one."""
    try:
        return tomllib.loads('value = {0}'.format(text))['value']
    except tomllib.TOMLDecodeError:
        return text.strip()


def apply_overrides(data: Dict, overrides: Sequence[str]) -> Dict:
    for item in overrides or ():
        if '=' not in item:
            raise ConfigError('override "{0}" should read section.key=value'.format(item), rule='override syntax')
        key, value = item.split('=', 1)
        if key.count('.') != 1:
            raise ConfigError('override key "{0}" should read section.key'.format(key), rule='override syntax')
        section, name = key.strip().split('.')
        data.setdefault(section, {})
        if not isinstance(data[section], dict):
            raise ConfigError('"{0}" is not a section'.format(section), rule='sectioned config')
        data[section][name] = parse_value(value)
    return data


def expand_range(value, key: str) -> Optional[List[float]]:
    """A list of numbers or 'range(start, stop, step)' with stop included."""
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        match = RANGE_PATTERN.match(value)
        if match is None:
            raise ConfigError('{0}="{1}"'.format(key, value), rule='list or "range(start, stop, step)"')
        try:
            start, stop, step = (float(group) for group in match.groups())
        except ValueError:
            raise ConfigError('{0}="{1}"'.format(key, value), rule='numeric range bounds')
        if step == 0 or (stop - start) * step < 0:
            raise ConfigError('{0}="{1}"'.format(key, value), rule='step moves from start towards stop')
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + index * step, 12) for index in range(count)]
    if isinstance(value, (list, tuple)):
        try:
            return [float(item) for item in value]
        except (TypeError, ValueError):
            raise ConfigError('{0}={1!r}'.format(key, value), rule='numeric list')
    raise ConfigError('{0}={1!r}'.format(key, value), rule='list or "range(start, stop, step)"')


def merge_defaults(data: Dict, strict: bool) -> Dict:
    merged = copy.deepcopy(DEFAULTS)
    for section, values in data.items():
        if section not in DEFAULTS:
            if strict:
                raise ConfigError('unknown section [{0}]'.format(section), rule='known sections')
            continue
        if not isinstance(values, dict):
            raise ConfigError('"{0}" is not a section'.format(section), rule='sectioned config')
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                if strict:
                    raise ConfigError('unknown key {0}.{1}'.format(section, key), rule='known keys (strict mode)')
                continue
            merged[section][key] = value
    return merged


def _axis_values(value, dim: int, key: str):
    if isinstance(value, (int, float)):
        return [value] * dim
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value) and key == 'grid.bounds':
        return [list(value)] * dim
    if isinstance(value, (list, tuple)) and len(value) == dim:
        return list(value)
    raise ConfigError('{0}={1!r} for dim={2}'.format(key, value, dim), rule='one value or one per axis')


def build_grid(section: Dict):
    from ..grid import Grid
    dim = section['dim']
    if dim not in (1, 2):
        raise ConfigError('grid.dim={0}'.format(dim), rule='dim in {1, 2}')
    bounds = _axis_values(section['bounds'], dim, 'grid.bounds')
    points = _axis_values(section['points'], dim, 'grid.points')
    try:
        return Grid(tuple(tuple(b) for b in bounds), tuple(int(n) for n in points), section['device'])
    except (InvalidFieldError, TypeError, ValueError) as e:
        raise ConfigError('grid: {0}'.format(e), rule=getattr(e, 'rule', None) or 'valid grid')


def build_params(section: Dict, dim: int):
    from ..physics import ModelParams
    from ..physics.potential import potential_registry
    coefficients = section['coefficients'] or []
    if not isinstance(coefficients, (list, tuple)):
        coefficients = [coefficients]
    try:
        potential = potential_registry.build(section['potential'], *coefficients)
        omega = section['omega']
        params = ModelParams(
            p=float(section['p']),
            beta=float(section['beta']),
            Omega=float(section['Omega']),
            omega=None if omega is None else float(omega),
            potential=potential
        )
        if params.beta == 0:
            raise ParameterDomainError('model.beta=0', rule='beta > 0')
        return params.validate(dim)
    except ParameterDomainError as e:
        raise ConfigError('model: {0}'.format(e), rule=e.rule)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError('model: {0}'.format(e), rule='numeric model parameters')


def build_solver(section: Dict):
    from ..core.solver import SolverConfig
    from ..data import InitSpec
    try:
        init = InitSpec.parse(section['init'])
        for spec in (init,) + tuple(init.starts):
            if spec.variant == 'file' and not os.path.exists(spec.path):
                raise ConfigError('solver.init.path {0} does not exist'.format(spec.path), rule='referenced files exist')
        stabilization = section['stabilization']
        return SolverConfig(
            tau=None if section['tau'] is None else float(section['tau']),
            stabilization=stabilization if stabilization == 'auto' else float(stabilization),
            tol_step=float(section['tol_step']),
            tol_residual=float(section['tol_residual']),
            max_iters=int(section['max_iters']),
            init=init,
            seed=int(section['seed']),
            max_restarts=int(section['max_restarts']),
            display=bool(section['display']),
            display_every=int(section['display_every'])
        )
    except ParameterDomainError as e:
        raise ConfigError('solver: {0}'.format(e), rule=e.rule)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError('solver: {0}'.format(e), rule='numeric solver settings')


@InvocationDebug('cli_io.parse_config')
def parse_config(text: str = '', overrides: Sequence[str] = None, experiment: str = None, strict: bool = True) -> RunConfig:
    """Validated RunConfig from config text, `section.key=value` overrides and the selected experiment."""
    data = load_text(text) if text and text.strip() else {}
    data = apply_overrides(data, overrides)
    if experiment is not None:
        data.setdefault('experiment', {})
        data['experiment']['name'] = experiment
    merged = merge_defaults(data, strict)

    name = merged['experiment']['name']
    if name is None:
        raise ConfigError('no experiment', rule='exactly one experiment')
    if name not in EXPERIMENTS:
        raise ConfigError('unknown experiment "{0}", expected one of {1}'.format(name, EXPERIMENTS), rule='exactly one experiment')

    grid = build_grid(merged['grid'])
    params = build_params(merged['model'], grid.dim)
    solver = build_solver(merged['solver'])

    output = merged['output']
    formats = output['formats'] if isinstance(output['formats'], list) else [output['formats']]
    for item in formats:
        if item not in FORMATS:
            raise ConfigError('output.formats contains "{0}"'.format(item), rule='formats in {0}'.format(FORMATS))

    options = dict(merged['experiment'])
    options['omega_list'] = expand_range(options['omega_list'], 'experiment.omega_list')
    if options['axis'] not in ('omega', 'Omega'):
        raise ConfigError('experiment.axis={0}'.format(options['axis']), rule='axis in {omega, Omega}')
    if options['direction'] not in ('action', 'energy'):
        raise ConfigError('experiment.direction={0}'.format(options['direction']), rule='direction in {action, energy}')
    if options['regime'] not in ('threshold', 'far'):
        raise ConfigError('experiment.regime={0}'.format(options['regime']), rule='regime in {threshold, far}')

    return RunConfig(
        grid=grid,
        params=params,
        solver=solver,
        experiment=name,
        options=options,
        omega_list=expand_range(merged['model']['omega_list'], 'model.omega_list'),
        Omega_list=expand_range(merged['model']['Omega_list'], 'model.Omega_list'),
        output_dir=str(output['directory']),
        formats=formats,
        name=str(output['name']),
        raw=merged
    )


def parse_config_file(path: str, overrides: Sequence[str] = None, experiment: str = None, strict: bool = True) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError('config file {0} does not exist'.format(path), rule='referenced files exist')
    if path.endswith('.json'):
        text = json.dumps(load_json(path))
    else:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    return parse_config(text, overrides, experiment, strict)
