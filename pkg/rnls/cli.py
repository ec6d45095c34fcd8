"""
Command line surface: one subcommand per experiment, configured by a TOML / JSON file and
``--set section.key=value`` overrides.

Exit codes: 0 success, 1 non-convergence or divergence, 2 configuration or parameter errors.
"""
from typing import List, Sequence
import argparse
import sys
from . import __version__
from .core.solver import action_ground_state, energy_ground_state, lambda0
from .experiment import (
    SweepRecord, Lambda0Record, CandidateRecord, count_vortices, sweep_omega, sweep_Omega, monotone_violations,
    threshold_rates, far_rates, omega_critical_curve, equivalence_loop, reverse_loop, scan_records,
    detect_jumps, refine_jump, tf_sweep, dsg_domega_check
)
from .grid import boundary_leakage
from .io import emit_records, write_field
from .log import logger
from .log.directory import DirectoryLock, get_field_path, get_table_path, set_base_path
from .module import Registry
from .module.config import EXPERIMENTS, RunConfig, parse_config, parse_config_file
from .util import worker_count
from .util.errors import (
    ConfigError, DivergenceError, FieldFileError, InsufficientDataError, OutputLockedError, ParameterDomainError
)

command_registry = Registry('command')

LEAKAGE_WARN = 1e-8
TF_OMEGAS = [-20.0, -40.0, -80.0]
# commands that only print and never own the output directory
PRINT_ONLY = ('lambda0', 'info')


def emit(run: RunConfig, records: Sequence, name: str):
    for format in run.formats:
        emit_records(list(records), format, get_table_path(name, format))


def check_leakage(result):
    leakage = boundary_leakage(result.field)
    if leakage > LEAKAGE_WARN:
        logger.warn('Boundary leakage {0:.3e}: the box is too small for this state.'.format(leakage))


def require(value, key: str, rule: str):
    if value is None:
        raise ConfigError('{0} is not set'.format(key), rule=rule)
    return value


def omega_values(run: RunConfig) -> List[float]:
    if run.options['omega_list'] is not None:
        return run.options['omega_list']
    if run.omega_list is not None:
        return run.omega_list
    return [require(run.params.omega, 'model.omega', 'omega or omega_list set')]


def emit_candidates(run: RunConfig, result) -> str:
    """Candidate table of a multistart solve; returns the mass range for the summary line."""
    if len(result.candidates) == 0:
        return ''
    emit(run, CandidateRecord.from_result(result), run.name + '_candidates')
    low, high = result.mass_range
    return ' mass_min={0:.10g} mass_max={1:.10g}'.format(low, high)


@command_registry.register('solve')
def solve(run: RunConfig) -> int:
    require(run.params.omega, 'model.omega', 'omega set for solve')
    result = action_ground_state(run.params, run.grid, run.solver)
    n_v, _ = count_vortices(result.field)
    check_leakage(result)
    write_field(result.field, result.params, get_field_path(run.name))
    emit(run, [SweepRecord.from_result(run.params.omega, run.params.Omega, result, n_v)], run.name)
    print('action={0:.10g} mass={1:.10g} n_v={2} iters={3}{4}'.format(
        result.diags.action, result.diags.mass, n_v, result.iters, emit_candidates(run, result)
    ))
    return 0 if result.converged else 1


@command_registry.register('solve-energy')
def solve_energy(run: RunConfig) -> int:
    mass = float(require(run.options['mass'], 'experiment.mass', 'mass set for solve-energy'))
    result = energy_ground_state(mass, run.params, run.grid, run.solver)
    n_v, _ = count_vortices(result.field)
    check_leakage(result)
    write_field(result.field, result.params, get_field_path(run.name))
    emit(run, [SweepRecord.from_result(result.diags.omega, run.params.Omega, result, n_v)], run.name)
    print('energy={0:.10g} mu={1:.10g} mass={2:.10g} n_v={3} iters={4}{5}'.format(
        result.diags.energy, result.diags.mu, result.diags.mass, n_v, result.iters, emit_candidates(run, result)
    ))
    return 0 if result.converged else 1


def _sweep_summary(records: Sequence[SweepRecord], monotone: bool):
    converged = sum(1 for r in records if r.ok)
    line = 'points={0} converged={1}'.format(len(records), converged)
    if monotone:
        line += ' monotone_violations={0}'.format(len(monotone_violations(records)))
    print(line)
    return converged


@command_registry.register('sweep')
def sweep(run: RunConfig) -> int:
    options = run.options
    warm_start = bool(options['warm_start']) if options['warm_start'] is not None else False
    if options['axis'] == 'omega':
        records = sweep_omega(
            run.params, omega_values(run), run.grid, run.solver,
            warm_start=warm_start, multistart=bool(options['multistart'])
        )
    else:
        require(run.params.omega, 'model.omega', 'omega set for an Omega sweep')
        Omega_list = require(run.Omega_list, 'model.Omega_list', 'Omega_list set for an Omega sweep')
        records = sweep_Omega(run.params, Omega_list, run.grid, run.solver, warm_start=warm_start)
    emit(run, records, 'sweep')
    converged = _sweep_summary(records, options['axis'] == 'omega')
    if options['axis'] == 'omega':
        try:
            print('dsg_deviation={0:.6e}'.format(dsg_domega_check(records)))
        except InsufficientDataError as e:
            logger.debug('Derivative check skipped: {0}'.format(e))
    return 0 if converged == len(records) else 1


@command_registry.register('rates')
def rates(run: RunConfig) -> int:
    options = run.options
    warm_start = bool(options['warm_start']) if options['warm_start'] is not None else True
    records = sweep_omega(run.params, omega_values(run), run.grid, run.solver, warm_start=warm_start)
    window = options['window']
    if window is not None:
        window = tuple(float(w) for w in window)
    if options['regime'] == 'threshold':
        lam = lambda0(run.params.potential, run.params.Omega, run.grid, run.solver)
        fits = threshold_rates(records, lam, window)
    else:
        fits = far_rates(records, window)
    emit(run, records, 'rates_sweep')
    emit(run, fits, 'rates')
    mass_fit, action_fit = fits
    print('mass_slope={0:.6f} action_slope={1:.6f} r2={2:.6f},{3:.6f}'.format(
        mass_fit.slope, action_fit.slope, mass_fit.r_squared, action_fit.r_squared
    ))
    return 0


@command_registry.register('omega-c')
def omega_c(run: RunConfig) -> int:
    reports = omega_critical_curve(
        omega_values(run), run.grid, run.solver, float(run.options['bracket_tol']), run.params
    )
    emit(run, reports, 'omega_c')
    for report in reports:
        print('omega={0:g} Omega_c in ({1:.6f}, {2:.6f}){3}'.format(
            report.omega, report.lo, report.hi, ' ambiguous' if report.ambiguous else ''
        ))
    return 0


@command_registry.register('loop')
def loop(run: RunConfig) -> int:
    if run.options['direction'] == 'action':
        omega = require(run.params.omega, 'model.omega', 'omega set for the action loop')
        report = equivalence_loop(omega, run.params.Omega, run.grid, run.solver, run.params)
        print('mass={0:.10g} energy_g={1:.10g} mu_g={2:.10g} e_rel_omega={3:.3e} e_rel_S={4:.3e}'.format(
            report.mass, report.energy_g, report.mu_g, report.e_rel_omega, report.e_rel_S
        ))
    else:
        mass = float(require(run.options['mass'], 'experiment.mass', 'mass set for the energy loop'))
        report = reverse_loop(mass, run.params, run.grid, run.solver)
        print('omega={0:.10g} action_mass={1:.10g} e_rel_mass={2:.3e} returns={3}'.format(
            report.omega, report.action_mass, report.e_rel_mass, str(report.returns).lower()
        ))
    emit(run, [report], 'loop')
    return 0 if report.converged else 1


@command_registry.register('scan')
def scan(run: RunConfig) -> int:
    options = run.options
    omega_range = require(options['omega_range'], 'experiment.omega_range', 'omega_range set for scan')
    if not isinstance(omega_range, (list, tuple)) or len(omega_range) != 2:
        raise ConfigError('experiment.omega_range={0!r}'.format(omega_range), rule='omega_range = [lo, hi]')
    records = scan_records(run.params.Omega, omega_range, run.grid, run.solver, float(options['step']), run.params)
    reports = [
        refine_jump(run.params, a, b, run.grid, run.solver, float(options['resolution']))
        for a, b in detect_jumps(records, float(options['factor']))
    ]
    emit(run, records, 'scan')
    emit(run, reports, 'jumps')
    print('jumps={0}'.format(len(reports)))
    for report in reports:
        print('omega_cr in ({0:.6f}, {1:.6f}) forbidden=({2:.6f}, {3:.6f})'.format(
            report.omega_lo, report.omega_hi, report.mass_below, report.mass_above
        ))
    return 0


@command_registry.register('tf')
def tf(run: RunConfig) -> int:
    omegas = run.options['omega_list'] or run.omega_list or TF_OMEGAS
    records = tf_sweep(run.params, omegas, run.grid, run.solver)
    emit(run, records, 'tf')
    for record in records:
        print('omega={0:g} tf_error={1:.6e} mass_ratio={2:.6f}'.format(record.omega, record.tf_error, record.mass_ratio))
    return 0 if all(r.converged for r in records) else 1


@command_registry.register('lambda0')
def lambda0_command(run: RunConfig) -> int:
    for Omega in run.Omega_list or [run.params.Omega]:
        run.params.with_Omega(Omega).validate(run.grid.dim)
        record = Lambda0Record(
            Omega=Omega,
            lambda0=lambda0(run.params.potential, Omega, run.grid, run.solver),
            closed_form=run.params.potential.closed_form_lambda0(Omega, run.grid.dim)
        )
        if len(run.Omega_list or []) > 1:
            print('Omega={0:g} lambda0={1:.6f}'.format(Omega, record.lambda0))
        else:
            print('lambda0={0:.6f}'.format(record.lambda0))
    return 0


@command_registry.register('info')
def info(run: RunConfig) -> int:
    params, grid = run.params, run.grid
    closed = params.potential.closed_form_lambda0(params.Omega, grid.dim)
    print('rnls {0}'.format(__version__))
    print('grid: dim={0} bounds={1} points={2} device={3}'.format(grid.dim, grid.bounds, grid.points, grid.device))
    print('model: p={0:g} beta={1:g} Omega={2:g} omega={3} potential={4!r}'.format(
        params.p, params.beta, params.Omega, params.omega, params.potential
    ))
    print('Omega_max={0:g}'.format(params.potential.omega_max()))
    print('lambda0={0}'.format('n/a' if closed is None else '{0:.6f}'.format(closed)))
    print('workers={0}'.format(worker_count()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='rnls', description='Ground states of rotating nonlinear Schrodinger equations.')
    parser.add_argument('--version', action='version', version='rnls {0}'.format(__version__))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help='TOML or JSON configuration file')
    common.add_argument('--set', dest='overrides', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help='override one configuration value, repeatable')
    common.add_argument('--lenient', action='store_true', help='ignore unknown configuration keys')
    common.add_argument('--verbose', action='store_true', help='enable debug logging')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True
    for name in EXPERIMENTS:
        subparsers.add_parser(name, parents=[common])
    return parser


def main(argv: Sequence[str] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logger.set_enabled('debug', True)
    try:
        if args.config is not None:
            run = parse_config_file(args.config, args.overrides, args.command, strict=not args.lenient)
        else:
            run = parse_config('', args.overrides, args.command, strict=not args.lenient)
        command = command_registry.get(run.experiment)
        if run.experiment in PRINT_ONLY:
            return command(run)
        with DirectoryLock(run.output_dir):
            set_base_path(run.output_dir)
            return command(run)
    except (ConfigError, ParameterDomainError, OutputLockedError, FieldFileError) as e:
        logger.error(str(e))
        return 2
    except (DivergenceError, InsufficientDataError) as e:
        logger.error(str(e))
        return 1


if __name__ == '__main__':
    sys.exit(main())
