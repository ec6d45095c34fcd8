"""
Parameter sweeps of the action ground state in omega (fixed Omega) or in Omega (fixed omega).
"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence
from ..core.solver import SolverConfig, action_ground_state, lambda0, resolve_init
from ..data import InitSpec
from ..grid import Grid
from ..physics import ModelParams
from ..util import InvocationDebug, worker_count
from ..util.errors import ParameterDomainError, RNLSError
from ..log import logger
from .records import SweepRecord
from .vortex import count_vortices


def solve_point(params: ModelParams, grid: Grid, cfg: SolverConfig, keep_field: bool = False):
    """One action ground state as a record, vortices counted; (record, result)."""
    result = action_ground_state(params, grid, cfg)
    n_v, _ = count_vortices(result.field)
    result.vortex_count = n_v
    return SweepRecord.from_result(params.omega, params.Omega, result, n_v, keep_field), result


def check_points(points: Sequence[ModelParams], grid: Grid, cfg: SolverConfig):
    """Validate every point and require omega < -lambda0(Omega); lambda0 is computed once per Omega."""
    cache = {}
    for point in points:
        point.validate(grid.dim, module='analysis')
        if point.Omega not in cache:
            cache[point.Omega] = lambda0(point.potential, point.Omega, grid, cfg)
        lam = cache[point.Omega]
        if point.omega is None or not point.omega < -lam:
            raise ParameterDomainError(
                'omega={0} with Omega={1}, lambda0={2:.6g}'.format(point.omega, point.Omega, lam),
                rule='omega < -lambda0(Omega)', module='analysis'
            )


def _warm_init(cfg: SolverConfig, params: ModelParams, previous, multistart: bool) -> InitSpec:
    if previous is None:
        base = resolve_init(cfg.init, params)
        return InitSpec.default_multistart() if multistart and base.variant != 'multistart' else base
    warm = InitSpec.from_field(previous.field)
    if not multistart:
        return warm
    return InitSpec.multistart(warm, *InitSpec.default_multistart().starts)


def run_points(
    points: Sequence[ModelParams],
    grid: Grid,
    cfg: SolverConfig,
    warm_start: bool = False,
    multistart: bool = False,
    keep_fields: bool = False
) -> List[SweepRecord]:
    """Solve every point; a failing point gives a NaN record instead of aborting the sweep."""
    def failed(point, error):
        logger.error('Sweep point omega={0:g} Omega={1:g} failed: {2}'.format(point.omega, point.Omega, error))
        return SweepRecord.failed(point.omega, point.Omega, error)

    multistart = multistart and grid.dim == 2
    if warm_start:
        records, previous = [], None
        for point in points:
            point_cfg = cfg.with_init(_warm_init(cfg, point, previous, multistart))
            try:
                record, result = solve_point(point, grid, point_cfg, keep_fields)
                records.append(record)
                previous = result if result.converged else previous
            except RNLSError as e:
                records.append(failed(point, e))
        return records

    def job(point):
        point_cfg = cfg.with_init(_warm_init(cfg, point, None, multistart))
        try:
            return solve_point(point, grid, point_cfg, keep_fields)[0]
        except RNLSError as e:
            return failed(point, e)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(job, points))


@InvocationDebug('analysis.sweep_omega')
def sweep_omega(
    params: ModelParams,
    omega_list: Sequence[float],
    grid: Grid,
    cfg: SolverConfig = None,
    warm_start: bool = False,
    multistart: bool = False,
    keep_fields: bool = False
) -> List[SweepRecord]:
    """Action ground states over omega at the Omega of params, records in omega_list order."""
    cfg = cfg if cfg is not None else SolverConfig()
    points = [params.with_omega(omega) for omega in omega_list]
    check_points(points, grid, cfg)
    return run_points(points, grid, cfg, warm_start, multistart, keep_fields)


@InvocationDebug('analysis.sweep_Omega')
def sweep_Omega(
    params: ModelParams,
    Omega_list: Sequence[float],
    grid: Grid,
    cfg: SolverConfig = None,
    warm_start: bool = False,
    multistart: bool = True,
    keep_fields: bool = False
) -> List[SweepRecord]:
    """Action ground states over Omega at the omega of params."""
    cfg = cfg if cfg is not None else SolverConfig()
    points = [params.with_Omega(Omega) for Omega in Omega_list]
    check_points(points, grid, cfg)
    return run_points(points, grid, cfg, warm_start, multistart, keep_fields)


def monotone_violations(records: Sequence[SweepRecord], excluded: Optional[Sequence[int]] = None) -> List[int]:
    """Indices i (records sorted by omega) where mass fails to decrease or action fails to increase
    from record i to i+1, skipping pairs starting at an excluded index."""
    ordered = sorted((r for r in records if r.ok), key=lambda r: r.omega)
    excluded = set(excluded or ())
    violations = []
    for i in range(len(ordered) - 1):
        if i in excluded:
            continue
        a, b = ordered[i], ordered[i + 1]
        if not (b.mass < a.mass and b.action > a.action):
            violations.append(i)
    return violations
