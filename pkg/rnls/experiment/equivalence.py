"""
Equivalence and non-equivalence of action and energy ground states: the action -> energy loop and its
reverse, mass jumps in omega with their forbidden mass intervals, the derivative and dual identities of
the ground action, and distances used in the convergence checks.
"""
from typing import List, Optional, Sequence, Tuple, Union
import math
import numpy as np
import torch
from ..core.solver import GroundStateResult, SolverConfig, action_ground_state, energy_ground_state
from ..data import InitSpec
from ..grid import Field, Grid, norm_lq
from ..physics import ModelParams, x_inner, x_norm
from ..physics.potential import Potential
from ..util import InvocationDebug
from ..util.errors import InsufficientDataError, InvalidFieldError, ParameterDomainError, RNLSError
from ..log import logger
from .records import DualValue, JumpReport, LoopReport, ReverseLoopReport, SweepRecord
from .sweep import solve_point, sweep_omega

# neighbouring increments on each side that define the local median
JUMP_NEIGHBOURS = 5
# relative mass mismatch below which the reverse loop returns
RETURN_TOL = 1e-4
UNIT_TOL = 1e-8


def _starts(cfg: SolverConfig, grid: Grid, *fields: Field) -> SolverConfig:
    """Warm starts from fields, joined by the default multistart set in two dimensions."""
    warm = [InitSpec.from_field(f) for f in fields if f is not None]
    if grid.dim == 2:
        warm.extend(InitSpec.default_multistart(cfg.init.width).starts)
    if len(warm) == 0:
        return cfg
    if len(warm) == 1:
        return cfg.with_init(warm[0])
    return cfg.with_init(InitSpec.multistart(*warm))


@InvocationDebug('analysis.equivalence_loop')
def equivalence_loop(
    omega: float,
    Omega: float,
    grid: Grid,
    cfg: SolverConfig = None,
    params: ModelParams = None
) -> LoopReport:
    """Action ground state at omega, energy ground state at its mass, and how well mu_g returns -omega."""
    cfg = cfg if cfg is not None else SolverConfig()
    params = (params if params is not None else ModelParams()).with_omega(omega).with_Omega(Omega)
    action_state = action_ground_state(params, grid, cfg)
    mass = action_state.diags.mass
    energy_state = energy_ground_state(mass, params, grid, _starts(cfg, grid, action_state.field))
    S = action_state.diags.action
    E = energy_state.diags.energy
    mu = energy_state.diags.mu
    report = LoopReport(
        omega=omega,
        Omega=Omega,
        mass=mass,
        action=S,
        energy_g=E,
        mu_g=mu,
        e_rel_omega=abs(omega + mu) / abs(omega),
        e_rel_S=abs(S - (E + mass * omega)) / abs(S),
        converged=action_state.converged and energy_state.converged,
        init_used=energy_state.init_label
    )
    logger.info('loop omega={0:g} Omega={1:g}: m={2:.6f} mu_g={3:.6f} e_rel_omega={4:.3e} e_rel_S={5:.3e}'.format(
        omega, Omega, mass, mu, report.e_rel_omega, report.e_rel_S
    ))
    return report


@InvocationDebug('analysis.reverse_loop')
def reverse_loop(mass: float, params: ModelParams, grid: Grid, cfg: SolverConfig = None) -> ReverseLoopReport:
    """Energy ground state at mass, then the action ground state at omega = -mu_g.

    The loop fails to return when mass lies in a forbidden interval.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    energy_state = energy_ground_state(mass, params, grid, _starts(cfg, grid))
    omega = -energy_state.diags.mu
    action_state = action_ground_state(params.with_omega(omega), grid, _starts(cfg, grid, energy_state.field))
    e_rel_mass = abs(action_state.diags.mass - mass) / mass
    return ReverseLoopReport(
        mass=mass,
        Omega=params.Omega,
        energy_g=energy_state.diags.energy,
        mu_g=energy_state.diags.mu,
        omega=omega,
        action_mass=action_state.diags.mass,
        e_rel_mass=e_rel_mass,
        returns=e_rel_mass < RETURN_TOL,
        converged=action_state.converged and energy_state.converged,
        init_used=action_state.init_label
    )


def _usable(records: Sequence[SweepRecord]) -> List[SweepRecord]:
    items = [r for r in records if r.converged and math.isfinite(r.mass) and math.isfinite(r.action)]
    return sorted(items, key=lambda r: r.omega)


@InvocationDebug('analysis.detect_jumps')
def detect_jumps(records: Sequence[SweepRecord], factor: float = 5.0) -> List[Tuple[SweepRecord, SweepRecord]]:
    """Adjacent pairs (in omega) whose mass increment exceeds factor times the median of the
    neighbouring increments."""
    ordered = _usable(records)
    steps = [abs(b.mass - a.mass) for a, b in zip(ordered, ordered[1:])]
    if len(steps) < 3:
        return []
    jumps = []
    for i, step in enumerate(steps):
        lo, hi = max(0, i - JUMP_NEIGHBOURS), min(len(steps), i + JUMP_NEIGHBOURS + 1)
        neighbours = steps[lo:i] + steps[i + 1:hi]
        local = float(np.median(neighbours))
        if step > factor * local:
            jumps.append((ordered[i], ordered[i + 1]))
    return jumps


@InvocationDebug('analysis.refine_jump')
def refine_jump(
    params: ModelParams,
    left: SweepRecord,
    right: SweepRecord,
    grid: Grid,
    cfg: SolverConfig = None,
    resolution: float = 1e-3
) -> JumpReport:
    """Bisect the omega interval between two records across a mass jump down to resolution.

    left has the smaller omega and the larger mass. Each midpoint starts from both bracketing states plus
    the default multistart set and joins the side whose mass it is closer to. A midpoint whose solve raises
    ends the refinement; the report then keeps the wider bracket.
    """
    if not resolution > 0:
        raise ParameterDomainError('resolution={0}'.format(resolution), rule='resolution > 0', module='analysis')
    cfg = cfg if cfg is not None else SolverConfig()
    if left.omega > right.omega:
        left, right = right, left
    lo, hi = left.omega, right.omega
    mass_above, mass_below = left.mass, right.mass
    field_lo, field_hi = left.field, right.field
    while hi - lo > resolution:
        middle = 0.5 * (lo + hi)
        try:
            record, result = solve_point(params.with_omega(middle), grid, _starts(cfg, grid, field_lo, field_hi))
        except RNLSError as e:
            logger.warn('Jump refinement stopped at omega={0:g} with bracket width {1:.3g}: {2}'.format(middle, hi - lo, e))
            break
        if not record.ok:
            logger.warn('Jump refinement at omega={0:g} did not converge.'.format(middle))
        if record.mass > 0.5 * (mass_above + mass_below):
            lo, mass_above, field_lo = middle, record.mass, result.field
        else:
            hi, mass_below, field_hi = middle, record.mass, result.field
    return JumpReport(
        omega_critical=0.5 * (lo + hi),
        omega_lo=lo,
        omega_hi=hi,
        mass_below=mass_below,
        mass_above=mass_above,
        bracket_width=hi - lo,
        Omega=params.Omega
    )


def omega_mesh(omega_range: Tuple[float, float], step: float) -> List[float]:
    """Inclusive mesh from min to max of omega_range."""
    lo, hi = min(omega_range), max(omega_range)
    if not step > 0:
        raise ParameterDomainError('step={0}'.format(step), rule='step > 0', module='analysis')
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + index * step, 12) for index in range(count)]


def scan_records(
    Omega: float,
    omega_range: Tuple[float, float],
    grid: Grid,
    cfg: SolverConfig = None,
    step: float = 0.01,
    params: ModelParams = None
) -> List[SweepRecord]:
    """Fine omega sweep, warm-started and multistarted, with the states kept for refinement."""
    params = (params if params is not None else ModelParams()).with_Omega(Omega)
    return sweep_omega(
        params, omega_mesh(omega_range, step), grid, cfg, warm_start=True, multistart=True, keep_fields=True
    )


@InvocationDebug('analysis.nonequivalence_scan')
def nonequivalence_scan(
    Omega: float,
    omega_range: Tuple[float, float],
    resolution: float,
    grid: Grid,
    cfg: SolverConfig = None,
    step: float = 0.01,
    factor: float = 5.0,
    params: ModelParams = None
) -> List[JumpReport]:
    """Mass jumps of the action ground state over omega_range, each refined to resolution."""
    params = (params if params is not None else ModelParams()).with_Omega(Omega)
    records = scan_records(Omega, omega_range, grid, cfg, step, params)
    return [refine_jump(params, a, b, grid, cfg, resolution) for a, b in detect_jumps(records, factor)]


@InvocationDebug('analysis.dsg_domega_check')
def dsg_domega_check(
    records: Sequence[SweepRecord],
    jumps: Optional[Sequence[Tuple[SweepRecord, SweepRecord]]] = None
) -> float:
    """Largest relative deviation between the central difference dS_g/domega and the mass.

    Triples containing a jump pair are skipped; jumps are detected when not given.
    """
    ordered = _usable(records)
    if jumps is None:
        jumps = detect_jumps(ordered)
    jump_omegas = {(a.omega, b.omega) for a, b in jumps} | {(b.omega, a.omega) for a, b in jumps}
    deviations = []
    for a, b, c in zip(ordered, ordered[1:], ordered[2:]):
        if (a.omega, b.omega) in jump_omegas or (b.omega, c.omega) in jump_omegas:
            continue
        h1, h2 = b.omega - a.omega, c.omega - b.omega
        if h1 <= 0 or h2 <= 0:
            continue
        derivative = (h1 ** 2 * c.action - h2 ** 2 * a.action + (h2 ** 2 - h1 ** 2) * b.action) / (h1 * h2 * (h1 + h2))
        deviations.append(abs(derivative - b.mass) / abs(b.mass))
    if len(deviations) == 0:
        raise InsufficientDataError('no three consecutive usable records away from jumps', rule='at least 3 points', module='analysis')
    return max(deviations)


@InvocationDebug('analysis.dual_value')
def dual_value(mass: float, records: Sequence[SweepRecord]) -> DualValue:
    """sup over the swept omega of S_g(omega) - omega m, refined by a parabola through the best three points."""
    ordered = _usable(records)
    if len(ordered) < 3:
        raise InsufficientDataError('{0} usable records'.format(len(ordered)), rule='at least 3 points', module='analysis')
    omegas = np.array([r.omega for r in ordered])
    values = np.array([r.action for r in ordered]) - omegas * mass
    k = int(np.argmax(values))
    if k == 0 or k == len(ordered) - 1:
        logger.warn('Dual supremum for m={0:g} sits at the sweep boundary omega={1:g}.'.format(mass, omegas[k]))
        return DualValue(mass=mass, value=float(values[k]), omega_star=float(omegas[k]), at_boundary=True)
    a, b, c = np.polyfit(omegas[k - 1:k + 2], values[k - 1:k + 2], 2)
    if a < 0:
        omega_star = -b / (2 * a)
        value = c - b ** 2 / (4 * a)
    else:
        omega_star, value = omegas[k], values[k]
    return DualValue(mass=mass, value=float(value), omega_star=float(omega_star), at_boundary=False)


@InvocationDebug('analysis.distance_to_linear_mode')
def distance_to_linear_mode(
    result: Union[GroundStateResult, Field],
    mode: Field,
    potential: Potential = None
) -> float:
    """min over theta of ||phi / ||phi||_2 - e^{i theta} mode||_X for a unit L2 mode."""
    if isinstance(result, GroundStateResult):
        phi = result.field
        potential = potential if potential is not None else result.params.potential
    else:
        phi = result
    if potential is None:
        raise ParameterDomainError('the X norm needs the potential', rule='potential set', module='analysis')
    mode_norm = norm_lq(mode, 2.0)
    if abs(mode_norm - 1.0) > UNIT_TOL:
        raise InvalidFieldError('||mode||_2 = {0:.12g}'.format(mode_norm), rule='unit mode', module='analysis')
    unit = phi / norm_lq(phi, 2.0)
    overlap = x_inner(unit, mode, potential)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return x_norm(unit - mode * phase, potential)


@InvocationDebug('analysis.modulus_distance')
def modulus_distance(phi: Field, reference: Field, potential: Potential) -> float:
    """|| |phi| - |reference| ||_X."""
    phi.same_grid(reference)
    return x_norm(Field(phi.grid, torch.abs(phi.data) - torch.abs(reference.data)), potential)
