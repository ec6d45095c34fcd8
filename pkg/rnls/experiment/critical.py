"""
Critical rotation speed Omega^c(omega): the smallest Omega at which the action ground state carries a vortex.
"""
from typing import List, Sequence
from ..core.solver import SolverConfig, action_ground_state
from ..data import InitSpec
from ..grid import Grid
from ..physics import ModelParams
from ..util import InvocationDebug
from ..util.errors import ParameterDomainError
from ..log import logger
from .records import OmegaCriticalReport
from .vortex import count_vortices

# relative action drop that counts as "below the non-rotating action"
ACTION_DROP = 1e-8
# the bisection searches (0, HI_FRACTION * Omega_max)
HI_FRACTION = 0.95


def _multistart(cfg: SolverConfig) -> SolverConfig:
    if cfg.init.variant == 'multistart':
        return cfg
    return cfg.with_init(InitSpec.default_multistart(cfg.init.width))


@InvocationDebug('analysis.critical_omega_c')
def critical_omega_c(
    omega: float,
    grid: Grid,
    cfg: SolverConfig = None,
    bracket_tol: float = 1e-3,
    params: ModelParams = None
) -> OmegaCriticalReport:
    """Bisect Omega on vortex presence of the multistart action ground state.

    Every bisection point is also classified by S_g(Omega, omega) < S_g(0, omega) - 1e-8 |S_g(0, omega)|; the report
    keeps both brackets and is flagged ambiguous when the two criteria disagree on any point.
    """
    if grid.dim != 2:
        raise ParameterDomainError('dim={0}'.format(grid.dim), rule='rotation needs d=2', module='analysis')
    if not bracket_tol > 0:
        raise ParameterDomainError('bracket_tol={0}'.format(bracket_tol), rule='bracket_tol > 0', module='analysis')
    cfg = _multistart(cfg if cfg is not None else SolverConfig())
    params = (params if params is not None else ModelParams()).with_omega(omega).with_Omega(0.0)
    reference = action_ground_state(params, grid, cfg).diags.action
    threshold = reference - ACTION_DROP * abs(reference)

    history = []

    def classify(Omega: float):
        result = action_ground_state(params.with_Omega(Omega), grid, cfg)
        n_v, _ = count_vortices(result.field)
        vortex_side = n_v >= 1
        action_side = result.diags.action < threshold
        history.append((Omega, n_v, result.diags.action, vortex_side, action_side))
        logger.debug('Omega={0:.6f}: n_v={1}, S={2:.10g}'.format(Omega, n_v, result.diags.action))
        return vortex_side, action_side

    lo, hi = 0.0, HI_FRACTION * params.potential.omega_max()
    action_lo, action_hi = lo, hi
    top_vortex, top_action = classify(hi)
    if not top_vortex:
        logger.warn('No vortex up to Omega={0:g} at omega={1:g}.'.format(hi, omega))
    while hi - lo > bracket_tol:
        middle = 0.5 * (lo + hi)
        vortex_side, action_side = classify(middle)
        if vortex_side:
            hi = middle
        else:
            lo = middle
        # the action bracket follows its own criterion inside the current action bracket
        if action_lo < middle < action_hi:
            if action_side:
                action_hi = middle
            else:
                action_lo = middle
    ambiguous = any(v != a for _, _, _, v, a in history) or not top_vortex
    if ambiguous:
        logger.warn('Vortex and action criteria disagree near Omega^c for omega={0:g}.'.format(omega))
    return OmegaCriticalReport(
        omega=omega,
        lo=lo,
        hi=hi,
        action_lo=action_lo,
        action_hi=action_hi,
        ambiguous=ambiguous,
        solves=len(history),
        history=history
    )


@InvocationDebug('analysis.omega_critical_curve')
def omega_critical_curve(
    omega_list: Sequence[float],
    grid: Grid,
    cfg: SolverConfig = None,
    bracket_tol: float = 1e-3,
    params: ModelParams = None
) -> List[OmegaCriticalReport]:
    return [critical_omega_c(omega, grid, cfg, bracket_tol, params) for omega in omega_list]
