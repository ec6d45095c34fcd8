"""
Ground state solvers: action ground states by the unconstrained flow, energy ground states by the
normalized flow, and the linear ground mode lambda_0(Omega) by the normalized flow with beta = 0.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Callable, List, Optional, Tuple, Union
import math
from . import Flow
from .handler import auto_alpha
from ..data import InitSpec, build_provider
from ..grid import Field, Grid
from ..physics import Diagnostics, ModelParams
from ..physics.potential import Potential
from ..util import InvocationDebug, worker_count
from ..util.errors import DivergenceError, ParameterDomainError, UnboundedActionError
from ..log import logger

DEFAULT_TAU = {'action': 0.01, 'energy': 0.05}


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the semi-implicit flows.

    ``tau`` None picks 0.01 for the action flow and 0.05 for the energy flow. ``stabilization`` is
    'auto' or a fixed alpha.
    """

    tau: Optional[float] = None
    stabilization: Union[str, float] = 'auto'
    tol_step: float = 1e-10
    tol_residual: float = 1e-8
    max_iters: int = 100000
    init: InitSpec = dataclass_field(default_factory=InitSpec)
    seed: int = 0
    max_restarts: int = 6
    display: bool = False
    display_every: int = 100

    def __post_init__(self):
        if self.tau is not None and not self.tau > 0:
            raise ParameterDomainError('tau={0}'.format(self.tau), rule='tau > 0', module='solver')
        if not self.tol_step > 0 or not self.tol_residual > 0:
            raise ParameterDomainError(
                'tol_step={0}, tol_residual={1}'.format(self.tol_step, self.tol_residual),
                rule='tolerances > 0', module='solver'
            )
        if self.stabilization != 'auto':
            try:
                alpha = float(self.stabilization)
            except (TypeError, ValueError):
                raise ParameterDomainError(
                    'stabilization={0!r}'.format(self.stabilization), rule='"auto" or a number', module='solver'
                )
            if not alpha >= 0:
                raise ParameterDomainError('alpha={0}'.format(alpha), rule='alpha >= 0', module='solver')
        if self.max_iters < 0 or self.max_restarts < 0:
            raise ParameterDomainError('negative iteration or restart limit', rule='limits >= 0', module='solver')

    def tau_for(self, kind: str) -> float:
        return self.tau if self.tau is not None else DEFAULT_TAU[kind]

    def with_init(self, init: InitSpec) -> 'SolverConfig':
        return replace(self, init=init)


@dataclass
class GroundStateResult:
    field: Field
    diags: Diagnostics
    iters: int
    converged: bool
    step_norm_history: List[float]
    # flow objective per iterate: S for action flows, E for energy flows
    action_history: List[float]
    init_used: InitSpec
    params: ModelParams = None
    vortex_count: Optional[int] = None
    tau_used: float = math.nan
    restarts: int = 0
    # (label, objective, mass, converged) of every multistart candidate
    candidates: List[Tuple[str, float, float, bool]] = dataclass_field(default_factory=list)

    @property
    def init_label(self) -> str:
        return self.init_used.label()

    @property
    def mass_range(self) -> Tuple[float, float]:
        """Smallest and largest candidate mass, empirical proxies for the extreme ground state masses."""
        masses = [item[2] for item in self.candidates] or [self.diags.mass]
        return min(masses), max(masses)


@InvocationDebug('solver.stabilizer_alpha')
def stabilizer_alpha(phi: Field, params: ModelParams, mode: Union[str, float] = 'auto', flow: str = 'action') -> float:
    """alpha = 1/2 (max + min) of V + beta |phi|^{p-1} + omega_eff, clamped to >= 0, or the fixed alpha."""
    if mode != 'auto':
        return float(mode)
    omega_eff = 0.0
    if flow == 'action':
        if params.omega is None:
            raise ParameterDomainError('the action flow needs omega', rule='omega set', module='solver')
        omega_eff = params.omega
    V = params.potential.evaluate(phi.grid)
    return auto_alpha(phi.abs2(), V, params.beta, params.p, omega_eff)


def resolve_init(init: InitSpec, params: ModelParams) -> InitSpec:
    """Resolve 'auto': the default multistart for rotating problems, a Gaussian otherwise."""
    if init.variant != 'auto':
        return init
    if params.Omega > 0:
        return InitSpec.default_multistart(init.width)
    return InitSpec.gaussian(init.width, init.amplitude, init.noise)


def _run_single(kind: str, params: ModelParams, grid: Grid, cfg: SolverConfig, spec: InitSpec, mass: float = None, callbacks=None) -> GroundStateResult:
    flow = Flow(grid, params, cfg, callbacks=callbacks)
    tau = cfg.tau_for(kind)
    if kind == 'action':
        flow.minimize_action(build_provider(spec), tau)
    else:
        flow.minimize_energy(mass, build_provider(spec), tau)
    state = flow.flow
    return GroundStateResult(
        field=Field(grid, state.phi),
        diags=state.diags,
        iters=state.iters,
        converged=bool(state.converged),
        step_norm_history=list(state.step_norm_history),
        action_history=list(state.objective_history),
        init_used=spec,
        params=params,
        tau_used=state.tau,
        restarts=state.restarts
    )


def _run(kind: str, params: ModelParams, grid: Grid, cfg: SolverConfig, mass: float = None, callbacks=None) -> GroundStateResult:
    init = resolve_init(cfg.init, params)
    if init.variant != 'multistart':
        return _run_single(kind, params, grid, cfg, init, mass, callbacks)

    objective: Callable[[GroundStateResult], float] = (
        (lambda r: r.diags.action) if kind == 'action' else (lambda r: r.diags.energy)
    )

    def job(spec: InitSpec):
        try:
            return _run_single(kind, params, grid, cfg, spec, mass)
        except UnboundedActionError:
            raise
        except DivergenceError as e:
            logger.warn('Start {0} diverged: {1}'.format(spec.label(), e))
            return e

    starts = init.starts
    with ThreadPoolExecutor(max_workers=max(1, min(worker_count(), len(starts)))) as pool:
        outcomes = list(pool.map(job, starts))
    results = [(index, r) for index, r in enumerate(outcomes) if isinstance(r, GroundStateResult)]
    if len(results) == 0:
        raise outcomes[0]
    # smallest objective, first start on ties
    _, best = min(results, key=lambda item: (objective(item[1]), item[0]))
    best.candidates = [(r.init_label, objective(r), r.diags.mass, r.converged) for _, r in results]
    for label, value, candidate_mass, converged in best.candidates:
        logger.debug('multistart candidate {0}: objective={1!r} mass={2!r} converged={3}'.format(
            label, value, candidate_mass, converged
        ))
    if callbacks is not None:
        # callbacks see one run only: the winning start, replayed
        candidates = best.candidates
        best = _run_single(kind, params, grid, cfg, best.init_used, mass, callbacks)
        best.candidates = candidates
    return best


def check_existence(params: ModelParams, grid: Grid, cfg: SolverConfig) -> float:
    """Raise unless omega < -lambda_0(Omega); returns lambda_0."""
    lam = lambda0(params.potential, params.Omega, grid, cfg)
    if not params.omega < -lam:
        raise ParameterDomainError(
            'omega={0:g} >= -lambda0(Omega={1:g}) = {2:.6f}, the flow would collapse to zero'.format(params.omega, params.Omega, -lam),
            rule='omega < -lambda0(Omega)', module='solver'
        )
    return lam


@InvocationDebug('solver.action_ground_state')
def action_ground_state(params: ModelParams, grid: Grid, cfg: SolverConfig = None, callbacks=None) -> GroundStateResult:
    """Global minimizer of S_{Omega,omega}; the lowest action over all starts for multistart inits."""
    cfg = cfg if cfg is not None else SolverConfig()
    if params.omega is None:
        raise ParameterDomainError('action ground states need omega', rule='omega set', module='solver')
    params.validate(grid.dim, module='solver')
    check_existence(params, grid, cfg)
    return _run('action', params, grid, cfg, callbacks=callbacks)


@InvocationDebug('solver.energy_ground_state')
def energy_ground_state(mass: float, params: ModelParams, grid: Grid, cfg: SolverConfig = None, callbacks=None) -> GroundStateResult:
    """Minimizer of E on {||phi||^2 = mass}; diagnostics use omega = -mu."""
    cfg = cfg if cfg is not None else SolverConfig()
    if not mass > 0 or not math.isfinite(mass):
        raise ParameterDomainError('mass={0}'.format(mass), rule='m > 0', module='solver')
    params = params.with_omega(None)
    params.validate(grid.dim, module='solver')
    return _run('energy', params, grid, cfg, mass=mass, callbacks=callbacks)


@InvocationDebug('solver.linear_ground_mode')
def linear_ground_mode(potential: Potential, Omega: float, grid: Grid, cfg: SolverConfig = None) -> Tuple[float, Field]:
    """Smallest eigenvalue of R = -1/2 Laplacian + V - Omega L_z and its unit mode."""
    cfg = cfg if cfg is not None else SolverConfig()
    if cfg.init.variant in ('auto', 'multistart'):
        cfg = cfg.with_init(InitSpec.gaussian())
    params = ModelParams(beta=0.0, Omega=Omega, potential=potential)
    result = energy_ground_state(1.0, params, grid, cfg)
    if not result.converged:
        logger.warn('Linear ground mode not converged, lambda0 may be inaccurate.')
    return result.diags.energy, result.field


def lambda0(potential: Potential, Omega: float, grid: Grid, cfg: SolverConfig = None) -> float:
    """lambda_0(Omega) from the closed form when known, by the linear flow otherwise."""
    value = potential.closed_form_lambda0(Omega, grid.dim)
    if value is not None:
        return value
    return linear_ground_mode(potential, Omega, grid, cfg)[0]
