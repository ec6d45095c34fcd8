from abc import abstractmethod
from typing import Sequence, Union
import math
import torch
from ..util import BaseList, InvocationDebug, is_nothing, step_clock
from ..util.errors import DivergenceError, UnboundedActionError
from ..util import terminal as Cursor
from ..util.formatter import progress_format, eta_format, value_format
from ..grid import lz_tensor
from ..physics import diagnostics_tensor, energy_tensor, nonlinear_factor, align_phase
from .context import Context
from ..log import logger

# a flow whose mass passes this bound is treated as unbounded below
MASS_BLOWUP = 1e30
# relative slack for the monotone objective check
MONOTONE_SLACK = 1e-12
# trial steps before a non-decreasing step is accepted anyway
MAX_REJECTIONS = 30


def auto_alpha(abs2: torch.Tensor, V: torch.Tensor, beta: float, p: float, omega_eff: float) -> float:
    """1/2 (max + min) of V + beta |phi|^{p-1} + omega_eff over the nodes, clamped to >= 0."""
    values = V + omega_eff
    if beta != 0:
        values = values + beta * nonlinear_factor(abs2, p)
    return max(0.5 * float((values.max() + values.min()).item()), 0.0)


class Handler:
    """Base class for all handlers.
    """

    def __init__(self):
        super().__init__()

    @abstractmethod
    def handle(self, ctx: Context):
        pass

    def __call__(self, ctx: Context):
        self.handle(ctx)


# handler or sequence of handlers
C_SEQ = Union[Handler, Sequence[Handler]]


class HandlerContainer(Handler, BaseList):

    def __init__(self, handlers: C_SEQ = None):
        super().__init__()
        BaseList.__init__(self, handlers)

    def handle(self, ctx: Context):
        for handler in self:
            handler(ctx)


class RestartHandler(HandlerContainer):
    """Runs the contained flow, restarting from the initial state with half the time step after a NaN."""

    def __init__(self, handlers: C_SEQ = None):
        super().__init__(handlers)

    @InvocationDebug('RestartHandler')
    def handle(self, ctx: Context):
        while True:
            try:
                super().handle(ctx)
                return
            except UnboundedActionError:
                raise
            except DivergenceError:
                if ctx.flow.restarts >= ctx.cfg.max_restarts:
                    raise DivergenceError(
                        'flow still diverges after {0} restarts (tau={1:g}), try a smaller tau'.format(
                            ctx.flow.restarts, ctx.flow.tau
                        ),
                        rule='finite iterates'
                    )
                ctx.flow.restarts += 1
                logger.warn('NaN in the {0} flow at tau={1:g}, restarting with tau={2:g}.'.format(
                    str(ctx.status).lower(), ctx.flow.tau, ctx.flow.tau0 / 2 ** ctx.flow.restarts
                ))


class IterationHandler(HandlerContainer):

    def __init__(self, handlers: C_SEQ = None):
        super().__init__(handlers)

    @InvocationDebug('IterationHandler')
    def handle(self, ctx: Context):
        total = ctx.cfg.max_iters
        for current, now in step_clock(total):
            ctx.step.from_dict({
                'progress': (current, total),
                'time': now,
                'current': current,
                'total': total
            })
            super().handle(ctx)
            if ctx.flow.converged is True:
                break


class StatusHandler(Handler):

    def __init__(self, status: str = 'action'):
        super().__init__()
        from .status import flow_status
        if status not in flow_status:
            logger.warn('An unsupported flow status is set, this may cause some problems.')
        self.status = status

    @InvocationDebug('StatusHandler')
    def handle(self, ctx: Context):
        from .status import flow_status
        ctx.status = flow_status.build(self.status)


class InitializeHandler(Handler):
    """Resets the flow state to the initial iterate, building it on the first call."""

    def __init__(self):
        super().__init__()

    @InvocationDebug('InitializeHandler')
    def handle(self, ctx: Context):
        ctx.ctx_check(['run.init_provider', 'grid', 'params', 'cfg'], silent=False)
        if is_nothing(ctx.flow.phi0):
            data, label = ctx.run.init_provider(ctx)
            ctx.flow.phi0 = ctx.status.project(ctx, data)
            ctx.flow.init_used = label
        flow = ctx.flow
        flow.phi = flow.phi0.clone()
        flow.tau = flow.tau0 / 2 ** flow.restarts
        flow.iters = 0
        flow.converged = False
        energy, mass = energy_tensor(flow.phi, ctx.grid, ctx.potential, ctx.params)
        flow.step_norm_history = []
        flow.objective_history = [ctx.status.objective(energy, mass, ctx)]


class StabilizerHandler(Handler):

    def __init__(self):
        super().__init__()

    def handle(self, ctx: Context):
        mode = ctx.cfg.stabilization
        if mode == 'auto':
            phi = ctx.flow.phi
            ctx.step.alpha = auto_alpha(
                phi.real ** 2 + phi.imag ** 2, ctx.potential, ctx.params.beta, ctx.params.p, ctx.status.omega_eff(ctx)
            )
        else:
            ctx.step.alpha = float(mode)


class SemiImplicitStepHandler(Handler):
    """
    phi^{n+1} = F^{-1}[ F(phi^n + tau g^n) / (1 + tau(|k|^2/2 + alpha)) ] with
    g = alpha phi - (V + omega_eff) phi - beta |phi|^{p-1} phi + Omega L_z phi,
    then the status projection. Steps raising the objective are retried with half the time step.
    """

    def __init__(self):
        super().__init__()

    def handle(self, ctx: Context):
        grid, params, flow, status = ctx.grid, ctx.params, ctx.flow, ctx.status
        phi = flow.phi
        alpha = ctx.step.alpha
        explicit = (alpha - ctx.potential - status.omega_eff(ctx)) * phi
        if params.beta != 0:
            explicit = explicit - params.beta * nonlinear_factor(phi.real ** 2 + phi.imag ** 2, params.p) * phi
        if params.Omega != 0:
            explicit = explicit + params.Omega * lz_tensor(phi, grid)
        previous = flow.objective_history[-1]
        rejected = 0
        while True:
            tau = flow.tau
            new = grid.ifft(grid.fft(phi + tau * explicit) / (1.0 + tau * (0.5 * grid.k_squared + alpha)))
            new = status.project(ctx, new)
            if not bool(torch.isfinite(new).all()):
                raise DivergenceError('non-finite iterate at step {0}'.format(flow.iters + 1), rule='finite iterates')
            energy, mass = energy_tensor(new, grid, ctx.potential, params)
            if mass > MASS_BLOWUP:
                raise UnboundedActionError(
                    'mass {0:.3e} at step {1}: the action is unbounded below'.format(mass, flow.iters + 1),
                    rule='bounded iterates'
                )
            objective = status.objective(energy, mass, ctx)
            if not math.isfinite(objective):
                raise DivergenceError('non-finite objective at step {0}'.format(flow.iters + 1), rule='finite iterates')
            if objective <= previous + MONOTONE_SLACK * (1.0 + abs(previous)):
                break
            if rejected >= MAX_REJECTIONS:
                logger.warn('Accepting a non-monotone step after {0} rejections (tau={1:g}).'.format(rejected, tau))
                break
            rejected += 1
            flow.tau = tau / 2
            logger.debug('Rejected step {0}: objective {1!r} > {2!r}, tau -> {3:g}.'.format(
                flow.iters + 1, objective, previous, flow.tau
            ))
        step_norm = float(torch.max(torch.abs(new - phi)).item()) / tau
        flow.phi = new
        flow.iters += 1
        flow.step_norm_history.append(step_norm)
        flow.objective_history.append(objective)
        ctx.step.from_dict({
            'step_norm': step_norm,
            'objective': objective,
            'mass': mass,
            'rejected': rejected
        })


class MetricsHandler(Handler):

    def __init__(self):
        super().__init__()

    def handle(self, ctx: Context):
        if ctx.ctx_check('run.metrics') is True:
            ctx.step.metrics = ctx.run.metrics(ctx)


class DisplayHandler(Handler):

    def __init__(self):
        super().__init__()

    def handle(self, ctx: Context):
        if ctx.cfg.display is not True:
            return
        current = ctx.step.current
        total = ctx.step.total
        last = ctx.flow.converged is True or current + 1 == total
        if current % max(int(ctx.cfg.display_every), 1) != 0 and last is False:
            return
        metrics = ctx.step.metrics if is_nothing(ctx.step.metrics) is False else {}
        data = ' '.join(value_format(key, value) for key, value in metrics.items())
        colored = Cursor.is_terminal()
        with Cursor.cursor_invisible() if colored else _NoCursor():
            Cursor.refresh_print(
                str(ctx.status),
                progress_format(ctx.step.progress, colored=colored),
                'ETA: {0}'.format(eta_format(ctx.step.time, total - current - 1)),
                data,
                end='\n' if last else ''
            )


class _NoCursor:

    def __enter__(self):
        pass

    def __exit__(self, *_):
        pass


class ConvergenceHandler(Handler):
    """Converged once the step norm is below tol_step and ||H|| <= tol_residual * sqrt(mass)."""

    def __init__(self):
        super().__init__()

    def handle(self, ctx: Context):
        cfg = ctx.cfg
        if ctx.step.step_norm >= cfg.tol_step:
            return
        diags = diagnostics_tensor(ctx.flow.phi, ctx.grid, ctx.potential, ctx.status.residual_params(ctx))
        if diags.pde_residual_l2 <= cfg.tol_residual * math.sqrt(diags.mass):
            ctx.flow.converged = True
        elif ctx.inner['residual_noted'] is not True:
            ctx.inner['residual_noted'] = True
            logger.debug('Step norm below {0:g} but residual {1:.3e} above {2:.3e}, iterating on.'.format(
                cfg.tol_step, diags.pde_residual_l2, cfg.tol_residual * math.sqrt(diags.mass)
            ))


class FinalizeHandler(Handler):

    def __init__(self):
        super().__init__()

    @InvocationDebug('FinalizeHandler')
    def handle(self, ctx: Context):
        from ..grid import Field
        phi = align_phase(Field(ctx.grid, ctx.flow.phi, check=False))
        ctx.flow.phi = phi.data
        ctx.flow.diags = diagnostics_tensor(phi.data, ctx.grid, ctx.potential, ctx.params)
        if ctx.flow.converged is not True:
            logger.warn('{0} flow stopped after {1} iterations without convergence (step norm {2:.3e}).'.format(
                str(ctx.status).lower(), ctx.flow.iters, ctx.flow.step_norm_history[-1] if ctx.flow.step_norm_history else math.nan
            ))


# callback adapters
class BeginHandler(Handler):

    def __init__(self):
        super().__init__()

    @InvocationDebug('BeginHandler')
    def handle(self, ctx: Context):
        if ctx.ctx_check('run.callbacks') is True:
            ctx.run.callbacks.begin(ctx)


class EndHandler(Handler):

    def __init__(self):
        super().__init__()

    @InvocationDebug('EndHandler')
    def handle(self, ctx: Context):
        if ctx.ctx_check('run.callbacks') is True:
            ctx.run.callbacks.end(ctx)


class StepBeginHandler(Handler):

    def __init__(self):
        super().__init__()

    def handle(self, ctx: Context):
        if ctx.ctx_check('run.callbacks') is True:
            ctx.run.callbacks.step_begin(ctx)


class StepEndHandler(Handler):

    def __init__(self):
        super().__init__()

    def handle(self, ctx: Context):
        if ctx.ctx_check('run.callbacks') is True:
            ctx.run.callbacks.step_end(ctx)
