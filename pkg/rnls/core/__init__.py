from typing import TypeVar
from ..metric import M_SEQ, MetricContainer, default_metrics
from ..callback import C_SEQ, CallbackContainer
from ..util import NOTHING, MethodChaining, InvocationDebug, check_nothing, is_nothing
from ..log import logger
from .context import Context


T = TypeVar('T', bound='Flow')


class Flow(Context):
    """
    Semi-implicit gradient flow on one grid for one set of model parameters. The action flow minimizes
    S without constraint, the energy flow minimizes E on a fixed-mass sphere.
    """

    def __init__(self, grid, params, cfg, callbacks: C_SEQ = None, metrics: M_SEQ = None):
        # init context
        super().__init__()
        self.grid = grid
        self.params = params
        self.cfg = cfg
        self.potential = params.potential.evaluate(grid)
        self.build_callbacks(callbacks)
        self.build_metrics(metrics if metrics is not None else default_metrics())
        # build action and energy process
        self.build_action().build_energy()

    @InvocationDebug('Flow.Action')
    def minimize_action(self, init_provider, tau: float) -> T:
        self.reset(init_provider, tau)
        logger.debug('Action flow on {0} with {1}, tau={2:g}.'.format(self.grid.points, self.params, tau))
        self.run.action(self)
        return self

    @InvocationDebug('Flow.Energy')
    def minimize_energy(self, mass: float, init_provider, tau: float) -> T:
        self.reset(init_provider, tau)
        self.flow.target_mass = float(mass)
        logger.debug('Energy flow on {0} at mass {1:g}, tau={2:g}.'.format(self.grid.points, mass, tau))
        self.run.energy(self)
        return self

    def reset(self, init_provider, tau: float):
        self.flow.initialize()
        self.step.initialize()
        self.inner.initialize()
        self.run.init_provider = init_provider
        self.flow.tau0 = float(tau)
        self.flow.tau = float(tau)

    @InvocationDebug('Flow.ActionBuilder')
    @MethodChaining
    def build_action(self) -> T:
        self.run.action = self.build_process('action')

    @InvocationDebug('Flow.EnergyBuilder')
    @MethodChaining
    def build_energy(self) -> T:
        self.run.energy = self.build_process('energy')

    def build_process(self, status: str):
        # get handler classes from context
        handler = self.handler
        return handler.Container([
            # begin callback
            handler.Begin(),
            # set status to 'action' or 'energy'
            handler.Status(status),
            # restart with a smaller time step on NaN
            handler.Restart([
                # initial iterate
                handler.Initialize(),
                # flow iteration
                handler.Iteration([
                    # step begin callback
                    handler.StepBegin(),
                    # stabilization constant
                    handler.Stabilizer(),
                    # semi-implicit step (and renormalization)
                    handler.Step(),
                    # compute metrics
                    handler.Metrics(),
                    # display in console
                    handler.Display(),
                    # stopping rule
                    handler.Convergence(),
                    # step end callback
                    handler.StepEnd()
                ])
            ]),
            # phase alignment and diagnostics
            handler.Finalize(),
            # end callback
            handler.End()
        ])

    @InvocationDebug('Flow.build_metrics')
    def build_metrics(self, metrics):
        if metrics is not None:
            self.run.metrics = check_nothing(metrics, metrics if isinstance(metrics, MetricContainer) else MetricContainer(metrics))

    @InvocationDebug('Flow.build_callbacks')
    def build_callbacks(self, callbacks):
        if callbacks is not None and is_nothing(callbacks) is False:
            self.run.callbacks = callbacks if isinstance(callbacks, CallbackContainer) else CallbackContainer(callbacks)
        else:
            self.run.callbacks = NOTHING
