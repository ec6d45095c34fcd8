"""
Status Pattern for the two flows: the unconstrained action flow and the mass-normalized energy flow.
"""
import math
import torch
from ..module import Registry
from .context import Context

flow_status = Registry('flow_status')


class FlowStatus:

    def __init__(self) -> None:
        pass

    def omega_eff(self, ctx: Context) -> float:
        """The omega entering the explicit part of the step."""
        return 0.0

    def project(self, ctx: Context, data: torch.Tensor) -> torch.Tensor:
        """Post-step projection of the new iterate."""
        return data

    def objective(self, energy: float, mass: float, ctx: Context) -> float:
        """The functional the flow decreases."""
        return energy

    def residual_params(self, ctx: Context):
        """Model parameters whose residual H decides convergence."""
        return ctx.params

    def __str__(self) -> str:
        return 'BASE STATUS'


@flow_status.register('action')
class ActionStatus(FlowStatus):

    def __init__(self) -> None:
        super().__init__()

    def omega_eff(self, ctx: Context) -> float:
        return ctx.params.omega

    def objective(self, energy: float, mass: float, ctx: Context) -> float:
        return energy + ctx.params.omega * mass

    def __str__(self) -> str:
        return 'ACTION'


@flow_status.register('energy')
class EnergyStatus(FlowStatus):

    def __init__(self) -> None:
        super().__init__()

    def project(self, ctx: Context, data: torch.Tensor) -> torch.Tensor:
        grid = ctx.grid
        mass = float(grid.integrate(data.real ** 2 + data.imag ** 2).item())
        if mass == 0.0:
            return data
        return data * math.sqrt(ctx.flow.target_mass / mass)

    def residual_params(self, ctx: Context):
        # omega = -mu at the current iterate
        return ctx.params.with_omega(None)

    def __str__(self) -> str:
        return 'ENERGY'
