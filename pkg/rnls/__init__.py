from . import util
from .core import Flow
from .core.context import Context
from .grid import Grid, Field
from .physics import ModelParams, Diagnostics
from .core.solver import SolverConfig, GroundStateResult, action_ground_state, energy_ground_state, linear_ground_mode, lambda0


__version__ = '0.1.0'
