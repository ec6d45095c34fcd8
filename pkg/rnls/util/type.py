"""This python file defines common types that are used in the project.
"""
from typing import Sequence, Tuple, Union
import torch


# int or float
NUMBER = Union[int, float]
# int or float. tuple
NUMBER_T = (int, float)
# per-axis box bounds
BOUNDS = Tuple[Tuple[float, float], ...]
# a scalar or a per-axis sequence
AXIS_SPEC = Union[NUMBER, Sequence[NUMBER]]

# double precision throughout
REAL_DTYPE = torch.float64
COMPLEX_DTYPE = torch.complex128
