"""
Uniform periodic tensor grids with FFT-based differential operators and quadrature.

Field samples are stored as torch tensors of shape ``grid.shape``, which is the reversed
per-axis point count, so that x_1 varies fastest in the flat (row-major) layout.
"""
from dataclasses import dataclass, field as dataclass_field
from functools import cached_property
from typing import Callable, Tuple, Union
import math
import torch
from ..util import InvocationDebug
from ..util.errors import GridAxisError, GridMismatchError, InvalidFieldError
from ..util.type import AXIS_SPEC, BOUNDS, COMPLEX_DTYPE, NUMBER_T, REAL_DTYPE


@dataclass(frozen=True)
class Grid:
    """Tensor-product periodic box.

    Attributes
    ----------
    bounds : tuple of (x_min, x_max) per axis.
    points : number of nodes per axis, even and at least 8.
    device : torch device the samples live on.
    """

    bounds: BOUNDS
    points: Tuple[int, ...]
    device: str = dataclass_field(default='cpu', compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'bounds', tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        object.__setattr__(self, 'points', tuple(int(n) for n in self.points))
        if len(self.bounds) != len(self.points) or len(self.points) not in (1, 2):
            raise InvalidFieldError(
                'grid needs one (x_min, x_max) and one point count per axis, got {0} and {1}'.format(self.bounds, self.points),
                rule='dim in {1, 2}'
            )
        for lo, hi in self.bounds:
            if not hi > lo:
                raise InvalidFieldError('empty extent ({0}, {1})'.format(lo, hi), rule='x_max > x_min')
        for n in self.points:
            if n < 8 or n % 2 != 0:
                raise InvalidFieldError('{0} points on an axis'.format(n), rule='n >= 8 and even')

    @classmethod
    def box(cls, dim: int = 2, bounds: AXIS_SPEC = (-12.0, 12.0), points: AXIS_SPEC = 256, device: str = 'cpu') -> 'Grid':
        """Build a grid from a single (x_min, x_max) pair / point count or per-axis sequences."""
        if len(bounds) == 2 and isinstance(bounds[0], NUMBER_T):
            bounds = (tuple(bounds),) * dim
        if isinstance(points, NUMBER_T):
            points = (int(points),) * dim
        return cls(tuple(bounds), tuple(points), device)

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(reversed(self.points))

    @property
    def size(self) -> int:
        return math.prod(self.points)

    @property
    def lengths(self) -> Tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.bounds)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.lengths, self.points))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    def tensor_dim(self, axis: int) -> int:
        """Tensor dimension holding the given spatial axis."""
        if not 0 <= axis < self.dim:
            raise GridAxisError('axis {0} on a {1}-d grid'.format(axis, self.dim), rule='axis < dim')
        return self.dim - 1 - axis

    def _broadcast(self, values: torch.Tensor, axis: int) -> torch.Tensor:
        view = [1] * self.dim
        view[self.tensor_dim(axis)] = -1
        return values.reshape(view)

    def coordinates(self, axis: int) -> torch.Tensor:
        """1-D node coordinates x_min + j*h, j < n, of an axis."""
        lo, _ = self.bounds[axis]
        n = self.points[axis]
        return lo + self.spacing[axis] * torch.arange(n, dtype=REAL_DTYPE, device=self.device)

    def mesh(self, axis: int) -> torch.Tensor:
        """Node coordinates of an axis, broadcastable against ``shape``."""
        return self._broadcast(self.coordinates(axis), axis)

    def wavenumbers(self, axis: int) -> torch.Tensor:
        """Spectral frequencies 2*pi*m/L for signed integer m, in FFT order."""
        n = self.points[axis]
        return 2.0 * math.pi * torch.fft.fftfreq(n, d=self.spacing[axis], dtype=REAL_DTYPE, device=self.device)

    @cached_property
    def k_squared(self) -> torch.Tensor:
        """|k|^2 on the full spectral mesh, Nyquist modes kept."""
        total = torch.zeros(self.shape, dtype=REAL_DTYPE, device=self.device)
        for axis in range(self.dim):
            total = total + self._broadcast(self.wavenumbers(axis), axis) ** 2
        return total

    def derivative_symbol(self, axis: int) -> torch.Tensor:
        """i*k of an axis with the Nyquist coefficient set to zero."""
        k = self.wavenumbers(axis).clone()
        k[self.points[axis] // 2] = 0.0
        return self._broadcast(1j * k.to(COMPLEX_DTYPE), axis)

    @cached_property
    def radius_squared(self) -> torch.Tensor:
        total = torch.zeros(self.shape, dtype=REAL_DTYPE, device=self.device)
        for axis in range(self.dim):
            total = total + self.mesh(axis) ** 2
        return total

    def flat_index(self, *index: int) -> int:
        """Flat position of node (j_1, ...), x_1 fastest."""
        flat, stride = 0, 1
        for j, n in zip(index, self.points):
            flat += j * stride
            stride *= n
        return flat

    def boundary_mask(self) -> torch.Tensor:
        """Nodes on the first or last layer of any axis."""
        mask = torch.zeros(self.shape, dtype=torch.bool, device=self.device)
        for axis in range(self.dim):
            d = self.tensor_dim(axis)
            mask.index_fill_(d, torch.tensor([0, self.points[axis] - 1], device=self.device), True)
        return mask

    def fft(self, data: torch.Tensor) -> torch.Tensor:
        return torch.fft.fftn(data, dim=tuple(range(-self.dim, 0)))

    def ifft(self, data: torch.Tensor) -> torch.Tensor:
        return torch.fft.ifftn(data, dim=tuple(range(-self.dim, 0)))

    def integrate(self, values: torch.Tensor) -> torch.Tensor:
        """Periodic trapezoid rule, exact spectral quadrature."""
        return torch.sum(values) * self.cell_volume


class Field:
    """Complex double precision samples of a function on a grid."""

    def __init__(self, grid: Grid, data: Union[torch.Tensor, 'Field'], check: bool = True):
        if isinstance(data, Field):
            data = data.data
        data = torch.as_tensor(data, device=grid.device)
        if tuple(data.shape) != grid.shape:
            raise InvalidFieldError(
                'sample shape {0} does not match grid shape {1}'.format(tuple(data.shape), grid.shape),
                rule='sample count equals node count'
            )
        self.grid = grid
        self.data = data.to(COMPLEX_DTYPE)
        if check:
            self.check_finite()

    @classmethod
    def zeros(cls, grid: Grid) -> 'Field':
        return cls(grid, torch.zeros(grid.shape, dtype=COMPLEX_DTYPE, device=grid.device))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[..., torch.Tensor]) -> 'Field':
        """Sample func(x_1, ..., x_d) on broadcastable coordinate meshes."""
        values = func(*(grid.mesh(axis) for axis in range(grid.dim)))
        values = torch.as_tensor(values, device=grid.device)
        return cls(grid, values.to(COMPLEX_DTYPE).expand(grid.shape).clone())

    def check_finite(self) -> 'Field':
        if not bool(torch.isfinite(self.data).all()):
            raise InvalidFieldError('field holds NaN or Inf samples', rule='all samples finite')
        return self

    def same_grid(self, other: 'Field'):
        if self.grid != other.grid:
            raise GridMismatchError('fields live on different grids', rule='same grid')

    def abs2(self) -> torch.Tensor:
        return self.data.real ** 2 + self.data.imag ** 2

    def conj(self) -> 'Field':
        return Field(self.grid, self.data.conj(), check=False)

    def copy(self) -> 'Field':
        return Field(self.grid, self.data.clone(), check=False)

    def numpy(self):
        return self.data.detach().cpu().numpy()

    def flat(self) -> torch.Tensor:
        """Samples in flat order, x_1 fastest."""
        return self.data.reshape(-1)

    def _other(self, other):
        if isinstance(other, Field):
            self.same_grid(other)
            return other.data
        return other

    def __add__(self, other):
        return Field(self.grid, self.data + self._other(other), check=False)

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.data - self._other(other), check=False)

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.data, check=False)

    def __mul__(self, other):
        return Field(self.grid, self.data * self._other(other), check=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.data / self._other(other), check=False)

    def __neg__(self):
        return Field(self.grid, -self.data, check=False)

    def __repr__(self) -> str:
        return 'Field(points={0}, bounds={1})'.format(self.grid.points, self.grid.bounds)


# tensor level kernels, shared with the flow handlers

def laplacian_tensor(data: torch.Tensor, grid: Grid) -> torch.Tensor:
    return grid.ifft(-grid.k_squared * grid.fft(data))


def partial_tensor(data: torch.Tensor, grid: Grid, axis: int, data_hat: torch.Tensor = None) -> torch.Tensor:
    if data_hat is None:
        data_hat = grid.fft(data)
    return grid.ifft(grid.derivative_symbol(axis) * data_hat)


def lz_tensor(data: torch.Tensor, grid: Grid, data_hat: torch.Tensor = None) -> torch.Tensor:
    """L_z = i(x_2 d_1 - x_1 d_2); zero in one dimension."""
    if grid.dim == 1:
        return torch.zeros_like(data)
    if data_hat is None:
        data_hat = grid.fft(data)
    d1 = partial_tensor(data, grid, 0, data_hat)
    d2 = partial_tensor(data, grid, 1, data_hat)
    return 1j * (grid.mesh(1) * d1 - grid.mesh(0) * d2)


def gradient_norm_sq_tensor(data_hat: torch.Tensor, grid: Grid) -> torch.Tensor:
    """||grad f||_2^2 from the spectral coefficients (Parseval)."""
    return torch.sum(grid.k_squared * (data_hat.real ** 2 + data_hat.imag ** 2)) * grid.cell_volume / grid.size


# public operations

@InvocationDebug('spectral_grid.apply_laplacian')
def apply_laplacian(f: Field) -> Field:
    """Spectral Laplacian, forward transform times -|k|^2 and inverse transform."""
    f.check_finite()
    return Field(f.grid, laplacian_tensor(f.data, f.grid))


@InvocationDebug('spectral_grid.apply_partial')
def apply_partial(f: Field, axis: int) -> Field:
    """Spectral d/dx_axis; the Nyquist mode is dropped."""
    f.grid.tensor_dim(axis)
    f.check_finite()
    return Field(f.grid, partial_tensor(f.data, f.grid, axis))


@InvocationDebug('spectral_grid.apply_lz')
def apply_lz(f: Field) -> Field:
    f.check_finite()
    return Field(f.grid, lz_tensor(f.data, f.grid))


def inner(f: Field, g: Field) -> complex:
    """Quadrature of conj(g)*f, conjugate-linear in g."""
    f.same_grid(g)
    return complex(f.grid.integrate(g.data.conj() * f.data).item())


def norm_lq(f: Field, q: float = 2.0) -> float:
    if q < 1:
        raise InvalidFieldError('q={0}'.format(q), rule='q >= 1')
    values = torch.abs(f.data) ** q
    return float(f.grid.integrate(values).item()) ** (1.0 / q)


def spectral_norm(f: Field) -> float:
    """L2 norm computed from the spectral coefficients."""
    f_hat = f.grid.fft(f.data)
    total = torch.sum(torch.abs(f_hat) ** 2) * f.grid.cell_volume / f.grid.size
    return float(total.item()) ** 0.5


def boundary_leakage(f: Field) -> float:
    """max |f| on the box boundary relative to max |f| (0 for the zero field)."""
    amplitude = torch.abs(f.data)
    peak = float(amplitude.max().item())
    if peak == 0.0:
        return 0.0
    return float(amplitude[f.grid.boundary_mask()].max().item()) / peak
