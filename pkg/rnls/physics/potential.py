"""
Confining external potentials. Each potential is a registered component so that configuration
files and field files can refer to it by name or by its numeric tag.
"""
from typing import Optional, Tuple
import math
import torch
from ..module import Registry
from ..util.errors import ParameterDomainError
from ..util.type import REAL_DTYPE

potential_registry = Registry('potential')


class Potential:
    """Base class of external potentials V(x) >= 0."""

    # numeric tag written to field files
    tag: int = -1
    name: str = 'potential'
    coefficient_names: Tuple[str, ...] = ()

    def __init__(self, *coefficients: float):
        if len(coefficients) != len(self.coefficient_names):
            raise ParameterDomainError(
                '{0} takes coefficients {1}, got {2}'.format(self.name, self.coefficient_names, coefficients),
                rule='coefficient count'
            )
        self.coefficients = tuple(float(c) for c in coefficients)
        for key, value in zip(self.coefficient_names, self.coefficients):
            if not value > 0 or not math.isfinite(value):
                raise ParameterDomainError('{0}={1}'.format(key, value), rule='{0} > 0'.format(key))

    def evaluate(self, grid) -> torch.Tensor:
        """Real samples of V on the grid nodes."""
        raise NotImplementedError

    def value(self, *x: float) -> float:
        """V at a single point, for quadrature."""
        raise NotImplementedError

    def omega_max(self) -> float:
        """Largest admissible rotation speed in two dimensions."""
        raise NotImplementedError

    def closed_form_lambda0(self, Omega: float, dim: int) -> Optional[float]:
        """Smallest eigenvalue of -1/2 Laplacian + V - Omega L_z when known in closed form."""
        return None

    def tf_half_widths(self, dim: int) -> Tuple[float, ...]:
        """Per-axis half widths of a box containing {V < 1}."""
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash((self.name, self.coefficients))

    def __repr__(self) -> str:
        args = ', '.join('{0}={1:g}'.format(k, v) for k, v in zip(self.coefficient_names, self.coefficients))
        return '{0}({1})'.format(self.name, args)


def _harmonic_part(grid, gamma) -> torch.Tensor:
    total = torch.zeros(grid.shape, dtype=REAL_DTYPE, device=grid.device)
    for axis in range(grid.dim):
        total = total + 0.5 * gamma[axis] ** 2 * grid.mesh(axis) ** 2
    return total


@potential_registry.register('harmonic')
class Harmonic(Potential):
    """V(x) = 1/2 (gamma_1^2 x_1^2 + gamma_2^2 x_2^2); only gamma_1 is used in one dimension."""

    tag = 0
    name = 'harmonic'
    coefficient_names = ('gamma1', 'gamma2')

    def __init__(self, gamma1: float = 1.0, gamma2: float = 1.0):
        super().__init__(gamma1, gamma2)

    def evaluate(self, grid) -> torch.Tensor:
        return _harmonic_part(grid, self.coefficients)

    def value(self, *x: float) -> float:
        return sum(0.5 * g ** 2 * xj ** 2 for g, xj in zip(self.coefficients, x))

    def omega_max(self) -> float:
        return min(self.coefficients)

    def closed_form_lambda0(self, Omega: float, dim: int) -> Optional[float]:
        gamma1, gamma2 = self.coefficients
        if dim == 1:
            return 0.5 * gamma1
        if Omega == 0:
            return 0.5 * (gamma1 + gamma2)
        if gamma1 == gamma2 and Omega < gamma1:
            return gamma1
        return None

    def tf_half_widths(self, dim: int) -> Tuple[float, ...]:
        return tuple(math.sqrt(2.0) / g for g in self.coefficients[:dim])


@potential_registry.register('harmonic_lattice')
class HarmonicLattice(Potential):
    """V(x) = sum_j 1/2 gamma_j^2 x_j^2 + kappa sin^2(pi x_j / 2)."""

    tag = 1
    name = 'harmonic_lattice'
    coefficient_names = ('gamma1', 'gamma2', 'kappa')

    def __init__(self, gamma1: float = 1.0, gamma2: float = 1.0, kappa: float = 1.0):
        super().__init__(gamma1, gamma2, kappa)

    def evaluate(self, grid) -> torch.Tensor:
        kappa = self.coefficients[2]
        total = _harmonic_part(grid, self.coefficients[:2])
        for axis in range(grid.dim):
            total = total + kappa * torch.sin(0.5 * math.pi * grid.mesh(axis)) ** 2
        return total

    def value(self, *x: float) -> float:
        kappa = self.coefficients[2]
        return sum(0.5 * g ** 2 * xj ** 2 + kappa * math.sin(0.5 * math.pi * xj) ** 2 for g, xj in zip(self.coefficients[:2], x))

    def omega_max(self) -> float:
        # the lattice term is bounded and does not add confinement
        return min(self.coefficients[:2])

    def tf_half_widths(self, dim: int) -> Tuple[float, ...]:
        return tuple(math.sqrt(2.0) / g for g in self.coefficients[:dim])


@potential_registry.register('harmonic_quartic')
class HarmonicQuartic(Potential):
    """V(x) = c_1/4 (|x|^2 - c_2)^2."""

    tag = 2
    name = 'harmonic_quartic'
    coefficient_names = ('c1', 'c2')

    def __init__(self, c1: float = 1.0, c2: float = 1.0):
        super().__init__(c1, c2)

    def evaluate(self, grid) -> torch.Tensor:
        c1, c2 = self.coefficients
        return 0.25 * c1 * (grid.radius_squared - c2) ** 2

    def value(self, *x: float) -> float:
        c1, c2 = self.coefficients
        return 0.25 * c1 * (sum(xj ** 2 for xj in x) - c2) ** 2

    def omega_max(self) -> float:
        return math.inf

    def tf_half_widths(self, dim: int) -> Tuple[float, ...]:
        c1, c2 = self.coefficients
        radius = math.sqrt(c2 + 2.0 / math.sqrt(c1))
        return (radius,) * dim


def potential_from_tag(tag: int, coefficients) -> Potential:
    for name in potential_registry.names():
        cls = potential_registry.get(name)
        if cls.tag == tag:
            return cls(*coefficients)
    raise ParameterDomainError('unknown potential tag {0}'.format(tag), rule='tag in {0, 1, 2}')


def coefficient_count(tag: int) -> int:
    for name in potential_registry.names():
        cls = potential_registry.get(name)
        if cls.tag == tag:
            return len(cls.coefficient_names)
    raise ParameterDomainError('unknown potential tag {0}'.format(tag), rule='tag in {0, 1, 2}')
