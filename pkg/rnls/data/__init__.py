"""
Initial states of the gradient flows. Each variant is a registered provider building the first iterate
on the flow's grid.
"""
from abc import abstractmethod
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, Optional, Tuple, Union
import torch
from ..core.context import Context
from ..module import Registry
from ..util.errors import ConfigError, GridMismatchError, ParameterDomainError
from ..util.type import COMPLEX_DTYPE
from ..log import logger

init_registry = Registry('init')

VARIANTS = ('auto', 'gaussian', 'vortex', 'thomas_fermi', 'file', 'field', 'multistart')


@dataclass(frozen=True)
class InitSpec:
    """Description of an initial state.

    Attributes
    ----------
    variant : one of 'auto', 'gaussian', 'vortex', 'thomas_fermi', 'file', 'field', 'multistart'.
    width : Gaussian width of the gaussian and vortex ansatz.
    winding : vortex winding number m >= 0.
    amplitude : peak scale of the ansatz.
    noise : relative amplitude of seeded complex noise added on top.
    path : field file of the 'file' variant.
    field : in-memory Field of the 'field' variant (warm starts).
    starts : candidate specs of the 'multistart' variant.
    """

    variant: str = 'auto'
    width: float = 1.0
    winding: int = 0
    amplitude: float = 1.0
    noise: float = 0.0
    path: Optional[str] = None
    field: Any = dataclass_field(default=None, compare=False, repr=False)
    starts: Tuple['InitSpec', ...] = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError('unknown init variant "{0}", expected one of {1}'.format(self.variant, VARIANTS), rule='init variant')
        if not self.width > 0:
            raise ConfigError('width={0}'.format(self.width), rule='init width > 0')
        if not self.amplitude > 0:
            raise ConfigError('amplitude={0}'.format(self.amplitude), rule='init amplitude > 0')
        if int(self.winding) != self.winding or self.winding < 0:
            raise ConfigError('winding={0}'.format(self.winding), rule='init winding integer >= 0')
        if self.noise < 0:
            raise ConfigError('noise={0}'.format(self.noise), rule='init noise >= 0')
        if self.variant == 'file' and not self.path:
            raise ConfigError('file init without a path', rule='init.path set')
        if self.variant == 'field' and self.field is None:
            raise ConfigError('field init without a field', rule='init field set')
        if self.variant == 'multistart' and len(self.starts) == 0:
            raise ConfigError('multistart init without starts', rule='init starts nonempty')

    @classmethod
    def gaussian(cls, width: float = 1.0, amplitude: float = 1.0, noise: float = 0.0) -> 'InitSpec':
        return cls('gaussian', width=width, amplitude=amplitude, noise=noise)

    @classmethod
    def vortex(cls, winding: int = 1, width: float = 1.0, amplitude: float = 1.0) -> 'InitSpec':
        return cls('vortex', width=width, winding=winding, amplitude=amplitude)

    @classmethod
    def from_field(cls, field) -> 'InitSpec':
        return cls('field', field=field)

    @classmethod
    def multistart(cls, *starts: 'InitSpec') -> 'InitSpec':
        return cls('multistart', starts=tuple(starts))

    @classmethod
    def default_multistart(cls, width: float = 1.0) -> 'InitSpec':
        """gaussian, vortex(1), vortex(2) and gaussian with 1% noise."""
        return cls.multistart(
            cls.gaussian(width),
            cls.vortex(1, width),
            cls.vortex(2, width),
            cls.gaussian(width, noise=0.01)
        )

    @classmethod
    def parse(cls, value: Union[str, Dict, 'InitSpec']) -> 'InitSpec':
        """Build from a variant name or a mapping of InitSpec fields ('starts' may nest)."""
        if isinstance(value, InitSpec):
            return value
        if isinstance(value, str):
            return cls(value)
        if isinstance(value, dict):
            item = dict(value)
            known = {'variant', 'width', 'winding', 'amplitude', 'noise', 'path', 'starts'}
            unknown = set(item) - known
            if unknown:
                raise ConfigError('unknown init keys {0}'.format(sorted(unknown)), rule='known init keys')
            if 'starts' in item:
                item['starts'] = tuple(cls.parse(start) for start in item['starts'])
                item.setdefault('variant', 'multistart')
            return cls(**item)
        raise ConfigError('init should be a name or a table, got {0!r}'.format(value), rule='init type')

    def label(self) -> str:
        if self.variant == 'gaussian':
            text = 'gaussian(w={0:g})'.format(self.width)
        elif self.variant == 'vortex':
            text = 'vortex(m={0},w={1:g})'.format(int(self.winding), self.width)
        elif self.variant == 'file':
            text = 'file({0})'.format(self.path)
        elif self.variant == 'multistart':
            text = 'multistart[{0}]'.format('|'.join(start.label() for start in self.starts))
        else:
            text = self.variant
        if self.noise > 0:
            text += '+noise({0:g})'.format(self.noise)
        return text


class InitProvider:

    def __init__(self, spec: InitSpec):
        self.spec = spec

    @abstractmethod
    def get(self, ctx: Context) -> torch.Tensor:
        pass

    def __call__(self, ctx: Context) -> Tuple[torch.Tensor, str]:
        data = self.get(ctx).to(COMPLEX_DTYPE)
        if tuple(data.shape) != ctx.grid.shape:
            raise GridMismatchError(
                'initial state of shape {0} on a grid of shape {1}'.format(tuple(data.shape), ctx.grid.shape),
                rule='same grid'
            )
        if self.spec.noise > 0:
            data = add_noise(data, self.spec.noise, ctx.cfg.seed)
        return data, self.spec.label()


def add_noise(data: torch.Tensor, level: float, seed: int) -> torch.Tensor:
    """data + level * max|data| * (complex standard normal noise), deterministic in seed."""
    generator = torch.Generator(device='cpu')
    generator.manual_seed(int(seed))
    real = torch.randn(data.shape, generator=generator, dtype=torch.float64)
    imag = torch.randn(data.shape, generator=generator, dtype=torch.float64)
    noise = torch.complex(real, imag).to(data.device)
    scale = float(torch.abs(data).max().item())
    return data + level * scale * noise


@init_registry.register('gaussian')
class GaussianInit(InitProvider):

    def get(self, ctx: Context) -> torch.Tensor:
        grid, spec = ctx.grid, self.spec
        return spec.amplitude * torch.exp(-grid.radius_squared / (2 * spec.width ** 2))


@init_registry.register('vortex')
class VortexInit(InitProvider):
    """amplitude ((x_1 + i x_2) / width)^m exp(-|x|^2 / (2 width^2))."""

    def get(self, ctx: Context) -> torch.Tensor:
        grid, spec = ctx.grid, self.spec
        if grid.dim != 2:
            raise ParameterDomainError('vortex initial states need d=2', rule='d = 2', module='solver')
        z = grid.mesh(0) + 1j * grid.mesh(1)
        envelope = torch.exp(-grid.radius_squared / (2 * spec.width ** 2))
        return spec.amplitude * (z / spec.width) ** int(spec.winding) * envelope


@init_registry.register('thomas_fermi')
class ThomasFermiInit(InitProvider):
    """((-omega - V)_+ / beta)^{1/(p-1)}; fixed-mass flows use omega = -2 before renormalization."""

    def get(self, ctx: Context) -> torch.Tensor:
        params = ctx.params
        omega = params.omega if params.omega is not None else -2.0
        beta = params.beta if params.beta > 0 else 1.0
        profile = torch.clamp(-omega - ctx.potential, min=0.0) / beta
        data = torch.pow(profile, 1.0 / (params.p - 1))
        if float(data.max().item()) == 0.0:
            logger.warn('Empty Thomas-Fermi support, falling back to a Gaussian initial state.')
            return GaussianInit(self.spec).get(ctx)
        return data


@init_registry.register('file')
class FileInit(InitProvider):

    def get(self, ctx: Context) -> torch.Tensor:
        from ..io import read_field
        field, _ = read_field(self.spec.path)
        if field.grid != ctx.grid:
            raise GridMismatchError(
                '{0} holds a field on {1}, the flow runs on {2}'.format(self.spec.path, field.grid, ctx.grid),
                rule='same grid'
            )
        return field.data.to(ctx.grid.device)


@init_registry.register('field')
class FieldInit(InitProvider):

    def get(self, ctx: Context) -> torch.Tensor:
        field = self.spec.field
        if field.grid != ctx.grid:
            raise GridMismatchError('warm start on a different grid', rule='same grid')
        return field.data.clone()


def build_provider(spec: InitSpec) -> InitProvider:
    if spec.variant in ('auto', 'multistart'):
        raise ConfigError('"{0}" has to be resolved before the flow starts'.format(spec.variant), rule='single initial state')
    return init_registry.build(spec.variant, spec)

