"""
Thomas-Fermi limit of action ground states as omega -> -infinity.

With y = sqrt|omega| x the rescaled state |omega|^{-1/(p-1)} phi(sqrt|omega| x) approaches the profile
[(1 - V(x))_+ / beta]^{1/(p-1)} for potentials homogeneous of degree two.
"""
from typing import List, Sequence, Tuple, Union
import math
import numpy as np
import torch
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator
from ..core.solver import GroundStateResult, SolverConfig, action_ground_state
from ..data import InitSpec
from ..grid import Field, Grid
from ..physics import ModelParams
from ..util import InvocationDebug
from ..util.errors import ParameterDomainError
from .records import TFRecord

# the rescaled grid extends this far beyond the profile support
TF_MARGIN = 1.25


def tf_grid(params: ModelParams, dim: int, points: Union[int, Sequence[int]] = 256, device: str = 'cpu') -> Grid:
    """Box [-1.25 R_j, 1.25 R_j] around the support {V < 1}."""
    widths = params.potential.tf_half_widths(dim)
    return Grid.box(dim, tuple((-TF_MARGIN * r, TF_MARGIN * r) for r in widths), points, device)


@InvocationDebug('analysis.thomas_fermi_profile')
def thomas_fermi_profile(params: ModelParams, grid: Grid) -> Field:
    V = params.potential.evaluate(grid)
    data = torch.pow(torch.clamp(1.0 - V, min=0.0) / params.beta, 1.0 / (params.p - 1))
    return Field(grid, data)


@InvocationDebug('analysis.thomas_fermi_mass')
def thomas_fermi_mass(params: ModelParams, dim: int) -> float:
    """||profile||_2^2 by adaptive quadrature over the box containing the support."""
    exponent = 2.0 / (params.p - 1)
    potential = params.potential

    def density(*x):
        return max(1.0 - potential.value(*x), 0.0) ** exponent / params.beta ** exponent

    widths = potential.tf_half_widths(dim)
    if dim == 1:
        value, _ = integrate.quad(density, -widths[0], widths[0], epsabs=1e-13, epsrel=1e-12, limit=200)
        return value
    value, _ = integrate.nquad(
        density, [(-r, r) for r in widths],
        opts={'epsabs': 1e-11, 'epsrel': 1e-10, 'limit': 200}
    )
    return value


def _scale(params: ModelParams) -> Tuple[float, float]:
    if params.omega is None or not params.omega < 0:
        raise ParameterDomainError('omega={0}'.format(params.omega), rule='omega < 0', module='analysis')
    magnitude = abs(params.omega)
    return math.sqrt(magnitude), magnitude ** (-1.0 / (params.p - 1))


def rescale_to_tf(phi: Field, params: ModelParams, target: Grid) -> np.ndarray:
    """|omega|^{-1/(p-1)} |phi(sqrt|omega| x)| sampled on the target grid by cubic interpolation."""
    stretch, amplitude = _scale(params)
    grid = phi.grid
    for axis, r in enumerate(params.potential.tf_half_widths(grid.dim)):
        lo, hi = grid.bounds[axis]
        if not (lo < -stretch * r and stretch * r < hi):
            raise ParameterDomainError(
                'support half width {0:.6g} along x_{1} leaves the box [{2:g}, {3:g}]'.format(stretch * r, axis + 1, lo, hi),
                rule='Thomas-Fermi support inside the box', module='analysis'
            )
    # tensor axes run x_d, ..., x_1
    axes = [grid.coordinates(axis).cpu().numpy() for axis in reversed(range(grid.dim))]
    interpolator = RegularGridInterpolator(
        axes, np.abs(phi.numpy()), method='cubic', bounds_error=False, fill_value=0.0
    )
    query = np.meshgrid(*[stretch * target.coordinates(axis).cpu().numpy() for axis in reversed(range(target.dim))], indexing='ij')
    samples = interpolator(np.stack(query, axis=-1).reshape(-1, target.dim)).reshape(target.shape)
    return amplitude * samples


@InvocationDebug('analysis.tf_compare')
def tf_compare(result: Union[GroundStateResult, Field], params: ModelParams = None) -> float:
    """Relative L2 distance between the rescaled modulus and the Thomas-Fermi profile."""
    if isinstance(result, GroundStateResult):
        phi = result.field
        params = params if params is not None else result.params
    else:
        phi = result
    if params is None:
        raise ParameterDomainError('tf_compare needs the model parameters', rule='params set', module='analysis')
    target = tf_grid(params, phi.grid.dim, phi.grid.points)
    reference = thomas_fermi_profile(params, target).numpy().real
    rescaled = rescale_to_tf(phi, params, target)
    return float(np.linalg.norm(rescaled - reference) / np.linalg.norm(reference))


@InvocationDebug('analysis.tf_sweep')
def tf_sweep(params: ModelParams, omega_list: Sequence[float], grid: Grid, cfg: SolverConfig = None) -> List[TFRecord]:
    """Action ground states at each omega compared against the Thomas-Fermi limit."""
    cfg = cfg if cfg is not None else SolverConfig()
    if cfg.init.variant == 'auto':
        cfg = cfg.with_init(InitSpec('thomas_fermi'))
    tf_mass = thomas_fermi_mass(params, grid.dim)
    records = []
    for omega in omega_list:
        point = params.with_omega(omega)
        result = action_ground_state(point, grid, cfg)
        magnitude = abs(omega)
        scale = magnitude ** (2.0 / (point.p - 1) + 0.5 * grid.dim)
        records.append(TFRecord(
            omega=omega,
            tf_error=tf_compare(result, point),
            mass=result.diags.mass,
            mass_ratio=result.diags.mass / (scale * tf_mass),
            converged=result.converged
        ))
    return records
