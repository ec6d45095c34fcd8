"""
Variational functionals of the rotating defocusing NLS: energy, action, Nehari functional,
chemical potential, angular momentum and the stationary residual H(phi).
"""
from dataclasses import dataclass, field as dataclass_field, replace, asdict
from typing import Optional
import math
import torch
from ..grid import Field, Grid, gradient_norm_sq_tensor, lz_tensor
from ..util import InvocationDebug
from ..util.errors import ParameterDomainError
from .potential import Potential, Harmonic, HarmonicLattice, HarmonicQuartic, potential_registry, potential_from_tag


@dataclass(frozen=True)
class ModelParams:
    """Parameters (p, beta, Omega, omega, V) of the action functional.

    ``omega`` is None for fixed-mass problems, where the chemical potential plays its role.
    ``beta = 0`` is accepted for the linear problem.
    """

    p: float = 3.0
    beta: float = 1.0
    Omega: float = 0.0
    omega: Optional[float] = None
    potential: Potential = dataclass_field(default_factory=Harmonic)

    def validate(self, dim: int, module: str = None) -> 'ModelParams':
        if not self.p > 1 or not math.isfinite(self.p):
            raise ParameterDomainError('p={0}'.format(self.p), rule='p > 1', module=module)
        if not self.beta >= 0:
            raise ParameterDomainError('beta={0}, focusing problems are not supported'.format(self.beta), rule='beta > 0', module=module)
        if dim == 1:
            if self.Omega != 0:
                raise ParameterDomainError('Omega={0} in one dimension'.format(self.Omega), rule='Omega = 0 for d=1', module=module)
        else:
            omega_max = self.potential.omega_max()
            if not 0 <= self.Omega < omega_max:
                raise ParameterDomainError(
                    'Omega={0} with {1}, Omega_max={2:g}'.format(self.Omega, self.potential, omega_max),
                    rule='0 <= Omega < Omega_max', module=module
                )
        if self.omega is not None and not math.isfinite(self.omega):
            raise ParameterDomainError('omega={0}'.format(self.omega), rule='omega finite', module=module)
        return self

    def with_omega(self, omega: Optional[float]) -> 'ModelParams':
        return replace(self, omega=None if omega is None else float(omega))

    def with_Omega(self, Omega: float) -> 'ModelParams':
        return replace(self, Omega=float(Omega))

    def with_beta(self, beta: float) -> 'ModelParams':
        return replace(self, beta=float(beta))

    @property
    def nonlinear_ratio(self) -> float:
        """beta (p-1)/(p+1), the factor linking S, K and the L^{p+1} norm."""
        return self.beta * (self.p - 1) / (self.p + 1)


@dataclass
class Diagnostics:
    mass: float = 0.0
    action: float = 0.0
    energy: float = 0.0
    quadratic: float = 0.0
    nehari: float = 0.0
    mu: float = 0.0
    lz_expect: float = 0.0
    x_norm_sq: float = 0.0
    pde_residual_l2: float = 0.0
    # ingredients
    kinetic: float = 0.0
    potential: float = 0.0
    nonlinear: float = 0.0
    rotation: float = 0.0
    omega: float = 0.0

    def to_dict(self):
        return asdict(self)


def nonlinear_density(abs2: torch.Tensor, p: float) -> torch.Tensor:
    """|phi|^{p+1} from |phi|^2, exact zero where phi vanishes."""
    return torch.pow(abs2, 0.5 * (p + 1))


def nonlinear_factor(abs2: torch.Tensor, p: float) -> torch.Tensor:
    """|phi|^{p-1} from |phi|^2."""
    return torch.pow(abs2, 0.5 * (p - 1))


def hamiltonian_tensor(data: torch.Tensor, grid: Grid, V: torch.Tensor, params: ModelParams, omega: float, data_hat=None) -> torch.Tensor:
    """H(phi) = -1/2 Lap phi + V phi + beta |phi|^{p-1} phi - Omega L_z phi + omega phi."""
    if data_hat is None:
        data_hat = grid.fft(data)
    abs2 = data.real ** 2 + data.imag ** 2
    result = -0.5 * grid.ifft(-grid.k_squared * data_hat) + (V + omega) * data
    if params.beta != 0:
        result = result + params.beta * nonlinear_factor(abs2, params.p) * data
    if params.Omega != 0:
        result = result - params.Omega * lz_tensor(data, grid, data_hat)
    return result


def check_compatible(phi: Field, params: ModelParams):
    phi.check_finite()
    params.validate(phi.grid.dim)


@InvocationDebug('physics.eval_potential')
def eval_potential(spec: Potential, grid: Grid) -> Field:
    """Samples of V on the grid (real valued Field)."""
    values = spec.evaluate(grid)
    if bool((values < 0).any()):
        raise ParameterDomainError('{0} takes negative values'.format(spec), rule='V >= 0')
    return Field(grid, values)


def functional_parts(data: torch.Tensor, grid: Grid, V: torch.Tensor, params: ModelParams, data_hat=None, with_lz: bool = True):
    """(mass, ||grad phi||^2, int V|phi|^2, ||phi||_{p+1}^{p+1}, int conj(phi) L_z phi)."""
    if data_hat is None:
        data_hat = grid.fft(data)
    abs2 = data.real ** 2 + data.imag ** 2
    mass = float(grid.integrate(abs2).item())
    grad_sq = float(gradient_norm_sq_tensor(data_hat, grid).item())
    potential = float(grid.integrate(V * abs2).item())
    nonlinear = float(grid.integrate(nonlinear_density(abs2, params.p)).item())
    lz_integral = 0.0
    if grid.dim == 2 and with_lz:
        lz_integral = float(grid.integrate(data.conj() * lz_tensor(data, grid, data_hat)).real.item())
    return mass, grad_sq, potential, nonlinear, lz_integral


def energy_tensor(data: torch.Tensor, grid: Grid, V: torch.Tensor, params: ModelParams, data_hat=None):
    """(E(phi), mass), the cheap evaluation used along a flow."""
    mass, grad_sq, potential, nonlinear, lz_integral = functional_parts(
        data, grid, V, params, data_hat, with_lz=params.Omega != 0
    )
    energy = 0.5 * grad_sq + potential + 2.0 * params.beta / (params.p + 1) * nonlinear - params.Omega * lz_integral
    return energy, mass


def diagnostics_tensor(data: torch.Tensor, grid: Grid, V: torch.Tensor, params: ModelParams) -> Diagnostics:
    data_hat = grid.fft(data)
    mass, grad_sq, potential, nonlinear, lz_integral = functional_parts(data, grid, V, params, data_hat)
    kinetic = 0.5 * grad_sq
    rotation = -params.Omega * lz_integral
    energy = kinetic + potential + 2.0 * params.beta / (params.p + 1) * nonlinear + rotation
    mu = (kinetic + potential + rotation + params.beta * nonlinear) / mass if mass > 0 else 0.0
    omega = params.omega if params.omega is not None else -mu
    quadratic = kinetic + potential + omega * mass + rotation
    residual = hamiltonian_tensor(data, grid, V, params, omega, data_hat)
    residual_l2 = math.sqrt(float(grid.integrate(residual.real ** 2 + residual.imag ** 2).item()))
    return Diagnostics(
        mass=mass,
        action=energy + omega * mass,
        energy=energy,
        quadratic=quadratic,
        nehari=quadratic + params.beta * nonlinear,
        mu=mu,
        lz_expect=lz_integral / mass if mass > 0 else 0.0,
        x_norm_sq=grad_sq + mass + potential,
        pde_residual_l2=residual_l2,
        kinetic=kinetic,
        potential=potential,
        nonlinear=nonlinear,
        rotation=rotation,
        omega=omega
    )


@InvocationDebug('physics.diagnostics')
def diagnostics(phi: Field, params: ModelParams) -> Diagnostics:
    """All functionals at phi. Without omega the fixed-mass convention omega = -mu is used."""
    check_compatible(phi, params)
    return diagnostics_tensor(phi.data, phi.grid, params.potential.evaluate(phi.grid), params)


def action(phi: Field, params: ModelParams) -> float:
    return diagnostics(phi, params).action


def energy(phi: Field, params: ModelParams) -> float:
    return diagnostics(phi, params).energy


@InvocationDebug('physics.action_gradient')
def action_gradient(phi: Field, params: ModelParams) -> Field:
    """2 H(phi), the L^2 gradient of S with respect to (Re phi, Im phi)."""
    check_compatible(phi, params)
    if params.omega is None:
        raise ParameterDomainError('the action gradient needs omega', rule='omega set')
    V = params.potential.evaluate(phi.grid)
    return Field(phi.grid, 2.0 * hamiltonian_tensor(phi.data, phi.grid, V, params, params.omega))


def x_inner(f: Field, g: Field, potential: Potential) -> complex:
    """(f, g)_X = integral of grad f . conj(grad g) + (1 + V) f conj(g)."""
    f.same_grid(g)
    grid = f.grid
    f_hat = grid.fft(f.data)
    g_hat = grid.fft(g.data)
    gradient_part = torch.sum(grid.k_squared * f_hat * g_hat.conj()) * grid.cell_volume / grid.size
    weight = 1.0 + potential.evaluate(grid)
    return complex((gradient_part + grid.integrate(weight * f.data * g.data.conj())).item())


def x_norm(f: Field, potential: Potential) -> float:
    return math.sqrt(max(x_inner(f, f, potential).real, 0.0))


def rotation_bound(phi: Field) -> float:
    """Right side of |int conj(phi) L_z phi| <= int (1/2 |grad phi|^2 + 1/2 |x|^2 |phi|^2)."""
    grid = phi.grid
    data_hat = grid.fft(phi.data)
    return float((0.5 * gradient_norm_sq_tensor(data_hat, grid) + 0.5 * grid.integrate(grid.radius_squared * phi.abs2())).item())


def align_phase(phi: Field) -> Field:
    """Rotate the global phase so that the node of largest modulus is real and positive."""
    flat = phi.data.reshape(-1)
    index = int(torch.argmax(flat.real ** 2 + flat.imag ** 2).item())
    peak = flat[index]
    if float(torch.abs(peak).item()) == 0.0:
        return phi.copy()
    return Field(phi.grid, phi.data * (peak.conj() / torch.abs(peak)), check=False)
