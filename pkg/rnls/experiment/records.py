"""
Rows and reports produced by the experiments. Every type lists its table columns in ``FIELDS`` and
serializes through ``to_row``.
"""
from dataclasses import dataclass, field as dataclass_field
from typing import Any, ClassVar, Dict, List, Optional, Tuple
import math


class Row:

    FIELDS: ClassVar[Tuple[str, ...]] = ()

    def to_row(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in self.FIELDS}


@dataclass
class SweepRecord(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = (
        'omega', 'Omega', 'mass', 'action', 'energy', 'mu', 'lz_expect',
        'n_vortices', 'iters', 'converged', 'residual', 'init_used'
    )

    omega: float
    Omega: float
    mass: float = math.nan
    action: float = math.nan
    energy: float = math.nan
    mu: float = math.nan
    lz_expect: float = math.nan
    n_vortices: int = 0
    iters: int = 0
    converged: bool = False
    residual: float = math.nan
    init_used: str = ''
    # converged state, kept on request for warm starts and comparisons
    field: Any = dataclass_field(default=None, repr=False, compare=False)

    @classmethod
    def from_result(cls, omega: float, Omega: float, result, n_vortices: int, keep_field: bool = False) -> 'SweepRecord':
        diags = result.diags
        return cls(
            omega=omega,
            Omega=Omega,
            mass=diags.mass,
            action=diags.action,
            energy=diags.energy,
            mu=diags.mu,
            lz_expect=diags.lz_expect,
            n_vortices=n_vortices,
            iters=result.iters,
            converged=result.converged,
            residual=diags.pde_residual_l2,
            init_used=result.init_label,
            field=result.field if keep_field else None
        )

    @classmethod
    def failed(cls, omega: float, Omega: float, error: Exception) -> 'SweepRecord':
        return cls(omega=omega, Omega=Omega, init_used='error:{0}'.format(type(error).__name__))

    @property
    def ok(self) -> bool:
        return self.converged and math.isfinite(self.mass) and self.mass > 0


@dataclass
class RateFit(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = ('slope', 'intercept', 'r_squared', 'window_lo', 'window_hi', 'n_points')

    slope: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    n_points: int = 0

    @property
    def window_lo(self) -> float:
        return self.window[0]

    @property
    def window_hi(self) -> float:
        return self.window[1]


@dataclass
class JumpReport(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = (
        'Omega', 'omega_critical', 'omega_lo', 'omega_hi', 'bracket_width',
        'mass_below', 'mass_above', 'forbidden_lo', 'forbidden_hi'
    )

    omega_critical: float
    omega_lo: float
    omega_hi: float
    mass_below: float
    mass_above: float
    bracket_width: float
    Omega: float = 0.0

    @property
    def forbidden_interval(self) -> Tuple[float, float]:
        return (self.mass_below, self.mass_above)

    @property
    def forbidden_lo(self) -> float:
        return self.mass_below

    @property
    def forbidden_hi(self) -> float:
        return self.mass_above


@dataclass
class LoopReport(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = (
        'omega', 'Omega', 'mass', 'action', 'energy_g', 'mu_g', 'e_rel_omega', 'e_rel_S', 'converged', 'init_used'
    )

    omega: float
    Omega: float
    mass: float
    action: float
    energy_g: float
    mu_g: float
    e_rel_omega: float
    e_rel_S: float
    converged: bool
    init_used: str = ''


@dataclass
class ReverseLoopReport(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = (
        'mass', 'Omega', 'energy_g', 'mu_g', 'omega', 'action_mass', 'e_rel_mass', 'returns', 'converged', 'init_used'
    )

    mass: float
    Omega: float
    energy_g: float
    mu_g: float
    omega: float
    action_mass: float
    e_rel_mass: float
    returns: bool
    converged: bool
    init_used: str = ''


@dataclass
class OmegaCriticalReport(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = ('omega', 'lo', 'hi', 'action_lo', 'action_hi', 'ambiguous', 'solves')

    omega: float
    lo: float
    hi: float
    # bracket of the action criterion S_g(Omega) < S_g(0)
    action_lo: float
    action_hi: float
    ambiguous: bool
    solves: int = 0
    # (Omega, n_v, action, vortex side, action side) per bisection point
    history: List[Tuple[float, int, float, bool, bool]] = dataclass_field(default_factory=list, repr=False)

    @property
    def bracket(self) -> Tuple[float, float]:
        return (self.lo, self.hi)


@dataclass
class TFRecord(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = ('omega', 'tf_error', 'mass', 'mass_ratio', 'converged')

    omega: float
    tf_error: float
    mass: float
    # mass / (|omega|^{2/(p-1) + d/2} ||tf profile||^2)
    mass_ratio: float
    converged: bool


@dataclass
class DualValue(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = ('mass', 'value', 'omega_star', 'at_boundary')

    mass: float
    value: float
    omega_star: float
    at_boundary: bool


@dataclass
class Lambda0Record(Row):
    FIELDS: ClassVar[Tuple[str, ...]] = ('Omega', 'lambda0', 'closed_form')

    Omega: float
    lambda0: float
    closed_form: Optional[float] = None


@dataclass
class CandidateRecord(Row):
    """One multistart start of a ground state solve; the min and max masses over the candidates are
    empirical proxies for the extreme ground state masses."""
    FIELDS: ClassVar[Tuple[str, ...]] = ('init_used', 'objective', 'mass', 'converged', 'selected')

    init_used: str
    objective: float
    mass: float
    converged: bool
    selected: bool = False

    @classmethod
    def from_result(cls, result) -> List['CandidateRecord']:
        winner = result.init_label
        return [
            cls(init_used=label, objective=value, mass=mass, converged=converged, selected=label == winner)
            for label, value, mass, converged in result.candidates
        ]
