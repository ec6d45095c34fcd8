"""
Analysis layer: vortex counting, rate fits, the Thomas-Fermi comparison and the equivalence checks.
"""
import cmath
import math
import pytest
import torch
from types import SimpleNamespace

from rnls.core.solver import SolverConfig, action_ground_state
from rnls.data import InitSpec
from rnls.experiment import equivalence
from rnls.experiment import (
    SweepRecord, count_vortices, critical_omega_c, detect_jumps, distance_to_linear_mode, dsg_domega_check,
    dual_value, equivalence_loop, far_rates, fit_rate, modulus_distance, monotone_violations, omega_gap,
    omega_mesh, refine_jump, reverse_loop, sweep_Omega, sweep_omega, tf_compare, tf_sweep, thomas_fermi_mass,
    thomas_fermi_profile, threshold_rates
)
from rnls.grid import Field, Grid, norm_lq
from rnls.physics import ModelParams
from rnls.physics.potential import Harmonic
from rnls.util.errors import ConfigError, DivergenceError, InsufficientDataError, InvalidFieldError, ParameterDomainError

from conftest import gaussian, unit

FAST = SolverConfig(tau=0.1, init=InitSpec.gaussian(), max_iters=20000)


def record(omega, mass, action, converged=True):
    return SweepRecord(omega=omega, Omega=0.0, mass=mass, action=action, converged=converged)


@pytest.fixture
def offset_grid():
    # no node at the origin
    return Grid.box(2, (-8.1, 7.9), 64)


class TestVortices:

    def test_gaussian_has_none(self, offset_grid):
        assert count_vortices(gaussian(offset_grid)) == (0, [])

    def test_single_vortex(self, offset_grid):
        z = offset_grid.mesh(0) + 1j * offset_grid.mesh(1)
        phi = Field(offset_grid, z * torch.exp(-torch.abs(z) ** 2 / 2))
        count, locations = count_vortices(phi)
        assert count == 1
        x1, x2 = locations[0]
        assert abs(x1) < 0.25 and abs(x2) < 0.25

    def test_vortex_pair(self, offset_grid):
        z = offset_grid.mesh(0) + 1j * offset_grid.mesh(1)
        phi = Field(offset_grid, (z - 1.5) * (z + 1.5) * torch.exp(-torch.abs(z) ** 2 / 2))
        count, locations = count_vortices(phi)
        assert count == 2
        xs = sorted(x1 for x1, _ in locations)
        assert abs(xs[0] + 1.5) < 0.25 and abs(xs[1] - 1.5) < 0.25

    def test_one_dimension_has_none(self, grid_1d):
        assert count_vortices(gaussian(grid_1d)) == (0, [])

    def test_zero_field(self, offset_grid):
        assert count_vortices(Field.zeros(offset_grid)) == (0, [])


class TestRates:

    def far_records(self):
        return [record(-w, 3.0 * w ** 2.5, -w ** 3.5) for w in (10.0, 20.0, 40.0, 80.0, 160.0)]

    def test_far_rates(self):
        mass_fit, action_fit = far_rates(self.far_records())
        assert math.isclose(mass_fit.slope, 2.5, rel_tol=1e-12)
        assert math.isclose(action_fit.slope, 3.5, rel_tol=1e-12)
        assert math.isclose(mass_fit.r_squared, 1.0, rel_tol=1e-12)
        assert math.isclose(mass_fit.intercept, math.log(3.0), rel_tol=1e-10)
        assert mass_fit.window == (10.0, 160.0)
        assert mass_fit.n_points == 5

    def test_threshold_rates(self):
        lam = 0.5
        records = [record(-lam - g, 2.0 * g, -g ** 2) for g in (1e-3, 2e-3, 4e-3, 8e-3)]
        mass_fit, action_fit = threshold_rates(records, lam)
        assert math.isclose(mass_fit.slope, 1.0, rel_tol=1e-9)
        assert math.isclose(action_fit.slope, 2.0, rel_tol=1e-9)
        assert math.isclose(omega_gap(lam)(records[0]), 1e-3, rel_tol=1e-9)

    def test_window_and_failed_records(self):
        records = self.far_records() + [record(-320.0, 1.0, -1.0, converged=False)]
        fit = fit_rate(records, 'abs_omega', 'mass', window=(-45.0, -5.0))
        assert fit.n_points == 3
        assert fit.window == (10.0, 40.0)

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError, match='at least 3 points'):
            fit_rate(self.far_records()[:2], 'abs_omega', 'mass')

    def test_degenerate_abscissa(self):
        records = [record(-2.0, m, -m) for m in (1.0, 2.0, 3.0)]
        with pytest.raises(InsufficientDataError, match='nondegenerate abscissa'):
            fit_rate(records, 'abs_omega', 'mass')

    def test_unknown_transform(self):
        with pytest.raises(ConfigError):
            fit_rate(self.far_records(), 'abs_omega', 'momentum')


class TestThomasFermi:

    def test_profile_mass_one_dimension(self):
        assert math.isclose(thomas_fermi_mass(ModelParams(), 1), 4 * math.sqrt(2) / 3, abs_tol=1e-10)

    def test_profile_mass_two_dimensions(self):
        assert math.isclose(thomas_fermi_mass(ModelParams(), 2), math.pi, abs_tol=1e-4)

    def test_exact_profile_compares_to_zero(self):
        grid = Grid.box(1, (-8.0, 8.0), 2 ** 15)
        params = ModelParams(omega=-20.0)
        x = grid.mesh(0)
        # |omega|^{1/2} (1 - V(x / sqrt|omega|))_+^{1/2}
        phi = Field(grid, torch.sqrt(torch.clamp(20.0 - 0.5 * x ** 2, min=0.0)))
        assert tf_compare(phi, params) < 1e-3

    def test_profile_on_grid(self):
        grid = Grid.box(1, (-3.0, 3.0), 2 ** 12)
        profile = thomas_fermi_profile(ModelParams(), grid)
        x = grid.mesh(0)
        assert torch.allclose(profile.data.real, torch.clamp(1.0 - 0.5 * x ** 2, min=0.0).to(profile.data.real.dtype))
        assert math.isclose(norm_lq(profile) ** 2, thomas_fermi_mass(ModelParams(), 1), rel_tol=1e-3)

    def test_support_outside_box(self):
        grid = Grid.box(1, (-8.0, 8.0), 256)
        with pytest.raises(ParameterDomainError, match='Thomas-Fermi support'):
            tf_compare(gaussian(grid), ModelParams(omega=-40.0))

    def test_needs_negative_omega(self, grid_1d):
        with pytest.raises(ParameterDomainError):
            tf_compare(gaussian(grid_1d), ModelParams())

    def test_sweep_one_dimension(self):
        grid = Grid.box(1, (-16.0, 16.0), 512)
        (item,) = tf_sweep(ModelParams(), [-20.0], grid, SolverConfig(tau=0.1))
        assert item.converged
        assert item.tf_error < 0.2
        assert abs(item.mass_ratio - 1.0) < 0.1


class TestIdentities:

    def test_dual_value_of_parabola(self):
        records = [record(w, 1.0, -0.5 * w ** 2) for w in omega_mesh((-5.0, -1.0), 0.5)]
        value = dual_value(3.0, records)
        assert math.isclose(value.value, 4.5, rel_tol=1e-10)
        assert math.isclose(value.omega_star, -3.0, rel_tol=1e-10)
        assert value.at_boundary is False

    def test_dual_value_at_boundary(self):
        records = [record(w, 1.0, -0.5 * w ** 2) for w in omega_mesh((-5.0, -1.0), 0.5)]
        value = dual_value(10.0, records)
        assert value.at_boundary is True
        assert value.omega_star == -5.0

    def test_dual_value_needs_three_records(self):
        with pytest.raises(InsufficientDataError):
            dual_value(1.0, [record(-2.0, 1.0, -1.0), record(-1.0, 0.5, -0.2)])

    def test_derivative_of_action_is_mass(self):
        records = [record(w, 2.0 * w, w ** 2) for w in (1.0, 1.1, 1.3, 1.6, 2.0)]
        assert dsg_domega_check(records) < 1e-10

    def test_derivative_check_without_data(self):
        with pytest.raises(InsufficientDataError):
            dsg_domega_check([record(-2.0, 1.0, -1.0)])

    def test_detect_jump(self):
        omegas = omega_mesh((-5.0, -4.0), 0.1)
        records = [record(w, 2.0 - 0.1 * w + (1.0 if w < -4.45 else 0.0), 0.0) for w in omegas]
        jumps = detect_jumps(records)
        assert len(jumps) == 1
        a, b = jumps[0]
        assert math.isclose(a.omega, -4.5) and math.isclose(b.omega, -4.4)
        assert detect_jumps(records[:3]) == []

    def test_refine_jump_keeps_bracket_when_a_midpoint_fails(self, monkeypatch, grid_1d):
        calls = []

        def solve_point(params, grid, cfg, keep_field=False):
            calls.append(params.omega)
            if len(calls) == 2:
                raise DivergenceError('NaN in the flow', rule='finite iterates')
            return record(params.omega, 3.0, -1.0), SimpleNamespace(field=None)

        monkeypatch.setattr(equivalence, 'solve_point', solve_point)
        left, right = record(-5.0, 3.0, -2.0), record(-4.0, 1.0, -1.0)
        report = refine_jump(ModelParams(), left, right, grid_1d, FAST, resolution=1e-3)
        assert calls == [-4.5, -4.25]
        assert (report.omega_lo, report.omega_hi) == (-4.5, -4.0)
        assert report.bracket_width == 0.5
        assert report.mass_above == 3.0 and report.mass_below == 1.0

    def test_monotone_violations(self):
        records = [record(-3.0, 3.0, -4.0), record(-2.5, 2.0, -3.0), record(-2.0, 2.5, -2.0), record(-1.5, 1.0, -1.0)]
        assert monotone_violations(records) == [1]
        assert monotone_violations(records, excluded=[1]) == []
        assert monotone_violations(list(reversed(records))) == [1]

    def test_omega_mesh(self):
        mesh = omega_mesh((-4.0, -5.0), 0.01)
        assert len(mesh) == 101
        assert mesh[0] == -5.0 and mesh[-1] == -4.0
        with pytest.raises(ParameterDomainError):
            omega_mesh((-5.0, -4.0), 0.0)

    def test_failed_record(self):
        item = SweepRecord.failed(-2.0, 0.5, ParameterDomainError('omega', rule='omega finite'))
        assert not item.ok
        assert math.isnan(item.mass)
        assert item.init_used == 'error:ParameterDomainError'


class TestDistances:

    def test_distance_to_own_mode(self):
        grid = Grid.box(2, (-8.0, 8.0), 64)
        mode = unit(gaussian(grid))
        assert distance_to_linear_mode(mode, mode, Harmonic()) < 1e-10
        rotated = mode * cmath.exp(1j * math.pi / 3) * 4.0
        assert distance_to_linear_mode(rotated, mode, Harmonic()) < 1e-10

    def test_distance_needs_unit_mode(self, grid_2d):
        with pytest.raises(InvalidFieldError, match='unit mode'):
            distance_to_linear_mode(gaussian(grid_2d), gaussian(grid_2d) * 2.0, Harmonic())

    def test_distance_is_positive_for_other_states(self, grid_2d):
        mode = unit(gaussian(grid_2d))
        other = gaussian(grid_2d, width=0.6)
        assert distance_to_linear_mode(other, mode, Harmonic()) > 1e-2

    def test_modulus_distance_ignores_phase(self, grid_2d, smooth_field):
        phi = smooth_field(grid_2d, seed=9)
        assert modulus_distance(phi, phi * cmath.exp(1j), Harmonic()) < 1e-12
        assert modulus_distance(phi, phi * 2.0, Harmonic()) > 0


class TestSweeps:

    def test_sweep_is_monotone(self, grid_1d):
        records = sweep_omega(ModelParams(), [-3.0, -2.5, -2.0], grid_1d, FAST)
        assert [r.omega for r in records] == [-3.0, -2.5, -2.0]
        assert all(r.ok for r in records)
        assert monotone_violations(records) == []
        assert dsg_domega_check(records) < 5e-2

    def test_single_point_matches_direct_solve(self, grid_1d):
        (item,) = sweep_omega(ModelParams(), [-2.5], grid_1d, FAST)
        direct = action_ground_state(ModelParams(omega=-2.5), grid_1d, FAST)
        assert math.isclose(item.action, direct.diags.action, rel_tol=1e-10)
        assert math.isclose(item.mass, direct.diags.mass, rel_tol=1e-10)

    def test_warm_start_sweep(self, grid_1d):
        records = sweep_omega(ModelParams(), [-3.0, -2.9, -2.8], grid_1d, FAST, warm_start=True, keep_fields=True)
        assert records[0].init_used == 'gaussian(w=1)'
        assert records[1].init_used == 'field'
        assert all(r.field is not None for r in records)

    def test_rotation_sweep_below_vortex_nucleation(self):
        grid = Grid.box(2, (-6.0, 6.0), 32)
        records = sweep_Omega(ModelParams(omega=-3.0), [0.0, 0.3], grid, FAST, multistart=False)
        assert [r.Omega for r in records] == [0.0, 0.3]
        assert all(r.ok and r.n_vortices == 0 for r in records)
        # radial state, L_z phi = 0
        assert abs(records[1].lz_expect) < 1e-3
        assert math.isclose(records[0].action, records[1].action, rel_tol=1e-4)

    def test_point_below_threshold(self, grid_1d):
        with pytest.raises(ParameterDomainError, match='lambda0'):
            sweep_omega(ModelParams(), [-2.0, -0.3], grid_1d, FAST)

    def test_critical_speed_needs_two_dimensions(self, grid_1d):
        with pytest.raises(ParameterDomainError):
            critical_omega_c(-3.0, grid_1d, FAST)


class TestLoops:

    def test_action_energy_loop_one_dimension(self, grid_1d):
        report = equivalence_loop(-3.0, 0.0, grid_1d, FAST)
        assert report.converged
        assert report.e_rel_omega < 1e-6
        assert report.e_rel_S < 1e-6

    def test_reverse_loop_returns(self, grid_1d):
        report = reverse_loop(2.0, ModelParams(), grid_1d, FAST)
        assert report.converged
        assert report.returns
        assert math.isclose(report.omega, -report.mu_g)
