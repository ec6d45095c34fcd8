"""
Full-scale reproduction runs. They take minutes to tens of minutes each and run with ``--runslow``.
"""
import math
import numpy as np
import pytest

from rnls.core.solver import SolverConfig, action_ground_state, energy_ground_state, lambda0, linear_ground_mode
from rnls.data import InitSpec
from rnls.experiment import (
    count_vortices, critical_omega_c, detect_jumps, distance_to_linear_mode, dsg_domega_check, dual_value,
    equivalence_loop, far_rates, modulus_distance, monotone_violations, nonequivalence_scan, omega_mesh, sweep_omega,
    tf_sweep, threshold_rates
)
from rnls.grid import Grid
from rnls.physics import ModelParams
from rnls.physics.potential import Harmonic

pytestmark = pytest.mark.slow

CFG = SolverConfig()


def jump_indices(records, jumps):
    ordered = sorted((r for r in records if r.ok), key=lambda r: r.omega)
    pairs = {(a.omega, b.omega) for a, b in jumps}
    return [i for i in range(len(ordered) - 1) if (ordered[i].omega, ordered[i + 1].omega) in pairs]


@pytest.fixture(scope='module')
def monotone_sweeps():
    grid = Grid.box(2, (-12.0, 12.0), 128)
    omegas = omega_mesh((-10.0, -1.2), 0.1)
    return {
        Omega: sweep_omega(ModelParams(Omega=Omega), omegas, grid, CFG, warm_start=True, multistart=Omega > 0)
        for Omega in (0.0, 0.5)
    }


class TestLinearProblem:

    @pytest.mark.parametrize('Omega', [0.0, 0.3, 0.5, 0.9])
    def test_linear_flow_matches_closed_form(self, Omega):
        grid = Grid.box(2, (-12.0, 12.0), 256)
        value, _ = linear_ground_mode(Harmonic(), Omega, grid, CFG)
        assert math.isclose(value, 1.0, abs_tol=1e-6)


class TestIdentities:

    @pytest.mark.parametrize('Omega', [0.0, 0.5])
    @pytest.mark.parametrize('omega', [-2.0, -5.0, -10.0, -20.0, -30.0])
    def test_nehari_and_action_identities(self, Omega, omega):
        grid = Grid.box(2, (-12.0, 12.0), 256)
        params = ModelParams(Omega=Omega, omega=omega)
        result = action_ground_state(params, grid, CFG)
        d = result.diags
        assert result.converged
        assert abs(d.nehari) <= 1e-6 * d.x_norm_sq
        # at a critical point S = -beta (p-1)/(p+1) ||phi||_{p+1}^{p+1}
        assert abs(d.action + params.nonlinear_ratio * d.nonlinear) <= 1e-8 * abs(d.action)


class TestSweeps:

    def test_monotone_without_rotation(self, monotone_sweeps):
        records = monotone_sweeps[0.0]
        assert all(r.ok for r in records)
        assert monotone_violations(records) == []

    def test_monotone_with_rotation_away_from_jumps(self, monotone_sweeps):
        records = monotone_sweeps[0.5]
        excluded = jump_indices(records, detect_jumps(records))
        assert monotone_violations(records, excluded) == []

    def test_action_derivative_is_mass(self, monotone_sweeps):
        assert dsg_domega_check(monotone_sweeps[0.0]) < 1e-2

    def test_vortices_and_angular_momentum_grow_with_frequency(self):
        grid = Grid.box(2, (-12.0, 12.0), 256)
        omegas = [-5.0, -10.0, -15.0, -20.0, -25.0, -30.0]
        records = sweep_omega(ModelParams(Omega=0.5), omegas, grid, CFG, multistart=True)
        assert all(r.ok for r in records)
        counts = [r.n_vortices for r in records]
        lz = [r.lz_expect for r in records]
        assert counts == sorted(counts) and counts[-1] > 0
        assert all(b >= a - 1e-6 * abs(a) for a, b in zip(lz, lz[1:]))

    @pytest.mark.parametrize('Omega', [0.0, 0.5])
    def test_threshold_rates(self, Omega):
        grid = Grid.box(2, (-10.0, 10.0), 128)
        omegas = omega_mesh((-1.3, -1.01), 0.01)
        records = sweep_omega(ModelParams(Omega=Omega), omegas, grid, CFG, warm_start=True)
        lam = lambda0(Harmonic(), Omega, grid, CFG)
        mass_fit, action_fit = threshold_rates(records, lam)
        assert abs(mass_fit.slope - 1.0) < 0.1
        assert abs(action_fit.slope - 2.0) < 0.1

    def test_far_rates(self):
        grid = Grid.box(2, (-16.0, 16.0), 384)
        omegas = omega_mesh((-50.0, -10.0), 5.0)
        cfg = CFG.with_init(InitSpec('thomas_fermi'))
        records = sweep_omega(ModelParams(), omegas, grid, cfg)
        mass_fit, action_fit = far_rates(records)
        assert abs(mass_fit.slope - 2.0) < 0.1
        assert abs(action_fit.slope - 3.0) < 0.1


class TestLimits:

    def test_thomas_fermi_error_decreases(self):
        grid = Grid.box(1, (-16.0, 16.0), 2048)
        records = tf_sweep(ModelParams(), [-20.0, -40.0, -80.0], grid, CFG)
        errors = [r.tf_error for r in records]
        assert all(r.converged for r in records)
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 0.05

    def test_distance_to_linear_mode_vanishes_linearly(self):
        grid = Grid.box(2, (-10.0, 10.0), 128)
        cfg = CFG.with_init(InitSpec.gaussian())
        records = sweep_omega(
            ModelParams(Omega=0.5), omega_mesh((-1.2, -1.01), 0.01), grid, cfg, warm_start=True, keep_fields=True
        )
        lam, mode = linear_ground_mode(Harmonic(), 0.5, grid, CFG)
        usable = [r for r in records if r.ok]
        assert len(usable) >= 15
        gaps = np.log([-r.omega - lam for r in usable])
        distances = np.log([distance_to_linear_mode(r.field, mode, Harmonic()) for r in usable])
        slope = np.polyfit(gaps, distances, 1)[0]
        assert abs(slope - 1.0) <= 0.2

    @pytest.mark.parametrize('Omega', [0.2, 0.5])
    def test_slow_rotation_keeps_static_action(self, Omega):
        grid = Grid.box(2, (-8.0, 8.0), 128)
        static = action_ground_state(ModelParams(omega=-2.0), grid, CFG)
        rotating = action_ground_state(ModelParams(Omega=Omega, omega=-2.0), grid, CFG)
        assert count_vortices(rotating.field)[0] == 0
        assert math.isclose(rotating.diags.action, static.diags.action, rel_tol=1e-6)

    def test_small_rotation_converges_to_static_state(self):
        grid = Grid.box(2, (-8.0, 8.0), 128)
        static = action_ground_state(ModelParams(omega=-2.0), grid, CFG)
        distances = []
        for Omega in (0.4, 0.2, 0.1):
            result = action_ground_state(ModelParams(Omega=Omega, omega=-2.0), grid, CFG)
            assert count_vortices(result.field)[0] == 0
            distances.append(modulus_distance(result.field, static.field, Harmonic()))
        assert distances[0] > distances[1] > distances[2]


class TestEquivalence:

    def test_dual_value_matches_energy_ground_state(self, monotone_sweeps):
        grid = Grid.box(2, (-12.0, 12.0), 128)
        records = monotone_sweeps[0.0]
        for target in (-8.0, -5.0):
            record = min(records, key=lambda r: abs(r.omega - target))
            dual = dual_value(record.mass, records)
            energy = energy_ground_state(record.mass, ModelParams(), grid, CFG).diags.energy
            assert not dual.at_boundary
            assert abs(dual.value - energy) <= 0.005 * abs(energy)

    def test_dual_value_bounded_by_energy_inside_mass_gap(self, monotone_sweeps):
        grid = Grid.box(2, (-12.0, 12.0), 128)
        mass = 57.5
        dual = dual_value(mass, monotone_sweeps[0.5])
        energy = energy_ground_state(mass, ModelParams(Omega=0.5), grid, CFG).diags.energy
        assert dual.value <= energy + 0.005 * abs(energy)

    def test_action_energy_loop(self):
        grid = Grid.box(2, (-14.0, 14.0), 512)
        report = equivalence_loop(-30.0, 0.5, grid, CFG)
        assert report.converged
        assert abs(report.mass - 3517.33) <= 0.005 * 3517.33
        assert abs(report.mu_g - 30.0) <= 0.005 * 30.0
        assert report.e_rel_omega < 1e-6
        assert report.e_rel_S < 1e-8

    @pytest.mark.parametrize('omega, lo, hi', [(-2.0, 0.75, 0.78), (-10.0, 0.28, 0.31), (-50.0, 0.07, 0.11)])
    def test_critical_rotation_speed(self, omega, lo, hi):
        grid = Grid.box(2, (-12.0, 12.0), 256)
        report = critical_omega_c(omega, grid, CFG, bracket_tol=1e-3)
        assert lo < report.lo < report.hi < hi
        assert report.hi - report.lo <= 1e-3

    def test_mass_jump_with_rotation(self):
        grid = Grid.box(2, (-8.0, 8.0), 128)
        reports = nonequivalence_scan(0.5, (-5.0, -4.0), 1e-3, grid, CFG)
        assert len(reports) == 1
        (jump,) = reports
        assert -4.36 < jump.omega_critical < -4.33
        assert abs(jump.mass_below - 55.4535) <= 0.05 * 55.4535
        assert abs(jump.mass_above - 59.6198) <= 0.05 * 59.6198
        assert jump.bracket_width <= 1e-3

    def test_no_jump_without_rotation(self):
        grid = Grid.box(2, (-8.0, 8.0), 128)
        assert nonequivalence_scan(0.0, (-5.0, -4.0), 1e-3, grid, CFG) == []
