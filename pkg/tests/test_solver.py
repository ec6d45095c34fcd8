import json
import math
import pytest

from rnls.callback.common import SaveField, SaveHistory
from rnls.core.solver import (
    SolverConfig, action_ground_state, check_existence, energy_ground_state, lambda0, linear_ground_mode,
    resolve_init, stabilizer_alpha
)
from rnls.data import InitSpec
from rnls.grid import Field, Grid, norm_lq
from rnls.io import read_field
from rnls.log.directory import get_field_path, get_history_path
from rnls.physics import ModelParams, energy
from rnls.physics.potential import Harmonic, HarmonicQuartic
from rnls.util.errors import ConfigError, ParameterDomainError, UnboundedActionError

FAST = SolverConfig(tau=0.1, init=InitSpec.gaussian(), max_iters=20000)


@pytest.fixture(scope='module')
def ground_state_1d():
    grid = Grid.box(1, (-8.0, 8.0), 64)
    return action_ground_state(ModelParams(omega=-3.0), grid, FAST)


@pytest.fixture(scope='module')
def energy_state_1d():
    grid = Grid.box(1, (-8.0, 8.0), 64)
    return energy_ground_state(2.0, ModelParams(), grid, FAST)


class TestSolverConfig:

    @pytest.mark.parametrize('kwargs', [
        {'tau': 0.0}, {'tol_step': 0.0}, {'stabilization': 'fast'}, {'stabilization': -1.0}, {'max_iters': -1}
    ])
    def test_rejects_invalid_settings(self, kwargs):
        with pytest.raises(ParameterDomainError):
            SolverConfig(**kwargs)

    def test_default_time_steps(self):
        cfg = SolverConfig()
        assert cfg.tau_for('action') == 0.01
        assert cfg.tau_for('energy') == 0.05
        assert SolverConfig(tau=0.2).tau_for('energy') == 0.2

    def test_init_spec_validation(self):
        with pytest.raises(ConfigError):
            InitSpec('spiral')
        with pytest.raises(ConfigError):
            InitSpec('file')
        assert InitSpec.parse({'starts': ['gaussian', {'variant': 'vortex', 'winding': 2}]}).variant == 'multistart'


class TestInitialization:

    def test_stabilizer_alpha(self, grid_1d):
        zero = Field.zeros(grid_1d)
        params = ModelParams(omega=-3.0)
        # V ranges over [0, 32] on [-8, 8)
        assert math.isclose(stabilizer_alpha(zero, params), 13.0)
        assert math.isclose(stabilizer_alpha(zero, params, flow='energy'), 16.0)
        assert stabilizer_alpha(zero, params, mode=0.7) == 0.7
        assert stabilizer_alpha(zero, ModelParams(omega=-40.0)) == 0.0
        with pytest.raises(ParameterDomainError):
            stabilizer_alpha(zero, ModelParams())

    def test_resolve_auto_init(self):
        rotating = resolve_init(InitSpec(), ModelParams(Omega=0.5, omega=-3.0))
        assert rotating.variant == 'multistart'
        assert [s.label() for s in rotating.starts] == [
            'gaussian(w=1)', 'vortex(m=1,w=1)', 'vortex(m=2,w=1)', 'gaussian(w=1)+noise(0.01)'
        ]
        assert resolve_init(InitSpec(), ModelParams(omega=-3.0)).variant == 'gaussian'
        assert resolve_init(InitSpec(), ModelParams(Omega=0.5)).variant == 'multistart'
        explicit = InitSpec.vortex(2)
        assert resolve_init(explicit, ModelParams(Omega=0.5, omega=-3.0)) is explicit

    def test_existence_check(self, grid_1d):
        with pytest.raises(ParameterDomainError, match='lambda0'):
            check_existence(ModelParams(omega=-0.4), grid_1d, FAST)
        assert check_existence(ModelParams(omega=-0.6), grid_1d, FAST) == 0.5

    def test_action_ground_state_needs_omega(self, grid_1d):
        with pytest.raises(ParameterDomainError):
            action_ground_state(ModelParams(), grid_1d, FAST)

    def test_energy_ground_state_needs_positive_mass(self, grid_1d):
        with pytest.raises(ParameterDomainError):
            energy_ground_state(0.0, ModelParams(), grid_1d, FAST)


class TestActionGroundState:

    def test_converged_critical_point(self, ground_state_1d):
        result = ground_state_1d
        d = result.diags
        assert result.converged
        assert d.mass > 0
        assert abs(d.nehari) <= 1e-6 * d.x_norm_sq
        assert math.isclose(d.action, d.energy + d.omega * d.mass, rel_tol=1e-12)
        assert d.action < 0
        assert result.init_label == 'gaussian(w=1)'

    def test_objective_history_is_non_increasing(self, ground_state_1d):
        history = ground_state_1d.action_history
        assert len(history) == ground_state_1d.iters + 1
        for before, after in zip(history, history[1:]):
            assert after <= before + 1e-12 * (1 + abs(before))

    def test_phase_aligned(self, ground_state_1d):
        flat = ground_state_1d.field.flat()
        assert float(flat.imag.abs().max()) < 1e-8

    def test_energy_ground_state_at_same_mass(self, ground_state_1d, grid_1d):
        mass = ground_state_1d.diags.mass
        result = energy_ground_state(mass, ModelParams(omega=-3.0), grid_1d, FAST)
        assert result.converged
        assert result.params.omega is None
        assert math.isclose(norm_lq(result.field) ** 2, mass, rel_tol=1e-10)
        # one dimensional harmonic problems have no non-equivalence
        assert math.isclose(result.diags.mu, 3.0, rel_tol=1e-6)
        assert math.isclose(result.diags.energy, ground_state_1d.diags.energy, rel_tol=1e-6)

    @pytest.mark.parametrize('seed', range(20))
    def test_energy_ground_state_beats_random_states(self, seed, energy_state_1d, smooth_field):
        params = ModelParams()
        result = energy_state_1d
        trial = smooth_field(result.field.grid, seed=seed)
        trial = trial * (math.sqrt(2.0) / norm_lq(trial))
        assert energy(result.field, params) <= energy(trial, params) + 1e-10 * abs(result.diags.energy)

    def test_unbounded_action(self, grid_1d):
        with pytest.raises(UnboundedActionError):
            action_ground_state(ModelParams(beta=0.0, omega=-1.0), grid_1d, FAST)

    def test_deterministic(self, grid_1d):
        cfg = SolverConfig(tau=0.1, init=InitSpec.gaussian(noise=0.05), seed=3, max_iters=200)
        a = action_ground_state(ModelParams(omega=-3.0), grid_1d, cfg)
        b = action_ground_state(ModelParams(omega=-3.0), grid_1d, cfg)
        assert a.action_history == b.action_history
        assert bool((a.field.data == b.field.data).all())


class TestLinearMode:

    def test_one_dimensional_eigenvalue(self, grid_1d):
        value, mode = linear_ground_mode(Harmonic(), 0.0, grid_1d, FAST)
        assert math.isclose(value, 0.5, abs_tol=1e-6)
        assert math.isclose(norm_lq(mode), 1.0, rel_tol=1e-10)

    def test_anisotropic_eigenvalue(self, grid_2d):
        value, _ = linear_ground_mode(Harmonic(1.0, 2.0), 0.0, grid_2d, FAST)
        assert math.isclose(value, 1.5, abs_tol=1e-6)

    def test_closed_form_shortcut(self, grid_2d):
        assert lambda0(Harmonic(), 0.7, grid_2d) == 1.0

    def test_numerical_fallback(self):
        grid = Grid.box(2, (-4.0, 4.0), 32)
        value = lambda0(HarmonicQuartic(1.0, 1.0), 0.0, grid, FAST)
        assert 0 < value < 2.0


class TestCallbacks:

    def test_save_field_and_history(self, out_dir, grid_1d):
        params = ModelParams(omega=-3.0)
        result = action_ground_state(params, grid_1d, FAST, callbacks=[SaveField('gs'), SaveHistory('gs', save_per=10)])
        field, stored = read_field(get_field_path('gs'))
        assert bool((field.data == result.field.data).all())
        assert stored == params
        with open(get_history_path('gs')) as f:
            history = json.load(f)
        assert history['converged'] is True
        assert history['status'] == 'action'
        assert all(item['iter'] % 10 == 0 for item in history['history'])
        assert 'step_norm' in history['history'][0]

    def test_multistart_run_saves_winning_start(self, out_dir):
        grid = Grid.box(2, (-6.0, 6.0), 32)
        params = ModelParams(Omega=0.5, omega=-3.0)
        cfg = SolverConfig(tau=0.05, max_iters=50)
        result = action_ground_state(params, grid, cfg, callbacks=[SaveField('rotating'), SaveHistory('rotating')])
        assert len(result.candidates) == 4
        field, stored = read_field(get_field_path('rotating'))
        assert bool((field.data == result.field.data).all())
        assert stored == params
        with open(get_history_path('rotating')) as f:
            history = json.load(f)
        assert history['status'] == 'action'
        assert len(history['history']) > 0


ROTATING_STARTS = ['gaussian(w=1)', 'vortex(m=1,w=1)', 'vortex(m=2,w=1)', 'gaussian(w=1)+noise(0.01)']


class TestMultistart:

    @pytest.fixture(scope='class')
    def rotating_grid(self):
        return Grid.box(2, (-6.0, 6.0), 32)

    def test_energy_flow_uses_rotating_starts(self, rotating_grid):
        params = ModelParams(Omega=0.5)
        cfg = SolverConfig(tau=0.05, max_iters=300)
        result = energy_ground_state(20.0, params, rotating_grid, cfg)
        assert [label for label, *_ in result.candidates] == ROTATING_STARTS
        assert result.diags.energy <= min(value for _, value, _, _ in result.candidates)
        single = energy_ground_state(20.0, params, rotating_grid, cfg.with_init(InitSpec.gaussian()))
        assert result.diags.energy <= single.diags.energy + 1e-12 * abs(single.diags.energy)

    def test_mass_range_spans_candidates(self, rotating_grid):
        cfg = SolverConfig(tau=0.05, max_iters=200)
        result = action_ground_state(ModelParams(Omega=0.5, omega=-3.0), rotating_grid, cfg)
        masses = [mass for _, _, mass, _ in result.candidates]
        assert result.mass_range == (min(masses), max(masses))
        low, high = result.mass_range
        assert low <= result.diags.mass <= high

    def test_single_start_mass_range(self, ground_state_1d):
        assert ground_state_1d.candidates == []
        assert ground_state_1d.mass_range == (ground_state_1d.diags.mass, ground_state_1d.diags.mass)
