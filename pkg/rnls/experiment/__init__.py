from .records import (
    Row, SweepRecord, RateFit, JumpReport, LoopReport, ReverseLoopReport, OmegaCriticalReport, CandidateRecord,
    TFRecord, DualValue, Lambda0Record
)
from .vortex import count_vortices, plaquette_winding
from .sweep import sweep_omega, sweep_Omega, run_points, solve_point, monotone_violations
from .rates import fit_rate, threshold_rates, far_rates, omega_gap, transform_registry
from .thomas_fermi import thomas_fermi_profile, thomas_fermi_mass, tf_grid, tf_compare, tf_sweep
from .critical import critical_omega_c, omega_critical_curve
from .equivalence import (
    equivalence_loop, reverse_loop, detect_jumps, refine_jump, scan_records, nonequivalence_scan,
    dsg_domega_check, dual_value, distance_to_linear_mode, modulus_distance, omega_mesh
)
