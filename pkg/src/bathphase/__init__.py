"""Geometric phase of a spin-1/2 nucleus in a thermal or squeezed-thermal bath."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DensityMatrix,
    DomainError,
    InitialState,
    LindbladCoefficients,
    PhysicalParams,
    coefficients,
    initial_density,
    occupation_number,
    squeezed_coefficients,
    thermal_coefficients,
    validate_density,
)
from .evolution import (  # noqa: E402
    Trajectory,
    analytic_trajectory,
    evolve_squeezed_analytic,
    evolve_thermal_analytic,
    integrate_numeric,
    lindblad_rhs,
    solve_offdiagonal,
    steady_state,
    to_schrodinger,
)
from .geophase import (  # noqa: E402
    eigen_2x2,
    phase_at_infinity,
    phase_series,
    thermal_exponent_analytic,
    tong_phase,
    tong_series,
)
from .sweep import SweepSpec, check_monotonicity, figure_preset, run_preset, run_sweep  # noqa: E402
