"""Point vortex dynamics on the flat cylinder C / 2*pi*r*Z."""
from __future__ import annotations

from .cylinder import (
    Configuration, CylPoint, Cylinder, SingularConfigurationError, UnwrapAmbiguityError,
    nfold_copy, pairwise_distances, project, quotient_distance, shape_alignment, shape_distance,
    unwrap_series, unwrap_step, wrap,
)
from .dynamics import (
    IntegratorConfig, Partition, Trajectory, Velocity, center_vector, flow, hamiltonian,
    hamiltonian_complex, induced_velocity_at, integrate, momentum, velocities, velocity,
)
from .equilibria import (
    CyclicOrder, EquilibriumResult, complete3, completing_vorticity, gershgorin_certificate,
    horizontal_completion, is_equilibrium, ring_equilibrium, ring_multistart, stagnation_points,
    vertical_completion,
)
from .reduced import (
    LevelGrid, Split3, Split4, classify_regime, embed3, embed4, eta_re, eta_re_perturbative,
    extract_zeta, level_grid, reduced_h3, reduced_h4, rho_critical, rho_equal, rho_perturbative,
)
from .rpo import (
    RelativePeriodReport, cotan_sum, detect_relative_period, verify_relative_equilibrium,
    vortex_pair_drift, vortex_street_family, winding_angle,
)

__version__ = "0.1.0"
