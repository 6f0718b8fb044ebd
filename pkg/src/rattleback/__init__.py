"""Rattleback dynamics as a Lie-Poisson system.

The prototypical rattleback system (PRS) couples pitch ``P``, roll ``R`` and
spin ``S`` through ``dP/dt = lam P S``, ``dR/dt = -R S``,
``dS/dt = R**2 - lam P**2``. This package provides its Poisson structures,
coordinate changes, integrators and analysis tools, plus the Bianchi
catalog of three-dimensional Lie-Poisson algebras it belongs to.
"""

from ._validation import DomainError, InsufficientDataError, IntegrationError, ParameterError
from .analysis import (
    DriftReport, ReversalStats, casimir_wandering, conservation_drift, extended_energy_drift,
    leaf_mesh, potential_asymmetry, potential_profile, reversal_stats, sphere_mesh,
)
from .integrate import (
    IntegratorConfig, Trajectory, find_level_crossings, find_zero_crossings,
    integrate_adaptive, integrate_leapfrog_z,
)
from .lie_poisson import (
    BianchiSpec, PoissonStructure, StructureConstants, bianchi_casimir, bianchi_casimir_grad,
    bianchi_poisson_matrix, bianchi_structure, bracket_eval, casimir_annihilation_residual,
    jacobi_residual, matrix_from_structure_constants, structure_constants_for,
)
from .model import (
    casimir_C, dual_field, energy_H, extended_energy, extended_field, grad_C, grad_H,
    hamiltonian_field, linearized_spectrum, poisson_J, poisson_K, potential_min, potential_U,
    prs_field,
)
from .transforms import (
    DarbouxTransformer, SO3Transformer, casimir_in_y, x_to_y, x_to_z, y_to_x, z_to_x,
)

__version__ = "0.1.0"
