"""Whispering-gallery modes of transmission problems on rotationally symmetric domains."""

__version__ = "0.1.0"

from .geometry import (DomainError, DomainSpec, build_annulus, build_disk, build_surface,
                       validate_domain)
from .potential import effective_potential, turning_point, allowed_region
from .agmon import agmon_distance, agmon_profile, eikonal_residual
from .radial_solver import (assemble_operator, build_grid, eigen_window, lowest_eigenpair,
                            shoot_eigenvalue, transmission_residual)
from .quasimode import quasimode_residual, residual_scaling
from .modes import decay_fit, localization, mode_sweep, spectral_saturation, wgm_mode
from .waves import frequency_ratio, time_factor, tunneling_fit, wave_norm

__all__ = [
    "DomainError", "DomainSpec", "build_annulus", "build_disk", "build_surface", "validate_domain",
    "effective_potential", "turning_point", "allowed_region",
    "agmon_distance", "agmon_profile", "eikonal_residual",
    "assemble_operator", "build_grid", "eigen_window", "lowest_eigenpair", "shoot_eigenvalue",
    "transmission_residual", "quasimode_residual", "residual_scaling",
    "decay_fit", "localization", "mode_sweep", "spectral_saturation", "wgm_mode",
    "frequency_ratio", "time_factor", "tunneling_fit", "wave_norm",
]
