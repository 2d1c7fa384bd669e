"""Momentum-conserving frictional contact for explicit finite element dynamics.

Contact between bodies is enforced by routing the velocities of boundary
nodes through a shared quadratic B-spline background grid (PIC or APIC
transfers) and applying the resulting zero-momentum acceleration
corrections inside an explicit Newmark integrator.
"""

from .spline import GridSpec, cell_of, weights_1d, weights_3d, d_tensor
from .transfers import (
    ParticleSet,
    SparseGridField,
    TransferOperator,
    particle_to_grid,
    grid_to_particle,
    apply_H,
    apply_G,
)
from .contact import ContactConfig

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "cell_of",
    "weights_1d",
    "weights_3d",
    "d_tensor",
    "ParticleSet",
    "SparseGridField",
    "TransferOperator",
    "particle_to_grid",
    "grid_to_particle",
    "apply_H",
    "apply_G",
    "ContactConfig",
]
