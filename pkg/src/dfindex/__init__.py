"""Numerical toolkit for Diederich-Fornaess and Steinness index bounds.

Third-order jet arithmetic, boundary geometry (tangent frames, Levi
matrices, Schur block-diagonalization), the D'Angelo 1-form and its
quadratic forms on the Levi null space, and closed-form index bound
aggregation with optimization over conformal defining-function families.
"""

from . import dangelo, domains, exprparse, index, jets, levi
from .dangelo import PointCalculus, alpha, dbar_omega, omega_on_null
from .domains import (BoundaryPoint, DomainSpec, annulus_points, ball,
                      boundary_sample, ellipsoid, make_phi, worm_rho)
from .exprparse import parse_expression
from .index import (CriterionSample, IndexReport, RhoFamily, criterion_samples,
                    deformation_sweep, df_bound, optimize_rho, s_bound,
                    spc_check, worm_psi_basis)
from .jets import Jet, wirtinger
from .levi import jacobi_eigh, levi_matrix, schur_frame, tangent_frame

__version__ = "0.1.0"

__all__ = [
    "dangelo", "domains", "exprparse", "index", "jets", "levi",
    "Jet", "wirtinger",
    "DomainSpec", "BoundaryPoint", "worm_rho", "ball", "ellipsoid",
    "make_phi", "boundary_sample", "annulus_points",
    "parse_expression",
    "tangent_frame", "levi_matrix", "schur_frame", "jacobi_eigh",
    "PointCalculus", "alpha", "omega_on_null", "dbar_omega",
    "CriterionSample", "RhoFamily", "IndexReport", "criterion_samples",
    "df_bound", "s_bound", "optimize_rho", "spc_check", "deformation_sweep",
    "worm_psi_basis",
    "__version__",
]
