"""Moving-frame toolkit for Legendrian surfaces in complex projective 5-space.

The package splits into an exact layer (rational polynomial maps, structure
equation models, blow-up arcs) and a numeric layer (jet-based adapted frames,
invariant extraction, deformation flows). The exact layer never touches
floating point; the numeric layer reports residuals against tolerances.
"""

from .classify import SurfaceClassReport, classify, psi_deformability_bound
from .coframe import ClosedSystem, closed_system, load_system, mc_residual
from .deform import (
    DeformationState,
    FlowEngine,
    build_delta,
    chi_constraints,
    flow_path_independence,
    psi_flow_derivative,
    reconstruct_deformed,
    universal_integrability_residual,
)
from .errors import LegsurfError, UsageError
from .frames import (
    DerivedInvariants,
    InvariantTuple,
    adapt_frame,
    fundamental_forms,
    invariants_at,
    lagrangian_triple,
)
from .jets import Jet2
from .polynomials import BinaryForm, HomogPoly3
from .rationals import GaussianRational
from .report import VerificationReport, emit_report
from .surfaces import (
    HomogMap6,
    base_points,
    blowup_charts,
    blowup_limit,
    de_moivre,
    is_exactly_legendrian,
    legendrian_residual,
    line_image_check,
    make_flat_family,
    make_trig_family,
    map_from_config,
    relation_residuals,
    trig_vs_birational,
)
from .symplectic import SpFrame, is_lagrangian, symplectic_pairing

__version__ = "1.0.0"

__all__ = [
    "BinaryForm",
    "ClosedSystem",
    "DeformationState",
    "DerivedInvariants",
    "FlowEngine",
    "GaussianRational",
    "HomogMap6",
    "HomogPoly3",
    "InvariantTuple",
    "Jet2",
    "LegsurfError",
    "SpFrame",
    "SurfaceClassReport",
    "UsageError",
    "VerificationReport",
    "adapt_frame",
    "base_points",
    "blowup_charts",
    "blowup_limit",
    "build_delta",
    "chi_constraints",
    "classify",
    "closed_system",
    "de_moivre",
    "emit_report",
    "flow_path_independence",
    "fundamental_forms",
    "invariants_at",
    "is_exactly_legendrian",
    "is_lagrangian",
    "lagrangian_triple",
    "legendrian_residual",
    "line_image_check",
    "load_system",
    "make_flat_family",
    "make_trig_family",
    "map_from_config",
    "mc_residual",
    "psi_deformability_bound",
    "psi_flow_derivative",
    "reconstruct_deformed",
    "relation_residuals",
    "symplectic_pairing",
    "trig_vs_birational",
    "universal_integrability_residual",
]
