"""Curves in pseudo-Galilean 4-space: Frenet apparatus, inextensible flows,
compatibility residuals, and energies and pseudo-angles of the frame fields."""

from .energy import LineSeries, energy_s, energy_t, pseudo_angle_s, pseudo_angle_t
from .errors import (
    DegenerateFit,
    DomainOutOfRange,
    FrenetDegenerate,
    GramDrift,
    GridTooSmall,
    InputError,
    InsufficientHistory,
    LightlikeDegeneracy,
    NormTooLarge,
    NotAdmissible,
    PG4Error,
    StepRejected,
)
from .flow import (
    Const,
    FlowField,
    History,
    PolyS,
    Sinusoid,
    Table,
    evolve,
    extended_coeffs,
    extended_frenet_matrix,
    frame_evolve,
    is_inextensible,
    polyline_arclength,
)
from .frenet import Helix, PolynomialCurve, SampledCurve, frame_at, frenet_apparatus, frenet_matrix, frenet_residuals
from .linalg import CausalCharacter, PGVec4, classify, pg_cross, pg_distance, pg_dot, pg_norm
from .residuals import all_residuals, convergence_study

__version__ = "0.1.0"
