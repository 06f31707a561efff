"""Twisted sums of modular form coefficients: arithmetic, Voronoi transforms and exponent scans."""

from .arith import dirichlet_approx, kloosterman, mod_inverse
from .estimators import EnvelopeEstimator, ExponentFitter, VoronoiTransformer
from .exceptions import (
    AdmissibilityError,
    CapacityError,
    ConvergenceError,
    FormatError,
    ModTwistError,
    NoInverseError,
    PoleError,
    PremiseError,
    RegimeError,
    UnsupportedWeightError,
)
from .forms import EigenformTable, SymSquareTable, build_eigenform, cached_eigenform, load_table, save_table, sym_square
from .special import BumpWeight, GammaRatio, airy, bump_weight, log_gamma, mellin_psi
from .sums import TwistSpec, exponent_scan, resonance_scan, sun_exponent_scan, twisted_sum
from .voronoi import (
    EnvelopeConstants,
    TransformSpec,
    VoronoiTransform,
    bound_envelope,
    envelope_validation,
    transform,
    voronoi_identity_residual,
)

__version__ = "0.1.0"
