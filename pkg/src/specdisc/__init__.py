"""Finite-dimensional toolkit for spectral discontinuity under rank-one perturbations."""
from .errors import (
    AnalysisError,
    InputError,
    NumericalError,
    PreconditionError,
    SingularMatrixError,
    SpecDiscError,
    ValidationError,
)
from .numkernel import LU, eig, monomials, smin, solve
from .perturb import (
    criterion,
    discontinuity_probe,
    find_level_set,
    hole_filling_functional,
    laurent_coeffs,
    level_set_roots,
    perturbation_scan,
    resolvent_scalar,
)
from .socle import (
    IdempotentFamily,
    RankOneOperator,
    commuting_diff_check,
    construct_commuting_witness,
    spectral_rank,
)
from .spectra import (
    GridRegion,
    HoleReport,
    SpectrumSet,
    detect_holes,
    hausdorff,
    polynomial_hull,
    pseudospectrum,
    spectrum,
    spectrum_region,
)
from .zoo import OperatorSpec, build, circle_model

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
