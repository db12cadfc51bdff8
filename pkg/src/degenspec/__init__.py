"""Spectral inequalities and control for degenerate diffusion on (0, 1).

Eigenstructure of u |-> -(x^alpha u')' with alpha in [0, 2), observability
of eigenfunction packets from an interior window, moment-method control,
and heat observability from measurable time sets, all at user-selected
working precision.
"""

__version__ = "1.0.0"

from .numerics import (
    ExponentialSum,
    NotPositiveDefiniteError,
    PrecisionContext,
    PrecisionExhaustedError,
    SymmetricMatrix,
    integrate,
)
from .spectral import (
    EigenPair,
    RegimeError,
    boundary_flux,
    eigensystem,
    eval_eigenfunction,
    eval_eigenfunction_derivative,
    fem_eigensystem,
    regime,
)

__all__ = [
    "ExponentialSum",
    "NotPositiveDefiniteError",
    "PrecisionContext",
    "PrecisionExhaustedError",
    "SymmetricMatrix",
    "integrate",
    "EigenPair",
    "RegimeError",
    "boundary_flux",
    "eigensystem",
    "eval_eigenfunction",
    "eval_eigenfunction_derivative",
    "fem_eigensystem",
    "regime",
    "__version__",
]
