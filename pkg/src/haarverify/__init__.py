"""haarverify: Haar-wavelet collocation for initial-value ODEs with
computer-assisted existence proofs.

The solver expands the solution's derivative in a truncated Haar basis and
finds the coefficients by Newton iteration on a collocation grid.  The
verifier then proves — using outward-rounded interval arithmetic and a
contraction argument on the full (infinite-dimensional) coefficient space —
that a true solution of the ODE exists within an explicit L2 distance r0
of the numerical one, and is unique in that ball.
"""

__version__ = "1.0.0"

from .interval import Interval, IntervalArray
from .opmat import OpMatrixSet, build_opmats, get_opmats
from .problems import (
    ForcedLogistic,
    Logistic,
    Lorenz,
    NoConvergence,
    SingularJacobian,
    SolveResult,
    newton_solve,
    reconstruct_solution,
)
from .verifier import (
    AllOmegaFailed,
    BoundSet,
    VerificationCertificate,
    compute_bounds,
    find_radius,
    optimize_omega,
    verify,
)
from .estimators import HaarCollocationSolver, RadiiPolynomialVerifier

__all__ = [
    "Interval",
    "IntervalArray",
    "OpMatrixSet",
    "build_opmats",
    "get_opmats",
    "Logistic",
    "ForcedLogistic",
    "Lorenz",
    "NoConvergence",
    "SingularJacobian",
    "SolveResult",
    "newton_solve",
    "reconstruct_solution",
    "BoundSet",
    "VerificationCertificate",
    "AllOmegaFailed",
    "compute_bounds",
    "find_radius",
    "optimize_omega",
    "verify",
    "HaarCollocationSolver",
    "RadiiPolynomialVerifier",
    "__version__",
]
