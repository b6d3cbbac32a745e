"""Device-independent randomness certification for two-party binary Bell tests."""

from .certify import (
    CertificationResult,
    CertificationTask,
    ConstraintSet,
    bell_geq,
    correlators_ineq,
    gauss_radau,
    max_bell_value,
    min_entropy,
    rate_report,
    von_neumann_entropy,
)
from .qmodel import (
    BehaviorTable,
    BellExpression,
    CorrelatorSet,
    bell_value,
    classical_bound,
    ideal_correlators,
    make_bell,
    tsirelson_bound,
)
from .sdp import SDPProblem, SolverOptions, solve

__version__ = "0.1.0"
