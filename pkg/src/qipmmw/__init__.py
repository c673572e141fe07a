"""Deciding the acceptance probability of two-message quantum interactive proofs.

Pipeline: build the interactive measurement operator ``Q`` from a verifier,
condition it, run the matrix multiplicative weights test of ``mu(Q) >= gamma``
and emit checkable primal or dual certificates.
"""

from .certificates import (
    DualCertificate,
    PrimalCertificate,
    VerificationReport,
    build_dual,
    build_primal,
    certificate_from_outcome,
    uhlmann_extend,
    verify,
)
from .conditioning import ConditionedInstance, condition, select_bin
from .mmw import Decision, SolverOutcome, SolverParams, derive_params, practical_params, solve
from .oracle import OracleResult, reference_mu
from .quantum import (
    ChoiMatrix,
    InteractiveMeasurement,
    MeasurementOperator,
    PureState,
    VerifierInstance,
    build_q,
    phi,
    phi_star,
)

__version__ = "0.1.0"
