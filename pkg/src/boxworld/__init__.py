"""Nonlocal-box toolkit.

Boxes as conditional probability tables, a small dense complex-algebra
layer, a linear extension of the extremal binary box to superposed
inputs, and the machinery to quantify exactly how that extension stays
positive and normalized while leaking a signal.
"""

from .boxes import (
    BoxFormatError,
    BoxValidationError,
    ConditionalBox,
    NoSignalingReport,
    Relabeling,
    check_no_signaling,
    chsh_value,
    is_local,
    pr_box,
    relabel,
    uniform_box,
)
from .quantum import (
    DensityOperator,
    Ket,
    Unitary,
    apply,
    basis_ket,
    density_from_mixture,
    helstrom,
    identity,
    measure_probs,
    minus_ket,
    partial_trace,
    plus_ket,
    rotation,
    tensor,
    trace_distance,
)
from .hybrid import (
    BasisKet,
    BranchLimitError,
    CoherentSum,
    ExpressionError,
    HybridState,
    IncoherentSum,
    Scalar,
    Scaled,
    SignalingReport,
    StateExpr,
    SYM_C,
    SYM_S,
    bob_state,
    box_output_state,
    distribute,
    pr_extend,
    signaling_witness,
)
from .protocol import (
    ProtocolResult,
    ZeroSignalError,
    exact_success,
    exact_success_fraction,
    min_rounds,
    simulate,
)
from .audit import AuditReport, audit_dynamics, effective_box

__version__ = "0.1.0"
