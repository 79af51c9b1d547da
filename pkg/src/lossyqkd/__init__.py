"""Secret-key preconditions for single-photon QKD over a lossy channel.

Observed correlations are tested for compatibility with a separable state
(two-way post-processing) or with a symmetrically extendible state (one-way,
reverse or direct reconciliation) by semidefinite programs solved with an
embedded primal-dual interior-point method.  Dual solutions yield witness
operators that are evaluable from the observed data alone.
"""

from .channel import (
    ChannelParams,
    CorrelationData,
    apply_channel,
    correlations,
    qber_analytic,
    qber_simulated,
    tomography_data,
)
from .operators import OperatorBasis, expand, assemble, partial_trace, partial_transpose, product_basis
from .protocols import PROTOCOLS, ProtocolSpec, get_protocol
from .scan import ScanConfig, ScanRow, check_point, loss_cutoff, threshold_scan
from .sdp import Decision, SdpProblem, SdpResult, SolverError, Status, check_feasibility, solve
from .verifier import (
    EquivalenceClass,
    ExtensionLayout,
    Mode,
    Outcome,
    VerdictReport,
    Witness,
    build_equivalence_class,
    build_extension_layout,
    check,
    check_protocol,
    one_way_check,
    two_way_check,
    witness_value,
)

__version__ = "0.1.0"
