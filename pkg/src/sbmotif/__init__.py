"""Community recovery in the stochastic block model by motif counting.

The pipeline: build a blow-up cycle motif with fastener edges whose
edge-to-internal-vertex ratio matches the target density exponent,
certify its structural slack condition, count the motif attached at
every vertex pair of a sampled graph (median-of-means over vertex
blocks), threshold, and read communities off the connected components.
"""

__version__ = "0.1.0"

from ._core import USING_COMPILED, backend_name
from .counting import (
    CountRequest,
    CountResult,
    check_variance_ratio_condition,
    count_attached,
    count_blocks,
    expected_count_same,
    variance_bound_rhs,
)
from .estimator import (
    EstimatorConfig,
    PairEstimate,
    RecoveryResult,
    estimate_pair,
    make_blocks,
    median_of_means,
    recover,
)
from .motif import (
    Motif,
    MotifError,
    approximate_exponent,
    build_blowup_motif,
    export_motif,
    fastener_counts,
    import_motif,
    load_motif,
    save_motif,
)
from .sbm import (
    CenteredAdjacency,
    DerivedProbs,
    SbmParams,
    SbmSample,
    membership_value,
    sample,
    sample_conditioned,
)
from .verify import (
    SlackReport,
    certify_exhaustive,
    certify_sampled,
    check_boundary_lemma,
    check_fastener_lemma,
    check_overlap_cap,
    edges_across,
)

__all__ = [name for name in dir() if not name.startswith("_")]
