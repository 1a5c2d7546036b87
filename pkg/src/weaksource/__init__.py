"""Typical-set source coding with k-medoid clustering of the atypical set."""
from .clustering import (
    ClusterModel,
    ClusteringError,
    assign,
    cluster_atypical,
    cluster_blocks,
    compute_b_prime,
    hamming_distance,
    largest_cluster_probability,
    zone_homogeneity,
)
from .codec import (
    Codeword,
    CodewordLayout,
    CodecError,
    Exact,
    TypedError,
    decode,
    empirical_error,
    encode,
    make_layout,
)
from .exponents import (
    ExponentReport,
    bprime_extreme_bounds,
    case1_report,
    case2_poe2,
    case2_report,
    chi,
    chi_threshold,
    error_exponent,
)
from .source_model import (
    SourceModel,
    SymbolBlock,
    new_source,
    sample_block,
    sequence_probability,
)
from .typicality import (
    TypicalPartition,
    Zone,
    classify_zone,
    partition_sequences,
    set_probability,
)

__version__ = "0.1.0"
