"""Sparse support coding: codec, link simulator, and closed-form analysis.

A payload integer selects K of N spreading columns; the receiver identifies
the selected support from noisy, faded observations.  The package provides
the exact rank/unrank codec, codebook families, the channel and combining
chain, greedy/multipath/exhaustive support decoders, closed-form bounds, and
a deterministic Monte Carlo harness with a CLI.
"""

from .analysis import (
    bler_upper_bound,
    chi2_cdf,
    chi2_inv_cdf,
    crossing_snr_db,
    latency_distribution,
    pdcch_code_rate,
    success_lower_bound,
    success_lower_bound_approx,
    svc_code_rate,
)
from .channel import (
    NOISE_VAR,
    ChannelModel,
    InterferenceSpec,
    ReceivedPacket,
    apply_channel,
    derotate,
    mrc_combine,
)
from .codebook import (
    Codebook,
    bernoulli_mu_bound,
    effective_mu_star,
    gen_bernoulli,
    gen_gaussian,
    gen_sorm,
    max_correlation,
)
from .codec import (
    MAX_PAYLOAD_BITS,
    ModulationScheme,
    RankOutOfRangeError,
    SparseSymbolVector,
    Support,
    assign_values,
    bits_capacity,
    encode,
    map_bits_to_support,
    support_bit_pattern,
    unmap_support_to_bits,
)
from .decoder import (
    DecodeOutcome,
    DecodeStatus,
    DecoderParams,
    EffectiveSensingMatrix,
    MlResult,
    MmpResult,
    OmpResult,
    RejectReason,
    compute_p_k,
    decode,
    false_alarm_check,
    ml_decode,
    mmp_decode,
    omp_decode,
)
from .harness import (
    CSV_FIELDS,
    BlerRecord,
    ChannelSpec,
    CodebookSpec,
    ComparisonReport,
    ConfigError,
    SimConfig,
    TrialPolicy,
    compare_records,
    read_records_csv,
    run_bounds,
    run_null_sweep,
    run_sweep,
    wilson_interval,
    write_records_csv,
    write_run_json,
)

__version__ = "0.1.0"
