"""RF self-interference cancellation toolkit (C++ core)."""

from ._core import (  # noqa: F401
    NumericDegeneracyError,
    benchmark_channel,
    canceller_response,
    db_to_ratio,
    families,
    fit_digital_canceller,
    gen_ofdm,
    jains_fairness,
    main,
    optimize,
    ratio_to_db,
    shannon_rate,
    sic_metrics,
    tdma_network_throughput,
    three_node_throughputs,
    uldl_throughputs,
)

__version__ = "0.1.0"
