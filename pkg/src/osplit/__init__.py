"""Threshold codes and splitting strategies for opportunistic scheduling.

Library surface: exact order-statistic probabilities and optimal probe
thresholds (regions), greedy threshold-code construction with entropy and
delay analysis (codebook), channel models and the slotted ternary-feedback
simulator (channels, engine), the resolution policies (strategies), and
independent oracles (oracles).  The ``osplit`` CLI wraps the experiment and
verification workflows.
"""

from .channels import (
    ConstantChannel,
    DiscreteJointChannel,
    IidUniformChannel,
    SlotSample,
    chain_channel,
    correlated_example_channel,
    make_channel,
    sample_slot,
)
from .codebook import Codebook, CodeEntry, UnresolvedAtCutoffError, build_codebook
from .engine import (
    COLLISION,
    IDLE,
    SUCCESS,
    BatchStats,
    Declare,
    Feedback,
    Interval,
    Probe,
    SlotTrace,
    resolve_slot,
    run_batch,
    run_slot,
    transcript_entropy,
)
from .oracles import (
    DiscreteDelayReport,
    discrete_exact_delay,
    mc_event_frequency,
    n2_delay,
    n2_entropy,
)
from .regions import Region, optimal_threshold, region_mass, success_prob
from .strategies import (
    STRATEGY_NAMES,
    DiscreteBisectStrategy,
    DiscreteMpaStrategy,
    MpaStrategy,
    OsaStrategy,
    TwoSidedStrategy,
    make_strategy,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Region",
    "success_prob",
    "region_mass",
    "optimal_threshold",
    "Codebook",
    "CodeEntry",
    "UnresolvedAtCutoffError",
    "build_codebook",
    "SlotSample",
    "IidUniformChannel",
    "ConstantChannel",
    "DiscreteJointChannel",
    "chain_channel",
    "correlated_example_channel",
    "make_channel",
    "sample_slot",
    "Feedback",
    "IDLE",
    "SUCCESS",
    "COLLISION",
    "Interval",
    "Probe",
    "Declare",
    "SlotTrace",
    "BatchStats",
    "resolve_slot",
    "run_slot",
    "run_batch",
    "transcript_entropy",
    "OsaStrategy",
    "MpaStrategy",
    "TwoSidedStrategy",
    "DiscreteMpaStrategy",
    "DiscreteBisectStrategy",
    "make_strategy",
    "STRATEGY_NAMES",
    "n2_delay",
    "n2_entropy",
    "mc_event_frequency",
    "DiscreteDelayReport",
    "discrete_exact_delay",
]
