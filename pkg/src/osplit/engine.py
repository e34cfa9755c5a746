"""Slotted ternary-feedback protocol engine.

Each slot the base station repeatedly announces a probe set (a union of at
most two disjoint intervals); users whose contention value falls inside
transmit, and everyone hears idle (0), success (1) or collision (e).  A slot
ends on success, on a posterior-certain declaration, or when the minislot
budget K runs out.

Batches draw all slot samples in one pass from the seeded master generator
(slot i = row i), so results are reproducible and independent of how slots
are distributed over workers.  For the heavy (channel, strategy) pairs a
vectorized fast path produces the identical statistics; see fastpath.py.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Feedback",
    "IDLE",
    "SUCCESS",
    "COLLISION",
    "Interval",
    "Probe",
    "Declare",
    "SlotTrace",
    "BatchStats",
    "run_slot",
    "resolve_slot",
    "run_batch",
    "transcript_entropy",
    "DEFAULT_MAX_MINISLOTS",
]

DEFAULT_MAX_MINISLOTS = 64


class Feedback(enum.Enum):
    IDLE = "0"
    SUCCESS = "1"
    COLLISION = "e"

    @property
    def symbol(self) -> str:
        return self.value


IDLE, SUCCESS, COLLISION = Feedback.IDLE, Feedback.SUCCESS, Feedback.COLLISION


@dataclass(frozen=True)
class Interval:
    """One probed range; defaults to the half-open (lo, hi] used by upper probes."""

    lo: float
    hi: float
    include_lo: bool = False
    include_hi: bool = True

    def contains(self, x) -> np.ndarray:
        above = x >= self.lo if self.include_lo else x > self.lo
        below = x <= self.hi if self.include_hi else x < self.hi
        return above & below

    def as_tuple(self):
        return (self.lo, self.hi, self.include_lo, self.include_hi)


@dataclass(frozen=True)
class Probe:
    intervals: tuple[Interval, ...]

    def __post_init__(self):
        if not 1 <= len(self.intervals) <= 2:
            raise ValueError("a probe is a union of one or two intervals")

    def member_mask(self, values: np.ndarray) -> np.ndarray:
        mask = self.intervals[0].contains(values)
        for iv in self.intervals[1:]:
            mask = mask | iv.contains(values)
        return mask


class Declare:
    """Winner announced without a probe (posterior-certain declaration)."""


@dataclass
class SlotTrace:
    probes: list[tuple[Probe, Feedback]] = field(default_factory=list)
    winner: int | None = None
    minislots_used: int = 0
    declared_without_probe: bool = False

    @property
    def resolved(self) -> bool:
        return self.winner is not None

    @property
    def transcript(self) -> str:
        return "".join(fb.symbol for _, fb in self.probes)

    def to_dict(self) -> dict:
        return {
            "probes": [
                {"intervals": [iv.as_tuple() for iv in p.intervals], "feedback": fb.symbol}
                for p, fb in self.probes
            ],
            "winner": self.winner,
            "minislots_used": self.minislots_used,
            "declared_without_probe": self.declared_without_probe,
        }


@dataclass(frozen=True)
class BatchStats:
    slots: int
    resolved: int
    mean_delay_conditional: float
    mean_delay_charged: float
    success_rate: float
    empirical_entropy_bits: float
    seed: int

    CSV_FIELDS = (
        "n_users",
        "channel",
        "strategy",
        "slots",
        "K",
        "seed",
        "mean_delay_conditional",
        "mean_delay_charged",
        "success_rate",
        "empirical_entropy_bits",
    )

    def csv_row(self, n_users: int, channel: str, strategy: str, max_minislots: int) -> list:
        return [
            n_users,
            channel,
            strategy,
            self.slots,
            max_minislots,
            self.seed,
            self.mean_delay_conditional,
            self.mean_delay_charged,
            self.success_rate,
            self.empirical_entropy_bits,
        ]


def resolve_slot(sample, strategy, max_minislots: int = DEFAULT_MAX_MINISLOTS) -> SlotTrace:
    """Run the probe/feedback loop for one already-drawn sample."""
    values = sample.contention_values()
    trace = SlotTrace()
    feedback: Feedback | None = None
    while trace.minislots_used < max_minislots:
        action = strategy.step(feedback)
        if isinstance(action, Declare):
            trace.winner = int(np.argmax(sample.gains))
            trace.declared_without_probe = True
            return trace
        mask = action.member_mask(values)
        count = int(mask.sum())
        feedback = SUCCESS if count == 1 else IDLE if count == 0 else COLLISION
        trace.probes.append((action, feedback))
        trace.minislots_used += 1
        if feedback == SUCCESS:
            trace.winner = int(np.argmax(np.where(mask, values, -np.inf)))
            return trace
    return trace


def run_slot(channel, strategy_factory, max_minislots: int, rng: np.random.Generator) -> SlotTrace:
    """Sample one slot from ``channel`` and resolve it with a fresh strategy."""
    from .channels import sample_slot

    return resolve_slot(sample_slot(channel, rng), strategy_factory(), max_minislots)


def transcript_entropy(counts: dict[str, int] | np.ndarray) -> float:
    """Plug-in entropy (bits) of the observed codeword frequencies."""
    if isinstance(counts, dict):
        values = np.array(list(counts.values()), dtype=float)
    else:
        values = np.asarray(counts, dtype=float)
    total = values.sum()
    if total <= 0:
        return 0.0
    # Sorting makes the float sum independent of the counts' iteration order,
    # so the generic loop and the vectorized kernels agree bit for bit.
    p = np.sort(values[values > 0]) / total
    return float(-(p * np.log2(p)).sum())


def _stats_from_outcomes(
    delays: np.ndarray, resolved: np.ndarray, transcripts: dict[str, int], slots: int, max_minislots: int, seed: int
) -> BatchStats:
    n_res = int(resolved.sum())
    cond = float(delays[resolved].mean()) if n_res else math.nan
    charged = float(np.where(resolved, delays, max_minislots).mean()) if slots else math.nan
    return BatchStats(
        slots=slots,
        resolved=n_res,
        mean_delay_conditional=cond,
        mean_delay_charged=charged,
        success_rate=n_res / slots if slots else math.nan,
        empirical_entropy_bits=transcript_entropy(transcripts),
        seed=seed,
    )


def run_batch(
    channel,
    strategy,
    slots: int,
    max_minislots: int = DEFAULT_MAX_MINISLOTS,
    seed: int = 42,
    *,
    use_fast: bool | None = None,
    collect_traces: bool = False,
) -> BatchStats | tuple[BatchStats, list[SlotTrace]]:
    """Aggregate independent slots; deterministic for a fixed (seed, config).

    ``strategy`` is a name string or a zero-argument factory.  The vectorized
    fast path is used automatically when available unless ``use_fast`` is
    False (it is exercised against the generic loop in the test suite and
    produces identical statistics).  Trace collection forces the generic loop.
    """
    from . import fastpath
    from .channels import SlotSample
    from .strategies import make_strategy

    if slots < 1:
        raise ValueError("need at least one slot")
    name = strategy if isinstance(strategy, str) else getattr(strategy, "name", None)
    if isinstance(strategy, str):
        strategy_factory = make_strategy(strategy, channel=channel)
    else:
        strategy_factory = strategy

    rng = np.random.default_rng(seed)
    gains, aux = channel.sample_batch(rng, slots)

    if not collect_traces and use_fast is not False:
        kernel = fastpath.find_kernel(channel, name)
        if kernel is not None:
            delays, resolved, transcripts = kernel(gains, aux, max_minislots)
            return _stats_from_outcomes(delays, resolved, transcripts, slots, max_minislots, seed)
        if use_fast is True:
            raise ValueError(f"no fast path for ({channel.describe()}, {name})")

    delays = np.zeros(slots, dtype=np.int64)
    resolved = np.zeros(slots, dtype=bool)
    transcripts: dict[str, int] = {}
    traces: list[SlotTrace] = []
    for i in range(slots):
        sample = SlotSample(
            gains=gains[i], aux=None if aux is None else aux[i]
        )
        trace = resolve_slot(sample, strategy_factory(), max_minislots)
        delays[i] = trace.minislots_used
        resolved[i] = trace.resolved
        if trace.resolved:
            t = trace.transcript
            transcripts[t] = transcripts.get(t, 0) + 1
        if collect_traces:
            traces.append(trace)
    stats = _stats_from_outcomes(delays, resolved, transcripts, slots, max_minislots, seed)
    if collect_traces:
        return stats, traces
    return stats
