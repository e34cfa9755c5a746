"""Independent ground-truth generators used to cross-check the main code paths.

Closed forms for the two-user uniform split-fraction tree, a Monte-Carlo
event-frequency oracle, and exhaustive per-state replay for finite discrete
channels.  These deliberately avoid the codebook and engine internals they
validate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import DiscreteJointChannel, SlotSample
from .engine import resolve_slot

__all__ = [
    "n2_delay",
    "n2_entropy",
    "mc_event_frequency",
    "DiscreteDelayReport",
    "discrete_exact_delay",
]


def _check_unit_interior(x: float) -> None:
    if not (0.0 < x < 1.0):
        raise ValueError(f"first threshold must lie strictly inside (0, 1), got {x}")


def n2_delay(x: float) -> float:
    """Expected resolution delay of the two-user split-fraction-x tree.

    Each probe succeeds with probability s = 2x(1-x) independently of the
    history, so the delay solves D = s + (1 + D)(1 - s), i.e. D = 1/s.
    Minimized at x = 1/2 with value 2.
    """
    _check_unit_interior(x)
    return 1.0 / (2.0 * x * (1.0 - x))


def n2_entropy(x: float) -> float:
    """Threshold entropy in bits of the two-user split-fraction-x tree.

    The code reproduces itself under both children (scaled by x^2 and
    (1-x)^2), giving
    E = (-s log2 s - x^2 log2 x^2 - (1-x)^2 log2 (1-x)^2) / s with
    s = 2x(1-x).  Minimized at x = 1/2 with value 3.
    """
    _check_unit_interior(x)
    s = 2.0 * x * (1.0 - x)
    xx = x * x
    cc = (1.0 - x) * (1.0 - x)
    return (-s * math.log2(s) - xx * math.log2(xx) - cc * math.log2(cc)) / s


def mc_event_frequency(
    predicate,
    channel,
    trials: int,
    seed: int = 42,
    chunk: int = 1_000_000,
) -> tuple[float, float]:
    """Empirical frequency of an event with its binomial standard error.

    ``predicate`` receives a (m, N) gains matrix and returns a boolean vector.
    Deterministic per seed; sampling is chunked so large trial counts stay
    within memory.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        gains, _ = channel.sample_batch(rng, m)
        hits += int(np.count_nonzero(predicate(gains)))
        done += m
    freq = hits / trials
    stderr = math.sqrt(max(freq * (1.0 - freq), 1e-300) / trials)
    return freq, stderr


@dataclass(frozen=True)
class DiscreteDelayReport:
    """Per-state resolution depths from exhaustive replay of a finite channel."""

    per_state_depth: dict[tuple, int]
    expected_delay: float

    def depths_by_state_desc(self) -> list[tuple[tuple, int]]:
        """(state, depth) pairs ordered from the highest-valued state down."""
        return sorted(
            self.per_state_depth.items(), key=lambda kv: max(kv[0]), reverse=True
        )


def discrete_exact_delay(
    channel: DiscreteJointChannel,
    strategy_factory,
    max_depth: int | None = None,
) -> DiscreteDelayReport:
    """Replay the strategy against every channel state exactly once.

    Feedback is deterministic per state, so each state's depth (probes used,
    including posterior-certain declarations at the current depth) is exact;
    the expectation weights depths by the state probabilities.  Raises if any
    state fails to resolve within the depth bound.
    """
    bound = max_depth if max_depth is not None else 4 * len(channel.states) + 8
    depths: dict[tuple, int] = {}
    for state in channel.states:
        sample = SlotSample(gains=np.asarray(state, dtype=float))
        trace = resolve_slot(sample, strategy_factory(), max_minislots=bound)
        if not trace.resolved:
            raise RuntimeError(
                f"strategy did not resolve state {state} within {bound} minislots"
            )
        depths[state] = trace.minislots_used
    expected = float(
        sum(p * depths[s] for s, p in zip(channel.states, channel.probs))
    )
    return DiscreteDelayReport(per_state_depth=depths, expected_delay=expected)
