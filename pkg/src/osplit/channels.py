"""Per-slot channel gain generators.

Continuous channels are reduced upstream to Uniform[0,1] by the CDF
transform, so the i.i.d. model draws uniforms directly.  The constant channel
models identical gains; contention is then resolved on auxiliary uniform
draws the users pick privately, which is the standard way to run a splitting
algorithm as a leader election.  The discrete joint channel draws one state
tuple from an explicit table and keeps raw gain units (its thresholds live
between adjacent gain values, not in [0,1]).

Batch sampling draws all slots in one pass from a single seeded generator;
slot i consumes the i-th row, which makes per-slot streams addressable and
keeps serial and vectorized consumers bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SlotSample",
    "IidUniformChannel",
    "ConstantChannel",
    "DiscreteJointChannel",
    "chain_channel",
    "correlated_example_channel",
    "sample_slot",
    "make_channel",
]


@dataclass(frozen=True)
class SlotSample:
    """One slot's gain vector; ``aux`` holds auxiliary contention draws, if any."""

    gains: np.ndarray
    aux: np.ndarray | None = None

    @property
    def order_stats(self) -> np.ndarray:
        return np.sort(self.gains)

    def contention_values(self) -> np.ndarray:
        """Values the resolution process actually probes."""
        return self.aux if self.aux is not None else self.gains

    @property
    def n_users(self) -> int:
        return len(self.gains)


class IidUniformChannel:
    """N independent Uniform[0,1] gains per slot."""

    kind = "iid"

    def __init__(self, n_users: int):
        if n_users < 2:
            raise ValueError("need at least 2 users")
        self.n_users = n_users

    def sample(self, rng: np.random.Generator) -> SlotSample:
        return SlotSample(gains=rng.uniform(size=self.n_users))

    def sample_batch(self, rng: np.random.Generator, slots: int):
        gains = rng.uniform(size=(slots, self.n_users))
        return gains, None

    def describe(self) -> str:
        return f"iid_uniform({self.n_users})"


class ConstantChannel:
    """All gains equal every slot; auxiliary uniforms drive the contention."""

    kind = "constant"

    def __init__(self, n_users: int, gain: float = 1.0):
        if n_users < 2:
            raise ValueError("need at least 2 users")
        self.n_users = n_users
        self.gain = gain

    def sample(self, rng: np.random.Generator) -> SlotSample:
        aux = rng.uniform(size=self.n_users)
        return SlotSample(gains=np.full(self.n_users, self.gain), aux=aux)

    def sample_batch(self, rng: np.random.Generator, slots: int):
        aux = rng.uniform(size=(slots, self.n_users))
        gains = np.full((slots, self.n_users), self.gain)
        return gains, aux

    def describe(self) -> str:
        return f"constant({self.n_users})"


class DiscreteJointChannel:
    """Joint gain distribution on a finite set of state tuples."""

    kind = "discrete"

    def __init__(self, states, probs):
        states = [tuple(float(g) for g in s) for s in states]
        probs = np.asarray(probs, dtype=float)
        if len(states) != len(probs) or len(states) == 0:
            raise ValueError("states and probs must be equal-length and non-empty")
        n = len(states[0])
        if n < 2 or any(len(s) != n for s in states):
            raise ValueError("every state needs the same number of users (>= 2)")
        if np.any(probs < 0.0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to 1 within 1e-12")
        self.states = states
        self.probs = probs
        self.n_users = n
        self._cum = np.cumsum(probs)

    def state_index(self, u: float) -> int:
        return int(np.searchsorted(self._cum, u, side="right").clip(0, len(self.states) - 1))

    def sample(self, rng: np.random.Generator) -> SlotSample:
        k = self.state_index(rng.uniform())
        return SlotSample(gains=np.asarray(self.states[k], dtype=float))

    def sample_batch(self, rng: np.random.Generator, slots: int):
        u = rng.uniform(size=slots)
        idx = np.searchsorted(self._cum, u, side="right").clip(0, len(self.states) - 1)
        gains = np.asarray(self.states, dtype=float)[idx]
        return gains, None

    def candidate_thresholds(self) -> list[float]:
        """Midpoints between adjacent distinct gain values across all states."""
        values = sorted({g for s in self.states for g in s})
        return [(lo + hi) / 2.0 for lo, hi in zip(values, values[1:])]

    def describe(self) -> str:
        return f"discrete_joint({len(self.states)} states)"


def chain_channel(k: int, eps: float = 0.0) -> DiscreteJointChannel:
    """Two-user chain of k overlapping states, each isolated by one threshold.

    State i has gains (4*(i//2 + 1), 2 + 4*((i+1)//2)); consecutive states
    share one gain value, so the i-th candidate threshold succeeds exactly for
    state i, collides for higher states and idles for lower ones.  With
    ``eps`` > 0 the masses tilt so the top state is heaviest:
    state i carries 1/k - (k-1-i)*eps for i < k-1 and 1/k + eps*k(k-1)/2 for
    the last.
    """
    if k < 1:
        raise ValueError("need at least one state")
    states = [(4.0 * (i // 2 + 1), 2.0 + 4.0 * ((i + 1) // 2)) for i in range(k)]
    probs = [1.0 / k - (k - 1 - i) * eps for i in range(k - 1)]
    probs.append(1.0 / k + eps * (k * (k - 1)) / 2)
    return DiscreteJointChannel(states, probs)


def correlated_example_channel(eps: float = 0.0) -> DiscreteJointChannel:
    """The 7-state correlated two-user example channel."""
    return chain_channel(7, eps)


def sample_slot(channel, rng: np.random.Generator) -> SlotSample:
    """Draw one slot's gains (and auxiliary values) from ``channel``."""
    return channel.sample(rng)


def make_channel(name: str, n_users: int = 2, eps: float = 0.0):
    """Channel factory for CLI/config names: iid | constant | correlated."""
    if name == "iid":
        return IidUniformChannel(n_users)
    if name == "constant":
        return ConstantChannel(n_users)
    if name == "correlated":
        return correlated_example_channel(eps)
    raise ValueError(f"unknown channel {name!r}")
