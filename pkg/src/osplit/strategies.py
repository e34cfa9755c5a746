"""Interactive contention-resolution policies.

A strategy is a per-slot state machine that sees only the broadcast feedback
(never the gains) and emits the next action: probe an interval, or declare
the winner without probing once its posterior admits a single possibility.
Fresh instance per slot.

Strategy names for CLI/config selection: "osa", "mpa", "two-sided",
"discrete-mpa", "discrete-bisect".
"""

from __future__ import annotations

import math

from .engine import COLLISION, IDLE, SUCCESS, Declare, Feedback, Interval, Probe
from .regions import Region, optimal_threshold

__all__ = [
    "OsaStrategy",
    "MpaStrategy",
    "TwoSidedStrategy",
    "DiscreteMpaStrategy",
    "DiscreteBisectStrategy",
    "make_strategy",
    "STRATEGY_NAMES",
]


class OsaStrategy:
    """Interval splitting with midpoint collision updates.

    Keeps (y_low, y_min, y_max) with 0 <= y_low <= y_min <= y_max <= 1 and
    probes (y_min, y_max] every minislot.  On collision the window halves
    upward; on idle the window drops below y_min, restarting with the 1 - 1/N
    fraction while nothing is known about the lower edge (y_low == 0) and the
    midpoint otherwise.
    """

    name = "osa"

    def __init__(self, n_users: int):
        if n_users < 2:
            raise ValueError("need at least 2 users")
        self.n_users = n_users
        self.y_low = 0.0
        self.y_min = 1.0 - 1.0 / n_users
        self.y_max = 1.0

    def _probe(self) -> Probe:
        return Probe((Interval(self.y_min, self.y_max),))

    def step(self, feedback: Feedback | None) -> Probe:
        if feedback is None:
            return self._probe()
        if feedback == COLLISION:
            self.y_low = self.y_min
            self.y_min = (self.y_min + self.y_max) / 2.0
        elif feedback == IDLE:
            self.y_max = self.y_min
            if self.y_low != 0.0:
                self.y_min = (self.y_low + self.y_max) / 2.0
            else:
                self.y_min = self.y_max * (1.0 - 1.0 / self.n_users)
        else:
            raise ValueError("no further probes after success")
        return self._probe()


class MpaStrategy:
    """Region-tree descent probing the exact optimal threshold at every node.

    Collision moves to the (y, b] child, idle to the (a, y] child; the tree
    is walked lazily, so no codebook needs to be built up front.
    """

    name = "mpa"

    def __init__(self, n_users: int):
        self.region = Region(0.0, 1.0, n_users)
        self._y = optimal_threshold(self.region)

    @property
    def threshold(self) -> float:
        return self._y

    def step(self, feedback: Feedback | None) -> Probe:
        if feedback is not None:
            if feedback == COLLISION:
                self.region = Region(self._y, self.region.b, self.region.n_users)
            elif feedback == IDLE:
                self.region = Region(self.region.a, self._y, self.region.n_users)
            else:
                raise ValueError("no further probes after success")
            self._y = optimal_threshold(self.region)
        return Probe((Interval(self._y, self.region.b),))


class TwoSidedStrategy:
    """Constant-channel splitter probing above and, after a collision, below.

    Designed for three users on auxiliary uniform draws.  A round probes the
    upper window (y_min, y_max]; a collision there is followed by the lower
    window [y_low, y_min), where a lone transmitter also wins (any isolated
    user is an acceptable leader).  Updates keep every user inside
    [y_low, y_max], so each round is a rescaled fresh instance; the idle
    restart uses y_min = y_low + (y_max - y_low)(1 - 1/N) inside the
    surviving window.

    A lower-window collision would need at least four users and is asserted
    unreachable for N = 3.
    """

    name = "two-sided"

    def __init__(self, n_users: int = 3):
        self.n_users = n_users
        self.fraction = 1.0 - 1.0 / n_users
        self.y_low = 0.0
        self.y_min = self.fraction
        self.y_max = 1.0
        self._lower_pending = False

    def _upper(self) -> Probe:
        return Probe((Interval(self.y_min, self.y_max),))

    def _lower(self) -> Probe:
        return Probe((Interval(self.y_low, self.y_min, include_lo=True, include_hi=False),))

    def step(self, feedback: Feedback | None) -> Probe:
        if feedback is None:
            return self._upper()
        if feedback == SUCCESS:
            raise ValueError("no further probes after success")
        if self._lower_pending:
            # Feedback is for the lower window probe.
            self._lower_pending = False
            if feedback == COLLISION:
                raise AssertionError(
                    "collision in both windows needs >= 4 users; unreachable for N=3"
                )
            # Idle below: everyone sits in the old upper window.
            self.y_low = self.y_min
            self.y_min = self.y_low + (self.y_max - self.y_low) * self.fraction
            return self._upper()
        if feedback == COLLISION:
            self._lower_pending = True
            return self._lower()
        # Idle above: everyone is in [y_low, y_min]; restart inside it.
        self.y_max = self.y_min
        self.y_min = self.y_low + (self.y_max - self.y_low) * self.fraction
        return self._upper()


def _count_above(state: tuple[float, ...], t: float) -> int:
    return sum(1 for g in state if g > t)


class DiscreteMpaStrategy:
    """Greedy maximal-success probing over a finite joint gain table.

    Tracks the posterior (unnormalized surviving state weights), probes the
    candidate threshold with the largest posterior success mass (ties to the
    larger threshold), and declares the winner without a probe once a single
    state survives.
    """

    name = "discrete-mpa"

    def __init__(self, channel):
        self.channel = channel
        self.thresholds = channel.candidate_thresholds()
        self.posterior = {
            s: float(p) for s, p in zip(channel.states, channel.probs) if p > 0.0
        }
        self._last_probe: float | None = None

    def _success_mass(self, t: float) -> float:
        return sum(p for s, p in self.posterior.items() if _count_above(s, t) == 1)

    def step(self, feedback: Feedback | None):
        if feedback is not None:
            t = self._last_probe
            if feedback == COLLISION:
                self.posterior = {
                    s: p for s, p in self.posterior.items() if _count_above(s, t) >= 2
                }
            elif feedback == IDLE:
                self.posterior = {
                    s: p for s, p in self.posterior.items() if _count_above(s, t) == 0
                }
            else:
                raise ValueError("no further probes after success")
        if len(self.posterior) <= 1:
            return Declare()
        best = max(self.thresholds, key=lambda t: (self._success_mass(t), t))
        self._last_probe = best
        return Probe((Interval(best, math.inf, include_hi=False),))


class DiscreteBisectStrategy:
    """Threshold-ladder bisection over a finite joint gain table.

    Maintains the value window (lo, hi) of the last collision/idle probes and
    probes the smallest surviving candidate at or above the window midpoint
    (falling back to the largest survivor).  Collisions discard candidates at
    or below the probe, idles discard those at or above, so the ladder halves
    by value each minislot and resolves a k-state chain in about log2(k)
    probes.  Declares immediately only for a degenerate single-state channel,
    or if the ladder empties with one state left.
    """

    name = "discrete-bisect"

    def __init__(self, channel):
        self.channel = channel
        self.candidates = sorted(channel.candidate_thresholds())
        self.posterior = {
            s: float(p) for s, p in zip(channel.states, channel.probs) if p > 0.0
        }
        self.lo = min(self.candidates) if self.candidates else 0.0
        self.hi = max(self.candidates) if self.candidates else 0.0
        self._last_probe: float | None = None
        self._initial = True

    def step(self, feedback: Feedback | None):
        if feedback is not None:
            t = self._last_probe
            if feedback == COLLISION:
                self.lo = t
                self.candidates = [c for c in self.candidates if c > t]
                self.posterior = {
                    s: p for s, p in self.posterior.items() if _count_above(s, t) >= 2
                }
            elif feedback == IDLE:
                self.hi = t
                self.candidates = [c for c in self.candidates if c < t]
                self.posterior = {
                    s: p for s, p in self.posterior.items() if _count_above(s, t) == 0
                }
            else:
                raise ValueError("no further probes after success")
        if self._initial and len(self.posterior) <= 1:
            return Declare()
        self._initial = False
        if not self.candidates:
            if len(self.posterior) > 1:
                raise AssertionError("candidate ladder exhausted with ambiguous posterior")
            return Declare()
        mid = (self.lo + self.hi) / 2.0
        at_or_above = [c for c in self.candidates if c >= mid]
        best = min(at_or_above) if at_or_above else max(self.candidates)
        self._last_probe = best
        return Probe((Interval(best, math.inf, include_hi=False),))


STRATEGY_NAMES = ("osa", "mpa", "two-sided", "discrete-mpa", "discrete-bisect")


def make_strategy(name: str, *, n_users: int | None = None, channel=None):
    """Factory returning a zero-argument constructor for per-slot instances."""
    if name == "osa":
        n = n_users if n_users is not None else channel.n_users
        return lambda: OsaStrategy(n)
    if name == "mpa":
        n = n_users if n_users is not None else channel.n_users
        return lambda: MpaStrategy(n)
    if name == "two-sided":
        n = n_users if n_users is not None else channel.n_users
        return lambda: TwoSidedStrategy(n)
    if name == "discrete-mpa":
        if channel is None:
            raise ValueError("discrete-mpa needs a discrete channel")
        return lambda: DiscreteMpaStrategy(channel)
    if name == "discrete-bisect":
        if channel is None:
            raise ValueError("discrete-bisect needs a discrete channel")
        return lambda: DiscreteBisectStrategy(channel)
    raise ValueError(f"unknown strategy {name!r}")
