"""Order-statistic probabilities over Uniform[0,1] samples and optimal probe thresholds.

The resolution process maintains a knowledge state about the top two order
statistics Y_{N-1} <= Y_N of N i.i.d. Uniform[0,1] gains, written as an
interval region (a, b]:

* ``a == 0`` encodes "the maximum is at most b" (all N samples <= b).
* ``a > 0`` encodes "the second maximum exceeds a and the maximum is at most
  b" (at least two samples in (a, b], all samples <= b).

Probing a threshold y inside the region succeeds when exactly one sample
lands above y, i.e. Y_{N-1} <= y < Y_N.  All probabilities here are
unconditional over the full N-sample space; conditioning on the region is a
division by a positive constant, so argmax-type uses are unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["Region", "success_prob", "region_mass", "optimal_threshold"]

# Absolute bracket width at which threshold bisection stops.
_SOLVER_TOL = 1e-14


@dataclass(frozen=True)
class Region:
    """Knowledge state (a, b] about the top two order statistics.

    ``a == b`` is permitted and denotes an empty region of mass zero, so tree
    enumeration can prune degenerate children uniformly.
    """

    a: float
    b: float
    n_users: int

    def __post_init__(self):
        if not (0.0 <= self.a <= self.b <= 1.0):
            raise ValueError(f"invalid region bounds ({self.a}, {self.b}]")
        if self.n_users < 2:
            raise ValueError(f"need at least 2 users, got {self.n_users}")

    @property
    def width(self) -> float:
        return self.b - self.a

    def is_empty(self) -> bool:
        return self.a == self.b


def region_mass(region: Region) -> float:
    """Probability that the sample vector is consistent with ``region``.

    For a > 0 this is Pr(at least two of N samples in (a, b], all <= b) =
    b^N - a^N - N a^{N-1} (b - a); for a = 0 it is simply b^N.
    """
    a, b, n = region.a, region.b, region.n_users
    if a == b:
        return 0.0
    if a == 0.0:
        return b**n
    return b**n - a**n - n * a ** (n - 1) * (b - a)


def success_prob(region: Region, y: float) -> float:
    """Probability that probing threshold ``y`` resolves a pair in ``region``.

    This is the unconditional Pr(Y_{N-1} <= y < Y_N, pair in region): one
    sample in (y, b], the remaining N-1 at most y with at least one above a.
    Evaluates to N (b - y) (y^{N-1} - a^{N-1}).
    """
    a, b, n = region.a, region.b, region.n_users
    if not (a <= y <= b):
        raise ValueError(f"threshold {y} outside region ({a}, {b}]")
    if a == b:
        return 0.0
    return n * (b - y) * (y ** (n - 1) - a ** (n - 1))


def _split_gain_derivative(y: float, a_pow: float, b: float, em1: float, em2: float) -> float:
    # d/dy of (b - y)(y^{n-1} - a^{n-1}); em1 = n-1, em2 = n-2 as floats.
    return (b - y) * em1 * y**em2 - (y**em1 - a_pow)


def optimal_threshold(region: Region) -> float:
    """Threshold in (a, b) maximizing the success probability of one probe.

    The maximized quantity (b - y)(y^{N-1} - a^{N-1}) has a unique interior
    stationary point.  For a = 0 the closed form b (N-1)/N is returned;
    otherwise the derivative is bisected on (a, b), where it moves from
    positive to negative exactly once.  Absolute accuracy is ~1e-14 on y.
    """
    a, b, n = region.a, region.b, region.n_users
    if not a < b:
        raise ValueError(f"degenerate region ({a}, {b}] has no interior threshold")
    if a == 0.0:
        return b * (n - 1) / n
    em1, em2 = float(n - 1), float(n - 2)
    a_pow = a**em1
    lo, hi = a, b
    while hi - lo > _SOLVER_TOL:
        mid = (lo + hi) / 2
        g = _split_gain_derivative(mid, a_pow, b, em1, em2)
        if g == 0.0:
            return mid
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def min_success_fraction(n_users: int) -> float:
    """Lower bound on (success mass / region mass) for one optimal probe.

    The fraction is smallest for the a = 0 shape, where it equals
    (1 - 1/N)^{N-1}; shell-like regions approach 1/2.  Used to bound the
    delay contribution of unenumerated tree mass by a geometric tail.
    """
    return (1.0 - 1.0 / n_users) ** (n_users - 1)


def binary_expansion_value(codeword: str) -> float:
    """Threshold encoded by a two-user codeword: e/1 read as bit 1, 0 as bit 0."""
    value = 0.0
    for i, c in enumerate(codeword):
        if c in ("e", "1"):
            value += math.ldexp(1.0, -(i + 1))
        elif c != "0":
            raise ValueError(f"unexpected codeword symbol {c!r}")
    return value
