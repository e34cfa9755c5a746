"""Greedy threshold-code construction for the top-two order statistics.

The code assigns every gain pair (Y_{N-1}, Y_N) the enumerated threshold of
maximal success mass.  Because a threshold only resolves pairs inside one
knowledge region, the global greedy is realized as a binary region tree: each
region splits at its optimal threshold into an idle child (a, y] and a
collision child (y, b].  A node's codeword is its root path (collision branch
'e', idle branch '0') plus a terminal '1'.

Entries are materialized in order of decreasing probability (node probability
strictly decreases along tree edges, so a max-probability frontier pops the
global greedy order).  Ties are broken with the collision branch first, which
reproduces the canonical two-user table ordering.

Entropy and expected delay are computed from a *spectrum*: the multiset of
(probability, depth) over enumerated tree nodes.  For two users every node at
relative depth d below a region of mass m has mass m/4^d, so the spectrum has
an exact per-level closed form and can be carried far deeper than any
explicit entry list; for three or more users the spectrum is the enumeration
itself and the truncated tail is reported as bounds.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .regions import (
    Region,
    min_success_fraction,
    optimal_threshold,
    region_mass,
    success_prob,
)

__all__ = [
    "CodeEntry",
    "Codebook",
    "SpectrumBin",
    "UnresolvedAtCutoffError",
    "build_codebook",
]

DEFAULT_MAX_ENTRIES = 50_000
DEFAULT_MAX_NODES = 150_000


class UnresolvedAtCutoffError(LookupError):
    """A gain pair's resolving node lies beyond the enumerated entries."""


class SpectrumBin(NamedTuple):
    probability: float
    depth: int
    count: int


@dataclass(frozen=True)
class CodeEntry:
    """One resolving threshold with its ternary codeword and tree position."""

    threshold: float
    codeword: str
    probability: float
    depth: int
    region: Region

    def path(self) -> str:
        """Root path of the tree node (codeword without the terminal '1')."""
        return self.codeword[:-1]


@dataclass
class Codebook:
    n_users: int
    epsilon: float
    entries: list[CodeEntry]
    spectrum: list[SpectrumBin]
    spectrum_residual: float
    split_fraction: float | None = None
    _index: dict[str, CodeEntry] | None = field(default=None, repr=False)

    @property
    def residual_mass(self) -> float:
        """Probability mass not covered by the materialized entry list."""
        return max(0.0, 1.0 - math.fsum(e.probability for e in self.entries))

    def entropy(self) -> float:
        """Shannon entropy in bits, -sum p log2 p over enumerated nodes.

        Truncation is bounded by ``spectrum_residual``, which the caller can
        inspect to bound the missing tail.
        """
        return -math.fsum(
            c * p * math.log2(p) for p, _, c in self.spectrum if p > 0.0
        )

    def expected_delay(self) -> float:
        """Mean minislots to resolve, sum of depth * probability (lower bound)."""
        return math.fsum(c * p * d for p, d, c in self.spectrum)

    def delay_bounds(self) -> tuple[float, float]:
        """(lower, upper) bracket on the exact expected delay.

        Lower: unenumerated mass contributes nothing.  Upper: the residual
        resolves no earlier than one past the deepest enumerated level, with
        per-minislot success fraction at least c (c = 2x(1-x) for uniform
        split-fraction trees, else (1-1/N)^{N-1}, the minimum over region
        shapes), i.e. a geometric tail contributing
        residual * (d_max + 1 + (1-c)/c).
        """
        lower = self.expected_delay()
        if self.spectrum_residual <= 0.0:
            return lower, lower
        d_max = max((d for _, d, _ in self.spectrum), default=0)
        if self.split_fraction is not None:
            c = 2.0 * self.split_fraction * (1.0 - self.split_fraction)
        else:
            c = min_success_fraction(self.n_users)
        upper = lower + self.spectrum_residual * (d_max + 1 + (1.0 - c) / c)
        return lower, upper

    def resolve(self, y_second: float, y_max: float) -> CodeEntry:
        """Entry whose threshold separates the pair: y_second <= t < y_max.

        Walks the region tree from the root following the feedback the pair
        would generate.  Raises :class:`UnresolvedAtCutoffError` when the walk
        leaves the materialized entries.
        """
        if not (0.0 <= y_second < y_max <= 1.0):
            raise ValueError(f"invalid gain pair ({y_second}, {y_max})")
        if self._index is None:
            self._index = {e.path(): e for e in self.entries}
        path = ""
        while True:
            entry = self._index.get(path)
            if entry is None:
                raise UnresolvedAtCutoffError(
                    f"pair ({y_second}, {y_max}) resolves beyond the "
                    f"enumerated entries (reached path {path!r})"
                )
            t = entry.threshold
            if y_second <= t < y_max:
                return entry
            path += "e" if y_second > t else "0"

    def to_dict(self) -> dict:
        lower, upper = self.delay_bounds()
        return {
            "n_users": self.n_users,
            "epsilon": self.epsilon,
            "split_fraction": self.split_fraction,
            "residual_mass": self.residual_mass,
            "spectrum_residual": self.spectrum_residual,
            "entropy_bits": self.entropy(),
            "expected_delay": self.expected_delay(),
            "delay_lower": lower,
            "delay_upper": upper,
            "entries": [
                {
                    "threshold": e.threshold,
                    "codeword": e.codeword,
                    "probability": e.probability,
                    "depth": e.depth,
                }
                for e in self.entries
            ],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _codeword_sort_key(path: str) -> bytes:
    # Collision branch orders before idle branch, matching the canonical
    # two-user table (equal-probability entries listed by descending threshold).
    return bytes(0 if ch == "e" else 1 for ch in path)


def _two_user_spectrum(epsilon: float, fraction: float, max_levels: int = 2000) -> tuple[list[SpectrumBin], float]:
    """Exact aggregated spectrum of a two-user uniform split-fraction tree.

    Every node splits its region at relative position ``fraction``; the idle
    and collision children carry mass fractions x^2 and (1-x)^2 and the entry
    takes s = 2x(1-x) of the node mass.  A node at depth d with i idle
    branches therefore has entry probability s x^{2i} (1-x)^{2(d-i)}, and
    level d holds C(d, i) such nodes.  Levels are emitted until the residual
    (1-s)^{d+1} falls below ``epsilon``.
    """
    x = fraction
    s = 2.0 * x * (1.0 - x)
    bins: list[SpectrumBin] = []
    residual = 1.0
    xi, xc = x * x, (1.0 - x) * (1.0 - x)
    for d in range(max_levels):
        if residual < epsilon:
            break
        if x == 0.5:
            p = s * 0.25**d
            if p > 0.0:
                bins.append(SpectrumBin(p, d + 1, 2**d))
        else:
            for i in range(d + 1):
                p = s * xi**i * xc ** (d - i)
                if p > 0.0:
                    bins.append(SpectrumBin(p, d + 1, math.comb(d, i)))
        residual *= 1.0 - s
    return bins, residual


def build_codebook(
    n_users: int,
    epsilon: float = 1e-10,
    *,
    max_entries: int = DEFAULT_MAX_ENTRIES,
    max_nodes: int = DEFAULT_MAX_NODES,
    split_fraction: float | None = None,
) -> Codebook:
    """Enumerate the greedy threshold code until the residual drops below epsilon.

    Entries come out in decreasing probability (construction order == greedy
    order); materialization stops at ``max_entries`` and total node expansion
    at ``max_nodes``, whichever binds first, with the spectrum recording the
    achieved coverage.  For two users the spectrum is continued analytically
    to the full epsilon regardless of the entry cap.

    ``split_fraction`` replaces the optimal threshold at *every* node by the
    fixed relative position x in (0, 1) (two users only); x = 0.5 reproduces
    the greedy code.  This is the perturbation used to probe local optimality
    of the canonical construction.
    """
    if n_users < 2:
        raise ValueError("need at least 2 users")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if split_fraction is not None:
        if n_users != 2:
            raise ValueError("split_fraction is only defined for 2 users")
        if not (0.0 < split_fraction < 1.0):
            raise ValueError("split_fraction must lie in (0, 1)")

    def threshold_of(region: Region) -> float:
        if split_fraction is None:
            return optimal_threshold(region)
        return region.a + split_fraction * (region.b - region.a)

    analytic = n_users == 2

    entries: list[CodeEntry] = []
    explicit_bins: list[SpectrumBin] = []
    heap: list[tuple[float, bytes, int, Region, str, float, float]] = []
    seq = 0

    def push(region: Region, path: str) -> None:
        nonlocal seq
        if region_mass(region) <= 0.0:
            return
        y = threshold_of(region)
        p = success_prob(region, y)
        seq += 1
        heapq.heappush(heap, (-p, _codeword_sort_key(path), seq, region, path, y, p))

    push(Region(0.0, 1.0, n_users), "")
    covered = 0.0
    pops = 0
    while heap:
        if 1.0 - covered < epsilon:
            break
        if pops >= max_nodes:
            break
        if analytic and len(entries) >= max_entries:
            break
        _, _, _, region, path, y, p = heapq.heappop(heap)
        pops += 1
        covered += p
        if len(entries) < max_entries:
            entries.append(
                CodeEntry(
                    threshold=y,
                    codeword=path + "1",
                    probability=p,
                    depth=len(path) + 1,
                    region=region,
                )
            )
        if not analytic:
            explicit_bins.append(SpectrumBin(p, len(path) + 1, 1))
        push(Region(region.a, y, n_users), path + "0")
        push(Region(y, region.b, n_users), path + "e")

    if analytic:
        spectrum, spectrum_residual = _two_user_spectrum(
            epsilon, 0.5 if split_fraction is None else split_fraction
        )
    else:
        spectrum = explicit_bins
        spectrum_residual = max(0.0, 1.0 - math.fsum(b.probability for b in spectrum))

    return Codebook(
        n_users=n_users,
        epsilon=epsilon,
        entries=entries,
        spectrum=spectrum,
        spectrum_residual=spectrum_residual,
        split_fraction=split_fraction,
    )
