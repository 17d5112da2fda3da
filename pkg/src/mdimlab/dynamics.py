"""Shift systems over finite level alphabets, their metrics, and Bowen distances.

Points of the shift are represented by finite coordinate windows; every distance
computed on windows comes back as an interval whose width is the certified mass
of the metric weights falling outside the truncation window.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import CapExceeded, RangeMismatch, RangeTooSmall

SIDES = ("one-sided", "two-sided")
METRIC_KINDS = ("geometric-sum", "sup-weighted", "coordinate-0")

ENUMERATION_CAP = 10**7
ENUMERATION_MAX_LEN = 24


@dataclass(frozen=True)
class SymbolicSystem:
    """Full shift on a finite alphabet of levels embedded in [0, 1]."""

    levels: tuple
    sided: str = "two-sided"
    name: str = "shift"

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("a system needs at least one level")
        if any(v < 0.0 or v > 1.0 for v in levels):
            raise ValueError("levels must lie in [0, 1]")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly increasing")
        if self.sided not in SIDES:
            raise ValueError(f"sided must be one of {SIDES}")

    @classmethod
    def uniform(cls, m: int, sided: str = "two-sided", name: str | None = None):
        """m equally spaced levels i/(m-1); a single level sits at 0."""
        if m < 1:
            raise ValueError("m must be >= 1")
        levels = (0.0,) if m == 1 else tuple(i / (m - 1) for i in range(m))
        return cls(levels, sided, name or f"uniform-{m}")

    @property
    def m(self) -> int:
        return len(self.levels)

    @property
    def level_array(self) -> np.ndarray:
        return np.asarray(self.levels)

    @property
    def min_gap(self) -> float:
        if self.m == 1:
            return math.inf
        return float(np.min(np.diff(self.levels)))

    @property
    def span(self) -> float:
        return self.levels[-1] - self.levels[0]


@dataclass(frozen=True)
class MetricSpec:
    """Weighted coordinate metric on the shift, truncated to |i| <= window.

    ``geometric-sum`` is d(x, y) = sum_i base^|i| |x_i - y_i|, ``sup-weighted``
    replaces the sum by a supremum, and ``coordinate-0`` only looks at x_0.
    Tail bounds assume coordinate differences of at most 1.
    """

    kind: str = "geometric-sum"
    base: float = 0.5
    window: int = 0
    sided: str = "two-sided"

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"metric kind must be one of {METRIC_KINDS}")
        if not 0.0 < self.base < 1.0:
            raise ValueError("base must lie in (0, 1)")
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if self.sided not in SIDES:
            raise ValueError(f"sided must be one of {SIDES}")

    @classmethod
    def for_eps(cls, eps: float, kind: str = "geometric-sum", base: float = 0.5,
                sided: str = "two-sided", fraction: float = 0.25) -> "MetricSpec":
        """Smallest window whose tail is at most ``fraction * eps``."""
        spec = cls(kind, base, 0, sided)
        if kind == "coordinate-0":
            return spec
        w = 0
        while spec.with_window(w).tail > fraction * eps:
            w += 1
        return spec.with_window(w)

    def with_window(self, w: int) -> "MetricSpec":
        return MetricSpec(self.kind, self.base, w, self.sided)

    @property
    def two_sided(self) -> bool:
        return self.sided == "two-sided"

    @property
    def tail(self) -> float:
        if self.kind == "coordinate-0":
            return 0.0
        b, w = self.base, self.window
        if self.kind == "sup-weighted":
            return b ** (w + 1)
        one_side = b ** (w + 1) / (1.0 - b)
        return 2.0 * one_side if self.two_sided else one_side

    @property
    def weight_sum(self) -> float:
        """Sum of all weights over the full index set (the diameter of [0,1]^Z)."""
        if self.kind == "coordinate-0":
            return 1.0
        if self.kind == "sup-weighted":
            return 1.0
        b = self.base
        return (1.0 + b) / (1.0 - b) if self.two_sided else 1.0 / (1.0 - b)

    def weight(self, offset: int) -> float:
        if self.kind == "coordinate-0":
            return 1.0 if offset == 0 else 0.0
        if offset < 0 and not self.two_sided:
            return 0.0
        if abs(offset) > self.window:
            return 0.0
        return self.base ** abs(offset)

    def needed_range(self, n: int) -> tuple:
        """Index range a window must cover to evaluate d_n."""
        if self.kind == "coordinate-0":
            return 0, n - 1
        lo = -self.window if self.two_sided else 0
        return lo, n - 1 + self.window

    def weight_matrix(self, n: int, lo: int, length: int) -> np.ndarray:
        """Weights W[j, c] of column c (coordinate lo + c) in the term d(T^j x, T^j y)."""
        W = np.zeros((n, length))
        for j in range(n):
            for c in range(length):
                W[j, c] = self.weight(lo + c - j)
        return W


@dataclass(frozen=True)
class IntervalValue:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi


@dataclass(frozen=True)
class PointWindow:
    """Cylinder representative: level indices on the coordinates lo..hi."""

    lo: int
    symbols: tuple
    levels: tuple = field(repr=False, default=(0.0, 1.0))

    def __post_init__(self):
        symbols = tuple(int(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if not symbols:
            raise ValueError("a window needs a nonempty range")
        if min(symbols) < 0 or max(symbols) >= len(self.levels):
            raise ValueError("symbols must index into the levels")

    @classmethod
    def from_values(cls, lo: int, symbols: Sequence[int], system: SymbolicSystem):
        return cls(lo, tuple(symbols), system.levels)

    @property
    def hi(self) -> int:
        return self.lo + len(self.symbols) - 1

    @property
    def range(self) -> tuple:
        return self.lo, self.hi

    def __len__(self):
        return len(self.symbols)

    def symbol(self, i: int) -> int:
        if not self.lo <= i <= self.hi:
            raise RangeTooSmall(f"coordinate {i} outside window [{self.lo}, {self.hi}]")
        return self.symbols[i - self.lo]

    def values(self) -> np.ndarray:
        return np.asarray(self.levels)[list(self.symbols)]


def bowen_distance(a: PointWindow, b: PointWindow, n: int, metric: MetricSpec) -> IntervalValue:
    """Bowen distance d_n(a, b) with the truncation tail as interval width."""
    if a.range != b.range:
        raise RangeMismatch(f"windows cover {a.range} and {b.range}")
    if n < 1:
        raise ValueError("n must be positive")
    need_lo, need_hi = metric.needed_range(n)
    if a.lo > need_lo or a.hi < need_hi:
        raise RangeTooSmall(f"window {a.range} does not cover [{need_lo}, {need_hi}]")
    diff = np.abs(a.values() - b.values())
    W = metric.weight_matrix(n, a.lo, len(a))
    if metric.kind == "sup-weighted":
        lo = float(np.max(W * diff[None, :]))
        return IntervalValue(lo, max(lo, metric.tail))
    lo = float(np.max(W @ diff))
    return IntervalValue(lo, lo + metric.tail)


def window_codes(m: int, length: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All m**length symbol words in lexicographic order, one per row."""
    if length > ENUMERATION_MAX_LEN or m ** length > cap:
        raise CapExceeded(f"{m}**{length} windows exceed the enumeration cap {cap}")
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((m,) * length, dtype=np.int64)
    return grids.reshape(length, -1).T.copy()


def enumerate_windows(system: SymbolicSystem, lo: int, hi: int,
                      cap: int = ENUMERATION_CAP) -> Iterator[PointWindow]:
    """Yield every window over [lo, hi] exactly once, in lexicographic order."""
    length = hi - lo + 1
    if length < 1:
        raise ValueError("empty range")
    if length > ENUMERATION_MAX_LEN or system.m ** length > cap:
        raise CapExceeded(f"{system.m}**{length} windows exceed the enumeration cap {cap}")
    for word in itertools.product(range(system.m), repeat=length):
        yield PointWindow(lo, word, system.levels)


def shift_window(x: PointWindow, k: int) -> PointWindow:
    """Apply T^k: result[i] = x[i + k] on the part of x's range where that is defined."""
    new_lo = max(x.lo, x.lo - k)
    new_hi = min(x.hi, x.hi - k)
    if new_lo > new_hi:
        raise RangeTooSmall(f"shift by {k} leaves nothing of a window of length {len(x)}")
    start = new_lo + k - x.lo
    return PointWindow(new_lo, x.symbols[start:start + new_hi - new_lo + 1], x.levels)
