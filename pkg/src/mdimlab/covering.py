"""Spanning and separated counts under Bowen metrics, growth rates and mdim sweeps.

Point families come in three flavours:

* ``exact``: every window over the range needed by (n, w), i.e. all cylinder
  representatives of the truncated system;
* ``slice``: every assignment of the coordinates 0..n-1 with all other
  coordinates pinned to the lowest level.  These are genuine points of the
  shift, so their distances carry no truncation error and separated counts are
  valid lower bounds for the full system;
* ``sampled``: i.i.d. uniform windows (deduplicated and sorted), lower-bound only.
"""
from __future__ import annotations

import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import greedy_separated_kernel, pairwise_lo_kernel
from .dynamics import MetricSpec, PointWindow, SymbolicSystem, window_codes
from .errors import (BudgetExhausted, CapExceeded, EpsilonBelowResolution,
                     InsufficientData, RangeMismatch, RangeTooSmall)
from .scaling import dimension_estimate, linear_fit

DEFAULT_BUDGET = 2 ** 18
EXACT_SET_COVER_CAP = 20
DEFAULT_EXACT_BUDGET = 2 ** 12


@dataclass
class PointFamily:
    """Windows stored as a code matrix; column c is coordinate ``lo + c``."""

    codes: np.ndarray
    lo: int
    levels: np.ndarray
    mode: str
    tail: float

    def __len__(self):
        return self.codes.shape[0]

    def windows(self) -> list:
        lv = tuple(float(v) for v in self.levels)
        return [PointWindow(self.lo, tuple(row), lv) for row in self.codes]


def _window_length(system: SymbolicSystem, metric: MetricSpec, n: int):
    lo, hi = metric.needed_range(n)
    return lo, hi - lo + 1


def build_family(system: SymbolicSystem, metric: MetricSpec, n: int,
                 budget: int = DEFAULT_BUDGET, seed: int = 0,
                 allow_sampling: bool = True, exact_budget: int | None = None) -> tuple:
    """Pick the richest point family that fits ``budget``.

    Full windows are used while m**length stays under ``exact_budget`` (their
    separated sets get large quickly), then the slice, then sampling.
    Returns ``(family, metric_used)``; the metric is widened to cover the slice
    exactly in slice mode.
    """
    m = system.m
    lo, length = _window_length(system, metric, n)
    exact_budget = DEFAULT_EXACT_BUDGET if exact_budget is None else exact_budget
    if m ** length <= min(budget, exact_budget):
        codes = window_codes(m, length, cap=max(budget, 1))
        return PointFamily(codes, lo, system.level_array, "exact", metric.tail), metric
    if m ** n <= budget:
        codes = window_codes(m, n, cap=max(budget, 1))
        wide = metric if metric.kind == "coordinate-0" else metric.with_window(max(n, metric.window))
        return PointFamily(codes, 0, system.level_array, "slice", 0.0), wide
    if not allow_sampling:
        raise BudgetExhausted(f"{m}**{n} slice points exceed budget {budget}")
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, m, size=(budget, length), dtype=np.int64)
    codes = np.unique(codes, axis=0)
    return PointFamily(codes, lo, system.level_array, "sampled", metric.tail), metric


def _pivots(weights: np.ndarray, levels: np.ndarray, eps: float, max_cells: int = 2 ** 21):
    """Hash columns (largest weights first) with per-symbol neighbour ranges."""
    m = len(levels)
    colmax = weights.max(axis=0) if weights.size else np.zeros(0)
    order = [int(c) for c in np.argsort(-colmax, kind="stable") if colmax[c] > 0]
    chosen = []
    while order and m ** (len(chosen) + 1) <= max_cells:
        chosen.append(order.pop(0))
    nb_lo = np.zeros((len(chosen), m), np.int64)
    nb_hi = np.zeros((len(chosen), m), np.int64)
    for k, c in enumerate(chosen):
        r = eps / colmax[c]
        nb_lo[k] = np.searchsorted(levels, levels - r, side="right")
        nb_hi[k] = np.searchsorted(levels, levels + r, side="left") - 1
    return np.asarray(chosen, np.int64), nb_lo, nb_hi


def _greedy_indices(family: PointFamily, n: int, eps: float, metric: MetricSpec,
                    init=None) -> np.ndarray:
    if eps <= 2.0 * family.tail:
        raise EpsilonBelowResolution(f"eps={eps} is not above twice the tail {family.tail}")
    L = family.codes.shape[1]
    W = metric.weight_matrix(n, family.lo, L)
    levels = np.ascontiguousarray(family.levels, dtype=float)
    piv, nb_lo, nb_hi = _pivots(W, levels, eps)
    init = np.zeros(0, np.int64) if init is None else np.asarray(init, np.int64)
    return greedy_separated_kernel(np.ascontiguousarray(family.codes), levels, W,
                                   metric.kind == "sup-weighted", float(eps), piv,
                                   nb_lo, nb_hi, init)


def _family_from_windows(points, n: int, metric: MetricSpec) -> PointFamily:
    if not points:
        raise ValueError("empty point list")
    rng = points[0].range
    for p in points:
        if p.range != rng:
            raise RangeMismatch(f"windows cover {rng} and {p.range}")
    need_lo, need_hi = metric.needed_range(n)
    if rng[0] > need_lo or rng[1] < need_hi:
        raise RangeTooSmall(f"window {rng} does not cover [{need_lo}, {need_hi}]")
    codes = np.array([p.symbols for p in points], dtype=np.int64)
    return PointFamily(codes, rng[0], np.asarray(points[0].levels), "given", metric.tail)


def greedy_separated(points, n: int, eps: float, metric: MetricSpec, initial=None) -> list:
    """Maximal (n, eps)-separated subset by first-fit in the given order.

    ``initial`` optionally lists indices into ``points`` that are already known
    to be separated; they are kept and the scan extends them.
    """
    fam = _family_from_windows(list(points), n, metric)
    idx = _greedy_indices(fam, n, eps, metric, initial)
    pts = list(points)
    return [pts[i] for i in idx]


def hi_distance_matrix(points, n: int, metric: MetricSpec) -> np.ndarray:
    fam = _family_from_windows(list(points), n, metric)
    W = metric.weight_matrix(n, fam.lo, fam.codes.shape[1])
    lo = pairwise_lo_kernel(fam.codes, np.asarray(fam.levels, float), W,
                            metric.kind == "sup-weighted")
    if metric.kind == "sup-weighted":
        hi = np.maximum(lo, metric.tail)
    else:
        hi = lo + metric.tail
    np.fill_diagonal(hi, metric.tail)
    return hi


def _min_set_cover(masks: list, full: int) -> int:
    n = len(masks)
    for k in range(1, n + 1):
        for combo in itertools.combinations(range(n), k):
            acc = 0
            for i in combo:
                acc |= masks[i]
            if acc == full:
                return k
    return n


def greedy_set_cover(masks: list, full: int) -> int:
    covered, count = 0, 0
    while covered != full:
        best = max(range(len(masks)), key=lambda i: bin(masks[i] & ~covered).count("1"))
        covered |= masks[best]
        count += 1
    return count


def _cover_masks(points, n, eps, metric):
    hi = hi_distance_matrix(points, n, metric)
    N = len(points)
    masks = []
    for i in range(N):
        mask = 0
        for j in range(N):
            if hi[i, j] < eps or i == j:
                mask |= 1 << j
        masks.append(mask)
    return masks, (1 << N) - 1


def spanning_exact_small(points, n: int, eps: float, metric: MetricSpec,
                         cap: int = EXACT_SET_COVER_CAP) -> int:
    """Exact minimum number of member-centred balls (hi-distance < eps) covering ``points``."""
    points = list(points)
    if len(points) > cap:
        raise CapExceeded(f"{len(points)} points exceed the exact set-cover cap {cap}")
    masks, full = _cover_masks(points, n, eps, metric)
    return _min_set_cover(masks, full)


def spanning_upper(points, n: int, eps: float, metric: MetricSpec) -> int:
    """Exact cover size when small enough, greedy set-cover size otherwise."""
    points = list(points)
    try:
        return spanning_exact_small(points, n, eps, metric)
    except CapExceeded:
        masks, full = _cover_masks(points, n, eps, metric)
        return greedy_set_cover(masks, full)


@dataclass(frozen=True)
class RateEstimate:
    value: float
    method: str
    residual: float
    last_n: float


@dataclass
class CountTable:
    epsilons: list
    ns: list
    sep: dict
    span_lo: dict
    span_hi: dict
    mode: dict
    tails: dict = field(default_factory=dict)

    def counts(self, eps: float, which: str = "sep") -> list:
        table = {"sep": self.sep, "span_lo": self.span_lo, "span_hi": self.span_hi}[which]
        return [table[(eps, n)] for n in self.ns]

    def rows(self):
        for eps in self.epsilons:
            for n in self.ns:
                yield (eps, n, self.sep[(eps, n)], self.span_lo[(eps, n)],
                       self.span_hi[(eps, n)], self.mode[(eps, n)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epsilon,n,sep,span_lo,span_hi,mode\n")
        for eps, n, s, a, b, mode in self.rows():
            buf.write(f"{eps:.12g},{n},{s},{a},{b},{mode}\n")
        return buf.getvalue()

    @property
    def modes(self) -> set:
        return set(self.mode.values())


def _count_column(system, metric_kind, base, sided, epsilons, n, budget, exact_budget,
                  seed, fraction):
    """All counts for one n over a shared family.

    Greedy sets are built independently per threshold; a set separated at a
    larger threshold is also separated at a smaller one, so each reported
    separated count is the largest set found at or above its threshold, and
    each spanning bound the smallest cover found at or below its radius.
    """
    eps_min = min(epsilons)
    metric = MetricSpec.for_eps(eps_min, metric_kind, base, sided, fraction)
    fam, used = build_family(system, metric, n, budget, seed, exact_budget=exact_budget)
    thresholds = set()
    for e in epsilons:
        thresholds.update((2.0 * e, e, e - fam.tail))
    thresholds = sorted(thresholds, reverse=True)
    raw = {t: len(_greedy_indices(fam, n, t, used)) for t in thresholds}
    packing, best = {}, 0
    for t in thresholds:
        best = max(best, raw[t])
        packing[t] = best
    covering, best = {}, None
    for t in reversed(thresholds):
        best = raw[t] if best is None else min(best, raw[t])
        covering[t] = best
    out = {}
    for e in epsilons:
        out[e] = (packing[e], packing[2.0 * e], covering[e - fam.tail], fam.mode, fam.tail)
    return n, out


def count_table(system: SymbolicSystem, epsilons, ns, metric_kind: str = "geometric-sum",
                base: float = 0.5, budget: int = DEFAULT_BUDGET, seed: int = 0,
                jobs: int = 1, fraction: float = 0.25,
                exact_budget: int | None = None) -> CountTable:
    """Separated and spanning counts on a grid of (eps, n) cells.

    span_lo is the size of a 2eps-separated set (a lower bound on the eps
    spanning number) and span_hi the size of a maximal (eps - tail)-separated
    set, which spans at radius eps.  Both refer to the chosen point family.
    """
    epsilons = sorted((float(e) for e in epsilons), reverse=True)
    ns = sorted(int(n) for n in ns)
    if any(e <= 0 for e in epsilons):
        raise ValueError("epsilons must be positive")
    args = [(system, metric_kind, base, system.sided, epsilons, n, budget, exact_budget,
             seed + n, fraction)
            for n in ns]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(lambda a: _count_column(*a), args))
    else:
        results = [_count_column(*a) for a in args]
    sep, span_lo, span_hi, mode, tails = {}, {}, {}, {}, {}
    for n, col in results:
        for e, (s, a, b, md, tl) in col.items():
            sep[(e, n)], span_lo[(e, n)], span_hi[(e, n)] = s, a, b
            mode[(e, n)], tails[(e, n)] = md, tl
    return CountTable(epsilons, ns, sep, span_lo, span_hi, mode, tails)


def growth_rate(table: CountTable, eps: float, which: str = "sep") -> RateEstimate:
    if len(table.ns) < 3:
        raise InsufficientData("a growth rate needs at least three values of n")
    counts = np.asarray(table.counts(eps, which), dtype=float)
    ns = np.asarray(table.ns, dtype=float)
    slope, _, resid = linear_fit(ns, np.log(counts))
    last = float(np.log(counts[-1]) / ns[-1])
    return RateEstimate(max(slope, 0.0), "slope-regression", resid, last)


@dataclass
class MdimEstimate:
    upper: float
    lower: float
    slope: float
    residual: float
    epsilons: list
    rates: list
    tables: list
    modes: set

    def as_dict(self):
        return {"upper": self.upper, "lower": self.lower, "slope": self.slope,
                "residual": self.residual}


def estimate_mdim(system: SymbolicSystem | None, metric_kind: str = "geometric-sum",
                  epsilons=(2 ** -3, 2 ** -4, 2 ** -5), ns=(1, 2, 3),
                  budget: int = DEFAULT_BUDGET, seed: int = 0, jobs: int = 1,
                  base: float = 0.5, match_resolution: float | None = None,
                  sided: str = "two-sided") -> MdimEstimate:
    """Metric mean dimension from separated-count growth rates over an eps sweep.

    With ``match_resolution=c`` each scale uses its own uniform system with
    round(c/eps) levels, so the quantization never hides structure below eps.
    """
    epsilons = sorted((float(e) for e in epsilons), reverse=True)
    rates, tables, modes = [], [], set()
    for e in epsilons:
        sys_e = system
        if match_resolution is not None:
            sys_e = SymbolicSystem.uniform(max(1, int(round(match_resolution / e))), sided)
        try:
            t = count_table(sys_e, [e], ns, metric_kind, base, budget, seed, jobs)
        except BudgetExhausted as exc:
            raise BudgetExhausted(f"eps={e}: {exc}", partial={"epsilons": epsilons[:len(rates)],
                                                            "rates": rates}) from exc
        rates.append(growth_rate(t, e).value)
        tables.append(t)
        modes |= t.modes
    est = dimension_estimate(epsilons, rates)
    return MdimEstimate(max(est.upper, 0.0), max(est.lower, 0.0), est.slope, est.residual,
                        epsilons, rates, tables, modes)


def interval_cover_count(points, eps: float) -> int:
    """Fewest open eps-balls (centres anywhere on the line) covering a finite set of reals."""
    pts = np.sort(np.asarray(points, dtype=float))
    count, i = 0, 0
    while i < len(pts):
        start = pts[i]
        count += 1
        while i < len(pts) and pts[i] - start < 2.0 * eps:
            i += 1
    return count


@dataclass
class TameGrowthReport:
    epsilons: list
    counts: list
    sequences: dict
    verdicts: dict


def tame_growth_check(system: SymbolicSystem, metric: MetricSpec | None, thetas, epsilons) -> TameGrowthReport:
    """Track eps**theta * log r_1(eps); r_1 covers the level set seen at coordinate 0."""
    epsilons = sorted((float(e) for e in epsilons), reverse=True)
    counts = [interval_cover_count(system.levels, e) for e in epsilons]
    sequences, verdicts = {}, {}
    half = len(epsilons) // 2
    for th in thetas:
        if th <= 0:
            raise ValueError("theta must be positive")
        seq = [e ** th * math.log(c) for e, c in zip(epsilons, counts)]
        tail = seq[half:] if len(seq) > 1 else seq
        sequences[th] = seq
        verdicts[th] = all(b <= a + 1e-15 for a, b in zip(tail, tail[1:]))
    return TameGrowthReport(epsilons, counts, sequences, verdicts)
