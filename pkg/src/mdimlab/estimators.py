"""Measure-side entropy estimators built on dynamical (Bowen) balls.

Ball masses under product measures are bracketed coordinate by coordinate:
the outer box keeps only the constraints every point of the ball must satisfy
(|y_i - x_i| < eps / weight_i for the nearest time in the window), the inner
box spends a uniform deviation budget c on a finite block of coordinates and
charges the full coordinate span to everything outside it.  For sup-weighted
and coordinate-0 metrics the two coincide and the mass is exact.
"""
from __future__ import annotations

import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .covering import DEFAULT_BUDGET, PointFamily, _greedy_indices, build_family
from .dynamics import IntervalValue, MetricSpec, PointWindow, SymbolicSystem
from .errors import CoverInfeasible, EmptyFilter, InsufficientData, RangeTooSmall
from .partitions import GridPartition
from .scaling import linear_fit

SPAN = 1.0            # coordinates live in [0, 1]
INNER_EXTRA_W = 6     # inner boxes tried: W_min .. W_min + INNER_EXTRA_W
STRICT = 1.0 - 1e-12  # keeps the inner box strictly inside the open ball
MIN_REACH = 40
TYPE_CAP = 1_000_000


# ---------------------------------------------------------------------------
# ball geometry

def _dist(coords: np.ndarray, n: int) -> np.ndarray:
    return np.maximum(0, np.maximum(-coords, coords - (n - 1)))


def outer_radii(metric: MetricSpec, coords, n: int, eps: float) -> np.ndarray:
    """Per-coordinate radii of the outer box (inf where unconstrained)."""
    coords = np.asarray(coords)
    if metric.kind == "coordinate-0":
        inside = (coords >= 0) & (coords <= n - 1)
        return np.where(inside, eps, np.inf)
    d = _dist(coords, n)
    r = eps / metric.base ** d.astype(float)
    if not metric.two_sided:
        r = np.where(coords < 0, np.inf, r)
    return np.where(r > SPAN, np.inf, r)


def outer_reach(metric: MetricSpec, eps: float) -> int:
    """Largest distance from the time window at which the outer box still constrains."""
    if metric.kind == "coordinate-0":
        return 0
    t = 0
    while eps / metric.base ** (t + 1) <= SPAN:
        t += 1
    return t


def _tails(metric: MetricSpec, n: int, W: int):
    """Weight inside and outside the block for each time j < n (geometric-sum)."""
    b = metric.base
    j = np.arange(n, dtype=float)
    right = b ** (n + W - j) / (1 - b)
    if metric.two_sided:
        T = b ** (j + W + 1) / (1 - b) + right
        S = (1 + b) / (1 - b) - T
    else:
        T = right
        S = (1 - b ** (j + 1)) / (1 - b) + b / (1 - b) - T
    return S, T


def inner_boxes(metric: MetricSpec, n: int, eps: float) -> list:
    """Candidate inner boxes [(W, c)] for the geometric-sum metric."""
    if metric.kind != "geometric-sum":
        return []
    W = 0
    while True:
        S, T = _tails(metric, n, W)
        if np.max(SPAN * T) < eps:
            break
        W += 1
    out = []
    for w in range(W, W + INNER_EXTRA_W + 1):
        S, T = _tails(metric, n, w)
        c = float(np.min((eps - SPAN * T) / S)) * STRICT
        if c > 0:
            out.append((w, c))
    return out


def _box_coords(metric: MetricSpec, n: int, W: int) -> np.ndarray:
    lo = -W if metric.two_sided else 0
    return np.arange(lo, n + W)


def _log_product(mu, values: np.ndarray, radii) -> np.ndarray:
    """log of the measure of a product box, for each row of ``values``."""
    parts = []
    for w, comp in mu.components():
        if w <= 0:
            continue
        m = comp.open_ball_mass(values, radii)
        with np.errstate(divide="ignore"):
            parts.append(math.log(w) + np.sum(np.log(m), axis=-1))
    return logsumexp(np.stack(parts), axis=0) if len(parts) > 1 else parts[0]


def ball_log_bounds(mu, values, lo: int, n: int, eps: float, metric: MetricSpec):
    """(log outer, log inner) bounds on mu(B_n(x, eps)) for each row x of ``values``.

    Column c of ``values`` is coordinate ``lo + c``.  Outer constraints on
    coordinates outside the given block are dropped (still an outer bound);
    inner boxes that do not fit in the block are skipped.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    L = values.shape[1]
    coords = lo + np.arange(L)
    if lo > 0 or lo + L - 1 < n - 1:
        raise RangeTooSmall(f"block [{lo}, {lo + L - 1}] does not cover [0, {n - 1}]")
    radii = outer_radii(metric, coords, n, eps)
    sel = np.isfinite(radii)
    if np.any(sel):
        log_out = _log_product(mu, values[:, sel], radii[sel])
    else:
        log_out = np.zeros(values.shape[0])
    if metric.kind != "geometric-sum":
        reach = outer_reach(metric, eps)
        need_lo = -reach if metric.two_sided else 0
        if metric.kind == "coordinate-0":
            need_lo, need_hi = 0, n - 1
        else:
            need_hi = n - 1 + reach
        if lo > need_lo or lo + L - 1 < need_hi:
            raise RangeTooSmall("block too short for an exact ball mass")
        return log_out, log_out.copy()
    best = np.full(values.shape[0], -np.inf)
    for W, c in inner_boxes(metric, n, eps):
        bc = _box_coords(metric, n, W)
        if bc[0] < lo or bc[-1] > lo + L - 1:
            continue
        cols = bc - lo
        best = np.maximum(best, _log_product(mu, values[:, cols], np.full(len(cols), c)))
    return log_out, np.minimum(best, log_out)


def required_reach(metric: MetricSpec, n: int, eps: float) -> int:
    """Coordinates beyond the time window a sample must carry for tight bounds."""
    r = outer_reach(metric, eps)
    boxes = inner_boxes(metric, n, eps)
    if boxes:
        r = max(r, boxes[-1][0])
    return r


# ---------------------------------------------------------------------------
# Brin-Katok

@dataclass(frozen=True)
class LocalEntropySample:
    x_id: int
    n: int
    eps: float
    value: IntervalValue
    zero_measure: bool = False


def bk_local(mu, x: PointWindow, n: int, eps: float, metric: MetricSpec | None = None,
             x_id: int = 0) -> LocalEntropySample:
    """-(1/n) log mu(B_n(x, eps)) bracketed by the outer and inner ball masses."""
    metric = metric or MetricSpec()
    lo_out, lo_in = ball_log_bounds(mu, x.values()[None, :], x.lo, n, eps, metric)
    a, b = float(-lo_out[0] / n), float(-lo_in[0] / n)
    a, b = (0.0 if a <= 0 else a), (0.0 if b <= 0 else b)
    if math.isinf(a):
        return LocalEntropySample(x_id, n, eps, IntervalValue(math.inf, math.inf), True)
    return LocalEntropySample(x_id, n, eps, IntervalValue(a, b))


@dataclass
class BKResult:
    eps: float
    n: int
    samples: int
    lower: float
    upper: float
    mean: float
    stderr: float
    lower_stderr: float
    upper_stderr: float

    def as_dict(self):
        return {k: getattr(self, k) for k in ("eps", "n", "samples", "lower", "upper",
                                              "mean", "stderr")}


def _sample_block(mu, rng, rows: int, n: int, reach: int, sided: str):
    lo = -reach if sided == "two-sided" else 0
    L = n + reach - lo
    return lo, mu.sample_values(rng, (rows, L))


def _batches(samples: int, batch: int) -> list:
    sizes = [batch] * (samples // batch)
    if samples % batch:
        sizes.append(samples % batch)
    return sizes


def bk_profile(mu, epsilons, n: int = 64, samples: int = 500, seed: int = 0,
               metric: MetricSpec | None = None, jobs: int = 1, batch: int = 100) -> list:
    """bk_entropy at every eps, evaluated on one common set of sampled points."""
    metric = metric or MetricSpec()
    epsilons = [float(e) for e in epsilons]
    reach = max(MIN_REACH, max(required_reach(metric, n, e) for e in epsilons))
    sizes = _batches(samples, batch)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(k):
        rng = np.random.default_rng(seeds[k])
        lo, vals = _sample_block(mu, rng, sizes[k], n, reach, metric.sided)
        out = []
        for e in epsilons:
            a, b = ball_log_bounds(mu, vals, lo, n, e, metric)
            out.append((-a / n, -b / n))
        return out

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    results = []
    for i, e in enumerate(epsilons):
        lo_v = np.maximum(np.concatenate([p[i][0] for p in parts]), 0.0)
        hi_v = np.maximum(np.concatenate([p[i][1] for p in parts]), 0.0)
        mid = 0.5 * (lo_v + hi_v)
        k = len(mid)
        se = (lambda v: float(np.std(v, ddof=1) / math.sqrt(k)) if k > 1 else 0.0)
        results.append(BKResult(e, n, k, float(lo_v.mean()), float(hi_v.mean()),
                                float(mid.mean()), se(mid), se(lo_v), se(hi_v)))
    return results


def bk_entropy(mu, eps: float, n: int = 64, samples: int = 500, seed: int = 0,
               metric: MetricSpec | None = None, jobs: int = 1) -> BKResult:
    """Monte Carlo mean of the local entropy at points drawn from mu."""
    return bk_profile(mu, [eps], n, samples, seed, metric, jobs)[0]


# ---------------------------------------------------------------------------
# Katok

def _bowen_lo(a: np.ndarray, b: np.ndarray, W: np.ndarray, use_max: bool) -> np.ndarray:
    """Truncated Bowen distances between rows of a (K, L) and one window b (L,)."""
    diff = np.abs(a - b[None, :])
    if use_max:
        return np.max(diff[:, None, :] * W[None, :, :], axis=(1, 2))
    return np.max(diff @ W.T, axis=1)


def _window_metric(metric: MetricSpec, lo: int, hi: int, n: int) -> MetricSpec:
    if metric.kind == "coordinate-0":
        return metric
    w = hi - (n - 1)
    if metric.two_sided:
        w = min(w, -lo)
    if w < 0:
        raise RangeTooSmall(f"windows [{lo}, {hi}] do not cover [0, {n - 1}]")
    return metric.with_window(w)


@dataclass
class KatokCover:
    count: int
    mass: float
    exact: bool
    chosen: list
    disjoint: bool


def _best_subset(cover_fn, k_total: int, need: float):
    for k in range(1, k_total + 1):
        for combo in itertools.combinations(range(k_total), k):
            m = cover_fn(combo)
            if m > need:
                return list(combo), m
    return None, None


def katok_cover(mu, n: int, eps: float, delta: float, candidates, metric: MetricSpec | None = None,
                method: str = "auto", mc_samples: int = 4000, seed: int = 0) -> KatokCover:
    """Fewest candidate balls B_n(x, eps) whose union has mass above 1 - delta.

    Ball masses use the certified inner bound.  When the candidates are
    pairwise (n, 2 eps)-separated the balls are disjoint and union masses add;
    otherwise union masses come from a seeded Monte Carlo sample of mu.
    """
    metric = metric or MetricSpec()
    cands = list(candidates)
    if not cands:
        raise CoverInfeasible("no candidates", 0.0)
    lo, hi = cands[0].range
    vals = np.array([c.values() for c in cands])
    _, log_in = ball_log_bounds(mu, vals, lo, n, eps, metric)
    masses = np.exp(log_in)
    wm = _window_metric(metric, lo, hi, n)
    Wm = wm.weight_matrix(n, lo, hi - lo + 1)
    use_max = metric.kind == "sup-weighted"
    need = 1.0 - delta
    disjoint = True
    for i in range(len(cands)):
        if len(cands) > 1 and np.min(np.delete(_bowen_lo(vals, vals[i], Wm, use_max), i)) < 2 * eps:
            disjoint = False
            break
    exact = method == "exact" or (method == "auto" and len(cands) <= 20)
    if disjoint:
        order = np.argsort(-masses, kind="stable")
        total = float(np.sum(masses))
        if not total > need:
            raise CoverInfeasible(f"candidate balls reach mass {total:.6g} <= {need:.6g}", total)
        acc = np.cumsum(masses[order])
        k = int(np.searchsorted(acc, need, side="right")) + 1
        # for disjoint balls the k heaviest give the largest k-union, so greedy is exact
        return KatokCover(k, float(acc[k - 1]), True, sorted(order[:k].tolist()), True)
    rng = np.random.default_rng(seed)
    ys = mu.sample_values(rng, (mc_samples, hi - lo + 1))
    member = np.stack([_bowen_lo(ys, v, Wm, use_max) + wm.tail < eps for v in vals])
    frac = lambda rows: float(np.mean(np.any(member[list(rows)], axis=0)))
    total = frac(range(len(cands)))
    if not total > need:
        raise CoverInfeasible(f"candidate balls reach mass {total:.6g} <= {need:.6g}", total)
    if exact:
        chosen, m = _best_subset(frac, len(cands), need)
        return KatokCover(len(chosen), m, True, chosen, False)
    chosen, covered = [], np.zeros(mc_samples, bool)
    while covered.mean() <= need:
        gain = [np.sum(member[i] & ~covered) if i not in chosen else -1 for i in range(len(cands))]
        i = int(np.argmax(gain))
        chosen.append(i)
        covered |= member[i]
    return KatokCover(len(chosen), float(covered.mean()), False, sorted(chosen), False)


def katok_complexity(mu, n: int, eps: float, delta: float, candidates,
                     metric: MetricSpec | None = None, method: str = "auto",
                     mc_samples: int = 4000, seed: int = 0) -> int:
    """Upper bound on the Katok cover number R(n, eps, delta) over the candidate centres."""
    return katok_cover(mu, n, eps, delta, candidates, metric, method, mc_samples, seed).count


def _support(mu):
    lv = np.asarray(mu.levels)
    pr = np.asarray(mu.probs)
    keep = pr > 0
    return lv[keep], pr[keep]


def _pin_or_free(r: float, gap: float, span: float):
    if r <= gap:
        return "pin"
    if r > span:
        return "free"
    return None


def cylinder_lengths(mu, n: int, eps: float, metric: MetricSpec):
    """(outer, inner) cylinder lengths when every ball constraint pins or frees a coordinate.

    Balls sit inside cylinders of the outer length and contain cylinders of
    the inner length; returns None when some coordinate is only partly
    constrained.
    """
    if getattr(mu, "kind", None) != "levels":
        return None
    lv, _ = _support(mu)
    if len(lv) < 2:
        return 0, 0  # every ball around a support point carries the full mass
    gap = float(np.min(np.diff(np.sort(lv))))
    span = float(lv.max() - lv.min())
    sides = 2 if metric.two_sided else 1
    st = _pin_or_free(eps, gap, span)
    if st is None:
        return None
    if st == "free":
        return 0, 0
    L_out = n
    if metric.kind != "coordinate-0":
        t = 1
        while True:
            st = _pin_or_free(eps / metric.base ** t, gap, span)
            if st is None:
                return None
            if st == "free":
                break
            L_out += sides
            t += 1
    if metric.kind != "geometric-sum":
        return L_out, L_out
    boxes = inner_boxes(metric, n, eps)
    if any(c > span for _, c in boxes):
        return L_out, 0
    W = boxes[0][0]
    return L_out, n + sides * W


def log_top_cylinders(mu, L: int, delta: float) -> float:
    """log of the fewest length-L cylinders whose total mass exceeds 1 - delta."""
    if L == 0:
        return 0.0
    _, pr = _support(mu)
    vals, counts = np.unique(np.round(pr, 15), return_counts=True)
    vals, counts = vals[::-1], counts[::-1]
    need = 1.0 - delta
    if len(vals) == 1:
        lw = L * math.log(vals[0])
        k = math.floor(need * math.exp(-lw) * (1 + 1e-15)) + 1 if -lw < 700 else None
        return math.log(k) if k is not None else math.log(need) - lw
    if len(vals) > 2:
        raise ValueError("cylinder counting supports at most two distinct probabilities")
    (a, b), (na, nb) = vals, counts
    k = np.arange(L + 1)
    log_word = (L - k) * math.log(a) + k * math.log(b)
    log_mult = gammaln(L + 1) - gammaln(k + 1) - gammaln(L - k + 1) \
        + (L - k) * math.log(na) + k * math.log(nb)
    mass = np.exp(log_mult + log_word)
    cum = np.cumsum(mass)
    K = int(np.searchsorted(cum, need, side="right"))
    K = min(K, L)
    rem = need - (cum[K - 1] if K > 0 else 0.0)
    log_part = math.log(max(rem, 1e-300)) - log_word[K]
    if log_part < 30:
        log_part = math.log(math.floor(math.exp(log_part)) + 1)
    if K == 0:
        return log_part
    return float(np.logaddexp(logsumexp(log_mult[:K]), log_part))


@dataclass
class KatokResult:
    eps: float
    deltas: list
    ns: list
    lower_rates: list
    upper_rates: list
    rates: list
    delta_limit: float
    method: str
    monotone: bool
    raw_rates: list = field(default_factory=list)

    def rate(self, delta: float) -> float:
        return self.rates[self.deltas.index(delta)]


def _slope(ns, ys) -> float:
    if len(ns) < 2:
        return float(ys[0]) / ns[0]
    return linear_fit(ns, ys)[0]


def katok_entropy(mu, eps: float, delta_grid=(0.5, 0.2, 0.1, 0.05), nlist=(1024, 2048, 4096),
                  metric: MetricSpec | None = None, samples: int = 400, seed: int = 0,
                  method: str = "auto", reach: int | None = None) -> KatokResult:
    """Growth rate of the Katok cover numbers for each delta.

    Exact cylinder counting is used when every ball constraint pins or frees
    a coordinate and the measure has at most two distinct letter masses;
    otherwise the cover numbers are bracketed from Monte Carlo quantiles of
    the outer mass at 2 eps (lower) and the inner mass at eps / 2 (upper).
    """
    metric = metric or MetricSpec()
    deltas = sorted((float(d) for d in delta_grid), reverse=True)
    if any(not 0 < d < 1 for d in deltas):
        raise ValueError("delta must lie in (0, 1)")
    ns = [int(n) for n in nlist]
    structured = None
    if method in ("auto", "cylinders"):
        try:
            structured = [cylinder_lengths(mu, n, eps, metric) for n in ns]
            if any(s is None for s in structured):
                structured = None
            else:
                log_top_cylinders(mu, 1, 0.5)
        except ValueError:
            structured = None
        if method == "cylinders" and structured is None:
            raise ValueError("cylinder counting does not apply to this measure and scale")
    lower, upper = [], []
    if structured is not None:
        used = "cylinders"
        # balls sit between cylinders of length n + const, so the growth in n is
        # the growth in cylinder length; regressing on the lengths themselves
        # keeps the eps-dependent constant out of the slope
        for d in deltas:
            lower.append(_slope(ns, [log_top_cylinders(mu, n if lo else 0, d)
                                     for n, (lo, _) in zip(ns, structured)]))
            upper.append(_slope(ns, [log_top_cylinders(mu, n if hi else 0, d)
                                     for n, (_, hi) in zip(ns, structured)]))
    else:
        used = "quantiles"
        lo_logs = {d: [] for d in deltas}
        hi_logs = {d: [] for d in deltas}
        seeds = np.random.SeedSequence(seed).spawn(len(ns))
        for n, ss in zip(ns, seeds):
            need = max(required_reach(metric, n, eps / 2), outer_reach(metric, 2 * eps))
            rch = max(need, MIN_REACH if reach is None else reach)
            rng = np.random.default_rng(ss)
            lo, vals = _sample_block(mu, rng, samples, n, rch, metric.sided)
            l_out = -ball_log_bounds(mu, vals, lo, n, 2 * eps, metric)[0] / n
            l_in = -ball_log_bounds(mu, vals, lo, n, eps / 2, metric)[1] / n
            for d in deltas:
                eta = (1 - d) / 2
                t = float(np.quantile(l_out, (1 - d) / 2, method="lower"))
                tp = float(np.quantile(l_in, 1 - d / 2, method="higher"))
                lo_logs[d].append(math.log(eta) + n * max(t, 0.0))
                hi_logs[d].append(n * max(tp, 0.0))
        for d in deltas:
            lower.append(_slope(ns, lo_logs[d]))
            upper.append(_slope(ns, hi_logs[d]))
    raw = [0.5 * (a + b) for a, b in zip(lower, upper)]
    monotone = all(b >= a - 1e-6 for a, b in zip(raw, raw[1:]))
    # the sampled brackets are noisy in delta; the cover numbers themselves are
    # monotone, so the quantile path reports the running max as delta shrinks
    rates = list(np.maximum.accumulate(raw)) if used == "quantiles" else raw
    rates = [float(v) for v in rates]
    return KatokResult(float(eps), deltas, ns, lower, upper, rates, rates[-1], used,
                       monotone or used == "quantiles", raw)


# ---------------------------------------------------------------------------
# empirical measures and Pfister-Sullivan

def reference_partition(levels) -> GridPartition:
    """Generating level partition at coordinate 0."""
    return GridPartition.generating(levels, 0)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """(1/n) sum_{j<n} delta_{T^j x} pushed through the coordinate-0 level partition."""

    x: PointWindow
    n: int
    histogram: tuple = field(default=())

    @classmethod
    def of(cls, x: PointWindow, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        syms = np.array([x.symbol(j) for j in range(n)])
        h = np.bincount(syms, minlength=len(x.levels)) / n
        return cls(x, n, tuple(float(v) for v in h))

    def distance(self, ref) -> float:
        """Total-variation distance to a reference histogram."""
        return 0.5 * float(np.sum(np.abs(np.asarray(self.histogram) - np.asarray(ref))))


def reference_histogram(mu, levels) -> np.ndarray:
    return np.asarray(mu.bin_masses(reference_partition(levels).edge_array))


def _tv_rows(codes: np.ndarray, m: int, ref: np.ndarray) -> np.ndarray:
    n = codes.shape[1]
    h = np.stack([np.sum(codes == k, axis=1) for k in range(m)], axis=1) / n
    return 0.5 * np.sum(np.abs(h - ref[None, :]), axis=1)


def _compositions(n: int, m: int):
    if m == 1:
        yield (n,)
        return
    for k in range(n + 1):
        for rest in _compositions(n - k, m - 1):
            yield (k,) + rest


def filtered_word_log_count(n: int, ref, r: float) -> float:
    """log #{words of length n whose letter frequencies lie within TV r of ref}."""
    ref = np.asarray(ref, dtype=float)
    m = len(ref)
    if math.comb(n + m - 1, m - 1) > TYPE_CAP:
        raise InsufficientData("too many type classes to enumerate")
    tol = r + 1e-12
    if m == 2:
        k = np.arange(n + 1)
        tv = np.abs(k / n - ref[1])
        lc = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        sel = tv <= tol
        return float(logsumexp(lc[sel])) if np.any(sel) else -math.inf
    out = []
    for t in _compositions(n, m):
        t = np.asarray(t)
        if 0.5 * np.sum(np.abs(t / n - ref)) <= tol:
            out.append(gammaln(n + 1) - np.sum(gammaln(t + 1)))
    return float(logsumexp(out)) if out else -math.inf


@dataclass
class PSResult:
    eps: float
    r: float
    ns: list
    log_counts: list
    rate: float
    residual: float
    method: str


def ps_counts(system: SymbolicSystem, mu, n: int, eps: float, r: float,
              metric: MetricSpec | None = None, budget: int = DEFAULT_BUDGET,
              seed: int = 0) -> tuple:
    """(count, mode) of a greedy (n, eps)-separated set among windows whose
    empirical measure is within TV r of mu's reference histogram."""
    metric = metric or MetricSpec()
    m_eps = MetricSpec.for_eps(eps, metric.kind, metric.base, metric.sided)
    fam, used = build_family(system, m_eps, n, budget, seed)
    ref = reference_histogram(mu, system.levels)
    lo = fam.lo
    body = fam.codes[:, -lo:-lo + n] if lo < 0 else fam.codes[:, :n]
    keep = np.ones(len(fam), bool) if r >= 1 else _tv_rows(body, system.m, ref) <= r + 1e-12
    if not np.any(keep):
        raise EmptyFilter(f"no window of length {n} has empirical measure within {r} of mu")
    sub = PointFamily(fam.codes[keep], fam.lo, fam.levels, fam.mode, fam.tail)
    return len(_greedy_indices(sub, n, eps, used)), fam.mode


def ps_entropy(mu, eps: float, r: float = 0.05, nlist=(16, 24, 32),
               system: SymbolicSystem | None = None, metric: MetricSpec | None = None,
               budget: int = DEFAULT_BUDGET, seed: int = 0, method: str = "auto") -> PSResult:
    """Growth rate of separated sets among points whose empirical measure is near mu.

    When eps is at most the level gap, distinct words on the time window are
    (n, eps)-separated, so on the slice family the greedy count equals the
    number of filtered words; that number is summed over type classes
    (``method="types"``).  Otherwise windows are enumerated or sampled and
    filtered explicitly (``method="greedy"``).
    """
    if r <= 0:
        raise ValueError("filter radius r must be positive")
    metric = metric or MetricSpec()
    if system is None:
        if getattr(mu, "kind", None) != "levels":
            raise ValueError("a symbolic system is needed for measures off the level grid")
        system = SymbolicSystem(tuple(sorted(mu.levels)), metric.sided)
    ns = [int(n) for n in nlist]
    ref = reference_histogram(mu, system.levels)
    use_types = method == "types" or (method == "auto" and eps <= system.min_gap)
    logs = []
    if use_types:
        if eps > system.min_gap:
            raise ValueError("type counting needs eps at or below the level gap")
        for n in ns:
            v = n * math.log(system.m) if r >= 1 else filtered_word_log_count(n, ref, r)
            if not math.isfinite(v):
                raise EmptyFilter(f"no word of length {n} is within {r} of mu")
            logs.append(v)
        used = "types"
    else:
        for n in ns:
            c, _ = ps_counts(system, mu, n, eps, r, metric, budget, seed)
            logs.append(math.log(c))
        used = "greedy"
    if len(ns) >= 2:
        slope, _, resid = linear_fit(ns, logs)
    else:
        slope, resid = logs[0] / ns[0], 0.0
    return PSResult(float(eps), float(r), ns, logs, slope, resid, used)


# ---------------------------------------------------------------------------
# CSV

@dataclass
class EstimatorRecord:
    estimator: str
    mu: str
    epsilon: float
    aux: float
    value: float
    stderr: float = 0.0


def estimator_csv(records) -> str:
    buf = io.StringIO()
    buf.write("estimator,mu,epsilon,aux,value,stderr\n")
    for r in records:
        buf.write(f"{r.estimator},{r.mu},{r.epsilon:.12g},{r.aux:.12g},{r.value:.12g},{r.stderr:.12g}\n")
    return buf.getvalue()
