"""Grid partitions of the shift, their entropies, dynamical refinements and MRID sweeps.

A grid partition cuts each coordinate in a window into intervals.  Under an
i.i.d. product measure the cells of any such product partition have product
masses, so every entropy below is a sum of one-coordinate entropies.  Mixtures
of two products are handled exactly by summing over type classes.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .dynamics import MetricSpec
from .errors import MixtureNotSupported
from .measures import MeasureModel, entropy
from .scaling import dimension_estimate, running_slopes

MIXTURE_TYPE_CAP = 2_000_000


@dataclass(frozen=True)
class ProductPartition:
    """Independent interval cuts per coordinate: {coordinate: edges}."""

    cuts: tuple  # sorted ((coord, edges_tuple), ...)

    @classmethod
    def from_dict(cls, d: dict):
        return cls(tuple(sorted((int(k), tuple(float(e) for e in v)) for k, v in d.items())))

    def as_dict(self) -> dict:
        return {k: np.asarray(v) for k, v in self.cuts}

    @property
    def cell_count(self) -> int:
        out = 1
        for _, e in self.cuts:
            out *= len(e) - 1
        return out

    def join(self, other: "ProductPartition") -> "ProductPartition":
        a, b = self.as_dict(), other.as_dict()
        out = {}
        for k in set(a) | set(b):
            edges = np.union1d(a.get(k, np.array([0.0, 1.0])), b.get(k, np.array([0.0, 1.0])))
            out[k] = edges
        return ProductPartition.from_dict(out)


@dataclass(frozen=True)
class GridPartition:
    """Uniform grid (or explicit shared edges) on coordinates |j| <= window (0..window one-sided)."""

    window: int
    bins: int
    base: float = 0.5
    sided: str = "two-sided"
    edges: tuple | None = None

    def __post_init__(self):
        if self.window < 0 or self.bins < 1:
            raise ValueError("window must be >= 0 and bins >= 1")

    @classmethod
    def generating(cls, levels, window: int = 0, sided: str = "two-sided", base: float = 0.5):
        """One cell per level, cut at midpoints."""
        lv = np.asarray(levels, dtype=float)
        mids = 0.5 * (lv[1:] + lv[:-1])
        edges = (0.0,) + tuple(mids) + (1.0,)
        return cls(window, len(lv), base, sided, edges)

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.edge_array)))

    @property
    def edge_array(self) -> np.ndarray:
        if self.edges is not None:
            return np.asarray(self.edges)
        return np.linspace(0.0, 1.0, self.bins + 1)

    @property
    def coords(self) -> range:
        lo = -self.window if self.sided == "two-sided" else 0
        return range(lo, self.window + 1)

    @property
    def cell_count(self) -> int:
        return self.bins ** len(self.coords)

    def diameter_bound(self) -> float:
        """Certified bound on the geometric-sum diameter of every cell."""
        metric = MetricSpec("geometric-sum", self.base, self.window, self.sided)
        inside = sum(metric.weight(j) for j in self.coords)
        return self.mesh * inside + metric.tail

    def as_product(self) -> ProductPartition:
        e = tuple(self.edge_array)
        return ProductPartition(tuple((j, e) for j in self.coords))


@dataclass(frozen=True)
class RefinedPartition:
    """The join of T^{-j} P for j < n, itself a grid over a longer coordinate range."""

    base_partition: GridPartition
    n: int

    @property
    def coords(self) -> range:
        c = self.base_partition.coords
        return range(c.start, c.stop + self.n - 1)

    @property
    def cell_count(self) -> int:
        return self.base_partition.bins ** len(self.coords)

    def as_product(self) -> ProductPartition:
        e = tuple(self.base_partition.edge_array)
        return ProductPartition(tuple((j, e) for j in self.coords))


def refine_n(P: GridPartition, n: int) -> RefinedPartition:
    if n < 1:
        raise ValueError("n must be >= 1")
    return RefinedPartition(P, n)


def partition_for_eps(eps: float, base: float = 0.5, sided: str = "two-sided") -> GridPartition:
    """Grid whose certified diameter is at most eps.

    The window takes the smallest w with tail(w) <= eps/2; the mesh is
    eps / (2 * full weight sum), so the inside part costs at most eps/2 for
    every w and the bin count does not jitter with w.
    """
    metric = MetricSpec.for_eps(eps, "geometric-sum", base, sided, fraction=0.5)
    delta = eps / (2.0 * metric.weight_sum)
    bins = int(math.ceil(1.0 / delta - 1e-9))
    return GridPartition(metric.window, bins, base, sided)


def _coordinate_entropy(edges, mu: MeasureModel) -> float:
    return entropy(mu.bin_masses(edges))


def _mixture_entropy(partition: ProductPartition, mu) -> float:
    """Exact entropy of a product partition under a two-component mixture of products.

    Coordinates sharing the same edges are grouped; within a group a cell's mass
    depends only on how many coordinates fall in each bin (its type).
    """
    comps = [(w, c) for w, c in mu.components() if w > 0]
    if len(comps) == 1:
        return partition_entropy(partition, comps[0][1])
    groups = {}
    for _, e in partition.cuts:
        groups[e] = groups.get(e, 0) + 1
    if len(groups) != 1:
        raise MixtureNotSupported("mixture entropy needs identical cuts on every coordinate")
    (edges, L), = groups.items()
    masses = [np.asarray(c.bin_masses(edges)) for _, c in comps]
    live = np.flatnonzero(sum(masses) > 0)
    B = len(live)
    n_types = math.comb(L + B - 1, B - 1)
    if n_types > MIXTURE_TYPE_CAP:
        raise MixtureNotSupported(f"{n_types} type classes exceed the cap")
    logs = []
    for w, m in zip([w for w, _ in comps], masses):
        with np.errstate(divide="ignore"):
            logs.append((math.log(w), np.log(m[live])))
    total = 0.0
    for t in _compositions(L, B):
        t = np.asarray(t)
        log_count = gammaln(L + 1) - np.sum(gammaln(t + 1))
        parts = []
        for lw, lm in logs:
            with np.errstate(invalid="ignore"):
                s = np.sum(np.where(t > 0, t * lm, 0.0))
            parts.append(lw + s)
        lmass = np.logaddexp.reduce(parts)
        if np.isfinite(lmass):
            total -= math.exp(log_count + lmass) * lmass
    return float(total)


def _compositions(L: int, B: int):
    if B == 1:
        yield (L,)
        return
    for k in range(L + 1):
        for rest in _compositions(L - k, B - 1):
            yield (k,) + rest


def partition_entropy(P, mu) -> float:
    """H_mu(P) in nats for a grid, refined grid or product partition."""
    prod = P if isinstance(P, ProductPartition) else P.as_product()
    if getattr(mu, "kind", None) == "mixture":
        return _mixture_entropy(prod, mu)
    return float(sum(_coordinate_entropy(e, mu) for _, e in prod.cuts))


def cell_masses(P, mu) -> np.ndarray:
    """Explicit mass vector over all cells (small partitions only)."""
    prod = P if isinstance(P, ProductPartition) else P.as_product()
    if prod.cell_count > 10 ** 6:
        raise MixtureNotSupported("too many cells to list explicitly")
    out = 0.0
    for w, comp in mu.components():
        m = np.ones(1)
        for _, e in prod.cuts:
            m = np.outer(m, comp.bin_masses(e)).ravel()
        out = out + w * m
    return np.asarray(out)


@dataclass
class EntropySequence:
    ns: list
    values: list
    limit: float
    closed_form: bool


def entropy_rate(P: GridPartition, mu, nmax: int = 8) -> EntropySequence:
    """H(P^n)/n for n = 1..nmax and the rate h_mu(T, P)."""
    ns = list(range(1, nmax + 1))
    if getattr(mu, "kind", None) == "mixture":
        H = [partition_entropy(refine_n(P, n), mu) for n in ns]
        vals = [v / n for v, n in zip(H, ns)]
        # conditional-entropy form H(P^n) - H(P^{n-1}): exact for products,
        # decreasing to the rate for mixtures
        limit = H[-1] - H[-2] if len(H) > 1 else H[-1]
        return EntropySequence(ns, vals, limit, False)
    h = _coordinate_entropy(P.edge_array, mu)
    extra = len(P.coords) - 1
    vals = [(n + extra) * h / n for n in ns]
    return EntropySequence(ns, vals, h, True)


def block_entropy_rate(P: GridPartition, mu, n: int = 1) -> float:
    return partition_entropy(refine_n(P, n), mu) / n


@dataclass
class MridResult:
    lower: float
    upper: float
    slope: float
    epsilons: list
    h: list
    ratios: list
    running: list

    def as_dict(self):
        return {"lower": self.lower, "upper": self.upper, "slope": self.slope}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epsilon,h,ratio,slope_running\n")
        for e, h, r, s in zip(self.epsilons, self.h, self.ratios, self.running):
            buf.write(f"{e:.12g},{h:.12g},{r:.12g},{s:.12g}\n")
        return buf.getvalue()


def grid_entropy_profile(mu, epsilons, base: float = 0.5, sided: str = "two-sided") -> list:
    return [entropy_rate(partition_for_eps(e, base, sided), mu, 1).limit for e in epsilons]


def mrid_estimate(mu, epsilons, base: float = 0.5, sided: str = "two-sided") -> MridResult:
    """Information-dimension estimate from grid-partition entropy rates (upper bounds on the infimum)."""
    epsilons = sorted((float(e) for e in epsilons), reverse=True)
    h = grid_entropy_profile(mu, epsilons, base, sided)
    est = dimension_estimate(epsilons, h)
    ratios = [v / math.log(1.0 / e) for v, e in zip(h, epsilons)]
    return MridResult(est.lower, est.upper, est.slope, epsilons, h, ratios,
                      running_slopes(epsilons, h))
