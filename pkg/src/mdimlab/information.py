"""Mutual information and rate-distortion functions of finite i.i.d. sources.

The solver is Blahut-Arimoto at a fixed slope beta; a target distortion is met
by bisection on log(beta).  Indicator distortions on sorted one-dimensional
alphabets (rho = 1 iff |x - y| >= eps) use window sums, so each iteration is
linear in the alphabet size.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import ba_squarem, ba_window_stats
from .errors import InsufficientData, InvalidDistribution, NoConvergence
from .measures import MeasureModel, entropy
from .scaling import DimensionEstimate, dimension_estimate

BA_TOL = 1e-9
BA_MAX_ITERS = 100_000
BISECT_TOL = 1e-8
PROFILE_TOL = 1e-5
# continuous coordinate laws are binned at spacing eps / QUANT_PER_EPS
QUANT_PER_EPS = 2


# ---------------------------------------------------------------------------
# joint distributions

@dataclass(frozen=True)
class JointDistribution:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or np.any(m < 0) or not np.isfinite(m).all():
            raise InvalidDistribution("a joint must be a nonnegative 2-D array")
        if abs(m.sum() - 1.0) > 1e-12:
            raise InvalidDistribution(f"joint sums to {m.sum()!r}")
        object.__setattr__(self, "matrix", m)

    @property
    def marginal_x(self):
        return self.matrix.sum(axis=1)

    @property
    def marginal_y(self):
        return self.matrix.sum(axis=0)


def joint_entropy(J: JointDistribution) -> float:
    return entropy(J.matrix.ravel())


def mutual_information(J: JointDistribution) -> float:
    """I(X; Y) in nats, summing p log(p / (p_x p_y)) over the support."""
    if not isinstance(J, JointDistribution):
        J = JointDistribution(J)
    P = J.matrix
    px, py = J.marginal_x, J.marginal_y
    mask = P > 0
    outer = np.outer(px, py)
    return max(float(np.sum(P[mask] * np.log(P[mask] / outer[mask]))), 0.0)


# ---------------------------------------------------------------------------
# distortions

@dataclass(frozen=True)
class DistortionMatrix:
    rho: np.ndarray
    kind: str = "custom"
    source_values: tuple | None = None
    repro_values: tuple | None = None
    eps: float | None = None

    def __post_init__(self):
        r = np.asarray(self.rho, dtype=float)
        if np.any(r < 0):
            raise ValueError("distortions must be nonnegative")
        object.__setattr__(self, "rho", r)

    @classmethod
    def hamming(cls, k: int):
        return cls(1.0 - np.eye(k), "hamming")

    @classmethod
    def lp(cls, xs, ys, p: float = 1.0):
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        return cls(np.abs(xs[:, None] - ys[None, :]) ** p, f"lp({p:g})", tuple(xs), tuple(ys))

    @classmethod
    def indicator(cls, xs, ys, eps: float):
        """rho = 1 iff |x - y| >= eps."""
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        rho = (np.abs(xs[:, None] - ys[None, :]) >= eps).astype(float)
        return cls(rho, "indicator", tuple(xs), tuple(ys), float(eps))

    @property
    def windowed(self) -> bool:
        """True when the indicator structure can be exploited by window sums."""
        if self.kind != "indicator" or self.source_values is None:
            return False
        xs, ys = np.asarray(self.source_values), np.asarray(self.repro_values)
        return bool(np.all(np.diff(xs) > 0) and np.all(np.diff(ys) > 0))


# ---------------------------------------------------------------------------
# Blahut-Arimoto backends

@dataclass
class BAResult:
    rate: float
    distortion: float
    beta: float
    iterations: int
    residual: float
    converged: bool
    channel: np.ndarray | None = field(default=None, repr=False)
    q: np.ndarray | None = field(default=None, repr=False)


def _window_ranges(rho: DistortionMatrix):
    xs, ys, eps = np.asarray(rho.source_values), np.asarray(rho.repro_values), rho.eps
    a = np.searchsorted(ys, xs - eps, side="right").astype(np.int64)
    b = np.searchsorted(ys, xs + eps, side="left").astype(np.int64)
    c = np.searchsorted(xs, ys - eps, side="right").astype(np.int64)
    d = np.searchsorted(xs, ys + eps, side="left").astype(np.int64)
    return a, b, c, d


_NO_K = np.zeros((1, 1))
_NO_I = np.zeros(1, dtype=np.int64)


def ba_fixed_beta(p, rho: DistortionMatrix, beta: float, tol: float = BA_TOL,
                  max_iters: int = BA_MAX_ITERS, q0=None,
                  zero_violation: bool = False) -> BAResult:
    """Blahut-Arimoto iterations at slope -beta (or on the zero-distortion support).

    Stops when Blahut's bound gap max_y log c_y - sum_y q_y c_y log c_y falls
    below ``tol``; at that point the returned rate is within the gap of R at
    the returned distortion.
    """
    p = np.ascontiguousarray(p, dtype=float)
    M = rho.rho.shape[1]
    q = np.full(M, 1.0 / M) if q0 is None else np.array(q0, dtype=float)
    q /= q.sum()
    if rho.windowed:
        a, b, c, d = _window_ranges(rho)
        k0 = 0.0 if zero_violation else math.exp(-beta)
        it, gap = ba_squarem(0, p, a, b, c, d, k0, _NO_K, q, tol, max_iters)
        D, plogz = ba_window_stats(p, a, b, k0, q)
        if zero_violation:
            rate = -plogz
        else:
            rate = -beta * D - plogz
        Q = None
        if M * len(p) <= 4_000_000:
            xs, ys = np.asarray(rho.source_values), np.asarray(rho.repro_values)
            K = np.where(np.abs(xs[:, None] - ys[None, :]) < rho.eps, 1.0, k0)
            Q = K * q[None, :]
            Q /= Q.sum(axis=1, keepdims=True)
    else:
        R = rho.rho
        mins = R.min(axis=1)
        if zero_violation:
            K = (R <= mins[:, None] + 1e-12).astype(float)
        else:
            K = np.exp(-beta * (R - mins[:, None]))
        it, gap = ba_squarem(1, p, _NO_I, _NO_I, _NO_I, _NO_I, 0.0, np.ascontiguousarray(K),
                             q, tol, max_iters)
        Zs = K @ q
        live = p > 0
        plogz = float(np.sum(p[live] * np.log(Zs[live])))
        D = float(np.sum(p[live] * ((K * R) @ q)[live] / Zs[live]))
        base = float(np.sum(p * mins))
        rate = -plogz if zero_violation else -beta * (D - base) - plogz
        Q = K * q[None, :]
        Q /= Q.sum(axis=1, keepdims=True)
    return BAResult(max(float(rate), 0.0), float(D), beta, int(it), float(gap), gap < tol, Q, q)


def distortion_range(p, rho: DistortionMatrix):
    """(D_min, D_max): below D_min nothing is feasible, from D_max on the rate is 0."""
    p = np.asarray(p, dtype=float)
    dmin = float(np.sum(p * rho.rho.min(axis=1)))
    dmax = float(np.min(p @ rho.rho))
    return dmin, dmax


def blahut_arimoto(p, rho: DistortionMatrix, D: float, tol: float = BA_TOL,
                   max_iters: int = BA_MAX_ITERS, strict: bool = False,
                   beta_hint: float | None = None) -> BAResult:
    """Single-letter R(D) for source ``p`` and distortion ``rho``.

    The target distortion is met by bisection on log(beta); the returned rate
    adds the tangent correction beta * (D_beta - D), which is exact to first
    order along the curve.  Non-convergence is flagged on the result (or
    raised with ``strict``).
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistribution("source must be a probability vector")
    if D < 0:
        raise ValueError("D must be nonnegative")
    dmin, dmax = distortion_range(p, rho)
    if D >= dmax:
        j = int(np.argmin(p @ rho.rho))
        Q = None
        if isinstance(rho.rho, np.ndarray):
            Q = np.zeros_like(rho.rho)
            Q[:, j] = 1.0
        return BAResult(0.0, dmax, 0.0, 0, 0.0, True, Q)
    if D <= dmin + 1e-15:
        res = ba_fixed_beta(p, rho, math.inf, tol, max_iters, zero_violation=True)
        return _check(res, strict)
    # bracket log(beta) so that D(lo) > D >= D(hi), then Illinois false position
    # start where the optimum is interior (small beta pushes q to the boundary,
    # where the multiplicative update is slow) and walk outwards with warm starts
    lo = hi = 2.0 if not beta_hint else math.log(beta_hint)
    step = 1.0 if not beta_hint else 0.25
    # the bracket is scouted with capped iterations; the root search below
    # runs every solve to full tolerance
    scout = min(max_iters, 2000)
    r_lo = r_hi = ba_fixed_beta(p, rho, math.exp(lo), tol, scout)
    while r_lo.distortion <= D and lo > -20.0:
        hi, r_hi = lo, r_lo
        lo -= step
        r_lo = ba_fixed_beta(p, rho, math.exp(lo), tol, scout, r_hi.q)
    while r_hi.distortion > D and hi < 14.0:
        lo, r_lo = hi, r_hi
        hi += step
        r_hi = ba_fixed_beta(p, rho, math.exp(hi), tol, scout, r_lo.q)
    if not r_hi.converged:
        r_hi = ba_fixed_beta(p, rho, math.exp(hi), tol, max_iters, r_hi.q)
    if r_lo.distortion <= D:
        # D is essentially D_max: the rate is at most beta * (D_max - D)
        best = r_lo
    elif r_hi.distortion > D:
        best = r_hi
    else:
        f_lo, f_hi = r_lo.distortion - D, r_hi.distortion - D
        best = r_hi
        side, steps = 0, 0
        while hi - lo > BISECT_TOL and steps < 200:
            steps += 1
            if f_lo != f_hi:
                mid = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            else:
                mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                mid = 0.5 * (lo + hi)
            warm = r_lo.q if abs(mid - lo) < abs(hi - mid) else r_hi.q
            res = ba_fixed_beta(p, rho, math.exp(mid), tol, max_iters, warm)
            f = res.distortion - D
            best = res
            if abs(f) < 1e-12:
                break
            if f > 0:
                lo, r_lo, f_lo = mid, res, f
                if side == -1:
                    f_hi *= 0.5
                side = -1
            else:
                hi, r_hi, f_hi = mid, res, f
                if side == 1:
                    f_lo *= 0.5
                side = 1
    rate = best.rate + best.beta * (best.distortion - D)
    rate = min(max(rate, 0.0), entropy(p))
    out = BAResult(rate, D, best.beta, best.iterations, best.residual, best.converged,
                   best.channel, best.q)
    return _check(out, strict)


def _check(res: BAResult, strict: bool) -> BAResult:
    if strict and not res.converged:
        raise NoConvergence(f"gap {res.residual:.3g} after {res.iterations} iterations")
    return res


def binary_rd_hamming(p: float, D: float) -> float:
    """Closed form R(D) = H(p) - H(D) for a Bernoulli(p) source with Hamming loss."""
    from .measures import binary_entropy
    if D >= min(p, 1 - p):
        return 0.0
    return binary_entropy(p) - binary_entropy(D)


# ---------------------------------------------------------------------------
# sources and rate-distortion functions of product measures

@dataclass(frozen=True)
class Source:
    values: np.ndarray
    probs: np.ndarray

    @property
    def diameter(self) -> float:
        v = self.values[self.probs > 0]
        return float(v.max() - v.min()) if len(v) else 0.0


def discretize(mu, resolution: float | None = None) -> Source:
    """Finite source for a product measure's coordinate law.

    Level measures keep their alphabet; continuous ones are binned at spacing
    ``resolution`` with cell midpoints as values (atoms keep their position).
    """
    if isinstance(mu, Source):
        return mu
    if isinstance(mu, MeasureModel) and mu.kind == "levels":
        return Source(np.asarray(mu.levels), np.asarray(mu.probs))
    if not isinstance(mu, MeasureModel):
        raise InvalidDistribution("rate-distortion needs a product measure or a Source")
    if resolution is None:
        raise ValueError("continuous sources need a resolution")
    B = int(math.ceil(1.0 / resolution))
    vals = (np.arange(B) + 0.5) / B
    probs = np.full(B, mu.continuous_mass / B)
    for x, w in mu.atoms:
        vals = np.append(vals, x)
        probs = np.append(probs, w)
    order = np.argsort(vals, kind="stable")
    vals, probs = vals[order], probs[order]
    # merge coincident values so the alphabet stays strictly increasing
    uniq, inv = np.unique(vals, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv, probs)
    return Source(uniq, merged)


def _reproduction(src: Source, widen: bool) -> np.ndarray:
    if not widen:
        return src.values
    mids = 0.5 * (src.values[1:] + src.values[:-1])
    return np.sort(np.concatenate([src.values, mids]))


def rd_linf(source, eps: float, s: float, tol: float = BA_TOL, resolution: float | None = None,
            widen: bool = False, beta_hint: float | None = None) -> BAResult:
    """L-infinity rate at scale eps: expected fraction of eps-violations at most s.

    For i.i.d. sources this is the single-letter R(D = s) under the indicator
    distortion of the coordinate-0 gap.
    """
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    if eps <= 0:
        raise ValueError("eps must be positive")
    src = discretize(source, resolution or eps / QUANT_PER_EPS)
    ys = _reproduction(src, widen)
    if s >= 1.0 or eps > src.diameter:
        return BAResult(0.0, 0.0, 0.0, 0, 0.0, True)
    rho = DistortionMatrix.indicator(src.values, ys, eps) if len(src.values) * len(ys) <= 250_000 \
        else _lazy_indicator(src.values, ys, eps)
    # the constraint is a strict inequality; meet it just inside
    return blahut_arimoto(src.probs, rho, max(s - 1e-12, 0.0), tol, beta_hint=beta_hint)


def _lazy_indicator(xs, ys, eps) -> DistortionMatrix:
    """Indicator distortion whose dense matrix is only built on demand (window solver)."""
    d = DistortionMatrix.__new__(DistortionMatrix)
    object.__setattr__(d, "kind", "indicator")
    object.__setattr__(d, "source_values", tuple(xs))
    object.__setattr__(d, "repro_values", tuple(ys))
    object.__setattr__(d, "eps", float(eps))
    object.__setattr__(d, "rho", _IndicatorView(np.asarray(xs), np.asarray(ys), eps))
    return d


class _IndicatorView:
    """Just enough of an ndarray for distortion_range on huge indicator matrices."""

    __array_ufunc__ = None

    def __init__(self, xs, ys, eps):
        self.xs, self.ys, self.eps = xs, ys, eps
        self.shape = (len(xs), len(ys))

    def min(self, axis=None, keepdims=False):
        a = np.searchsorted(self.ys, self.xs - self.eps, side="right")
        b = np.searchsorted(self.ys, self.xs + self.eps, side="left")
        out = (b <= a).astype(float)
        return out[:, None] if keepdims else out

    def __rmatmul__(self, p):
        c = np.searchsorted(self.xs, self.ys - self.eps, side="right")
        d = np.searchsorted(self.xs, self.ys + self.eps, side="left")
        cp = np.concatenate(([0.0], np.cumsum(p)))
        return cp[-1] - (cp[d] - cp[c])


DEFAULT_S_GRID = (0.1, 0.05, 0.02, 0.01, 0.005)


@dataclass
class LimitResult:
    value: float
    envelope: float
    s_grid: list
    rates: list


def rd_linf_limit(source, eps: float, s_grid=DEFAULT_S_GRID, tol: float = BA_TOL,
                  resolution: float | None = None) -> LimitResult:
    """s -> 0 limit: the raw rate at the smallest s, plus an advisory extrapolation.

    The extrapolation continues the last two samples linearly in s*log(1/s)
    (the shape of the Hamming curve near zero) and is clipped below by every
    sampled rate, so it never undercuts the data.
    """
    s_grid = sorted((float(s) for s in s_grid), reverse=True)
    rates = [rd_linf(source, eps, s, tol, resolution).rate for s in s_grid]
    value = rates[-1]
    env = max(rates)
    if len(rates) >= 2:
        u = [s * math.log(1.0 / s) for s in s_grid[-2:]]
        if u[0] != u[1]:
            slope = (rates[-1] - rates[-2]) / (u[1] - u[0])
            env = max(env, rates[-1] - slope * u[1])
    return LimitResult(value, env, s_grid, rates)


def rd_lp(source, eps: float, p: float = 1.0, tol: float = BA_TOL,
          resolution: float | None = None) -> BAResult:
    """L^p rate at scale eps: expected |x - y|^p at most eps^p."""
    src = discretize(source, resolution or eps / (4 * QUANT_PER_EPS))
    rho = DistortionMatrix.lp(src.values, src.values, p)
    return blahut_arimoto(src.probs, rho, eps ** p, tol)


def block_rd(source, rho: DistortionMatrix, D: float, n: int, tol: float = BA_TOL) -> float:
    """Per-symbol R(D) of the n-block product source with additive distortion (n <= 3)."""
    if n > 3:
        raise ValueError("block cross-check is limited to n <= 3")
    src = discretize(source)
    p = src.probs
    N, M = rho.rho.shape
    xs = list(itertools.product(range(N), repeat=n))
    ys = list(itertools.product(range(M), repeat=n))
    pn = np.array([np.prod([p[i] for i in x]) for x in xs])
    R = np.array([[np.mean([rho.rho[a, b] for a, b in zip(x, y)]) for y in ys] for x in xs])
    return blahut_arimoto(pn, DistortionMatrix(R), D, tol).rate / n


# ---------------------------------------------------------------------------
# curves and dimensions

@dataclass
class RDCurve:
    levels: list
    rates: list
    kind: str
    iters: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    aux: float | None = None

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        if header:
            buf.write("level,rate_nats,iters,residual,kind\n")
        for i, (lv, r) in enumerate(zip(self.levels, self.rates)):
            it = self.iters[i] if i < len(self.iters) else 0
            res = self.residuals[i] if i < len(self.residuals) else 0.0
            buf.write(f"{lv:.12g},{r:.12g},{it},{res:.3g},{self.kind}\n")
        return buf.getvalue()


def rd_linf_curve(source, epsilons, s: float = 0.005, tol: float = PROFILE_TOL,
                  resolution: float | None = None) -> RDCurve:
    """R(eps, s) over a sweep; each scale warm-starts the slope search at the previous optimum."""
    epsilons = sorted((float(e) for e in epsilons), reverse=True)
    out, hint = [], None
    for e in epsilons:
        r = rd_linf(source, e, s, tol, resolution, beta_hint=hint)
        out.append(r)
        if r.beta and math.isfinite(r.beta):
            hint = r.beta
    return RDCurve(epsilons, [r.rate for r in out], "linf", [r.iterations for r in out],
                   [r.residual for r in out], s)


def rdim_estimate(curve: RDCurve) -> DimensionEstimate:
    if len(curve.levels) < 3:
        raise InsufficientData("a rate-distortion dimension needs at least three points")
    return dimension_estimate(curve.levels, curve.rates)
