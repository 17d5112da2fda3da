"""Candidate profiles F(mu, eps) and the measure-side dimension built from them.

A candidate is any eps-indexed entropy functional that increases as eps
shrinks; its growth against log(1/eps) gives a measure-theoretic metric mean
dimension.  Families are finite, so every "max" below is a family max.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


from .dynamics import MetricSpec
from .errors import MdimError, MixtureNotSupported
from .estimators import bk_profile, katok_entropy
from .information import DEFAULT_S_GRID, PROFILE_TOL, rd_linf_curve
from .measures import MeasureFamily, MeasureModel
from .partitions import entropy_rate, partition_entropy, partition_for_eps
from .scaling import dimension_estimate

CANDIDATE_KINDS = ("katok-upper", "katok-lower", "bk-upper", "bk-lower", "rd-linf", "mrid-grid")
MONOTONE_SLACK = 1e-6
DIM_TOL = 0.05


class ProfileNotMonotone(MdimError):
    pass


@dataclass(frozen=True)
class CandidateSettings:
    metric: MetricSpec = field(default_factory=MetricSpec)
    bk_n: int = 64
    bk_samples: int = 500
    katok_nlist: tuple = (1024, 2048, 4096)
    katok_deltas: tuple = (0.5, 0.2, 0.1, 0.05)
    katok_samples: int = 200
    rd_s: float = min(DEFAULT_S_GRID)
    rd_tol: float = PROFILE_TOL
    mrid_nmax: int = 4
    seed: int = 0
    jobs: int = 1


@dataclass
class CandidateProfile:
    measure_id: str
    kind: str
    samples: list  # (eps, value), eps decreasing

    def __post_init__(self):
        if self.kind not in CANDIDATE_KINDS:
            raise ValueError(f"unknown candidate kind {self.kind!r}")
        self.samples = sorted(((float(e), float(v)) for e, v in self.samples), key=lambda t: -t[0])

    @property
    def epsilons(self) -> list:
        return [e for e, _ in self.samples]

    @property
    def values(self) -> list:
        return [v for _, v in self.samples]

    def violations(self, slack: float = MONOTONE_SLACK) -> list:
        """(eps, drop) wherever the value falls as eps shrinks, or goes negative."""
        out = [(e, v) for e, v in self.samples if v < -slack]
        for (e0, v0), (e1, v1) in zip(self.samples, self.samples[1:]):
            if v1 < v0 - slack:
                out.append((e1, v0 - v1))
        return out

    def is_monotone(self, slack: float = MONOTONE_SLACK) -> bool:
        return not self.violations(slack)


def measure_name(mu) -> str:
    return getattr(mu, "name", "mu")


# upper and lower variants share one evaluation
@lru_cache(maxsize=256)
def _bk_cached(mu, eps_grid: tuple, st: CandidateSettings):
    return bk_profile(mu, list(eps_grid), st.bk_n, st.bk_samples, st.seed, st.metric)


@lru_cache(maxsize=1024)
def _katok_cached(mu, eps: float, st: CandidateSettings):
    return katok_entropy(mu, eps, st.katok_deltas, st.katok_nlist, st.metric,
                         st.katok_samples, st.seed)


def _profile_values(mu, kind: str, eps_grid: list, st: CandidateSettings) -> list:
    mixture = getattr(mu, "kind", None) == "mixture"
    if kind == "mrid-grid":
        return [entropy_rate(partition_for_eps(e, st.metric.base, st.metric.sided), mu,
                             st.mrid_nmax if mixture else 1).limit for e in eps_grid]
    if kind in ("bk-upper", "bk-lower"):
        res = _bk_cached(mu, tuple(eps_grid), st)
        return [r.upper if kind == "bk-upper" else r.lower for r in res]
    if kind in ("katok-upper", "katok-lower"):
        out = []
        for e in eps_grid:
            k = _katok_cached(mu, e, st)
            i = len(k.deltas) - 1
            out.append(k.upper_rates[i] if kind == "katok-upper" else k.lower_rates[i])
        # cover numbers grow as eps shrinks: a lower bound at a larger eps still
        # bounds every smaller eps, an upper bound at a smaller eps every larger one
        if kind == "katok-lower":
            return [float(v) for v in np.maximum.accumulate(out)]
        return [float(v) for v in np.minimum.accumulate(out[::-1])[::-1]]
    if kind == "rd-linf":
        if mixture:
            raise MixtureNotSupported("the single-letter rate-distortion reduction needs a product measure")
        return list(rd_linf_curve(mu, eps_grid, st.rd_s, st.rd_tol).rates)
    raise ValueError(f"unknown candidate kind {kind!r}")


def candidate_profile(mu, kind: str, eps_grid, settings: CandidateSettings | None = None,
                      check: bool = True) -> CandidateProfile:
    """Evaluate F(mu, eps) over the grid; non-monotone output is a construction error."""
    st = settings or CandidateSettings()
    eps_grid = sorted((float(e) for e in eps_grid), reverse=True)
    vals = _profile_values(mu, kind, eps_grid, st)
    prof = CandidateProfile(measure_name(mu), kind, list(zip(eps_grid, vals)))
    if check and not prof.is_monotone():
        raise ProfileNotMonotone(f"{kind} profile of {prof.measure_id} drops: {prof.violations()}")
    return prof


@dataclass(frozen=True)
class MeasureDim:
    upper: float
    lower: float
    slope: float

    def as_dict(self):
        return {"upper": self.upper, "lower": self.lower, "slope": self.slope}


def measure_mdim(profile: CandidateProfile) -> MeasureDim:
    est = dimension_estimate(profile.epsilons, profile.values)
    return MeasureDim(est.upper, est.lower, est.slope)


# ---------------------------------------------------------------------------
# family search

@dataclass
class MemberResult:
    name: str
    params: dict
    upper: float
    lower: float
    slope: float
    maximal_upper: bool
    maximal_lower: bool
    profile: CandidateProfile | None = None

    def as_dict(self):
        return {"name": self.name, "params": self.params, "upper": self.upper,
                "lower": self.lower, "slope": self.slope,
                "maximalUpper": self.maximal_upper, "maximalLower": self.maximal_lower}


@dataclass
class SearchReport:
    family: str
    kind: str
    members: list
    geometric_target: float
    tol: float
    empty: bool = False

    @property
    def family_max(self) -> float:
        return max((m.slope for m in self.members), default=0.0)

    @property
    def argmax(self) -> list:
        best = self.family_max
        return [m.name for m in self.members if m.slope >= best - 1e-12]

    @property
    def attains(self) -> bool:
        return (not self.empty) and abs(self.family_max - self.geometric_target) <= self.tol

    def as_dict(self):
        return {"family": self.family, "candidateKind": self.kind,
                "members": [m.as_dict() for m in self.members],
                "geometricTarget": self.geometric_target,
                "familyMax": self.family_max, "argmax": self.argmax,
                "attains": self.attains, "tol": self.tol, "emptyFamily": self.empty}


def _target_pair(target) -> tuple:
    if isinstance(target, (int, float)):
        return float(target), float(target)
    if isinstance(target, dict):
        return float(target.get("upper", target["slope"])), float(target.get("lower", target["slope"]))
    return float(target[0]), float(target[1])


def family_profiles(family: MeasureFamily, kind: str, eps_grid,
                    settings: CandidateSettings | None = None) -> list:
    st = settings or CandidateSettings()
    members = list(family.members)
    if st.jobs > 1 and len(members) > 1:
        with ThreadPoolExecutor(st.jobs) as ex:
            return list(ex.map(lambda mu: candidate_profile(mu, kind, eps_grid, st), members))
    return [candidate_profile(mu, kind, eps_grid, st) for mu in members]


def maximal_measure_search(family: MeasureFamily, kind: str, eps_grid, geometric_target,
                           settings: CandidateSettings | None = None, tol: float = DIM_TOL,
                           profiles: list | None = None) -> SearchReport:
    """Family member(s) with the largest measure-side dimension, and whether they reach the target.

    Dimensions compare by regression slope; ``geometric_target`` is a number
    or an {upper, lower, slope} mapping.
    """
    t_up, t_lo = _target_pair(geometric_target)
    members = list(family.members)
    if not members:
        return SearchReport(family.name, kind, [], t_up, tol, empty=True)
    profiles = profiles or family_profiles(family, kind, eps_grid, settings)
    out = []
    for mu, prof in zip(members, profiles):
        d = measure_mdim(prof)
        out.append(MemberResult(measure_name(mu), mu.param_dict(), d.upper, d.lower, d.slope,
                                d.slope >= t_up - tol, d.slope >= t_lo - tol, prof))
    return SearchReport(family.name, kind, out, t_up, tol)


# ---------------------------------------------------------------------------
# convexity and containment

@dataclass
class ConvexityReport:
    kind: str
    rows: list  # (p, eps, mixture value, weighted average, slack)
    tol: float

    @property
    def min_slack(self) -> float:
        return min(r[4] for r in self.rows)

    @property
    def verdict(self) -> bool:
        return self.min_slack >= -self.tol


CONVEX_KINDS = CANDIDATE_KINDS + ("partition-entropy",)


def _mixture(mu1, mu2, p):
    from .measures import MixtureModel
    if p == 1.0:
        return mu1
    if p == 0.0:
        return mu2
    return MixtureModel(mu1, mu2, p, name=f"mix({p:g})")


def _single_values(mu, kind, eps_grid, st, partition):
    if kind == "partition-entropy":
        return [partition_entropy(partition if partition is not None
                                  else partition_for_eps(e, st.metric.base, st.metric.sided), mu)
                for e in eps_grid]
    return _profile_values(mu, kind, eps_grid, st)


def convexity_check(mu1, mu2, p_grid, kind: str, eps_grid, settings: CandidateSettings | None = None,
                    tol: float = 0.02, partition=None) -> ConvexityReport:
    """Signed slack F(p mu1 + (1-p) mu2) - [p F(mu1) + (1-p) F(mu2)] on a (p, eps) grid.

    ``partition-entropy`` evaluates the static entropy H_mu(P) of ``partition``
    (default: the grid partition for each eps); the other kinds use the
    candidate profiles, with mixtures evaluated as explicit two-component
    mixtures.
    """
    if kind not in CONVEX_KINDS:
        raise ValueError(f"unknown candidate kind {kind!r}")
    st = settings or CandidateSettings()
    eps_grid = sorted((float(e) for e in eps_grid), reverse=True)
    f1 = _single_values(mu1, kind, eps_grid, st, partition)
    f2 = _single_values(mu2, kind, eps_grid, st, partition)
    rows = []
    for p in p_grid:
        p = float(p)
        if mu1 == mu2 or p in (0.0, 1.0):
            fm = f1 if p == 1.0 or mu1 == mu2 else f2
        else:
            fm = _single_values(_mixture(mu1, mu2, p), kind, eps_grid, st, partition)
        for e, a, b, m in zip(eps_grid, f1, f2, fm):
            avg = p * a + (1 - p) * b
            rows.append((p, e, m, avg, m - avg))
    return ConvexityReport(kind, rows, tol)


@dataclass
class ContainmentReport:
    members: list  # dicts: name, upper, lower, inUpper, inLower
    target_upper: float
    target_lower: float
    tol: float

    @property
    def upper_set(self) -> list:
        return [m["name"] for m in self.members if m["inUpper"]]

    @property
    def lower_set(self) -> list:
        return [m["name"] for m in self.members if m["inLower"]]

    @property
    def applicable(self) -> bool:
        return abs(self.target_upper - self.target_lower) <= self.tol

    @property
    def holds(self) -> bool:
        """Lower-maximal members are upper-maximal (asserted when the targets agree)."""
        if not self.applicable:
            return True
        return set(self.lower_set) <= set(self.upper_set)


def containment_check(profiles_by_measure: dict, target_upper: float, target_lower: float,
                      tol: float = DIM_TOL) -> ContainmentReport:
    """Desk-scale membership in the upper and lower maximal sets.

    Each value is a profile, or an (upper-variant, lower-variant) pair of
    profiles; a member's upper (lower) dimension is the slope of its upper
    (lower) variant.
    """
    out = []
    for name, prof in profiles_by_measure.items():
        up_prof, lo_prof = prof if isinstance(prof, (tuple, list)) else (prof, prof)
        up = measure_mdim(up_prof).slope
        lo = measure_mdim(lo_prof).slope
        out.append({"name": name, "upper": up, "lower": lo,
                    "inUpper": up >= target_upper - tol, "inLower": lo >= target_lower - tol})
    return ContainmentReport(out, float(target_upper), float(target_lower), tol)


def quantized_uniform_family(m: int, skews=(0.0, 0.5, 1.0)) -> MeasureFamily:
    return MeasureFamily.quantized(m, skews)


__all__ = [
    "CANDIDATE_KINDS", "CandidateProfile", "CandidateSettings", "ConvexityReport",
    "ContainmentReport", "MeasureDim", "MeasureModel", "MemberResult", "ProfileNotMonotone",
    "SearchReport", "candidate_profile", "containment_check", "convexity_check",
    "family_profiles", "maximal_measure_search", "measure_mdim", "quantized_uniform_family",
]
