"""Experiment configuration, variational-principle runs and report output.

A run computes the geometric side (metric mean dimension from separated
counts) and, for every candidate kind, the measure side over a finite family;
it then checks the easy inequality, attainment, the sup/limit order swap and
the scale-matched inequality chain, and writes everything as CSV plus a JSON
summary whose numbers all appear in the CSVs.
"""
from __future__ import annotations

import configparser
import io
import json
import math
import os
import re
from dataclasses import dataclass, field, replace

from .candidates import (CANDIDATE_KINDS, CandidateSettings, family_profiles,
                         maximal_measure_search)
from .covering import DEFAULT_BUDGET, DEFAULT_EXACT_BUDGET, estimate_mdim
from .dynamics import SIDES, METRIC_KINDS, MetricSpec, SymbolicSystem
from .errors import ConfigError, MdimError
from .estimators import EstimatorRecord, bk_profile, estimator_csv, katok_entropy, ps_entropy
from .information import DEFAULT_S_GRID, PROFILE_TOL, rd_linf_curve, rd_linf_limit, rdim_estimate
from .measures import MeasureFamily, MeasureModel
from .partitions import entropy_rate, mrid_estimate, partition_for_eps
from .scaling import dimension_estimate

SCHEMA = "vpreport/1"
FAMILY_KINDS = ("bernoulli", "continuous-atoms", "quantized", "point-mass", "empty")
CHECKS = ("lemma", "prop")


def _g(x) -> str:
    return f"{x:.12g}"


def _r(x):
    """Round a float the way the CSVs print it, so JSON and CSV agree."""
    if isinstance(x, float):
        return float(_g(x)) if math.isfinite(x) else str(x)
    return x


_POW = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*\^\s*(-?\d+(?:\.\d+)?)\s*$")


def parse_number(text: str) -> float:
    """Float, or a power written as ``2^-3``."""
    m = _POW.match(text)
    if m:
        return float(m.group(1)) ** float(m.group(2))
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def parse_list(text: str, cast=parse_number) -> tuple:
    items = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    return tuple(cast(t) for t in items)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "finite-entropy"
    # system
    m: int = 2
    sided: str = "two-sided"
    match_resolution: float | None = None
    # metric
    metric_kind: str = "geometric-sum"
    base: float = 0.5
    # family
    family: str = "bernoulli"
    family_params: tuple = (0.5, 0.7, 0.9)
    # sweeps
    mdim_epsilons: tuple = (2 ** -3, 2 ** -4, 2 ** -5)
    epsilons: tuple = (2 ** -3, 2 ** -4, 2 ** -5)
    ns: tuple = (1, 2, 3)
    deltas: tuple = (0.5, 0.2, 0.1, 0.05)
    s_grid: tuple = DEFAULT_S_GRID
    lemma_eps: float = 0.1
    # budgets
    budget: int = DEFAULT_BUDGET
    exact_budget: int = DEFAULT_EXACT_BUDGET
    # estimators
    kinds: tuple = CANDIDATE_KINDS
    bk_n: int = 64
    bk_samples: int = 500
    katok_nlist: tuple = (1024, 2048, 4096)
    katok_samples: int = 200
    ps_r: float = 0.05
    ps_nlist: tuple = (16, 24, 32)
    rd_tol: float = PROFILE_TOL
    # tolerances
    tol_soundness: float = 0.1
    tol_attainment: float = 0.1
    tol_order_swap: float = 0.1
    tol_lemma: float = 0.1
    tol_prop: float = 0.05
    tol_search: float = 0.05
    tol_closed_form: float = 1e-4
    mdim_range: tuple | None = None
    # run
    seed: int = 0
    jobs: int = 1
    checks: tuple = CHECKS
    attainment: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        def grid(name, vals, lo=0.0, hi=math.inf):
            if not vals:
                raise ConfigError(f"{name} must be nonempty")
            if any(not lo < v < hi for v in vals):
                raise ConfigError(f"{name} values must lie in ({lo}, {hi})")
            d = [b - a for a, b in zip(vals, vals[1:])]
            if not (all(x > 0 for x in d) or all(x < 0 for x in d)):
                raise ConfigError(f"{name} must be strictly monotone")

        if self.match_resolution is None and self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.sided not in SIDES:
            raise ConfigError(f"sided must be one of {SIDES}")
        if self.metric_kind not in METRIC_KINDS:
            raise ConfigError(f"metric kind must be one of {METRIC_KINDS}")
        if not 0 < self.base < 1:
            raise ConfigError("base must lie in (0, 1)")
        if self.family not in FAMILY_KINDS:
            raise ConfigError(f"family must be one of {FAMILY_KINDS}")
        grid("mdim_epsilons", self.mdim_epsilons, 0, 1)
        grid("epsilons", self.epsilons, 0, 1)
        grid("ns", self.ns, 0)
        grid("deltas", self.deltas, 0, 1)
        grid("s_grid", self.s_grid, 0, 1)
        grid("katok_nlist", self.katok_nlist, 0)
        grid("ps_nlist", self.ps_nlist, 0)
        for k in self.kinds:
            if k not in CANDIDATE_KINDS:
                raise ConfigError(f"unknown candidate kind {k!r}")
        for c in self.checks:
            if c not in CHECKS:
                raise ConfigError(f"unknown check {c!r}")
        if min(self.budget, self.exact_budget, self.bk_n, self.bk_samples, self.katok_samples) <= 0:
            raise ConfigError("budgets and sample counts must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")

    # derived objects
    def system(self) -> SymbolicSystem | None:
        if self.match_resolution is not None:
            return None
        return SymbolicSystem.uniform(self.m, self.sided)

    def metric(self) -> MetricSpec:
        return MetricSpec(self.metric_kind, self.base, 0, self.sided)

    def measure_family(self) -> MeasureFamily:
        p = self.family_params
        if self.family == "bernoulli":
            return MeasureFamily.bernoulli(p)
        if self.family == "continuous-atoms":
            return MeasureFamily.continuous_atoms(p)
        if self.family == "quantized":
            return MeasureFamily.quantized(self.m, p)
        if self.family == "point-mass":
            return MeasureFamily("point-mass", [MeasureModel.point_mass(0.0)])
        return MeasureFamily("empty", [])

    def settings(self) -> CandidateSettings:
        return CandidateSettings(self.metric(), self.bk_n, self.bk_samples, tuple(self.katok_nlist),
                                 tuple(self.deltas), self.katok_samples, min(self.s_grid),
                                 self.rd_tol, 4, self.seed, self.jobs)

    @property
    def example_metric(self) -> bool:
        return (self.metric_kind == "geometric-sum" and self.base == 0.5
                and self.sided == "two-sided")


PRESETS = {
    "finite-entropy": ExperimentConfig(),
    "example-3-5": ExperimentConfig(
        name="example-3-5", m=16, match_resolution=2.0, family="continuous-atoms",
        family_params=(0.0, 0.25, 0.5), epsilons=tuple(2.0 ** -k for k in range(3, 8)),
        bk_n=2048, bk_samples=200, checks=("prop",), attainment=True,
        mdim_range=(0.85, 1.05), tol_closed_form=1e-6),
}


# ---------------------------------------------------------------------------
# config files

_KEYS = {
    "system": {"m": int, "sided": str, "match_resolution": parse_number},
    "metric": {"kind": ("metric_kind", str), "base": parse_number},
    "family": {"kind": ("family", str), "params": ("family_params", parse_list)},
    "sweep": {"mdim_epsilons": parse_list, "epsilons": parse_list,
              "ns": lambda t: parse_list(t, int), "deltas": parse_list, "s_grid": parse_list,
              "lemma_eps": parse_number},
    "budget": {"points": ("budget", int), "exact": ("exact_budget", int)},
    "estimators": {"kinds": lambda t: parse_list(t, str), "bk_n": int, "bk_samples": int,
                   "katok_nlist": lambda t: parse_list(t, int), "katok_samples": int,
                   "ps_r": parse_number, "ps_nlist": lambda t: parse_list(t, int),
                   "rd_tol": parse_number},
    "tolerance": {"soundness": ("tol_soundness", parse_number),
                  "attainment": ("tol_attainment", parse_number),
                  "order_swap": ("tol_order_swap", parse_number),
                  "lemma": ("tol_lemma", parse_number), "prop": ("tol_prop", parse_number),
                  "search": ("tol_search", parse_number),
                  "closed_form": ("tol_closed_form", parse_number),
                  "mdim_range": ("mdim_range", parse_list)},
    "run": {"name": str, "preset": None, "seed": int, "jobs": int,
            "checks": lambda t: parse_list(t, str),
            "attainment": lambda t: t.strip().lower() in ("1", "true", "yes", "on")},
}


def load_config(path: str | None = None, text: str | None = None) -> ExperimentConfig:
    """Read an INI-style config; unspecified keys keep the preset (default finite-entropy) values."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        if text is not None:
            cp.read_string(text)
        else:
            if path is None or not os.path.isfile(path):
                raise ConfigError(f"config file not found: {path}")
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    base = PRESETS["finite-entropy"]
    if cp.has_option("run", "preset"):
        name = cp.get("run", "preset").strip()
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        base = PRESETS[name]
    updates = {}
    for section in cp.sections():
        if section not in _KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            spec = _KEYS[section].get(key, "missing")
            if spec == "missing":
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            if spec is None:
                continue
            field_name, cast = spec if isinstance(spec, tuple) else (key, spec)
            if raw.strip().lower() == "none":
                updates[field_name] = None
                continue
            try:
                updates[field_name] = cast(raw)
            except (ValueError, TypeError):
                raise ConfigError(f"bad value for {key} in [{section}]: {raw!r}") from None
    try:
        return replace(base, **updates)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_text(cfg: ExperimentConfig) -> str:
    """Serialize a config back to the file format (round-trips through load_config)."""
    lst = lambda v: ", ".join(_g(x) if isinstance(x, float) else str(x) for x in v)
    out = io.StringIO()
    out.write(f"[system]\nm = {cfg.m}\nsided = {cfg.sided}\n"
              f"match_resolution = {cfg.match_resolution if cfg.match_resolution is not None else 'none'}\n\n")
    out.write(f"[metric]\nkind = {cfg.metric_kind}\nbase = {_g(cfg.base)}\n\n")
    out.write(f"[family]\nkind = {cfg.family}\nparams = {lst(cfg.family_params)}\n\n")
    out.write(f"[sweep]\nmdim_epsilons = {lst(cfg.mdim_epsilons)}\nepsilons = {lst(cfg.epsilons)}\n"
              f"ns = {lst(cfg.ns)}\ndeltas = {lst(cfg.deltas)}\ns_grid = {lst(cfg.s_grid)}\n"
              f"lemma_eps = {_g(cfg.lemma_eps)}\n\n")
    out.write(f"[budget]\npoints = {cfg.budget}\nexact = {cfg.exact_budget}\n\n")
    out.write(f"[estimators]\nkinds = {lst(cfg.kinds)}\nbk_n = {cfg.bk_n}\nbk_samples = {cfg.bk_samples}\n"
              f"katok_nlist = {lst(cfg.katok_nlist)}\nkatok_samples = {cfg.katok_samples}\n"
              f"ps_r = {_g(cfg.ps_r)}\nps_nlist = {lst(cfg.ps_nlist)}\nrd_tol = {_g(cfg.rd_tol)}\n\n")
    out.write(f"[tolerance]\nsoundness = {_g(cfg.tol_soundness)}\nattainment = {_g(cfg.tol_attainment)}\n"
              f"order_swap = {_g(cfg.tol_order_swap)}\nlemma = {_g(cfg.tol_lemma)}\n"
              f"prop = {_g(cfg.tol_prop)}\nsearch = {_g(cfg.tol_search)}\n"
              f"closed_form = {_g(cfg.tol_closed_form)}\n"
              f"mdim_range = {lst(cfg.mdim_range) if cfg.mdim_range else 'none'}\n\n")
    out.write(f"[run]\nname = {cfg.name}\nseed = {cfg.seed}\njobs = {cfg.jobs}\n"
              f"checks = {lst(cfg.checks)}\nattainment = {str(cfg.attainment).lower()}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# report

@dataclass
class Verdict:
    name: str
    kind: str
    value: float
    bound: float
    tol: float
    passed: bool
    seed: int
    note: str = ""

    def as_dict(self):
        return {"verdict": self.name, "kind": self.kind, "value": _r(self.value),
                "bound": _r(self.bound), "tol": _r(self.tol), "passed": self.passed,
                "seed": self.seed, "note": self.note}


@dataclass
class CheckRow:
    check: str
    member: str
    eps: float
    lhs: float
    rhs: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + self.tol


@dataclass
class VPReport:
    config: ExperimentConfig
    geometric: dict
    measure: dict  # kind -> summary dict
    searches: dict  # kind -> SearchReport
    checks: list
    verdicts: list
    empty_family: bool
    count_tables: list = field(default_factory=list)
    estimator_records: list = field(default_factory=list)
    extra_csv: dict = field(default_factory=dict)
    headline: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    # CSVs
    def counts_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epsilon,n,levels,sep,span_lo,span_hi,mode\n")
        for m, t in self.count_tables:
            for eps, n, s, a, b, mode in t.rows():
                buf.write(f"{_g(eps)},{n},{m},{s},{a},{b},{mode}\n")
        return buf.getvalue()

    def profiles_csv(self) -> str:
        buf = io.StringIO()
        buf.write("kind,member,epsilon,value\n")
        for kind, rep in self.searches.items():
            for mem in rep.members:
                for e, v in mem.profile.samples:
                    buf.write(f"{kind},{mem.name},{_g(e)},{_g(v)}\n")
        return buf.getvalue()

    def dimensions_csv(self) -> str:
        buf = io.StringIO()
        buf.write("side,kind,member,upper,lower,slope\n")
        g = self.geometric
        buf.write(f"geometric,mdim,{g['system']},{_g(g['upper'])},{_g(g['lower'])},{_g(g['slope'])}\n")
        for eps, rate in zip(g["epsilons"], g["rates"]):
            buf.write(f"geometric,rate,eps={_g(eps)},{_g(rate)},{_g(rate)},{_g(rate)}\n")
        for kind, rep in self.searches.items():
            for mem in rep.members:
                buf.write(f"measure,{kind},{mem.name},{_g(mem.upper)},{_g(mem.lower)},{_g(mem.slope)}\n")
            s = self.measure[kind]
            buf.write(f"measure,{kind},family-max,{_g(s['upper'])},{_g(s['lower'])},{_g(s['slope'])}\n")
            buf.write(f"measure,{kind},pointwise-max,{_g(s['limitThenSup'])},{_g(s['limitThenSup'])},"
                      f"{_g(s['limitThenSup'])}\n")
        for name, val in self.headline.items():
            buf.write(f"headline,{name},-,{_g(val)},{_g(val)},{_g(val)}\n")
        return buf.getvalue()

    def search_csv(self) -> str:
        buf = io.StringIO()
        buf.write("kind,member,field,value\n")
        for kind, rep in self.searches.items():
            buf.write(f"{kind},-,geometric_target,{_g(rep.geometric_target)}\n")
            buf.write(f"{kind},-,tol,{_g(rep.tol)}\n")
            buf.write(f"{kind},-,family_max,{_g(rep.family_max)}\n")
            for mem in rep.members:
                for key, val in sorted(mem.params.items()):
                    buf.write(f"{kind},{mem.name},{key},{_g(val) if isinstance(val, float) else val}\n")
                buf.write(f"{kind},{mem.name},maximal_upper,{str(mem.maximal_upper).lower()}\n")
                buf.write(f"{kind},{mem.name},maximal_lower,{str(mem.maximal_lower).lower()}\n")
        return buf.getvalue()

    def checks_csv(self) -> str:
        buf = io.StringIO()
        buf.write("check,member,epsilon,lhs,rhs,tol,passed\n")
        for c in self.checks:
            buf.write(f"{c.check},{c.member},{_g(c.eps)},{_g(c.lhs)},{_g(c.rhs)},{_g(c.tol)},"
                      f"{str(c.passed).lower()}\n")
        return buf.getvalue()

    def verdicts_csv(self) -> str:
        buf = io.StringIO()
        buf.write("verdict,kind,value,bound,tol,passed,seed\n")
        for v in self.verdicts:
            buf.write(f"{v.name},{v.kind},{_g(v.value)},{_g(v.bound)},{_g(v.tol)},"
                      f"{str(v.passed).lower()},{v.seed}\n")
        return buf.getvalue()

    def csv_files(self) -> dict:
        files = {"counts.csv": self.counts_csv(), "profiles.csv": self.profiles_csv(),
                 "dimensions.csv": self.dimensions_csv(), "checks.csv": self.checks_csv(),
                 "search.csv": self.search_csv(),
                 "verdicts.csv": self.verdicts_csv(),
                 "estimators.csv": estimator_csv(self.estimator_records)}
        files.update(self.extra_csv)
        return files

    def as_dict(self) -> dict:
        cfg = self.config
        return {
            "schema": SCHEMA,
            "name": cfg.name,
            "seed": cfg.seed,
            "geometric": {k: _r(v) if not isinstance(v, list) else [_r(x) for x in v]
                          for k, v in self.geometric.items()},
            "measure": {k: {kk: _r(vv) for kk, vv in v.items()} for k, v in self.measure.items()},
            "searches": {k: _round_tree(v.as_dict()) for k, v in self.searches.items()},
            "emptyFamily": self.empty_family,
            "orderSwapPrecondition": ("example metric (geometric-sum, base 1/2, two-sided)"
                                      if cfg.example_metric else "not the example metric; skipped"),
            "checks": [{"check": c.check, "member": c.member, "epsilon": _r(c.eps),
                        "lhs": _r(c.lhs), "rhs": _r(c.rhs), "tol": _r(c.tol), "passed": c.passed}
                       for c in self.checks],
            "verdicts": [v.as_dict() for v in self.verdicts],
            "headline": {k: _r(v) for k, v in self.headline.items()},
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str) -> list:
        os.makedirs(out_dir, exist_ok=True)
        written = []
        for name, text in sorted(self.csv_files().items()):
            p = os.path.join(out_dir, name)
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            written.append(p)
        p = os.path.join(out_dir, "report.json")
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
        written.append(p)
        return written


def _round_tree(obj):
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_tree(v) for v in obj]
    return _r(obj)


# ---------------------------------------------------------------------------
# runs

def geometric_side(cfg: ExperimentConfig):
    est = estimate_mdim(cfg.system(), cfg.metric_kind, cfg.mdim_epsilons, cfg.ns, cfg.budget,
                        cfg.seed, cfg.jobs, cfg.base, cfg.match_resolution, cfg.sided)
    levels = [t_levels(cfg, e) for e in est.epsilons]
    name = (f"uniform-matched({_g(cfg.match_resolution)}/eps)" if cfg.match_resolution
            else f"uniform-{cfg.m}")
    summary = {"system": name, "upper": est.upper, "lower": est.lower, "slope": est.slope,
               "epsilons": list(est.epsilons), "rates": list(est.rates)}
    return summary, list(zip(levels, est.tables))


def t_levels(cfg: ExperimentConfig, eps: float) -> int:
    if cfg.match_resolution is None:
        return cfg.m
    return max(1, int(round(cfg.match_resolution / eps)))


def _pointwise_max_slope(profiles: list) -> float:
    eps = profiles[0].epsilons
    top = [max(p.values[i] for p in profiles) for i in range(len(eps))]
    return dimension_estimate(eps, top).slope


def _grid_h(mu, eps: float, cfg: ExperimentConfig) -> float:
    return entropy_rate(partition_for_eps(eps, cfg.base, cfg.sided), mu, 1).limit


def _prop_checks(cfg, family, records) -> list:
    rows = []
    for mu in family.members:
        if getattr(mu, "kind", None) == "mixture":
            continue
        for e in cfg.epsilons:
            lim = rd_linf_limit(mu, 2 * e, cfg.s_grid, tol=cfg.rd_tol)
            h = _grid_h(mu, e, cfg)
            records.append(EstimatorRecord("rd_linf_limit", mu.name, 2 * e, min(cfg.s_grid), lim.envelope))
            records.append(EstimatorRecord("grid_h", mu.name, e, 0, h))
            rows.append(CheckRow("prop", mu.name, e, lim.envelope, h, cfg.tol_prop))
    return rows


def _lemma_checks(cfg, family, records) -> list:
    rows = []
    e = cfg.lemma_eps
    metric = cfg.metric()
    for mu in family.members:
        if getattr(mu, "kind", None) != "levels":
            continue
        k = katok_entropy(mu, e, cfg.deltas, cfg.katok_nlist, metric, cfg.katok_samples, cfg.seed)
        ps1 = ps_entropy(mu, e, cfg.ps_r, cfg.ps_nlist, metric=metric, budget=cfg.budget, seed=cfg.seed)
        ps6 = ps_entropy(mu, 6 * e, cfg.ps_r, cfg.ps_nlist, metric=metric, budget=cfg.budget,
                         seed=cfg.seed)
        rd = rd_linf_limit(mu, e, cfg.s_grid, tol=cfg.rd_tol)
        records += [EstimatorRecord("katok", mu.name, e, min(cfg.deltas), k.delta_limit),
                    EstimatorRecord("ps", mu.name, e, cfg.ps_r, ps1.rate),
                    EstimatorRecord("ps", mu.name, 6 * e, cfg.ps_r, ps6.rate),
                    EstimatorRecord("rd_linf_limit", mu.name, e, min(cfg.s_grid), rd.envelope)]
        rows.append(CheckRow("lemma-katok-ps", mu.name, e, k.delta_limit, ps1.rate, cfg.tol_lemma))
        rows.append(CheckRow("lemma-ps-rd", mu.name, e, ps6.rate, rd.envelope, cfg.tol_lemma))
    return rows


def run_vp_check(cfg: ExperimentConfig) -> VPReport:
    """Geometric side, measure side per candidate kind, inequality checks and verdicts."""
    geo, tables = geometric_side(cfg)
    family = cfg.measure_family()
    st = cfg.settings()
    empty = len(family) == 0
    measure, searches, verdicts, records = {}, {}, [], []
    g = geo["slope"]
    for kind in cfg.kinds:
        if empty:
            measure[kind] = {"upper": 0.0, "lower": 0.0, "slope": 0.0, "limitThenSup": 0.0,
                             "emptyFamily": True}
            continue
        try:
            profiles = family_profiles(family, kind, cfg.epsilons, st)
        except MdimError as exc:
            raise type(exc)(f"kind={kind} family={family.name}: {exc}") from exc
        rep = maximal_measure_search(family, kind, cfg.epsilons, geo, st, cfg.tol_search, profiles)
        searches[kind] = rep
        best = max(rep.members, key=lambda m: m.slope)
        lts = _pointwise_max_slope(profiles)
        measure[kind] = {"upper": max(m.upper for m in rep.members),
                         "lower": max(m.lower for m in rep.members),
                         "slope": rep.family_max, "limitThenSup": lts, "argmax": best.name}
        verdicts.append(Verdict("soundness", kind, rep.family_max, g, cfg.tol_soundness,
                                rep.family_max <= g + cfg.tol_soundness, cfg.seed))
        if cfg.attainment:
            verdicts.append(Verdict("attainment", kind, rep.family_max, g, cfg.tol_attainment,
                                    abs(rep.family_max - g) <= cfg.tol_attainment, cfg.seed))
        if cfg.example_metric:
            gap = abs(rep.family_max - lts)
            verdicts.append(Verdict("order-swap", kind, rep.family_max, lts, cfg.tol_order_swap,
                                    gap <= cfg.tol_order_swap, cfg.seed))
    for kind in measure:
        measure[kind].pop("argmax", None)
    checks = []
    if not empty:
        if "prop" in cfg.checks:
            checks += _prop_checks(cfg, family, records)
        if "lemma" in cfg.checks:
            checks += _lemma_checks(cfg, family, records)
    for c in checks:
        verdicts.append(Verdict(c.check, c.member, c.lhs, c.rhs, c.tol, c.passed, cfg.seed,
                                f"eps={_g(c.eps)}"))
    if cfg.mdim_range is not None:
        lo, hi = cfg.mdim_range
        verdicts.append(Verdict("mdim-range", "mdim", g, hi, 0.0, lo <= g <= hi, cfg.seed,
                                f"range=[{_g(lo)}, {_g(hi)}]"))
    return VPReport(cfg, geo, measure, searches, checks, verdicts, empty, tables, records)


def reproduce_example(cfg: ExperimentConfig | None = None) -> VPReport:
    """The shift on [0,1]^Z with the 2^-|n| metric: all dimension sweeps plus the VP run."""
    cfg = cfg or PRESETS["example-3-5"]
    rep = run_vp_check(cfg)
    leb = MeasureModel.lebesgue()
    mr = mrid_estimate(leb, cfg.epsilons, cfg.base, cfg.sided)
    bk = bk_profile(leb, cfg.epsilons, cfg.bk_n, cfg.bk_samples, cfg.seed, cfg.metric(), cfg.jobs)
    bk_slope = dimension_estimate([b.eps for b in bk], [b.mean for b in bk]).slope
    curve = rd_linf_curve(leb, cfg.epsilons, min(cfg.s_grid), cfg.rd_tol)
    rdim = rdim_estimate(curve)
    rep.headline = {"mdim": rep.geometric["slope"], "mrid": mr.slope, "bk": bk_slope,
                    "rdim": rdim.slope}
    rep.extra_csv["mrid.csv"] = mr.to_csv()
    rep.extra_csv["rd.csv"] = curve.to_csv()
    rep.estimator_records += [EstimatorRecord("bk", leb.name, b.eps, b.n, b.mean, b.stderr) for b in bk]
    rep.verdicts.append(Verdict("mrid-closed-form", "mrid-grid", mr.slope, 1.0, cfg.tol_closed_form,
                                abs(mr.slope - 1.0) <= cfg.tol_closed_form, cfg.seed))
    return rep


def headline_table(rep: VPReport) -> str:
    lines = ["quantity  slope"]
    for k, v in rep.headline.items():
        lines.append(f"{k:<8}  {v:.6f}")
    return "\n".join(lines) + "\n"
