"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import io
import itertools
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from mdimlab.candidates import CandidateSettings, candidate_profile, convexity_check
from mdimlab.cli import main
from mdimlab.covering import count_table, greedy_separated, spanning_exact_small
from mdimlab.dynamics import MetricSpec, PointWindow, SymbolicSystem
from mdimlab.estimators import bk_entropy, katok_entropy
from mdimlab.harness import PRESETS, reproduce_example, run_vp_check
from mdimlab.information import (DistortionMatrix, JointDistribution, binary_rd_hamming,
                                 blahut_arimoto, joint_entropy, mutual_information)
from mdimlab.measures import MeasureModel, MixtureModel, binary_entropy, entropy
from mdimlab.partitions import ProductPartition, partition_entropy

LOG2 = math.log(2)


def verdict(capsys, number, label, ok, detail=""):
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
    assert ok, f"criterion {number} ({label}) failed: {detail}"


@pytest.fixture(scope="module")
def example_report():
    t = time.perf_counter()
    rep = reproduce_example()
    return rep, time.perf_counter() - t


@pytest.fixture(scope="module")
def finite_report():
    return run_vp_check(PRESETS["finite-entropy"])


def test_criterion_1_blahut_arimoto_hamming(capsys):
    ham = DistortionMatrix.hamming(2)
    t = time.perf_counter()
    errs = [abs(blahut_arimoto([0.5, 0.5], ham, D).rate - (LOG2 - binary_entropy(D)))
            for D in (0.05, 0.1, 0.25)]
    elapsed = time.perf_counter() - t
    # closed-form helper agrees with the textbook formula
    assert binary_rd_hamming(0.5, 0.1) == pytest.approx(LOG2 - binary_entropy(0.1), abs=1e-15)
    ok = max(errs) <= 1e-4 and elapsed < 1.0
    verdict(capsys, 1, "BA Hamming closed form", ok, f"max err {max(errs):.2e} nats, {elapsed:.3f}s")


def test_criterion_2_mutual_information_identities(capsys):
    rng = np.random.default_rng(2024)
    worst_id = worst_prod = worst_diag = 0.0
    for _ in range(100):
        a, b = rng.integers(1, 7, 2)
        J = JointDistribution(rng.dirichlet(np.ones(a * b)).reshape(a, b))
        hx, hy = entropy(J.marginal_x), entropy(J.marginal_y)
        worst_id = max(worst_id, abs(mutual_information(J) - (hx + hy - joint_entropy(J))))
        px, py = rng.dirichlet(np.ones(a)), rng.dirichlet(np.ones(b))
        prod = np.outer(px, py)
        worst_prod = max(worst_prod, abs(mutual_information(JointDistribution(prod / prod.sum()))))
        p = rng.dirichlet(np.ones(a))
        worst_diag = max(worst_diag, abs(mutual_information(JointDistribution(np.diag(p))) - entropy(p)))
    ok = max(worst_id, worst_prod, worst_diag) <= 1e-12
    verdict(capsys, 2, "MI identities on 100 joints", ok,
            f"identity {worst_id:.1e}, product {worst_prod:.1e}, diagonal {worst_diag:.1e}")


def test_criterion_3_example_at_desk_scale(capsys, example_report):
    rep, elapsed = example_report
    slope, mrid = rep.headline["mdim"], rep.headline["mrid"]
    ok = 0.85 <= slope <= 1.05 and abs(mrid - 1.0) <= 1e-6 and elapsed <= 60
    verdict(capsys, 3, "example preset", ok, f"mdim {slope:.4f}, mrid {mrid:.9f}, {elapsed:.1f}s")


def test_criterion_4_finite_entropy_controls(capsys, finite_report):
    h09 = binary_entropy(0.9)
    assert h09 == pytest.approx(0.325083, abs=1e-6)
    mdim = finite_report.geometric["slope"]
    rows = {"mdim": (mdim, mdim <= 0.05)}
    for p, target in ((0.5, LOG2), (0.9, h09)):
        mu = MeasureModel.bernoulli(p)
        k = katok_entropy(mu, 0.3).delta_limit
        b = bk_entropy(mu, 0.75, 64, 500, seed=0).mean
        rows[f"katok({p})"] = (k, abs(k - target) <= 0.05 * target)
        rows[f"bk({p})"] = (b, abs(b - target) <= 0.05 * target)
    ok = all(v[1] for v in rows.values())
    verdict(capsys, 4, "finite-entropy controls", ok,
            ", ".join(f"{k} {v[0]:.4f}" for k, v in rows.items()))


def _checks(reports, name):
    return [c for rep in reports for c in rep.checks if c.check.startswith(name)]


def test_criterion_5_rate_distortion_below_grid_entropy(capsys, finite_report, example_report):
    rows = _checks([finite_report, example_report[0]], "prop")
    bad = [c for c in rows if not c.passed]
    worst = max(c.lhs - c.rhs for c in rows)
    ok = len(rows) > 0 and not bad and all(c.tol == 0.05 for c in rows)
    verdict(capsys, 5, "rd_linf_limit(2eps) <= h(eps) + 0.05", ok,
            f"{len(rows)} checks, {len(bad)} violations, worst lhs-rhs {worst:.4f}")


def test_criterion_6_estimated_sandwich(capsys, finite_report):
    rows = _checks([finite_report], "lemma")
    bad = [c for c in rows if not c.passed]
    worst = max(c.lhs - c.rhs for c in rows)
    ok = len(rows) > 0 and not bad and all(c.tol == 0.1 for c in rows)
    verdict(capsys, 6, "katok <= ps, ps(6eps) <= rd envelope", ok,
            f"{len(rows)} checks, {len(bad)} violations, worst lhs-rhs {worst:.4f}")


def test_criterion_7_soundness_and_attainment(capsys, finite_report, example_report):
    point = run_vp_check(replace(PRESETS["finite-entropy"], name="point-mass", family="point-mass",
                                 family_params=(), checks=()))
    reports = [finite_report, example_report[0], point]
    sound = [v for rep in reports for v in rep.verdicts if v.name == "soundness"]
    attain = [v for v in example_report[0].verdicts if v.name == "attainment"]
    kinds = set(PRESETS["finite-entropy"].kinds)
    ok = (all(v.passed for v in sound + attain) and {v.kind for v in attain} == kinds
          and len(sound) == 3 * len(kinds))
    worst = max(v.value - v.bound for v in sound)
    gap = max(abs(v.value - v.bound) for v in attain)
    verdict(capsys, 7, "soundness + attainment", ok,
            f"{len(sound)} soundness (worst excess {worst:+.4f}), attainment max gap {gap:.4f}")


def test_criterion_8_order_swap(capsys, example_report):
    rows = [v for v in example_report[0].verdicts if v.name == "order-swap"]
    gap = max(abs(v.value - v.bound) for v in rows)
    ok = len(rows) == len(PRESETS["example-3-5"].kinds) and all(v.passed for v in rows)
    verdict(capsys, 8, "order swap on the example metric", ok, f"max gap {gap:.4f}")


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    return main(argv, stdout=out, stderr=err), out.getvalue()


def test_criterion_9_structural_suite(capsys):
    results = {}
    # counts never drop as eps shrinks; lower cover bound never exceeds separated count
    eps = [0.6, 0.4, 0.25, 0.15, 0.1]
    t = count_table(SymbolicSystem.uniform(3), eps, [1, 2, 3], "geometric-sum")
    results["anti-monotone counts"] = all(
        t.sep[(a, n)] <= t.sep[(b, n)] and t.span_lo[(b, n)] <= t.sep[(b, n)]
        for n in t.ns for a, b in zip(eps, eps[1:]))
    # r <= s on exhaustive instances: every cover of the full window set vs the greedy separated set
    c0 = MetricSpec("coordinate-0")
    ok = True
    for m, n in ((2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (4, 1), (4, 2)):
        sys_m = SymbolicSystem.uniform(m)
        pts = [PointWindow.from_values(0, w, sys_m) for w in itertools.product(range(m), repeat=n)]
        for e in (0.3, 0.6, 1.1):
            ok &= spanning_exact_small(pts, n, e, c0) <= len(greedy_separated(pts, n, e, c0))
    results["r <= s sandwich"] = bool(ok)
    # entropy of a join never exceeds the sum
    rng = np.random.default_rng(9)
    ok = True
    levels = tuple(np.linspace(0.05, 0.95, 4))

    def random_cuts(edges):
        coords = rng.choice([-1, 0, 1], size=int(rng.integers(1, 3)), replace=False)
        return ProductPartition.from_dict({int(c): edges for c in coords})

    for _ in range(40):
        # a mixture couples the coordinates, so the join is not a product of marginals
        mu = MixtureModel(MeasureModel.on_levels(levels, rng.dirichlet(np.ones(4))),
                          MeasureModel.on_levels(levels, rng.dirichlet(np.ones(4))), float(rng.uniform(0.1, 0.9)))
        edges = [0.0, *sorted(rng.uniform(0.02, 0.98, int(rng.integers(1, 4)))), 1.0]
        P, Q = random_cuts(edges), random_cuts(edges)
        ok &= partition_entropy(P.join(Q), mu) <= partition_entropy(P, mu) + partition_entropy(Q, mu) + 1e-10
    results["H subadditivity"] = bool(ok)
    # R(D) convex: midpoint below the chord
    ham = DistortionMatrix.hamming(2)
    ok = True
    for p in (0.5, 0.3, 0.1):
        lo, hi = 0.02, 0.6 * min(p, 1 - p)
        r = [blahut_arimoto([1 - p, p], ham, d).rate for d in (lo, (lo + hi) / 2, hi)]
        ok &= r[1] <= (r[0] + r[2]) / 2 + 1e-6
    conv = convexity_check(MeasureModel.bernoulli(0.1), MeasureModel.bernoulli(0.9), [0.5],
                           "mrid-grid", [0.25, 0.125])
    results["BA convexity midpoint"] = bool(ok) and conv.verdict
    # candidate profiles monotone in eps
    st = CandidateSettings(bk_n=32, bk_samples=50, katok_samples=50, katok_nlist=(256, 512, 1024))
    ok = True
    for mu in (MeasureModel.bernoulli(0.3), MeasureModel.with_atom(0.25), MeasureModel.uniform_levels(4)):
        for kind in PRESETS["finite-entropy"].kinds:
            ok &= candidate_profile(mu, kind, [0.25, 0.125, 0.0625], st, check=False).is_monotone()
    results["profile monotonicity"] = bool(ok)
    # byte-identical CLI reruns, also across worker counts
    a = _cli(["vp-check", "--seed", "5"])
    b = _cli(["vp-check", "--seed", "5"])
    c = _cli(["vp-check", "--seed", "5", "--jobs", "2"])
    results["CLI determinism"] = a == b == c and a[0] == 0
    ok = all(results.values())
    verdict(capsys, 9, "structural suite", ok,
            ", ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in results.items()))
