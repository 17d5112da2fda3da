import math

import pytest
from hypothesis import given, strategies as st

from mdimlab.candidates import (CANDIDATE_KINDS, CandidateProfile, CandidateSettings, candidate_profile,
                                containment_check, convexity_check, maximal_measure_search,
                                measure_mdim, quantized_uniform_family)
from mdimlab.errors import MixtureNotSupported
from mdimlab.measures import MeasureFamily, MeasureModel, MixtureModel, binary_entropy
from mdimlab.partitions import GridPartition

EPS = [2.0 ** -k for k in range(3, 7)]
FAST = CandidateSettings(bk_n=32, bk_samples=100, katok_samples=100)


def profile(values, kind="mrid-grid", eps=EPS):
    return CandidateProfile("mu", kind, list(zip(eps, values)))


def test_zero_profile():
    d = measure_mdim(profile([0.0] * 4))
    assert d.upper == d.lower == d.slope == 0.0


def test_log_profile():
    d = measure_mdim(profile([math.log(1 / e) for e in EPS]))
    assert d.upper == pytest.approx(1.0) and d.lower == pytest.approx(1.0)
    assert d.slope == pytest.approx(1.0, abs=1e-12)


def test_bernoulli_katok_profile_is_flat():
    p = candidate_profile(MeasureModel.bernoulli(0.5), "katok-upper", EPS, FAST)
    assert measure_mdim(p).slope == pytest.approx(0.0, abs=1e-6)
    assert max(p.values) <= math.log(2) + 0.05


@pytest.mark.parametrize("target,attains", [(0.0, True), (0.03, True), (0.5, False)])
def test_point_mass_family(target, attains):
    fam = MeasureFamily("point", [MeasureModel.point_mass(0.0)])
    r = maximal_measure_search(fam, "mrid-grid", EPS, target, tol=0.05)
    assert r.family_max == 0.0 and r.argmax == ["point-mass(0)"]
    assert r.attains is attains


def test_quantized_family_argmax_uniform():
    r = maximal_measure_search(quantized_uniform_family(1024), "mrid-grid", EPS, 1.0, tol=0.05)
    assert r.argmax == ["quantized(1024,0)"]
    assert abs(r.family_max - 1.0) <= 0.05 and r.attains


@pytest.mark.parametrize("kind", ["mrid-grid", "katok-upper", "bk-upper", "rd-linf"])
def test_bernoulli_family_all_zero(kind):
    # BK at n = 64: the finite-n boundary term adds about 1/n of slope
    s = CandidateSettings(bk_n=64, bk_samples=100, katok_samples=100)
    r = maximal_measure_search(MeasureFamily.bernoulli(), kind, EPS[:3], 0.0, s, tol=0.05)
    assert all(abs(m.slope) <= 0.05 for m in r.members)
    assert all(m.maximal_upper and m.maximal_lower for m in r.members)


def test_empty_family():
    r = maximal_measure_search(MeasureFamily("empty", []), "mrid-grid", EPS, 1.0)
    assert r.empty and r.family_max == 0.0 and not r.attains


def test_convexity_identical_measures():
    mu = MeasureModel.bernoulli(0.3)
    rep = convexity_check(mu, mu, [0.0, 0.5, 1.0], "mrid-grid", EPS[:3])
    assert all(row[4] == 0.0 for row in rep.rows)


def test_convexity_endpoints():
    rep = convexity_check(MeasureModel.bernoulli(0.1), MeasureModel.bernoulli(0.9), [0.0, 1.0],
                          "partition-entropy", EPS[:2])
    assert all(abs(row[4]) < 1e-15 for row in rep.rows)


def test_convexity_partition_entropy_of_bernoulli_mixture():
    P = GridPartition.generating((0.0, 1.0))
    rep = convexity_check(MeasureModel.bernoulli(0.1), MeasureModel.bernoulli(0.9), [0.5],
                          "partition-entropy", [0.1], partition=P)
    (_, _, mix, avg, slack), = rep.rows
    # the mixture is a fair coin at coordinate 0
    assert mix == pytest.approx(math.log(2), abs=1e-12)
    assert avg == pytest.approx(binary_entropy(0.9), abs=1e-12)
    assert slack == pytest.approx(math.log(2) - binary_entropy(0.9), abs=1e-12) and slack > 0


def test_convexity_mrid_grid_rate_is_affine():
    rep = convexity_check(MeasureModel.bernoulli(0.1), MeasureModel.bernoulli(0.9), [0.25, 0.5],
                          "mrid-grid", EPS[:2])
    assert rep.verdict and rep.min_slack >= 0


def test_rd_profile_rejects_mixtures():
    mix = MixtureModel(MeasureModel.bernoulli(0.1), MeasureModel.bernoulli(0.9), 0.5)
    with pytest.raises(MixtureNotSupported):
        candidate_profile(mix, "rd-linf", EPS)


def test_containment_finite_entropy():
    profs = {mu.name: candidate_profile(mu, "mrid-grid", EPS) for mu in MeasureFamily.bernoulli().members}
    rep = containment_check(profs, 0.0, 0.0)
    assert rep.applicable and rep.holds
    assert set(rep.upper_set) == set(rep.lower_set) == set(profs)


def test_containment_definition_chase():
    line = profile([math.log(1 / e) for e in EPS])
    rep = containment_check({"a": line, "b": profile([0.0] * 4)}, 1.0, 1.0)
    assert rep.upper_set == ["a"] and rep.lower_set == ["a"]


def test_containment_quantized_family():
    fam = quantized_uniform_family(1024)
    profs = {mu.name: candidate_profile(mu, "mrid-grid", EPS) for mu in fam.members}
    rep = containment_check(profs, 1.0, 1.0)
    assert rep.upper_set == rep.lower_set == ["quantized(1024,0)"]
    assert rep.holds


# properties -------------------------------------------------------------

measures = st.one_of(
    st.floats(0.05, 0.95).map(MeasureModel.bernoulli),
    st.floats(0.0, 0.6).map(MeasureModel.with_atom),
    st.integers(2, 6).map(MeasureModel.uniform_levels),
)


@given(measures, st.sampled_from(CANDIDATE_KINDS))
def test_profiles_are_monotone(mu, kind):
    s = CandidateSettings(bk_n=32, bk_samples=50, katok_samples=50, katok_nlist=(256, 512, 1024))
    p = candidate_profile(mu, kind, [0.25, 0.125, 0.0625], s, check=False)
    assert p.is_monotone(), p.violations()


@given(measures, st.sampled_from(["katok", "bk"]))
def test_lower_variant_below_upper(mu, family):
    s = CandidateSettings(bk_n=32, bk_samples=50, katok_samples=50, katok_nlist=(256, 512, 1024))
    up = candidate_profile(mu, f"{family}-upper", [0.25, 0.125, 0.0625], s)
    lo = candidate_profile(mu, f"{family}-lower", [0.25, 0.125, 0.0625], s)
    for prof in (lo, up):
        d = measure_mdim(prof)
        assert d.lower <= d.upper
    # pointwise the sampled lower bracket may sit a little above an exact upper value
    assert all(a <= b + 1e-3 for a, b in zip(lo.values, up.values))
