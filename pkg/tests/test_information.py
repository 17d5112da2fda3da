import math
import time

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdimlab.errors import InsufficientData, InvalidDistribution
from mdimlab.information import (DistortionMatrix, JointDistribution, RDCurve, binary_rd_hamming,
                                 blahut_arimoto, block_rd, joint_entropy, mutual_information,
                                 rd_linf, rd_linf_curve, rd_linf_limit, rd_lp, rdim_estimate)
from mdimlab.measures import MeasureModel, binary_entropy, entropy

EIGHT = MeasureModel.uniform_levels(8)


def cvx_rate(xs, p, ys, eps, D):
    """Convex-program R(D) for the indicator distortion |x - y| >= eps over a given reproduction grid."""
    J = cp.Variable((len(xs), len(ys)), nonneg=True)
    q = cp.reshape(cp.sum(J, axis=0), (1, len(ys)), order="C")
    rho = (np.abs(xs[:, None] - ys[None, :]) >= eps).astype(float)
    cons = [cp.sum(J, axis=1) == p]
    cons.append(cp.multiply(J, rho) == 0 if D == 0 else cp.sum(cp.multiply(J, rho)) <= D)
    prob = cp.Problem(cp.Minimize(cp.sum(cp.rel_entr(J, p[:, None] @ q))), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def test_independent_coins():
    assert mutual_information(np.full((2, 2), 0.25)) == pytest.approx(0.0, abs=1e-15)


def test_diagonal_four():
    assert mutual_information(np.eye(4) / 4) == pytest.approx(math.log(4), abs=1e-12)


def test_binary_symmetric_channel():
    J = 0.5 * np.array([[0.9, 0.1], [0.1, 0.9]])
    expected = math.log(2) + 0.1 * math.log(0.1) + 0.9 * math.log(0.9)
    assert mutual_information(J) == pytest.approx(expected, abs=1e-12)
    assert mutual_information(J) == pytest.approx(0.368064, abs=1e-6)


def test_joint_validation():
    with pytest.raises(InvalidDistribution):
        JointDistribution(np.array([[0.5, 0.6]]))


def test_bernoulli_hamming_quarter():
    r = blahut_arimoto([0.5, 0.5], DistortionMatrix.hamming(2), 0.25)
    closed = math.log(2) - binary_entropy(0.25)
    assert abs(r.rate - closed) <= 1e-4
    assert closed == pytest.approx(0.130812, abs=1e-6)


def test_bernoulli_hamming_endpoints():
    ham = DistortionMatrix.hamming(2)
    assert blahut_arimoto([0.5, 0.5], ham, 0.5).rate == pytest.approx(0.0, abs=1e-9)
    assert blahut_arimoto([0.5, 0.5], ham, 0.7).rate == pytest.approx(0.0, abs=1e-9)
    assert blahut_arimoto([0.5, 0.5], ham, 0.0).rate == pytest.approx(math.log(2), abs=1e-6)


@pytest.mark.parametrize("p,D", [(0.3, 0.1), (0.2, 0.05), (0.5, 0.4)])
def test_closed_form_helper(p, D):
    r = blahut_arimoto([1 - p, p], DistortionMatrix.hamming(2), D).rate
    assert r == pytest.approx(binary_rd_hamming(p, D), abs=1e-4)


def test_block_source_matches_single_letter():
    ham = DistortionMatrix.hamming(2)
    single = blahut_arimoto([0.5, 0.5], ham, 0.2).rate
    assert block_rd(MeasureModel.bernoulli(0.5), ham, 0.2, 2) == pytest.approx(single, abs=1e-4)


def test_vacuous_constraint():
    assert rd_linf(EIGHT, 0.2, 1.0).rate == 0.0


def test_scale_above_diameter():
    assert rd_linf(EIGHT, 1.5, 0.01).rate == 0.0
    lim = rd_linf_limit(EIGHT, 1.5)
    assert lim.value == 0.0 and lim.envelope == 0.0 and set(lim.rates) == {0.0}


def test_eight_levels_against_convex_program():
    xs, p = np.arange(8) / 7, np.full(8, 1 / 8)
    oracle = cvx_rate(xs, p, np.linspace(0, 1, 71), 0.2, 0.01)
    assert oracle == pytest.approx(0.935651, abs=1e-5)
    assert rd_linf(EIGHT, 0.2, 0.01).rate == pytest.approx(oracle, abs=1e-3)


def test_eight_levels_zero_violation_limit():
    xs, p = np.arange(8) / 7, np.full(8, 1 / 8)
    oracle = cvx_rate(xs, p, np.linspace(0, 1, 71), 0.2, 0)
    assert oracle == pytest.approx(0.99725, abs=1e-5)
    lim = rd_linf_limit(EIGHT, 0.2)
    assert abs(lim.envelope - oracle) <= 2e-2
    assert lim.value <= lim.envelope


def test_finite_alphabet_dimension_zero():
    c = rd_linf_curve(MeasureModel.bernoulli(0.3), [2.0 ** -k for k in range(3, 8)])
    assert max(c.rates) <= math.log(2)
    assert abs(rdim_estimate(c).slope) < 1e-6


def test_log_curve_slope_one():
    eps = [2.0 ** -k for k in range(2, 8)]
    c = RDCurve(eps, [math.log(1 / e) for e in eps], "linf")
    assert rdim_estimate(c).slope == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InsufficientData):
        rdim_estimate(RDCurve(eps[:2], [1.0, 2.0], "linf"))


def test_quantized_source_slope():
    # gap 1e-3; scales run from 0.5 down to 0.005
    mu = MeasureModel.uniform_levels(1001)
    c = rd_linf_curve(mu, [0.5 * 10 ** (-k / 2) for k in range(5)])
    assert 0.8 <= rdim_estimate(c).slope <= 1.1


def test_mixture_rejected():
    from mdimlab.measures import MixtureModel
    mix = MixtureModel(MeasureModel.bernoulli(0.2), MeasureModel.bernoulli(0.7), 0.5)
    with pytest.raises(InvalidDistribution):
        rd_linf(mix, 0.2, 0.05)


def test_speed_of_hamming_oracle():
    t = time.perf_counter()
    for D in (0.05, 0.1, 0.25):
        blahut_arimoto([0.5, 0.5], DistortionMatrix.hamming(2), D)
    assert time.perf_counter() - t < 1.0


# properties -------------------------------------------------------------

def joints(max_side=5):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side)).flatmap(
        lambda s: st.lists(st.floats(0.0, 1.0), min_size=s[0] * s[1], max_size=s[0] * s[1])
        .filter(lambda v: sum(v) > 0.01).map(lambda v: (np.asarray(v) / sum(v)).reshape(s)))


@given(joints())
def test_identity_and_nonnegativity(J):
    jd = JointDistribution(J / J.sum())
    I = mutual_information(jd)
    assert I >= 0
    assert I == pytest.approx(entropy(jd.marginal_x) + entropy(jd.marginal_y) - joint_entropy(jd), abs=1e-12)


@given(st.lists(st.floats(0.01, 1), min_size=1, max_size=5), st.lists(st.floats(0.01, 1), min_size=1, max_size=5))
def test_products_carry_no_information(a, b):
    a, b = np.asarray(a) / sum(a), np.asarray(b) / sum(b)
    assert mutual_information(np.outer(a, b)) == pytest.approx(0.0, abs=1e-10)


@given(st.lists(st.floats(0.01, 1), min_size=2, max_size=5))
def test_diagonal_joint_information_is_entropy(p):
    p = np.asarray(p) / sum(p)
    assert mutual_information(np.diag(p)) == pytest.approx(entropy(p), abs=1e-12)


levels_measure = st.lists(st.floats(0.05, 1), min_size=2, max_size=5).map(
    lambda v: MeasureModel.on_levels(np.linspace(0, 1, len(v)), tuple(np.asarray(v) / sum(v))))


@given(levels_measure, st.floats(0.15, 0.6), st.floats(0.01, 0.2))
def test_lp_rate_below_linf_rate(mu, eps, s):
    # a channel with P(|x - y| >= eps/2) <= s has E|x - y| <= eps/2 + s
    s = min(s, eps / 2)
    lp = rd_lp(mu, eps, 1.0).rate
    linf = rd_linf(mu, eps / 2, s).rate
    assert lp <= linf + 1e-6


@given(st.floats(0.05, 0.45), st.floats(0.02, 0.2))
def test_rate_distortion_monotone_and_convex(p, h):
    ham = DistortionMatrix.hamming(2)
    src = [1 - p, p]
    D = [0.02, 0.02 + h, 0.02 + 2 * h]
    R = [blahut_arimoto(src, ham, d).rate for d in D]
    assert R[0] >= R[1] - 1e-6 and R[1] >= R[2] - 1e-6
    assert R[1] <= 0.5 * (R[0] + R[2]) + 1e-6
