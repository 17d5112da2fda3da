import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdimlab.dynamics import (IntervalValue, MetricSpec, PointWindow, SymbolicSystem,
                              bowen_distance, enumerate_windows, shift_window, window_codes)
from mdimlab.errors import CapExceeded, RangeMismatch, RangeTooSmall

BIN = SymbolicSystem.uniform(2)


def win(lo, syms, system=BIN):
    return PointWindow.from_values(lo, syms, system)


def brute_lo(a, b, n, base, w):
    """Double loop over shifts j and offsets i, straight from the definition."""
    best = 0.0
    for j in range(n):
        total = 0.0
        for i in range(-w, w + 1):
            total += base ** abs(i) * abs(a.values()[i + j - a.lo] - b.values()[i + j - b.lo])
        best = max(best, total)
    return best


def test_identity_distance_is_tail_interval():
    m = MetricSpec(window=4)
    a = win(-4, [0, 1] * 4 + [0])
    d = bowen_distance(a, a, 1, m)
    assert d.lo == 0.0
    assert d.hi == pytest.approx(m.tail)


def test_single_coordinate_difference():
    m = MetricSpec(window=4)
    a = win(-4, [0] * 9)
    b = win(-4, [0] * 4 + [1] + [0] * 4)
    assert bowen_distance(a, b, 1, m).lo == 1.0


def test_alternating_windows_match_brute_force():
    m = MetricSpec(window=4)
    a = win(-4, [(i % 2) for i in range(13)])
    b = win(-4, [1 - (i % 2) for i in range(13)])
    d = bowen_distance(a, b, 3, m)
    assert d.lo == pytest.approx(brute_lo(a, b, 3, 0.5, 4), abs=1e-15)


def test_range_errors():
    m = MetricSpec(window=2)
    with pytest.raises(RangeMismatch):
        bowen_distance(win(-2, [0] * 5), win(-1, [0] * 5), 1, m)
    with pytest.raises(RangeTooSmall):
        bowen_distance(win(-1, [0] * 3), win(-1, [1] * 3), 1, m)


@pytest.mark.parametrize("m,length,count", [(2, 3, 8), (1, 6, 1), (4, 5, 1024)])
def test_enumeration_counts(m, length, count):
    s = SymbolicSystem.uniform(m)
    wins = list(enumerate_windows(s, 0, length - 1))
    assert len(wins) == count
    assert len({w.symbols for w in wins}) == count
    assert window_codes(m, length).shape == (count, length)


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        list(enumerate_windows(SymbolicSystem.uniform(4), 0, 9, cap=1000))


def test_shift_identity_and_inverse():
    x = win(-2, [0, 1, 1, 0, 1])
    assert shift_window(x, 0) == x
    back = shift_window(shift_window(x, 1), -1)
    # each shift keeps only the overlap with the range it started from
    assert back.range == (-1, 1)
    assert back.symbols == tuple(x.symbol(i) for i in range(-1, 2))


def test_shift_by_two_bookkeeping():
    syms = (0, 1, 1, 0, 1)
    x = win(-2, syms)
    y = shift_window(x, 2)
    # (T^2 x)_i = x_{i+2}, defined for i + 2 in [-2, 2]
    for i in range(y.lo, y.hi + 1):
        assert y.symbol(i) == x.symbol(i + 2)
    assert y.symbols == syms[2:]


def test_interval_value_order():
    with pytest.raises(ValueError):
        IntervalValue(1.0, 0.5)


def test_uniform_levels():
    assert SymbolicSystem.uniform(1).levels == (0.0,)
    assert SymbolicSystem.uniform(5).levels == (0.0, 0.25, 0.5, 0.75, 1.0)


# properties -------------------------------------------------------------

def windows_pair(min_len=11, max_len=15, m=3):
    return st.integers(min_len, max_len).flatmap(
        lambda L: st.tuples(*(st.lists(st.integers(0, m - 1), min_size=L, max_size=L)
                              for _ in range(3))))


SYS3 = SymbolicSystem.uniform(3)
KINDS = st.sampled_from(["geometric-sum", "sup-weighted", "coordinate-0"])


@given(windows_pair(), st.integers(1, 4), KINDS)
def test_symmetry_and_triangle(words, n, kind):
    m = MetricSpec(kind, 0.5, 3)
    a, b, c = (win(-3, w, SYS3) for w in words)
    if a.hi < n - 1 + 3:
        return
    ab, ba = bowen_distance(a, b, n, m), bowen_distance(b, a, n, m)
    assert ab == ba
    ac, bc = bowen_distance(a, c, n, m), bowen_distance(b, c, n, m)
    assert ac.lo <= ab.lo + bc.lo + 2 * m.tail + 1e-12


@given(windows_pair(), KINDS)
def test_monotone_in_n(words, kind):
    m = MetricSpec(kind, 0.5, 3)
    a, b, _ = (win(-3, w, SYS3) for w in words)
    los = [bowen_distance(a, b, n, m).lo for n in range(1, a.hi - 3 + 2)]
    assert all(y >= x for x, y in zip(los, los[1:]))


@given(st.integers(0, 12), st.sampled_from(["one-sided", "two-sided"]))
def test_width_shrinks_with_window(w, sided):
    m = MetricSpec("geometric-sum", 0.5, w, sided)
    assert m.with_window(w + 1).tail < m.tail


@given(st.lists(st.integers(0, 1), min_size=3, max_size=8), st.integers(-3, 3))
def test_shift_definition(syms, k):
    x = win(0, syms)
    try:
        y = shift_window(x, k)
    except RangeTooSmall:
        assert abs(k) >= len(syms)
        return
    for i in range(y.lo, y.hi + 1):
        assert y.symbol(i) == x.symbol(i + k)


@given(st.integers(1, 3), st.integers(1, 5))
def test_window_codes_are_all_words(m, L):
    codes = window_codes(m, L)
    assert [tuple(r) for r in codes] == list(itertools.product(range(m), repeat=L))
    assert np.all(codes < m)
