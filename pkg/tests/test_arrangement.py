import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertoric import lattice
from hypertoric.arrangement import (Hyperplane, build_arrangement, deform_pair, enumerate_chambers,
                                    enumerate_vertices, homotopy_report, intersection_poset,
                                    plot_data, retraction_pair, tau, tau_inverse)
from hypertoric.config import FlatConfiguration, FlatFamily, builtin_goto
from hypertoric.errors import DomainError, PreconditionError


def planes_of(*pairs):
    return [Hyperplane(tuple(u), Fraction(lvl), i) for i, (u, lvl) in enumerate(pairs)]


FOUR_LINES = planes_of(((1, 0), 0), ((0, 1), 0), ((1, 1), 1), ((1, 0), 2))


def test_vertices_four_line_window():
    assert enumerate_vertices(FOUR_LINES) == [(0, 0), (0, 1), (1, 0), (2, -1), (2, 0)]
    assert enumerate_vertices(planes_of(((1, 1), 0))) == []
    assert enumerate_vertices(planes_of(((1,), 0), ((1,), 1), ((1,), 2))) == [(0,), (1,), (2,)]


def test_chambers_four_line_window():
    chambers = enumerate_chambers(FOUR_LINES, 5)
    bounded = sorted(sorted(c.vertices) for c in chambers if c.bounded)
    assert bounded == [[(0, 0), (0, 1), (1, 0)], [(1, 0), (2, -1), (2, 0)]]
    assert len(chambers) == 10


def test_chambers_small_cases():
    single = enumerate_chambers(planes_of(((1, 0), 0)), 3)
    assert len(single) == 2 and not any(c.bounded for c in single)
    pts = enumerate_chambers(planes_of(((1,), 0), ((1,), 1), ((1,), 2)), 5)
    bounded = sorted(sorted(c.vertices) for c in pts if c.bounded)
    assert bounded == [[(0,), (1,)], [(1,), (2,)]]


def test_box_must_contain_vertices():
    with pytest.raises(PreconditionError):
        enumerate_chambers(FOUR_LINES, 1)


def test_build_arrangement():
    cfg = builtin_goto(2, 4)
    planes = build_arrangement(cfg, 2)
    assert {h.normal for h in planes} == {(1, 0), (1, 1), (0, -1)}
    verticals = sorted(h.level for h in planes if h.normal == (1, 0))
    assert verticals == [-2, Fraction(-1, 2), Fraction(1, 2), 2]
    assert build_arrangement(cfg, 0) == []
    cx = FlatConfiguration(1, (FlatFamily((1,), ((0, 1, 0),)),))
    with pytest.raises(DomainError, match="complex levels nonzero"):
        build_arrangement(cx, 1)


def test_homotopy_report_goto():
    rep = homotopy_report(build_arrangement(builtin_goto(2, 3), 3), 20)
    assert len(rep.polytopes) == 6
    adj = {(i, j): (d, s) for i, j, d, s in rep.adjacency}
    assert adj[(0, 1)] == (0, 1)
    assert all(adj[(i, i + 2)] == (1, 2) for i in range(4))
    assert len(adj) == 5
    d = rep.as_dict()
    assert d["adjacency"][0] == {"pair": [0, 1], "shared_face_dim": 0, "shared_vertices": 1}


def test_homotopy_single_simplex():
    rep = homotopy_report(planes_of(((1, 0), 0), ((0, 1), 0), ((1, 1), 1)), 3)
    assert len(rep.polytopes) == 1 and rep.adjacency == []


def test_poset_four_line_window():
    elems, covers = intersection_poset(FOUR_LINES)
    dims = sorted(e.dim for e in elems)
    # ambient plane, four lines, five points
    assert dims == [0] * 5 + [1] * 4 + [2]
    assert all(elems[a].dim + 1 == elems[b].dim for a, b in covers)


def test_plot_data():
    data = plot_data(FOUR_LINES, 5)
    assert len(data["segments"]) == 4
    assert len(data["bounded_chambers"]) == 2
    with pytest.raises(DomainError):
        plot_data(planes_of(((1,), 0)), 5)


# --- retraction maps ---------------------------------------------------------


def test_retraction_examples():
    assert retraction_pair(1.0, 3.0, 4.0) == (3.0, 4.0)
    j = retraction_pair(0.0, 3.0, 4.0)
    assert j[0] == 0.0 and j[1] == pytest.approx(math.sqrt(7), abs=1e-15)
    assert retraction_pair(0.3, 2.5, 0.0) == (2.5, 0.0)
    # x = y = 1, t = 1/2: both components equal sqrt(t)
    j = retraction_pair(0.5, 1.0, 1.0)
    assert j == pytest.approx((math.sqrt(0.5), math.sqrt(0.5)), abs=1e-15)
    with pytest.raises(DomainError):
        retraction_pair(0.5, -1.0, 1.0)
    with pytest.raises(DomainError):
        retraction_pair(1.5, 1.0, 1.0)


def test_deform_pair_examples():
    z, w = 2 - 1j, 0.5j
    assert deform_pair(1.0, z, w) == (z, w)
    hz, hw = deform_pair(0.0, 3j, 4)
    assert hz == 0 and hw == pytest.approx(math.sqrt(7))
    hz, hw = deform_pair(0.0, 0, 4j)
    assert hz == 0 and hw == pytest.approx(4j)


def test_tau_inverse_round_trip():
    for p, q in [(1.0, 0.0), (-2.0, 0.0), (0.0, 3.0), (-1e-8, 1e-9), (5.0, 1e-3)]:
        x, y = tau_inverse(p, q)
        assert tau(x, y) == pytest.approx((p, q), abs=1e-12 * (1 + abs(p) + q))


nonneg = st.floats(0, 1e3, allow_nan=False)


@settings(max_examples=500, deadline=None)
@given(st.floats(0, 1), nonneg, nonneg)
def test_retraction_properties(t, x, y):
    j1, j2 = retraction_pair(t, x, y)
    scale = max(x * x + y * y, 1e-300)
    assert j1 <= x * (1 + 1e-12) + 1e-300 and j2 <= y * (1 + 1e-12) + 1e-300
    assert j1 * j1 + j2 * j2 <= scale * (1 + 1e-12)
    p, q = tau(j1, j2)
    assert abs(p - 0.5 * (x * x - y * y)) <= 1e-12 * scale
    assert abs(q - t * x * y) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_deform_pair_keeps_phases(t, z, w):
    hz, hw = deform_pair(t, z, w)
    assert abs(hz) ** 2 + abs(hw) ** 2 <= (abs(z) ** 2 + abs(w) ** 2) * (1 + 1e-12) + 1e-300
    if abs(hz) > 1e-9 and abs(z) > 0:
        assert cmath.phase(hz / z) == pytest.approx(0, abs=1e-9)
    if abs(hw) > 1e-9 and abs(w) > 0:
        assert cmath.phase(hw / w) == pytest.approx(0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 3), st.integers(-2, 2))
def test_bounded_count_unimodular_invariant(i, k):
    # x -> B x sends the plane <u, x> = l to <B^-T u, x> = l
    B = [[1, 0], [0, 1]]
    B[i % 2][(i + 1) % 2] = k
    if i >= 2:
        B[0] = [-c for c in B[0]]
    Binv = lattice.integer_inverse(B)
    moved = [Hyperplane(tuple(lattice.matvec(list(zip(*Binv)), h.normal)), h.level, h.flat_index)
             for h in FOUR_LINES]
    box = 5 * (1 + abs(k))
    before = sum(c.bounded for c in enumerate_chambers(FOUR_LINES, 5))
    after = sum(c.bounded for c in enumerate_chambers(moved, box))
    assert before == after == 2
