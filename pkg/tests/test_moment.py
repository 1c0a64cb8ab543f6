import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertoric.config import BasePoint, FlatConfiguration, FlatFamily, builtin_goto, enumerate_flats, offsets
from hypertoric.errors import ConvergenceError, NonCoerciveError, SchemaError
from hypertoric.moment import (MomentSolveProblem, discrete_stabilizer_check, kernel_basis,
                               moment_solve, point_lift, stabilizer)

ONE = FlatConfiguration(1, (FlatFamily((1,), ((0, 0, 0),)),))


def test_stabilizer_examples():
    cfg = builtin_goto(2, 4)
    info = stabilizer(BasePoint.make((0, 0)), cfg, 4)
    assert info.rank == 2 and info.fixed_point
    info = stabilizer(BasePoint.make((0.3, 0.7), (0.1, 0.2)), cfg, 4)
    assert info.incident == () and info.fiber_dim == 2
    two = FlatConfiguration(2, (FlatFamily((1, 0), ((1, 0, 0),)), FlatFamily((0, 1), ((0, 0, 0),))))
    info = stabilizer(BasePoint.make((1, 5)), two, 1)
    assert info.incident == (0,) and info.rank == 1 and info.fiber_dim == 1


def test_point_lift_examples():
    # |z|^2 - |w|^2 = 2(a - l), z w = b
    (z, w), = point_lift(BasePoint.make((0.5,)), ONE, 1)
    assert z == pytest.approx(1) and w == 0
    (z, w), = point_lift(BasePoint.make((-0.5,)), ONE, 1)
    assert z == 0 and w == pytest.approx(1)
    (z, w), = point_lift(BasePoint.make((0,)), ONE, 1)
    assert z == w == 0
    # a = 0, b = t: symmetric lift with |z| = |w| = sqrt(t)
    (z, w), = point_lift(BasePoint.make((0,), (0.25,)), ONE, 1)
    assert z == pytest.approx(0.5) and w == pytest.approx(0.5)


coord = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(coord, min_size=2, max_size=2), st.lists(coord, min_size=2, max_size=2),
       st.lists(coord, min_size=2, max_size=2))
def test_point_lift_satisfies_equations(a, bre, bim):
    cfg = builtin_goto(2, 4)
    pt = BasePoint.make(a, [complex(x, y) for x, y in zip(bre, bim)])
    lifts = point_lift(pt, cfg, 4)
    for fl, (z, w) in zip(enumerate_flats(cfg, 4), lifts):
        dr, dx, dy = (float(v) for v in offsets(pt, fl))
        scale = 1 + abs(dr) + abs(dx) + abs(dy)
        assert abs(abs(z) ** 2 - abs(w) ** 2 - 2 * dr) <= 1e-12 * scale
        assert abs(z * w - complex(dx, dy)) <= 1e-12 * scale
        assert z.imag == 0 and z.real >= 0


def test_discrete_stabilizer():
    # the real levels do not matter here; all Goto flats share complex level 0
    res = discrete_stabilizer_check(builtin_goto(2, 4), (0, 0), 4)
    assert not res and res.witness == (0, 1)
    lines = FlatConfiguration(2, (FlatFamily((1, 0), ((0, 0, 0), (0, 1, 0))), FlatFamily((0, 1), ((0, 0, 0),))))
    res = discrete_stabilizer_check(lines, (0, 0), 2)
    assert res and len(res.incident) == 2
    # three normals through one complex point are dependent
    tri = FlatConfiguration(2, (FlatFamily((1, 0), ((0, 0, 0),)), FlatFamily((0, 1), ((0, 0, 0),)),
                                FlatFamily((1, 1), ((1, 0, 0),))))
    res = discrete_stabilizer_check(tri, (0, 0), 1)
    assert not res and res.witness == (0, 1, 2)
    with pytest.raises(SchemaError):
        discrete_stabilizer_check(tri, (0,), 1)


def test_kernel_basis():
    K = kernel_basis([(1, 0), (0, 1), (1, 1)])
    assert len(K) == 1
    v = K[0]
    assert v[0] + v[2] == 0 and v[1] + v[2] == 0


# --- solver -----------------------------------------------------------------


def pair_problem(target, lam=(0, 0), z=(1, 1), w=(1, 1)):
    # generators (1), (1): kernel spanned by (1, -1); mu(c) = 2 sinh(2c) + lam1 - lam2
    return MomentSolveProblem(z, w, lam, ((1, -1),), (target,), generators=((1,), (1,)))


def bisect(f, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (f(lo) < 0) == (f(mid) < 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_solver_trivial_target():
    sol = moment_solve(pair_problem(0.0))
    assert sol.iterations == 0 and np.allclose(sol.coefficients, 0)


@pytest.mark.parametrize("target", [0.5, 3.0, -7.0, 40.0])
def test_solver_closed_form(target):
    sol = moment_solve(pair_problem(target))
    assert sol.coefficients[0] == pytest.approx(math.asinh(target / 2) / 2, abs=1e-10)
    assert sol.residual <= 1e-10


def test_solver_against_bisection():
    prob = pair_problem(0.0, lam=(1, -1))
    sol = moment_solve(prob)
    oracle = bisect(lambda c: float(prob.mu([c])[0]), -5, 5)
    assert sol.coefficients[0] == pytest.approx(oracle, abs=1e-10)
    assert oracle == pytest.approx(math.asinh(-1) / 2, abs=1e-12)


def test_solver_higher_rank_residual():
    gens = ((1, 0), (0, 1), (1, 1), (1, -1))
    K = kernel_basis(gens)
    prob = MomentSolveProblem((1, 2j, 0.5, 1 + 1j), (0.3, 1, 2, 0.7), (0.1, -0.2, 0.3, 0),
                              tuple(K), (0.4, -1.1), generators=gens)
    sol = moment_solve(prob)
    assert np.linalg.norm(prob.mu(sol.coefficients) - np.array([0.4, -1.1])) <= 1e-10


def test_non_coercive():
    with pytest.raises(NonCoerciveError) as info:
        moment_solve(pair_problem(1.0, w=(0, 0)))
    assert info.value.direction is not None


def test_iteration_cap():
    with pytest.raises(ConvergenceError):
        moment_solve(pair_problem(1e6), max_iter=1)


def test_problem_validation():
    with pytest.raises(SchemaError):
        MomentSolveProblem((1,), (1, 1), (0, 0), ((1, -1),), (0,))
    with pytest.raises(SchemaError):
        MomentSolveProblem((1, 1), (1, 1), (0, 0), ((1, 1),), (0,), generators=((1,), (1,)))
    with pytest.raises(SchemaError):
        MomentSolveProblem((1, 1), (1, 1), (0, 0), ((1, -1),), (0, 1))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=2, max_size=2))
def test_gradient_hessian_and_monotonicity(c):
    gens = ((1, 0), (0, 1), (1, 1), (1, -1))
    prob = MomentSolveProblem((1, 2j, 0.5, 1 + 1j), (0.3, 1, 2, 0.7), (0.1, -0.2, 0.3, 0),
                              tuple(kernel_basis(gens)), (0, 0))
    c = np.array(c)
    h = 1e-6
    fd = [(prob.functional(c + h * e) - prob.functional(c - h * e)) / (2 * h) for e in np.eye(2)]
    assert np.allclose(fd, prob.mu(c), rtol=1e-6, atol=1e-6)
    assert np.linalg.eigvalsh(prob.hessian(c))[0] > 0
    d = np.array([0.3, -0.2])
    assert float((prob.mu(c + d) - prob.mu(c)) @ d) > 0
