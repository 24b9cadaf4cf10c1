import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poolgame.errors import DegenerateStrategiesError, NotARestPointError, UnsupportedShapeError
from poolgame.model import NetworkParams, PoolStrategy
from poolgame.replicator import IntegratorConfig, integrate, replicator_rhs
from poolgame.stability import (
    DEGENERATE,
    ESS,
    NON_ESS,
    RestPointReport,
    classify,
    coefficients_ab,
    find_rest_points_two_pool,
    interior_rest_point_bisect,
    jacobian_numeric,
    jacobian_two_pool_analytic,
    lemma1_conditions,
    polish_rest_point,
    reduced_eigenvalue_two_pool,
    rest_points_two_pool,
    tangent_eigenvalues,
    theorem2_asymptotic,
)

from conftest import FIG1_X_STAR, HYPERPLANE, simplex_points

E = math.exp(-1 / 1200)


def test_coefficients(fig1, symmetric, fig4):
    a, b = coefficients_ab(*fig1)
    assert a == pytest.approx(36000 * E, abs=1e-9) and a == pytest.approx(35970.01, abs=0.1)
    assert b == pytest.approx(24000 * E, abs=1e-9) and b == pytest.approx(23980.01, abs=0.1)
    a, b = coefficients_ab(*symmetric)
    assert a == b
    s = [PoolStrategy(30, 80), PoolStrategy(20, 80)]
    a, b = coefficients_ab(s, NetworkParams(delay_coeff=0))
    assert a / b == pytest.approx(1.5, rel=1e-15)
    with pytest.raises(UnsupportedShapeError):
        coefficients_ab(*fig4)


def test_rest_points_fig1(fig1):
    reports = rest_points_two_pool(*fig1)
    assert [r.kind for r in reports] == ["vertex", "vertex", "interior"]
    interior = reports[2]
    assert interior.feasible
    assert interior.x_star[0] == pytest.approx(0.39800, abs=1e-5)
    assert abs(interior.x_star[0] - 0.4) < 0.005
    for r in reports:
        if r.feasible:
            assert np.max(np.abs(replicator_rhs(r.x_star, *fig1))) < 1e-9


def test_rest_point_infeasible(fig1):
    s, p = fig1
    pricey = NetworkParams(power_price=0.05)
    interior = rest_points_two_pool(s, pricey)[2]
    assert interior.x_star[0] < 0 and not interior.feasible
    found = find_rest_points_two_pool(s, pricey)
    assert [r.feasible for r in found] == [True, True, False]


def test_rest_points_equal_omega(params):
    s = [PoolStrategy(20, 100), PoolStrategy(20, 120)]
    with pytest.raises(DegenerateStrategiesError):
        rest_points_two_pool(s, params)
    # one pool dominates: no interior root, bisection agrees
    assert interior_rest_point_bisect(s, params) is None
    found = find_rest_points_two_pool(s, params)
    assert len(found) == 2


def test_bisection_matches_closed_form(fig1):
    assert interior_rest_point_bisect(*fig1) == pytest.approx(FIG1_X_STAR, abs=1e-11)


def _fd(x, s, p, h=1e-6):
    """Independent central differences of the replicator velocity."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = h
        cols.append((replicator_rhs(x + e, s, p) - replicator_rhs(x - e, s, p)) / (2 * h))
    return np.column_stack(cols)


def test_analytic_jacobian_vs_differences(fig1):
    s, p = fig1
    x = [0.75, 0.25]
    assert np.max(np.abs(jacobian_two_pool_analytic(x, s, p) - _fd(x, s, p))) < 1e-6
    rng = np.random.default_rng(0)
    for x in simplex_points(rng, 2, 100):
        jn = jacobian_numeric(x, s, p)
        assert np.max(np.abs(jacobian_two_pool_analytic(x, s, p) - jn)) < 1e-6


def test_jacobian_vertex_entry(fig1):
    s, p = fig1
    a, b = coefficients_ab(s, p)
    j = jacobian_two_pool_analytic([0.0, 1.0], s, p)
    assert j[0, 0] == pytest.approx((a - b) / (5000 * 20) - 0.01 * 10, rel=1e-12)


def test_symmetric_tangent_is_null(symmetric):
    s, p = symmetric
    j = jacobian_two_pool_analytic([0.5, 0.5], s, p)
    assert np.max(np.abs(j @ np.array([1.0, -1.0]))) < 1e-15
    jn = jacobian_numeric([0.5, 0.5], s, p)
    assert np.max(np.abs(jn @ np.array([1.0, -1.0]))) < 1e-9


def test_four_pool_neutral_direction(fig4):
    s, p = fig4
    x = integrate([0.25] * 4, s, p, IntegratorConfig(convergence_tol=1e-14)).final_state
    assert np.dot([10, 20, 30, 40], x) == pytest.approx(HYPERPLANE, abs=1e-9)
    eig = tangent_eigenvalues(jacobian_numeric(x, s, p))
    assert np.min(np.abs(eig)) < 1e-9


@pytest.mark.parametrize("which,x", [("vertex0", [0.0, 1.0]), ("vertex1", [1.0, 0.0])])
def test_lemma1_vertex_matches_jacobian(fig1, which, x):
    s, p = fig1
    res = lemma1_conditions(s, p, which)
    j = jacobian_two_pool_analytic(x, s, p)
    if which == "vertex1":
        j = j[::-1, ::-1]
    assert res.det_j11 == pytest.approx(j[0, 0], rel=1e-6)
    assert res.det_j == pytest.approx(np.linalg.det(j), rel=1e-6)


@pytest.mark.parametrize("sizes", [(100, 140), (150, 100), (100, 100)])
def test_lemma1_interior_matches_jacobian(params, sizes):
    s = [PoolStrategy(30, sizes[0]), PoolStrategy(20, sizes[1])]
    x = rest_points_two_pool(s, params)[2].x_star
    res = lemma1_conditions(s, params, "interior")
    j = jacobian_two_pool_analytic(x, s, params)
    assert res.det_j11 == pytest.approx(j[0, 0], rel=1e-6)
    scale = abs(j[0, 0] * j[1, 1]) + abs(j[0, 1] * j[1, 0])
    assert abs(res.det_j - np.linalg.det(j)) <= 1e-6 * scale


def test_lemma1_vertex_sign_failure(params):
    # omega1 < omega2 and a < b chosen so the first minor is positive
    s = [PoolStrategy(10, 100), PoolStrategy(20, 100)]
    params = NetworkParams(power_price=0.02)
    res = lemma1_conditions(s, params, "vertex0")
    a, b = coefficients_ab(s, params)
    assert a < b and res.det_j11 > 0 and not res.passed


def test_theorem2_fig1(fig1):
    s, p = fig1
    t2 = theorem2_asymptotic(s, p)
    a, b = coefficients_ab(s, p)
    assert t2.a_minus_b == pytest.approx(11990, abs=1)
    assert abs(t2.b_w1_minus_a_w2) <= 1e-6 * a * 20
    assert not t2.cond_a_minus_b_negative and not t2.cond_cross_product_positive and t2.degenerate


def test_theorem2_symmetric(symmetric):
    t2 = theorem2_asymptotic(*symmetric)
    assert t2.a_minus_b == 0.0 and t2.b_w1_minus_a_w2 == 0.0 and t2.degenerate


@given(st.floats(0.5, 100), st.floats(0.5, 100), st.floats(0, 500), st.floats(0, 2000), st.floats(0, 10),
       st.floats(0, 0.1), st.floats(0, 1))
@settings(max_examples=200, deadline=None)
def test_equal_sizes_zero_cross_product(w1, w2, size, reward, fee, price, delay):
    s = [PoolStrategy(w1, size), PoolStrategy(w2, size)]
    p = NetworkParams(coinbase_reward=reward, fee_rate=fee, power_price=price, delay_coeff=delay)
    assert theorem2_asymptotic(s, p).b_w1_minus_a_w2 == 0.0


def test_classify_fig1(fig1):
    s, p = fig1
    interior = classify([FIG1_X_STAR, 1 - FIG1_X_STAR], s, p)
    assert interior.verdict == ESS
    assert interior.reduced_eigen == pytest.approx(-9.99e-3, abs=1e-4)
    # g'(x*) = -x*(1-x*)(a-b)(w1-w2) / (N S^2) with S = 23.98
    s_star = 30 * FIG1_X_STAR + 20 * (1 - FIG1_X_STAR)
    oracle = -FIG1_X_STAR * (1 - FIG1_X_STAR) * 12000 * E * 10 / (5000 * s_star ** 2)
    assert interior.reduced_eigen == pytest.approx(oracle, rel=1e-9)
    assert interior.tangent_eigenvalues[0] == pytest.approx(oracle, rel=1e-6)
    assert interior.nash
    assert interior.discrepancy
    for v in ([1.0, 0.0], [0.0, 1.0]):
        assert classify(v, s, p).verdict == NON_ESS


def test_classify_rejects_non_rest_point(fig1):
    with pytest.raises(NotARestPointError):
        classify([0.75, 0.25], *fig1)


def test_classify_symmetric_degenerate(symmetric):
    found = find_rest_points_two_pool(*symmetric)
    assert [r.verdict for r in found] == [DEGENERATE] * 3


def test_classify_four_pool_degenerate(fig4):
    s, p = fig4
    x = integrate([0.25] * 4, s, p).final_state
    rep = classify(polish_rest_point(x, s, p), s, p)
    assert rep.verdict == DEGENERATE


def test_ess_attracts(fig1):
    s, p = fig1
    rng = np.random.default_rng(1)
    for _ in range(20):
        delta = rng.uniform(-1e-3, 1e-3)
        traj = integrate([FIG1_X_STAR + delta, 1 - FIG1_X_STAR - delta], s, p)
        assert abs(traj.final_state[0] - FIG1_X_STAR) < 1e-6


@pytest.mark.parametrize("vertex", [0.0, 1.0])
def test_vertices_repel(fig1, vertex):
    s, p = fig1
    start = 1e-3 if vertex == 0.0 else 1 - 1e-3
    traj = integrate([start, 1 - start], s, p, IntegratorConfig(max_time=50, convergence_tol=1e-300))
    assert abs(traj.final_state[0] - vertex) > 1e-3


def test_reduced_eigen_matches_tangent(fig1):
    s, p = fig1
    for x1 in np.linspace(0, 1, 21):
        g = reduced_eigenvalue_two_pool(x1, s, p)
        tangent = tangent_eigenvalues(jacobian_two_pool_analytic([x1, 1 - x1], s, p))
        assert tangent[0].real == pytest.approx(g, abs=1e-12)


def test_report_serialization(fig1):
    reports = find_rest_points_two_pool(*fig1)
    header = RestPointReport.csv_header(2)
    assert header == "x_star_1,x_star_2,kind,feasible,detJ11,detJ,t2_cond1,t2_cond2,reduced_eig,verdict"
    row = reports[2].csv_row().split(",")
    assert len(row) == len(header.split(","))
    assert row[-1] == "ESS" and row[2] == "interior"
    text = reports[2].to_text()
    assert "verdict = ESS" in text and "discrepancy = true" in text
    assert all(" = " in line for line in text.strip().splitlines())
