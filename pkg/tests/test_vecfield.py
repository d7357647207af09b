import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lienard_lab import models
from lienard_lab.vecfield import (
    DegreeBoundError,
    DuplicateMonomialError,
    EigenKind,
    ModelError,
    ParseError,
    PolyVectorField,
    classify_jacobian,
    evaluate,
    find_fixed_points,
    jacobian_at,
    parse_model,
    to_text,
)

from conftest import harmonic_field


# --- construction invariants -------------------------------------------------


def test_nonlinear_degree_below_two_rejected():
    with pytest.raises(ModelError):
        PolyVectorField((0, 0, 0), (0, 0, 0), {(1, 0): 1.0}, {})


def test_nonlinear_degree_above_bound_rejected():
    with pytest.raises(DegreeBoundError):
        PolyVectorField((0, 0, 0), (0, 0, 0), {(3, 2): 1.0}, {}, max_degree=4)


def test_nonfinite_coefficient_rejected():
    with pytest.raises(ModelError):
        PolyVectorField((0, 0, math.inf), (0, 0, 0), {}, {})
    with pytest.raises(ModelError):
        PolyVectorField((0, 0, 0), (0, 0, 0), {(2, 0): math.nan}, {})


# --- parser ------------------------------------------------------------------


def test_parse_harmonic():
    field = parse_model("dx = y\ndy = -x\n")
    assert field.linear_x == (0.0, 0.0, 1.0)
    assert field.linear_y == (0.0, -1.0, 0.0)
    assert field.nonlinear_x == {} and field.nonlinear_y == {}


def test_parse_quadratic_kinetics():
    text = "dx = 1 + x^2*y - 4.5*x\ndy = 2.5*x - x^2*y\n"
    field = parse_model(text)
    assert field.linear_x == (1.0, -4.5, 0.0)
    assert field.nonlinear_x == {(2, 1): 1.0}
    assert field.linear_y == (0.0, 2.5, 0.0)
    assert field.nonlinear_y == {(2, 1): -1.0}


def test_parse_degree_bound_violation():
    with pytest.raises(DegreeBoundError):
        parse_model("dx = x^5\ndy = x\n")  # default degree 4


def test_parse_explicit_degree_allows_higher_terms():
    field = parse_model("degree = 6\ndx = x^5\ndy = x\n")
    assert field.nonlinear_x == {(5, 0): 1.0}


def test_parse_duplicate_monomial():
    with pytest.raises(DuplicateMonomialError):
        parse_model("dx = x + 2*x\ndy = y\n")


def test_parse_errors_carry_location():
    with pytest.raises(ParseError) as err:
        parse_model("dx = y\ndy = x + ?\n")
    assert err.value.line == 2
    assert "line 2" in str(err.value)


def test_parse_missing_equation():
    with pytest.raises(ParseError):
        parse_model("dx = y\n")


def test_parse_unknown_key():
    with pytest.raises(ParseError):
        parse_model("dz = y\ndx = y\ndy = x\n")


def test_parse_dangling_operator():
    with pytest.raises(ParseError):
        parse_model("dx = y +\ndy = x\n")


def test_parse_fractional_exponent_rejected():
    with pytest.raises(ParseError):
        parse_model("dx = x^1.5\ndy = y\n")


def test_parse_comments_and_name():
    field = parse_model("# a comment\nname = demo\ndx = y  # trailing\ndy = -x\n")
    assert field.name == "demo"
    assert field.linear_x == (0.0, 0.0, 1.0)


def test_roundtrip_builtin_models():
    for name in ("brusselator", "glycolytic", "vanderpol"):
        field, _, _ = models.build(name)
        again = parse_model(to_text(field))
        assert again.monomials_x() == pytest.approx(field.monomials_x())
        assert again.monomials_y() == pytest.approx(field.monomials_y())


coeff = st.floats(
    min_value=-10, max_value=10, allow_nan=False, allow_infinity=False
).filter(lambda c: c == 0.0 or abs(c) > 1e-6)
key = st.tuples(st.integers(0, 4), st.integers(0, 4)).filter(lambda k: 2 <= sum(k) <= 4)
table = st.dictionaries(key, coeff, max_size=4)
linear = st.tuples(coeff, coeff, coeff)


@given(lx=linear, ly=linear, nx=table, ny=table)
@settings(max_examples=60, deadline=None)
def test_roundtrip_random_fields(lx, ly, nx, ny):
    field = PolyVectorField(lx, ly, nx, ny)
    again = parse_model(to_text(field))
    for k, v in field.monomials_x().items():
        assert again.monomials_x().get(k, 0.0) == pytest.approx(v, abs=1e-12)
    for k, v in field.monomials_y().items():
        assert again.monomials_y().get(k, 0.0) == pytest.approx(v, abs=1e-12)


# --- evaluation --------------------------------------------------------------


def test_evaluate_harmonic():
    assert evaluate(harmonic_field(), 1.0, 0.0) == (0.0, -1.0)


def test_evaluate_vanishes_at_known_steady_states():
    field, _, _ = models.build("brusselator", b=2.5)
    dx, dy = evaluate(field, 0.5, 5.0)
    assert abs(dx) <= 1e-12 and abs(dy) <= 1e-12

    field, _, _ = models.build("glycolytic", a=0.11, b=0.6)
    dx, dy = evaluate(field, 0.6, 0.6 / 0.47)
    assert abs(dx) <= 1e-12 and abs(dy) <= 1e-12


def _naive_eval(field, x, y):
    dx = sum(c * x**n * y**m for (n, m), c in field.monomials_x().items())
    dy = sum(c * x**n * y**m for (n, m), c in field.monomials_y().items())
    return dx, dy


@given(
    lx=linear, ly=linear, nx=table, ny=table,
    x=st.floats(-3, 3), y=st.floats(-3, 3),
)
@settings(max_examples=100, deadline=None)
def test_evaluate_matches_naive_summation(lx, ly, nx, ny, x, y):
    field = PolyVectorField(lx, ly, nx, ny)
    got = evaluate(field, x, y)
    want = _naive_eval(field, x, y)
    scale = 1.0 + max(abs(w) for w in want)
    assert abs(got[0] - want[0]) <= 1e-9 * scale
    assert abs(got[1] - want[1]) <= 1e-9 * scale


# --- jacobian ----------------------------------------------------------------


def test_jacobian_harmonic():
    j = jacobian_at(harmonic_field(), 0.7, -1.3)
    assert np.allclose(j, [[0, 1], [-1, 0]])


def test_jacobian_centre_at_zero_damping_point():
    field, _, _ = models.build("glycolytic", a=0.0, b=1.0)
    j = jacobian_at(field, 1.0, 1.0)
    assert np.allclose(j, [[1, 1], [-2, -1]])
    assert classify_jacobian(j) is EigenKind.CENTRE


def test_jacobian_trace_zero_at_boundary_parameters():
    field, _, _ = models.build("brusselator", b=2.25)
    j = jacobian_at(field, 0.5, 4.5)
    assert abs(j[0, 0] + j[1, 1]) <= 1e-12


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(7)
    fields = [harmonic_field()] + [models.build(n)[0] for n in ("brusselator", "glycolytic", "vanderpol")]
    h = 1e-6
    for field in fields:
        for x, y in rng.uniform(-2.0, 2.0, size=(100, 2)):
            j = jacobian_at(field, x, y)
            fd = np.empty((2, 2))
            fd[:, 0] = (np.array(evaluate(field, x + h, y)) - np.array(evaluate(field, x - h, y))) / (2 * h)
            fd[:, 1] = (np.array(evaluate(field, x, y + h)) - np.array(evaluate(field, x, y - h))) / (2 * h)
            assert np.allclose(j, fd, rtol=1e-6, atol=1e-5)


def test_classify_jacobian_saddle_and_nodes():
    assert classify_jacobian(np.array([[1.0, 0.0], [0.0, -1.0]])) is EigenKind.SADDLE
    assert classify_jacobian(np.array([[-1.0, 0.0], [0.0, -2.0]])) is EigenKind.STABLE_NODE
    assert classify_jacobian(np.array([[1.0, 0.0], [0.0, 2.0]])) is EigenKind.UNSTABLE_NODE
    assert classify_jacobian(np.array([[0.1, 1.0], [-1.0, 0.1]])) is EigenKind.UNSTABLE_FOCUS


# --- fixed points ------------------------------------------------------------


def test_fixed_points_harmonic():
    pts = find_fixed_points(harmonic_field(), (-2, 2, -2, 2))
    assert len(pts) == 1
    fp = pts[0]
    assert abs(fp.x) <= 1e-10 and abs(fp.y) <= 1e-10
    assert fp.eigen_kind is EigenKind.CENTRE
    assert fp.residual <= 1e-10


def test_fixed_points_quadratic_kinetics_unstable_focus():
    field, _, _ = models.build("glycolytic", a=0.11, b=0.6)
    pts = find_fixed_points(field, (0, 3, 0, 3))
    assert len(pts) == 1
    assert pts[0].x == pytest.approx(0.6, abs=1e-9)
    assert pts[0].y == pytest.approx(0.6 / 0.47, abs=1e-6)
    assert pts[0].eigen_kind is EigenKind.UNSTABLE_FOCUS


def test_fixed_points_quadratic_kinetics_stable_focus():
    field, _, _ = models.build("glycolytic", a=0.13, b=0.6)
    pts = find_fixed_points(field, (0, 3, 0, 3))
    assert len(pts) == 1
    assert pts[0].y == pytest.approx(0.6 / 0.49, abs=1e-6)
    assert pts[0].eigen_kind is EigenKind.STABLE_FOCUS


def test_fixed_points_residual_invariant():
    for name in ("brusselator", "glycolytic", "vanderpol"):
        field, _, closed = models.build(name)
        for fp in find_fixed_points(field, (-3, 3, -3, 6), grid=7):
            dx, dy = evaluate(field, fp.x, fp.y)
            assert max(abs(dx), abs(dy)) <= 1e-10


def test_fixed_points_bad_box():
    with pytest.raises(ModelError):
        find_fixed_points(harmonic_field(), (1, 1, 0, 1))
    with pytest.raises(ModelError):
        find_fixed_points(harmonic_field(), (-1, 1, -1, 1), grid=1)
