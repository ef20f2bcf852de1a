"""Parser, printer, and evaluator tests for the expression DSL."""

import random
from fractions import Fraction

import pytest

from lcgf.dsl import (
    Bin,
    Call,
    IVPEquation,
    Neg,
    Num,
    Sym,
    eval_scalar,
    eval_time_expression,
    parse_expression,
    parse_ivp,
    parse_relation,
    print_ast,
    reject_scale_symbol,
)
from lcgf.errors import DomainError, LCZeroDivisionError, ParseError
from lcgf.genfunc import Algebra, TRUE, weak_equal
from lcgf.levicivita import DEFAULT_CONTEXT as CTX
from lcgf.levicivita import LCComplex, LCReal, as_lc_real

ALG = Algebra()
S = LCReal.scale(CTX)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_precedence_and_shapes():
    ast = parse_expression("1 + 2*s")
    assert ast == Bin("+", Num("1"), Bin("*", Num("2"), Sym("s")))
    ast = parse_expression("(1 + 2)*s")
    assert ast == Bin("*", Bin("+", Num("1"), Num("2")), Sym("s"))
    ast = parse_expression("-s^2")
    assert ast == Neg(Bin("^", Sym("s"), Num("2")))
    ast = parse_expression("delta(t - 2*s)")
    assert ast == Call("delta", (Bin("-", Sym("t"),
                                     Bin("*", Num("2"), Sym("s"))),))


def test_left_associativity():
    assert parse_expression("1 - 2 - 3") == \
        Bin("-", Bin("-", Num("1"), Num("2")), Num("3"))
    assert parse_expression("8/4/2") == \
        Bin("/", Bin("/", Num("8"), Num("4")), Num("2"))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as ei:
        parse_expression("1 + (2 *")
    assert ei.value.line == 1 and ei.value.column == 9
    with pytest.raises(ParseError) as ei:
        parse_expression("foo(2)")
    assert "unknown name" in str(ei.value)
    with pytest.raises(ParseError):
        parse_expression("1 $ 2")
    with pytest.raises(ParseError):
        parse_expression("sin(1, 2)")
    with pytest.raises(ParseError):
        parse_expression("1 + ")


def test_transform_variable_is_rejected():
    with pytest.raises(ParseError) as ei:
        parse_expression("z + 1")
    assert "transform variable" in str(ei.value)


def test_relation_operators():
    lhs, op, rhs = parse_relation("H(t) ~= 1")
    assert op == "~=" and isinstance(lhs, Call) and isinstance(rhs, Num)
    _, op, _ = parse_relation("H(t) = 1")
    assert op == "="
    _, op, _ = parse_relation("H(t) ~ 1")
    assert op == "~"
    _, op, _ = parse_relation("H(t)")
    assert op is None


# ---------------------------------------------------------------------------
# printer round trip
# ---------------------------------------------------------------------------


def _random_ast(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.6:
            return Num(rng.choice(("0", "1", "2", "3", "5", "0.5",
                                   "2.25", "1e-3")))
        return Sym(rng.choice(("s", "i", "t")))
    kind = rng.randrange(4)
    if kind == 0:
        return Neg(_random_ast(rng, depth - 1))
    if kind == 1:
        fn = rng.choice(("sin", "cos", "exp", "H", "delta"))
        return Call(fn, (_random_ast(rng, depth - 1),))
    if kind == 2:
        return Call("delta_n", (Num(str(rng.randrange(3))),
                                _random_ast(rng, depth - 1)))
    op = rng.choice(("+", "-", "*", "/", "^"))
    lhs = _random_ast(rng, depth - 1)
    if op == "^":
        expo = Num(rng.choice(("2", "3", "0.5")))
        return Bin("^", lhs, expo if rng.random() < 0.7 else Neg(expo))
    return Bin(op, lhs, _random_ast(rng, depth - 1))


def test_print_parse_round_trip_property():
    rng = random.Random(0)
    for _ in range(300):
        ast = _random_ast(rng, rng.randrange(1, 5))
        text = print_ast(ast)
        again = parse_expression(text)
        assert again == ast, f"{text!r} reparsed differently"
        assert print_ast(again) == text


def test_round_trip_fixed_examples():
    for src in ("1/(1 - s)",
                "sin(t) + H(t - 2*s)*sin(t - 2*s)",
                "delta_n(1, t - 1) - 3*delta(t)",
                "-s^2 + 3*s - 1/2",
                "exp(-2*t)*cos(3*t)"):
        ast = parse_expression(src)
        assert parse_expression(print_ast(ast)) == ast


# ---------------------------------------------------------------------------
# scalar evaluation
# ---------------------------------------------------------------------------


def test_geometric_series():
    val = eval_scalar(parse_expression("1/(1 - s)"), CTX)
    for q in range(7):
        assert abs(val.coeff(Fraction(q)) - 1.0) <= 1e-12


def test_square_root_matches_nth_root():
    val = eval_scalar(parse_expression("(1 + s)^(1/2)"), CTX)
    want = (as_lc_real(1.0, CTX) + S).nth_root(2)
    diff = val - LCComplex.from_lcreal(want)
    assert all(abs(diff.coeff(q)) <= 1e-12 for q in diff.exponents())


def test_imaginary_unit():
    val = eval_scalar(parse_expression("i^2"), CTX)
    assert abs(val.coeff(0) + 1.0) <= 1e-15 and val.is_real


def test_exponential_series():
    val = eval_scalar(parse_expression("exp(s)"), CTX)
    assert abs(val.coeff(0) - 1.0) <= 1e-12
    assert abs(val.coeff(1) - 1.0) <= 1e-12
    assert abs(val.coeff(2) - 0.5) <= 1e-12


def test_scalar_rejects_time_symbol():
    with pytest.raises(ParseError):
        eval_scalar(parse_expression("t + 1"), CTX)


def test_division_by_zero():
    with pytest.raises(LCZeroDivisionError):
        eval_scalar(parse_expression("1/(s - s)"), CTX)


# ---------------------------------------------------------------------------
# time-domain evaluation
# ---------------------------------------------------------------------------


def test_affine_delta_rescales():
    # delta(2t - 1) = (1/2) delta(t - 1/2)
    g = eval_time_expression(parse_expression("delta(2*t - 1)"), ALG)
    want = 0.5 * ALG.delta(center=0.5)
    assert weak_equal(g, want) is TRUE


def test_reflected_heaviside():
    g = eval_time_expression(parse_expression("H(-t)"), ALG)
    want = ALG.constant(1.0) - ALG.heaviside()
    assert weak_equal(g, want) is TRUE


def test_shifted_delta_from_sugar():
    g = eval_time_expression(parse_expression("delta(t - 2*s)"), ALG)
    want = ALG.delta(shift=2.0 * S)
    assert weak_equal(g, want) is TRUE


def test_monomial_times_delta_vanishes():
    g = eval_time_expression(parse_expression("t^2*delta(t)"), ALG)
    assert weak_equal(g, ALG.zero()) is TRUE


def test_scalar_subexpression_stays_scalar():
    v = eval_time_expression(parse_expression("exp(2*s)"), ALG)
    assert isinstance(v, LCComplex)
    assert abs(v.coeff(1) - 2.0) <= 1e-12


def test_division_by_genfunction_rejected():
    with pytest.raises(DomainError):
        eval_time_expression(parse_expression("1/H(t)"), ALG)


def test_nonaffine_atom_argument_rejected():
    with pytest.raises((ParseError, DomainError)):
        eval_time_expression(parse_expression("delta(t*t)"), ALG)


# ---------------------------------------------------------------------------
# equations and classical screening
# ---------------------------------------------------------------------------


def test_parse_ivp_weak():
    eq = parse_ivp("y'' + y ~= delta(t - 2*s)")
    assert eq == IVPEquation(1.0, 0.0, 1.0, eq.rhs_ast, "weak")
    assert eq.rhs_ast == parse_expression("delta(t - 2*s)")


def test_parse_ivp_exact_with_coefficients():
    eq = parse_ivp("2*y' - 3*y = sin(t)")
    assert (eq.a2, eq.a1, eq.a0, eq.mode) == (0.0, 2.0, -3.0, "exact")


def test_parse_ivp_rejects_nonlinear_lhs():
    with pytest.raises(ParseError):
        parse_ivp("y*y' ~= 0")
    with pytest.raises(ParseError):
        parse_ivp("y + 1 ~= 0")
    with pytest.raises(ParseError):
        parse_ivp("sin(t) ~= 0")


def test_scale_symbol_screening():
    ast = parse_expression("delta(t - 2*s)")
    with pytest.raises(ParseError) as ei:
        reject_scale_symbol(ast, "classical table")
    assert "reserved" in str(ei.value)
    reject_scale_symbol(parse_expression("delta(t - 1)"), "classical table")
