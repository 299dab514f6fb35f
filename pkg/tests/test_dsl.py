"""Relation DSL: parsing, precedence, compilation, predicates."""

import math

import pytest

from geothermo import dsl
from geothermo.errors import ParseError, UnboundParameter, UnknownIdentifier
from geothermo.jets import jet_eval


def compiled(src, coords=("u", "v"), params=None):
    params = params or {}
    ast = dsl.parse_relation(src, list(coords), list(params))
    return dsl.compile_relation(ast, params)


def test_basic_evaluation():
    f = compiled("(3/2)*ln(u) + ln(v)")
    assert f([1.0, 1.0]) == 0.0
    assert f([math.e, 1.0]) == pytest.approx(1.5)


def test_power_right_associative():
    f = compiled("u^v^2", ("u", "v"))
    assert f([2.0, 3.0]) == pytest.approx(2.0 ** 9)


def test_unary_minus_binds_below_power():
    f = compiled("-u^2", ("u",))
    assert f([3.0]) == -9.0


def test_negative_exponent():
    f = compiled("v^-2", ("v",))
    assert f([4.0]) == pytest.approx(1.0 / 16.0)


def test_parameters_bound_at_compile_time():
    f = compiled("a*u + b", ("u",), {"a": 2.0, "b": -1.0})
    assert f([3.0]) == 5.0


def test_unbound_parameter():
    ast = dsl.parse_relation("a*u", ["u"], ["a"])
    with pytest.raises(UnboundParameter):
        dsl.compile_relation(ast, {})


def test_unknown_identifier_reports_name():
    with pytest.raises(UnknownIdentifier) as err:
        dsl.parse_relation("u + w", ["u", "v"])
    assert err.value.name == "w"


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        dsl.parse_relation("u + ", ["u"])
    assert err.value.position == 4


def test_trailing_garbage_rejected():
    with pytest.raises(ParseError):
        dsl.parse_relation("u + v)", ["u", "v"])


def test_function_arity_checked():
    with pytest.raises(ParseError):
        dsl.parse_relation("ln(u, v)", ["u", "v"])
    f = compiled("pow(u, 3)", ("u",))
    assert f([2.0]) == 8.0


def test_all_functions_evaluate():
    f = compiled("sinh(u) + cosh(u) + tanh(u) + sqrt(u) + exp(u) + ln(u)",
                 ("u",))
    x = 0.8
    expect = (math.sinh(x) + math.cosh(x) + math.tanh(x) + math.sqrt(x)
              + math.exp(x) + math.log(x))
    assert f([x]) == pytest.approx(expect, rel=1e-14)


def test_compiled_relation_is_jet_compatible():
    f = compiled("(3/2)*ln(u) + ln(v - b)", params={"b": 1.0})
    j = jet_eval(f, (2.0, 3.0), 2)
    assert j.grad[0] == pytest.approx(0.75)
    assert j.grad[1] == pytest.approx(0.5)


def test_pretty_round_trip():
    ast = dsl.parse_relation("(3/2)*ln(u + a/v)", ["u", "v"], ["a"])
    again = dsl.parse_relation(ast.pretty(), ["u", "v"], ["a"])
    f1 = dsl.compile_relation(ast, {"a": 1.0})
    f2 = dsl.compile_relation(again, {"a": 1.0})
    assert f1([2.0, 3.0]) == pytest.approx(f2([2.0, 3.0]), rel=1e-15)


def test_parameter_names_collected():
    ast = dsl.parse_relation("a*u + pow(v, b)", ["u", "v"], ["a", "b"])
    assert ast.parameter_names() == {"a", "b"}


def test_predicate():
    p = dsl.parse_predicate("v - b > 0", ["u", "v"], ["b"])
    assert p.holds([1.0, 2.0], {"b": 1.0})
    assert not p.holds([1.0, 0.5], {"b": 1.0})
    assert str(p) == "v - b > 0"


def test_predicate_needs_one_comparison():
    with pytest.raises(ParseError):
        dsl.parse_predicate("u > v > 0", ["u", "v"])
    with pytest.raises(ParseError):
        dsl.parse_predicate("u + v", ["u", "v"])


def test_empty_relation_rejected():
    with pytest.raises(ParseError):
        dsl.parse_relation("   ", ["u"])
