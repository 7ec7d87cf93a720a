import math
import pickle

import pytest
from hypothesis import given
from hypothesis import strategies as st

from solitonlab.errors import ExpressionError
from solitonlab.expr import compile_expression, coordinate_names


def ev(src, *p, prefix="x"):
    return compile_expression(src, len(p) or 1, prefix)(list(p) or [0.0])


def test_precedence_and_associativity():
    assert ev("1 + 2 * 3") == 7
    assert ev("2 ^ 3 ^ 2") == 2 ** 9
    assert ev("-2 ^ 2") == -4
    assert ev("(1 - 2) - 3") == -4
    assert ev("8 / 4 / 2") == 1


def test_functions_constants_and_aliases():
    assert ev("sin(pi / 2) + cos(0)") == pytest.approx(2.0)
    assert ev("exp(1) - e") == pytest.approx(0.0, abs=1e-15)
    assert ev("sqrt(x^2 + y^2)", 3.0, 4.0) == pytest.approx(5.0)
    assert ev("x1 * x2 + z", 2.0, 3.0, 1.0) == 7.0
    assert ev("t1 - t2", 5.0, 2.0, prefix="t") == 3.0
    assert ev("log(exp(2.5))") == pytest.approx(2.5)
    assert ev("1e-3 * 2") == pytest.approx(2e-3)


def test_coordinate_names():
    assert coordinate_names(2) == {"x1": 0, "x2": 1, "x": 0, "y": 1}
    assert coordinate_names(1, "t") == {"t1": 0, "t": 0}


@pytest.mark.parametrize(
    "src, token",
    [("sin(x +* 2)", "*"), ("foo(x)", "foo"), ("x + w", "w"), ("(x + 1", "<end>"), ("x $ 2", "$")],
)
def test_errors_name_the_token(src, token):
    with pytest.raises(ExpressionError) as info:
        compile_expression(src, 2)
    assert info.value.token == token
    assert repr(token) in str(info.value)


def test_picklable():
    f = compile_expression("x * exp(-y)", 2)
    g = pickle.loads(pickle.dumps(f))
    assert g([1.0, 0.0]) == f([1.0, 0.0]) == 1.0


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_matches_python_arithmetic(a, b):
    got = ev("x * y - (x + y) / 3 + x^2", a, b)
    assert got == pytest.approx(a * b - (a + b) / 3 + a ** 2, rel=1e-12, abs=1e-9)


@given(st.floats(0.01, 100))
def test_sqrt_log_consistency(a):
    assert ev("log(sqrt(x))", a) == pytest.approx(0.5 * math.log(a), abs=1e-12)
