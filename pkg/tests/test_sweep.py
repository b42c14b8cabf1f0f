from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from agraph.errors import EvalError, ExpansionCapExceeded, NotSerializable, SweepError
from agraph.sweep import ConditionSweep, IterationSweep, RangeSweep, expand_sweep, sweep_from_dict


def test_iteration_sweep_doubles_batch():
    assert expand_sweep(IterationSweep(1, 5, "x * 2")) == [1, 2, 4, 8, 16]


def test_range_sweep_is_inclusive_and_works_on_lists():
    s = RangeSweep([2, 2], [8, 8], "[x[0] * 2, x[1] * 2]")
    assert expand_sweep(s) == [[2, 2], [4, 4], [8, 8]]


def test_condition_sweep_stops_before_first_failure():
    s = ConditionSweep([2, 2], "x[0] <= 8", "[x[0] * 2, x[1] * 2]")
    assert expand_sweep(s) == [[2, 2], [4, 4], [8, 8]]
    assert expand_sweep(ConditionSweep(10, "x < 5", "x + 1")) == []


def test_exact_arithmetic_in_sweeps():
    assert expand_sweep(IterationSweep(1, 3, "x / 3")) == [1, Fraction(1, 3), Fraction(1, 9)]


def test_caps_stop_runaway_sweeps():
    with pytest.raises(ExpansionCapExceeded):
        expand_sweep(RangeSweep(1, 0, "x + 1"), cap=50)
    with pytest.raises(ExpansionCapExceeded):
        expand_sweep(ConditionSweep(1, "x > 0", "x + 1"), cap=50)
    with pytest.raises(ExpansionCapExceeded):
        expand_sweep(IterationSweep(1, 51, "x"), cap=50)
    with pytest.raises(SweepError):
        IterationSweep(1, 0, "x")


def test_native_callables_expand_but_do_not_serialise():
    s = IterationSweep(1, 3, lambda x: x + 1)
    assert expand_sweep(s) == [1, 2, 3]
    with pytest.raises(NotSerializable):
        s.to_dict()


def test_raising_function_becomes_eval_error():
    with pytest.raises(EvalError, match="ZeroDivisionError"):
        expand_sweep(IterationSweep(1, 3, lambda x: 1 / 0))
    with pytest.raises(EvalError, match="division by zero"):
        expand_sweep(IterationSweep(0, 3, "1 / x"))


@pytest.mark.parametrize(
    "s",
    [
        IterationSweep(1, 5, "x * 2"),
        RangeSweep([2, 2], [8, 8], "[x[0] * 2, x[1] * 2]"),
        ConditionSweep(Fraction(1, 2), "x < 9", "x * 3"),
    ],
)
def test_dict_round_trip(s):
    back = sweep_from_dict(s.to_dict())
    assert type(back) is type(s)
    assert expand_sweep(back) == expand_sweep(s)


@given(st.integers(1, 64), st.integers(1, 6))
def test_doubling_range_and_condition_agree(start, steps):
    final = start * 2**steps
    r = expand_sweep(RangeSweep(start, final, "x * 2"))
    c = expand_sweep(ConditionSweep(start, f"x <= {final}", "x * 2"))
    i = expand_sweep(IterationSweep(start, steps + 1, "x * 2"))
    assert r == c == i == [start * 2**k for k in range(steps + 1)]
