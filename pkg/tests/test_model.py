from hypothesis import given, strategies as st
import pytest

from pushelg.model import (
    DAY_MS,
    EvaluationWindow,
    GainGrade,
    MetricConfig,
    LatencyMode,
    PushRecord,
    SilentMode,
    day_index,
)

START = 1_437_350_400_000


@pytest.mark.parametrize("offset, expected", [
    (0, 0),
    (DAY_MS, 1),
    (-1, None),
    (DAY_MS - 1, 0),
    (3 * DAY_MS - 1, 2),
    (3 * DAY_MS, None),
])
def test_day_index(offset, expected):
    assert day_index(START + offset, EvaluationWindow(START, 3)) == expected


@given(st.integers(-5 * DAY_MS, 10 * DAY_MS), st.integers(0, 5 * DAY_MS))
def test_day_index_monotone(t, step):
    w = EvaluationWindow(START, 4)
    a, b = day_index(START + t, w), day_index(START + t + step, w)
    if a is not None and b is not None:
        assert a <= b


def test_day_index_total_over_window():
    w = EvaluationWindow(START, 3)
    assert [day_index(START + k * DAY_MS + r, w) for k in range(3) for r in (0, DAY_MS - 1)] == [0, 0, 1, 1, 2, 2]


@pytest.mark.parametrize("grade, gain", [
    (GainGrade.NON_RELEVANT, 0.0), (GainGrade.RELEVANT, 0.5), (GainGrade.HIGHLY_RELEVANT, 1.0)])
def test_gain_values_round_trip(grade, gain):
    assert grade.gain == gain
    assert GainGrade(grade.value) is grade
    assert GainGrade.from_gain(float(repr(grade.gain))) is grade


def test_bad_values_rejected():
    with pytest.raises(ValueError):
        EvaluationWindow(START, 0)
    with pytest.raises(ValueError):
        MetricConfig(SilentMode.ZERO, LatencyMode.NONE, EvaluationWindow(START, 1), horizon_minutes=0)
    with pytest.raises(ValueError):
        PushRecord("MB 1", 1, 0, "r")
    with pytest.raises(ValueError):
        PushRecord("MB1", 1, -1, "r")
    with pytest.raises(ValueError):
        PushRecord("MB1", 1, 0, "")
    with pytest.raises(ValueError):
        GainGrade.from_gain(0.25)
