import pytest

from teamsynth import logic
from teamsynth.bench import (Row, binding_task, format_table, growth_ratio, linear_r2,
                             log_slopes, loglog_exponent, random_fleet, robot_sweep, superlinear, time_synthesis)


def _rows(xs, ys):
    return [Row("t", x, y, y, y, 1, 1) for x, y in zip(xs, ys)]


def test_linear_r2():
    assert linear_r2(_rows([1, 2, 3, 4], [2, 4, 6, 8])) == pytest.approx(1.0)
    assert linear_r2(_rows([1, 2, 3], [5, 5, 5])) == 1.0
    assert linear_r2(_rows([1, 2, 3, 4, 5], [1, 9, 2, 8, 1])) < 0.2


def test_superlinear():
    xs = [2, 3, 4, 5, 6]
    assert superlinear(_rows(xs, [x ** 3 for x in xs]))
    assert superlinear(_rows(xs, [2.0 ** x for x in xs]))
    assert loglog_exponent(_rows(xs, [x ** 3 for x in xs])) == pytest.approx(3.0)
    assert not superlinear(_rows(xs, [float(x) for x in xs]))
    assert growth_ratio(_rows([1, 2], [1.0, 8.0])) == pytest.approx(4.0)
    assert log_slopes(_rows([0, 1], [1.0, 2.0]))[0] == pytest.approx(0.6931, abs=1e-4)


def test_random_fleet_nested():
    small, big = random_fleet(3, 5), random_fleet(6, 5)
    assert len(big.robots) == 6
    for name in small.robots:
        assert small.robots[name].states == big.robots[name].states


def test_binding_task():
    f = logic.parse_task(binding_task(4))
    assert logic.bindings_in(f) == {"1", "2", "3", "4"}
    with pytest.raises(ValueError):
        binding_task(1)


def test_sweep_smoke():
    rows = robot_sweep(range(2, 4), repeats=1)
    assert [r.x for r in rows] == [2, 3]
    assert all(r.low <= r.median <= r.high for r in rows)
    assert format_table(rows).count("\n") == 3
    t, sat = time_synthesis(binding_task(2), random_fleet(4, 0))
    assert t > 0 and isinstance(sat, bool)
