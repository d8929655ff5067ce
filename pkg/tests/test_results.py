import pytest

from twomode.perturbative import rate_point
from twomode.results import RatePoint, SweepResult

from conftest import unit_scenario


def test_rate_point_rejects_negative():
    with pytest.raises(ValueError):
        RatePoint(0.0, -1.0, 0.0, 0.0, 2)


def test_rate_point_from_scenario():
    p = rate_point(unit_scenario(delta=0.1), window=1)
    assert p.r2_full == pytest.approx(p.r2_two_path, rel=1e-12)
    assert p.n_paths == 2


def test_column():
    res = SweepResult("f", ["a", "b"], [(1, 2), (3, 4)])
    assert res.column("b") == [2, 4]
