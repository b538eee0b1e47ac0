import pytest

from harness.bench import BenchConfig, run_bench, scaling_exponent
from harness.results import ResultTable


def test_l0_is_capped_by_k():
    cfg = BenchConfig(d=5, l0_factor=4.0)
    assert cfg.l0_for(500) == pytest.approx(1.0 / cfg.k)
    assert cfg.l0_for(100000) == pytest.approx(4.0 * 5 / 100000)


def test_small_run_matches_reference():
    messages = []
    table, exponent = run_bench(BenchConfig(n_grid=(500, 1000), d=5, l0_factor=4.0, repeats=1), messages.append)
    assert len(table) == 2
    assert (table.frame["error"] == "").all()
    assert table.frame["reference_identical"].all()
    assert (table.frame["time_overhead"] > 0).all()
    assert exponent is None or isinstance(exponent, float)
    assert len(messages) == 2


def test_scaling_exponent_of_linear_times():
    table = ResultTable.from_records("bench", [
        {"trial": 0, "point": p, "n": n, "time_overhead": 1e-6 * n} for p, n in enumerate((1000, 2000, 4000))
    ])
    assert scaling_exponent(table) == pytest.approx(1.0)
    assert scaling_exponent(table, "time_missing") is None


def test_validation():
    with pytest.raises(ValueError):
        BenchConfig(n_grid=())
    with pytest.raises(ValueError):
        BenchConfig(n_grid=(10,), d=20)
