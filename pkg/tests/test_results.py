import json

import pandas as pd
import pytest

from harness.results import ResultTable
from harness.runner import library_versions, run_tasks, stream_for, write_manifest
from utils.errors import DatasetParseError


def test_rows_are_sorted_by_trial_then_point():
    table = ResultTable.from_records("demo", [
        {"trial": 1, "point": 0, "value": 3.0},
        {"trial": 0, "point": 1, "value": 2.0},
        {"trial": 0, "point": 0, "value": 1.0},
    ])
    assert table.frame["value"].tolist() == [1.0, 2.0, 3.0]
    assert len(table) == 3


def test_write_and_read_back(tmp_path):
    table = ResultTable.from_records("accuracy", [{"trial": 0, "point": 0, "n": 100, "mse": 0.125}])
    path = table.write(str(tmp_path / "nested" / "accuracy.csv"))
    with open(path, encoding="utf-8") as handle:
        assert handle.readline() == "# dpols-results schema=1 experiment=accuracy\n"
        assert handle.readline() == "trial,point,n,mse\n"
    back = ResultTable.read(path)
    assert back.experiment == "accuracy"
    pd.testing.assert_frame_equal(back.frame, table.frame)


def test_rewrite_replaces_file(tmp_path):
    path = str(tmp_path / "t.csv")
    ResultTable.from_records("a", [{"trial": 0, "point": 0}, {"trial": 1, "point": 0}]).write(path)
    ResultTable.from_records("a", [{"trial": 0, "point": 0}]).write(path)
    assert len(ResultTable.read(path)) == 1


@pytest.mark.parametrize("first_line", ["trial,point\n", "# dpols-results schema=2 experiment=x\n"])
def test_header_is_required(tmp_path, first_line):
    path = tmp_path / "bad.csv"
    path.write_text(first_line + "trial,point\n0,0\n", encoding="utf-8")
    with pytest.raises(DatasetParseError):
        ResultTable.read(str(path))


def test_streams_depend_only_on_seed_and_keys():
    a = stream_for(5, 1, 2).standard_normal(4)
    b = stream_for(5, 1, 2).standard_normal(4)
    c = stream_for(5, 2, 1).standard_normal(4)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist()


@pytest.mark.parametrize("workers", [1, 2])
def test_run_tasks_keeps_order(workers):
    messages = []
    assert run_tasks(abs, [-3, 1, -2, 5], workers, messages.append) == [3, 1, 2, 5]
    assert messages[-1].endswith("4/4 tasks done")


def test_manifest(tmp_path):
    path = write_manifest(str(tmp_path), "fit", {"epsilon": 1.0, "n_grid": (1, 2), "out": tmp_path}, seed=4)
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert record["subcommand"] == "fit"
    assert record["seed"] == 4
    assert record["config"]["n_grid"] == [1, 2]
    assert record["versions"] == library_versions()
