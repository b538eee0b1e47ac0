import json
import os

import pytest

from conftest import DESK_L0
from generators.synthetic_generator import ModelSpec, generate
from main import EXIT_FAILURE_OUTCOME, EXIT_OK, EXIT_USAGE, main, parse_args
from parsers.csv_parser import write_dataset


@pytest.fixture(scope="module")
def desk_csv(tmp_path_factory, balanced_data):
    return write_dataset(balanced_data, str(tmp_path_factory.mktemp("data") / "desk.csv"))


def _config_file(tmp_path, **values):
    path = tmp_path / "run.env"
    path.write_text("".join(f"{key}={value}\n" for key, value in values.items()), encoding="utf-8")
    return str(path)


def test_fit_prints_coefficients(tmp_path, desk_csv, capsys):
    config = _config_file(tmp_path, l0=repr(DESK_L0), r0=6)
    code = main(["fit", desk_csv, "--config", config, "--out", str(tmp_path / "out"), "--seed", "1"])
    assert code == EXIT_OK
    line = next(l for l in capsys.readouterr().out.splitlines() if l.startswith("beta_tilde:"))
    assert len(line.split()[1:]) == 2
    assert os.path.exists(tmp_path / "out" / "fit.csv")
    with open(tmp_path / "out" / "manifest.jsonl", encoding="utf-8") as handle:
        assert json.loads(handle.readline())["subcommand"] == "fit"


def test_fit_guard_violation_cites_guard(tmp_path, desk_csv, capsys):
    config = _config_file(tmp_path, l0=repr(DESK_L0 + 1e-6), r0=6)
    code = main(["fit", desk_csv, "--config", config, "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == EXIT_FAILURE_OUTCOME
    assert "FAIL" in out
    assert "1/(96k)" in out


def test_fit_strict_privacy_still_cites_guard(tmp_path, desk_csv, capsys):
    code = main(["fit", desk_csv, "--l0", "0.01", "--r0", "6", "--strict-privacy", "--out", str(tmp_path)])
    assert code == EXIT_FAILURE_OUTCOME
    assert "guard violated" in capsys.readouterr().out


def test_malformed_row_exits_with_location(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,y\n1,2,3\n1,two,3\n", encoding="utf-8")
    code = main(["fit", str(path), "--l0", "0.001", "--r0", "1", "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "line 3, column 2" in capsys.readouterr().err


def test_flags_override_config_file(tmp_path):
    config = _config_file(tmp_path, epsilon=0.5, delta=0.01, strict_privacy="false")
    args = parse_args(["fit", "data.csv", "--config", config, "--epsilon", "0.25"])
    assert args.epsilon == 0.25
    assert args.delta == 0.01
    assert args.strict_privacy is False


def test_config_lists_are_parsed(tmp_path):
    config = _config_file(tmp_path, **{"n-grid": "1000,2000", "kappas": "1,100"})
    args = parse_args(["accuracy", "--config", config])
    assert args.n_grid == [1000, 2000]
    assert args.kappas == [1.0, 100.0]


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as excinfo:
        main(["no-such-command"])
    assert excinfo.value.code == EXIT_USAGE


def test_generate_writes_pair(tmp_path):
    code = main(["generate", "--n", "200", "--d", "3", "--adjacent-mode", "residual-outlier", "--i-star", "4",
                 "--out", str(tmp_path), "--name", "demo"])
    assert code == EXIT_OK
    assert os.path.exists(tmp_path / "demo.csv")
    assert os.path.exists(tmp_path / "demo_adjacent.csv")


def test_sigma_tiny_sample_is_bottom(tmp_path, capsys):
    path = write_dataset(generate(ModelSpec(n=40, d=2, seed=0)), str(tmp_path / "tiny.csv"))
    code = main(["sigma", path, "--partitions", "4", "--delta0", "1e-12", "--out", str(tmp_path)])
    assert code == EXIT_FAILURE_OUTCOME
    assert capsys.readouterr().out.strip() == "⊥"


def test_sigma_is_deterministic_under_seed(tmp_path, capsys):
    path = write_dataset(generate(ModelSpec(n=4000, d=2, seed=1)), str(tmp_path / "sigma.csv"))
    outputs = []
    for _ in range(2):
        assert main(["sigma", path, "--partitions", "200", "--delta0", "1e-3", "--seed", "7",
                     "--out", str(tmp_path)]) == EXIT_OK
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_stability_precondition_exits_one(tmp_path, capsys):
    code = main(["stability", "--k", "4", "--l0", "0.025", "--trials", "1", "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "1/96" in capsys.readouterr().err


def test_bench_smoke(tmp_path):
    code = main(["bench", "--n-grid", "50", "--d", "2", "--repeats", "1", "--no-reference", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert os.path.exists(tmp_path / "bench.csv")
