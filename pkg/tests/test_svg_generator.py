import pytest

from generators.svg_generator import ChartGenerator


def test_line_chart_writes_svg(tmp_path):
    path = ChartGenerator().line_chart(
        {"kappa=1": [(1000, 0.3), (2000, 0.2), (4000, 0.14)], "kappa=100": [(1000, 0.31), (2000, 0.21), (4000, 0.15)]},
        str(tmp_path / "plots" / "error.svg"), title="error", x_label="n", y_label="error", log_x=True,
    )
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    assert "<svg" in text
    assert "kappa=100" in text


def test_nothing_to_plot(tmp_path):
    with pytest.raises(ValueError):
        ChartGenerator().line_chart({"empty": []}, str(tmp_path / "x.svg"), "t", "x", "y")
