"""
SVG line charts for harness results
"""
import logging
import math
import os
from typing import Dict, List, Sequence, Tuple

from reportlab.graphics import renderSVG
from reportlab.graphics.charts.legends import Legend
from reportlab.graphics.charts.lineplots import LinePlot
from reportlab.graphics.shapes import Drawing, String
from reportlab.graphics.widgets.markers import makeMarker
from reportlab.lib import colors

logger = logging.getLogger(__name__)

Series = Sequence[Tuple[float, float]]


class ChartGenerator:
    """Render one or more (x, y) series as an SVG line chart"""

    def __init__(self, width: int = 480, height: int = 320):
        self.width = width
        self.height = height

        # Palette
        self.primary_blue = colors.HexColor('#1a365d')
        self.accent_red = colors.HexColor('#c41e3a')
        self.accent_green = colors.HexColor('#2c7a7b')
        self.text_gray = colors.HexColor('#6b7280')
        self.series_colors = [self.primary_blue, self.accent_red, self.accent_green,
                              colors.HexColor('#d69e2e'), colors.HexColor('#805ad5')]

    def line_chart(self, series: Dict[str, Series], output_path: str, title: str,
                   x_label: str, y_label: str, log_x: bool = False) -> str:
        """
        Write a line chart

        Args:
            series: Legend label -> list of (x, y) points
            output_path: Target .svg path
            title: Chart title
            x_label: Horizontal axis label
            y_label: Vertical axis label
            log_x: Plot log10(x) instead of x

        Returns:
            Path of the written file
        """
        labels = [label for label, points in series.items() if len(points) > 0]
        if not labels:
            raise ValueError("Nothing to plot: every series is empty")

        data = [self._points(series[label], log_x) for label in labels]
        drawing = Drawing(self.width, self.height)

        plot = LinePlot()
        plot.x = 60
        plot.y = 50
        plot.width = self.width - 180
        plot.height = self.height - 90
        plot.data = data
        plot.joinedLines = 1
        for i in range(len(data)):
            color = self.series_colors[i % len(self.series_colors)]
            plot.lines[i].strokeColor = color
            plot.lines[i].strokeWidth = 1.5
            plot.lines[i].symbol = makeMarker('FilledCircle', size=3, fillColor=color, strokeColor=color)
        plot.xValueAxis.labelTextFormat = '%.2f' if log_x else '%g'
        plot.yValueAxis.labelTextFormat = '%.3g'
        drawing.add(plot)

        legend = Legend()
        legend.x = self.width - 110
        legend.y = self.height - 50
        legend.fontSize = 8
        legend.colorNamePairs = [(self.series_colors[i % len(self.series_colors)], label)
                                 for i, label in enumerate(labels)]
        drawing.add(legend)

        drawing.add(String(self.width / 2, self.height - 20, title, fontSize=11,
                           fillColor=self.primary_blue, textAnchor='middle'))
        x_text = f"log10 {x_label}" if log_x else x_label
        drawing.add(String(plot.x + plot.width / 2, 15, x_text, fontSize=9,
                           fillColor=self.text_gray, textAnchor='middle'))
        drawing.add(String(12, plot.y + plot.height + 12, y_label, fontSize=9,
                           fillColor=self.text_gray, textAnchor='start'))

        folder = os.path.dirname(output_path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        renderSVG.drawToFile(drawing, output_path)
        logger.info("Wrote chart %s", output_path)
        return output_path

    @staticmethod
    def _points(points: Series, log_x: bool) -> List[Tuple[float, float]]:
        out = []
        for x, y in sorted(points):
            if log_x:
                x = math.log10(x)
            out.append((float(x), float(y)))
        return out
