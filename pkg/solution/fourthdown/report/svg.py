# fourthdown/report/svg.py
"""Self-contained SVG line charts built as text."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
MARGIN = (60, 40, 40, 50)  # left, top, right, bottom
TICKS = 5


class SVG:
    def __init__(self):
        self.svg = ""

    def header(self, width, height):
        self.svg += f"""<?xml version="1.0" standalone="no"?>
<svg version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" xmlns="http://www.w3.org/2000/svg">
<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>
"""

    def group_start(self, attr):
        g_attr = [f'{key}="{escape(str(value))}"' for key, value in attr.items() if key in ("id", "class")]
        self.svg += f'<g {" ".join(g_attr)}>\n'
        if "title" in attr:
            self.svg += f'<title>{escape(attr["title"])}</title>\n'

    def group_end(self):
        self.svg += "</g>\n"

    def line(self, x1, y1, x2, y2, stroke="black", extra=""):
        self.svg += f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" {extra}/>\n'

    def polyline(self, points: Sequence[Tuple[float, float]], stroke, extra=""):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.svg += f'<polyline points="{coords}" fill="none" stroke="{stroke}" {extra}/>\n'

    def polygon(self, points: Sequence[Tuple[float, float]], fill, extra=""):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.svg += f'<polygon points="{coords}" fill="{fill}" {extra}/>\n'

    def text(self, x, y, string, extra=""):
        self.svg += f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" font-size="11" {extra}>{escape(string)}</text>\n'

    def get_svg(self):
        return f"{self.svg}</svg>\n"


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    dashed: bool = False


@dataclass
class LineChart:
    title: str
    x_label: str
    y_label: str
    series: List[Series] = field(default_factory=list)
    width: int = 640
    height: int = 400

    def add(self, label: str, x, y, lower=None, upper=None, dashed: bool = False) -> "LineChart":
        self.series.append(Series(label, np.asarray(x, dtype=float), np.asarray(y, dtype=float),
                                  None if lower is None else np.asarray(lower, dtype=float),
                                  None if upper is None else np.asarray(upper, dtype=float), dashed))
        return self

    def _limits(self):
        xs = np.concatenate([s.x for s in self.series])
        ys = np.concatenate([s.y for s in self.series]
                            + [b for s in self.series for b in (s.lower, s.upper) if b is not None])
        ys = ys[np.isfinite(ys)]
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
        if x1 == x0:
            x1 = x0 + 1.0
        if y1 == y0:
            y1 = y0 + 1.0
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self) -> str:
        left, top, right, bottom = MARGIN
        plot_w = self.width - left - right
        plot_h = self.height - top - bottom
        x0, x1, y0, y1 = self._limits()

        def px(x):
            return left + (np.asarray(x) - x0) / (x1 - x0) * plot_w

        def py(y):
            return top + plot_h - (np.asarray(y) - y0) / (y1 - y0) * plot_h

        svg = SVG()
        svg.header(self.width, self.height)
        svg.text(left, 16, self.title, 'font-weight="bold"')

        svg.group_start({"class": "axes"})
        svg.line(left, top + plot_h, left + plot_w, top + plot_h)
        svg.line(left, top, left, top + plot_h)
        for value in np.linspace(x0, x1, TICKS):
            svg.line(px(value), top + plot_h, px(value), top + plot_h + 4)
            svg.text(px(value) - 10, top + plot_h + 16, f"{value:.2f}")
        for value in np.linspace(y0, y1, TICKS):
            svg.line(left - 4, py(value), left, py(value))
            svg.text(4, py(value) + 4, f"{value:.3f}")
        svg.text(left + plot_w / 2 - 30, self.height - 8, self.x_label)
        svg.text(4, top - 8, self.y_label)
        svg.group_end()

        for i, s in enumerate(self.series):
            color = PALETTE[i % len(PALETTE)]
            svg.group_start({"class": "series", "title": s.label})
            if s.lower is not None and s.upper is not None:
                band = list(zip(px(s.x), py(s.upper))) + list(zip(px(s.x[::-1]), py(s.lower[::-1])))
                svg.polygon(band, color, 'fill-opacity="0.15" stroke="none"')
            style = 'stroke-width="2"' + (' stroke-dasharray="6,4"' if s.dashed else "")
            svg.polyline(list(zip(px(s.x), py(s.y))), color, style)
            svg.group_end()
            svg.line(left + plot_w - 150, top + 12 + 16 * i, left + plot_w - 130, top + 12 + 16 * i, color,
                     'stroke-width="2"')
            svg.text(left + plot_w - 125, top + 16 + 16 * i, s.label)
        return svg.get_svg()
