# tools/plotting.py
"""Deterministic SVG 1.1 figures of two-currency polyhedra.

Every set is clipped to the plot window exactly, filled with its own hatch
pattern and outlined by its boundary lines. The exact H-representations are
embedded in <metadata> so a figure can be checked without reading pixels.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape

from engine.errors import PreconditionError
from engine.polyhedra import Halfspace, Polyhedron, intersect
from engine.vectors import Vector, fmt_vec

logger = logging.getLogger(__name__)

SIZE = 400
MARGIN = 40
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

PREAMBLE = """\
<?xml version="1.0" standalone="no"?>
<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">
<svg width="%(size)d" height="%(size)d" viewBox="0 0 %(size)d %(size)d" version="1.1" xmlns="http://www.w3.org/2000/svg">
"""

POSTAMBLE = """\
</svg>
"""

Range = Tuple[Fraction, Fraction]


@dataclass
class FigureSpec:
    """What to draw: named sets at one node, axis ranges and marker points."""
    node: str
    sets: List[Tuple[str, Polyhedron]] = field(default_factory=list)
    marks: List[Tuple[str, Vector]] = field(default_factory=list)
    xrange: Range = (Fraction(-1), Fraction(2))
    yrange: Range = (Fraction(-12), Fraction(12))
    title: Optional[str] = None


class _Canvas:
    def __init__(self, xrange: Range, yrange: Range):
        self.x0, self.x1 = xrange
        self.y0, self.y1 = yrange
        if self.x0 >= self.x1 or self.y0 >= self.y1:
            raise PreconditionError("axis ranges must be increasing")
        self.commands: List[str] = []
        self.defs: List[str] = []

    def px(self, p: Sequence[Fraction]) -> Tuple[float, float]:
        span = SIZE - 2 * MARGIN
        x = MARGIN + span * float((p[0] - self.x0) / (self.x1 - self.x0))
        y = SIZE - MARGIN - span * float((p[1] - self.y0) / (self.y1 - self.y0))
        return x, y

    def box(self) -> Polyhedron:
        return Polyhedron.from_halfspaces(2, [
            ((1, 0), self.x0), ((-1, 0), -self.x1), ((0, 1), self.y0), ((0, -1), -self.y1),
        ])

    def hatch(self, k: int, color: str) -> str:
        pid = "hatch%d" % k
        angle = (45 + 60 * k) % 180
        self.defs.append(
            '<pattern id="%s" patternUnits="userSpaceOnUse" width="8" height="8" patternTransform="rotate(%d)">'
            '<line x1="0" y1="0" x2="0" y2="8" style="stroke:%s;stroke-width:1;stroke-opacity:0.6"/></pattern>'
            % (pid, angle, color))
        return pid

    def polygon(self, points, fill: str, color: str) -> None:
        self.commands.append('<polygon points="%s" style="fill:url(#%s);stroke:none"/>' % (
            " ".join("%.3f,%.3f" % self.px(p) for p in points), fill))

    def line(self, a, b, color: str, width: float = 1.5, dash: bool = False) -> None:
        (xa, ya), (xb, yb) = self.px(a), self.px(b)
        style = "stroke:%s;stroke-width:%.1f" % (color, width)
        if dash:
            style += ";stroke-dasharray:4,3"
        self.commands.append('<line x1="%.3f" y1="%.3f" x2="%.3f" y2="%.3f" style="%s"/>' % (xa, ya, xb, yb, style))

    def marker(self, p, label: str) -> None:
        x, y = self.px(p)
        self.commands.append('<circle cx="%.3f" cy="%.3f" r="3" style="fill:#000000"/>' % (x, y))
        self.text(x + 5, y - 5, label, "#000000")

    def text(self, x: float, y: float, text: str, color: str = "#666666", anchor: str = "start") -> None:
        self.commands.append(
            '<text x="%.3f" y="%.3f" fill="%s" font-size="11" font-family="monospace" text-anchor="%s">%s</text>'
            % (x, y, color, anchor, escape(text)))


def _clip(canvas: _Canvas, p: Polyhedron) -> List[Vector]:
    """Vertices of p ∩ window, counter-clockwise."""
    if p.is_empty():
        return []
    pts = list(intersect(p, canvas.box()).points)
    if len(pts) < 3:
        return pts
    cx = sum(float(q[0]) for q in pts) / len(pts)
    cy = sum(float(q[1]) for q in pts) / len(pts)
    return sorted(pts, key=lambda q: math.atan2(float(q[1]) - cy, float(q[0]) - cx))


def _boundary(canvas: _Canvas, h: Halfspace) -> List[Vector]:
    line = Polyhedron(2, halfspaces=(h, Halfspace(tuple(-x for x in h.normal), -h.offset)))
    return list(intersect(line, canvas.box()).points)


def _axes(canvas: _Canvas) -> None:
    zero = Fraction(0)
    canvas.commands.append('<rect x="%d" y="%d" width="%d" height="%d" style="fill:none;stroke:#000000;stroke-width:1"/>'
                           % (MARGIN, MARGIN, SIZE - 2 * MARGIN, SIZE - 2 * MARGIN))
    if canvas.x0 <= zero <= canvas.x1:
        canvas.line((zero, canvas.y0), (zero, canvas.y1), "#999999", 0.8)
    if canvas.y0 <= zero <= canvas.y1:
        canvas.line((canvas.x0, zero), (canvas.x1, zero), "#999999", 0.8)
    low = canvas.px((canvas.x0, canvas.y0))
    high = canvas.px((canvas.x1, canvas.y1))
    canvas.text(low[0], low[1] + 15, str(canvas.x0), anchor="middle")
    canvas.text(high[0], low[1] + 15, str(canvas.x1), anchor="middle")
    canvas.text(low[0] - 5, low[1], str(canvas.y0), anchor="end")
    canvas.text(low[0] - 5, high[1] + 4, str(canvas.y1), anchor="end")
    canvas.text(high[0], low[1] + 30, "x1", anchor="end")
    canvas.text(low[0] - 5, high[1] - 10, "x2", anchor="end")


def render_svg(figure: FigureSpec) -> str:
    """The full SVG document for `figure`; identical figures give identical bytes."""
    for name, p in figure.sets:
        if p.dim != 2:
            raise PreconditionError(f"only two-currency sets can be plotted; '{name}' has d={p.dim}")
    for label, v in figure.marks:
        if len(v) != 2:
            raise PreconditionError(f"marker '{label}' is not a point of the plane")
    canvas = _Canvas(figure.xrange, figure.yrange)
    meta = []
    for k, (name, p) in enumerate(figure.sets):
        color = PALETTE[k % len(PALETTE)]
        pid = canvas.hatch(k, color)
        meta.append('<set name="%s" node="%s">%s</set>' % (
            escape(name), escape(figure.node), escape("; ".join(h.describe() for h in p.halfspaces)
                                                     if not p.is_empty() else "empty")))
        poly = _clip(canvas, p)
        if len(poly) >= 3:
            canvas.polygon(poly, pid, color)
        if p.is_empty():
            continue
        for h in p.halfspaces:
            seg = _boundary(canvas, h)
            if len(seg) == 2:
                canvas.line(seg[0], seg[1], color)
        if poly:
            lx, ly = canvas.px(poly[0])
            canvas.text(lx + 4, ly + 12, name, color)
    for label, v in figure.marks:
        canvas.marker(tuple(Fraction(x) for x in v), label)
        meta.append('<mark label="%s">%s</mark>' % (escape(label), escape(fmt_vec(v))))
    _axes(canvas)
    if figure.title:
        canvas.text(SIZE / 2, MARGIN / 2, figure.title, "#000000", anchor="middle")

    out = [PREAMBLE % {"size": SIZE}]
    out.append("<metadata>\n" + "\n".join(meta) + "\n</metadata>\n" if meta else "<metadata/>\n")
    out.append("<defs>" + "".join(canvas.defs) + "</defs>\n" if canvas.defs else "")
    out.append('<rect x="0" y="0" width="%d" height="%d" style="fill:#ffffff"/>\n' % (SIZE, SIZE))
    out.extend(item + "\n" for item in canvas.commands)
    out.append(POSTAMBLE)
    return "".join(out)


def save_svg(path: Union[str, Path], figure: FigureSpec) -> None:
    Path(path).write_text(render_svg(figure), encoding="utf-8")
    logger.info("figure with %d sets written to %s", len(figure.sets), path)
