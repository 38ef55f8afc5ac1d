"""SVG rendering of layouts.

Output is deterministic text: same layout, same bytes. Each blob is an
ellipse rotated about its own center, with the category drawn at the
center. Colors cycle through a fixed palette by blob index.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

from .geometry import BlobLayout

PALETTE = (
    "#e6194b",
    "#3cb44b",
    "#4363d8",
    "#f58231",
    "#911eb4",
    "#46f0f0",
    "#f032e6",
    "#bcf60c",
    "#fabebe",
    "#008080",
    "#e6beff",
    "#9a6324",
    "#fffac8",
    "#800000",
    "#aaffc3",
)


def _fmt(x: float) -> str:
    # Fixed decimals keep the output byte-stable across runs.
    return f"{x:.3f}"


def render_svg(layout: BlobLayout, include_labels: bool = True, fill_opacity: float = 0.25) -> str:
    w, h = layout.canvas.width, layout.canvas.height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'  <rect x="0" y="0" width="{w}" height="{h}" fill="white" stroke="#444"/>',
    ]
    for index, blob in enumerate(layout.blobs):
        p = blob.parameter
        color = PALETTE[index % len(PALETTE)]
        degrees = math.degrees(p.theta)
        transform = quoteattr(
            f"rotate({_fmt(degrees)} {_fmt(p.cx)} {_fmt(p.cy)})"
        )
        title = escape(blob.description)
        parts.append(
            f'  <ellipse cx="{_fmt(p.cx)}" cy="{_fmt(p.cy)}" rx="{_fmt(p.a)}" '
            f'ry="{_fmt(p.b)}" transform={transform} fill="{color}" '
            f'fill-opacity="{_fmt(fill_opacity)}" stroke="{color}" stroke-width="2">'
            f"<title>{title}</title></ellipse>"
        )
        if include_labels:
            label = escape(blob.category)
            parts.append(
                f'  <text x="{_fmt(p.cx)}" y="{_fmt(p.cy)}" text-anchor="middle" '
                f'dominant-baseline="middle" font-family="sans-serif" font-size="14" '
                f'fill="#222">{label}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
