"""Self-contained SVG charts: score histogram and segmented-fit overlays.

Pure string assembly with fixed decimal formatting, so identical inputs
produce byte-identical files and tests can assert on the XML structure
(the fit overlay contains exactly two ``fit-segment`` polylines: the
pre-event line and the post-event line).
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_WIDTH = 900
_HEIGHT = 480
_MARGIN_LEFT = 70
_MARGIN_RIGHT = 25
_MARGIN_TOP = 50
_MARGIN_BOTTOM = 55


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    """Maps data coordinates into the plot rectangle."""

    def __init__(self, x_min, x_max, y_min, y_max):
        if x_max <= x_min:
            x_max = x_min + 1.0
        if y_max <= y_min:
            y_max = y_min + 1.0
        self.x_min, self.x_max = x_min, x_max
        self.y_min, self.y_max = y_min, y_max
        self.left = _MARGIN_LEFT
        self.right = _WIDTH - _MARGIN_RIGHT
        self.top = _MARGIN_TOP
        self.bottom = _HEIGHT - _MARGIN_BOTTOM

    def x(self, v: float) -> float:
        return self.left + (v - self.x_min) / (self.x_max - self.x_min) * (self.right - self.left)

    def y(self, v: float) -> float:
        return self.bottom - (v - self.y_min) / (self.y_max - self.y_min) * (self.bottom - self.top)


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.0f}" y="28" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{escape(title)}</text>',
    ]


def _axes(frame: _Frame, x_ticks, y_ticks, x_label: str, y_label: str) -> list[str]:
    parts = [
        f'<line x1="{frame.left}" y1="{frame.bottom}" x2="{frame.right}" y2="{frame.bottom}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{frame.left}" y1="{frame.top}" x2="{frame.left}" y2="{frame.bottom}" '
        'stroke="black" stroke-width="1"/>',
    ]
    for value, label in x_ticks:
        px = frame.x(value)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{frame.bottom}" x2="{_fmt(px)}" y2="{frame.bottom + 5}" '
            'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{frame.bottom + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{escape(label)}</text>'
        )
    for value, label in y_ticks:
        py = frame.y(value)
        parts.append(
            f'<line x1="{frame.left - 5}" y1="{_fmt(py)}" x2="{frame.left}" y2="{_fmt(py)}" '
            'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{frame.left - 9}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{escape(label)}</text>'
        )
    parts.append(
        f'<text x="{(frame.left + frame.right) / 2:.0f}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="18" y="{(frame.top + frame.bottom) / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {(frame.top + frame.bottom) / 2:.0f})">{escape(y_label)}</text>'
    )
    return parts


def histogram_svg(histogram: list[int], title: str = "Histogram of clickbait scores") -> str:
    """100-bin histogram over [0, 1]; bins are fixed regardless of data range."""
    nbins = len(histogram)
    top = max(max(histogram), 1)
    frame = _Frame(0.0, 1.0, 0.0, float(top))
    parts = _header(title)
    x_ticks = [(v, f"{v:.2f}") for v in (0.0, 0.25, 0.5, 0.75, 1.0)]
    y_ticks = [(top * f, f"{top * f:.0f}") for f in (0.0, 0.25, 0.5, 0.75, 1.0)]
    parts += _axes(frame, x_ticks, y_ticks, "clickbait score", "count")
    width = (frame.right - frame.left) / nbins
    for i, count in enumerate(histogram):
        if count <= 0:
            continue
        x0 = frame.left + i * width
        y0 = frame.y(float(count))
        parts.append(
            f'<rect class="bin" x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(width)}" '
            f'height="{_fmt(frame.bottom - y0)}" fill="#4878a8" stroke="none"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def fit_overlay_svg(
    means,
    event_index: int,
    coefficients,
    title: str,
) -> str:
    """Daily means as points with the fitted segmented line overlaid.

    ``coefficients`` are (intercept, T, D, P); the fitted line is drawn as
    exactly two segments: before the event row and from it onward.
    """
    y = np.asarray(means, dtype=float)
    n = len(y)
    b0, b1, b2, b3 = (float(c) for c in coefficients)
    t = np.arange(1.0, n + 1.0)
    pre_t = t[:event_index]
    post_t = t[event_index:]
    pre_fit = b0 + b1 * pre_t
    post_fit = b0 + b1 * post_t + b2 + b3 * np.arange(1.0, n - event_index + 1.0)

    y_all = np.concatenate([y, pre_fit, post_fit])
    pad = 0.05 * (y_all.max() - y_all.min() or 1.0)
    frame = _Frame(1.0, float(n), float(y_all.min() - pad), float(y_all.max() + pad))

    parts = _header(title)
    x_ticks = [(v, f"{int(v)}") for v in np.linspace(1, n, 6)]
    y_span = np.linspace(frame.y_min, frame.y_max, 5)
    y_ticks = [(v, f"{v:.4f}") for v in y_span]
    parts += _axes(frame, x_ticks, y_ticks, "observation", "mean clickbait score")

    for i in range(n):
        parts.append(
            f'<circle class="obs" cx="{_fmt(frame.x(t[i]))}" cy="{_fmt(frame.y(y[i]))}" '
            'r="1.6" fill="#9ab0c4"/>'
        )
    ex = frame.x(t[event_index])
    parts.append(
        f'<line class="event-marker" x1="{_fmt(ex)}" y1="{frame.top}" x2="{_fmt(ex)}" '
        f'y2="{frame.bottom}" stroke="#999999" stroke-width="1" stroke-dasharray="4 3"/>'
    )
    for seg_t, seg_y in ((pre_t, pre_fit), (post_t, post_fit)):
        pts = " ".join(f"{_fmt(frame.x(a))},{_fmt(frame.y(b))}" for a, b in zip(seg_t, seg_y))
        parts.append(
            f'<polyline class="fit-segment" points="{pts}" fill="none" '
            'stroke="#c03028" stroke-width="2"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
