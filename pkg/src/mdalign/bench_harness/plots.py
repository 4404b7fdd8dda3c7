"""Self-contained SVG timeline of one clip: speed curve, beats, hit windows, accents.

Written by hand rather than through a plotting library so that element
coordinates are exact and the output is byte-stable.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 960, 320
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 56, 16, 28, 40


def _f(x: float) -> str:
    return f"{x:.3f}"


class _Axes:
    def __init__(self, t_max: float, y_max: float):
        self.t_max = t_max if t_max > 0 else 1.0
        self.y_max = y_max if y_max > 0 else 1.0
        self.w = WIDTH - MARGIN_L - MARGIN_R
        self.h = HEIGHT - MARGIN_T - MARGIN_B

    def x(self, t):
        return MARGIN_L + self.w * (t / self.t_max)

    def y(self, v):
        return MARGIN_T + self.h * (1.0 - v / self.y_max)


def render_plot(beats, accents, smoothed, fps: float, tau: float, duration: float | None = None,
                title: str = "") -> str:
    """SVG document for one clip.

    Each beat gets a shaded band of half-width ``tau`` (class ``tau-band``)
    and a vertical line (class ``beat``); accents are circles (class
    ``accent``) placed on the speed curve (class ``velocity``).
    """
    beats = np.asarray(beats, dtype=np.float64)
    accents = np.asarray(accents, dtype=np.float64)
    smoothed = np.asarray(smoothed, dtype=np.float64)
    t_curve = np.arange(len(smoothed)) / fps if fps > 0 else np.zeros(0)
    t_max = max([duration or 0.0, *(t_curve[-1:]), *(beats[-1:]), *(accents[-1:])])
    ax = _Axes(t_max, float(smoothed.max()) * 1.05 if smoothed.size else 1.0)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN_L}" y="18" font-size="13">{escape(title)}</text>')

    y0, y1 = _f(MARGIN_T), _f(MARGIN_T + ax.h)
    out.append('<g id="bands">')
    for b in beats:
        x_lo, x_hi = ax.x(max(b - tau, 0.0)), ax.x(min(b + tau, ax.t_max))
        out.append(f'<rect class="tau-band" data-time="{_f(b)}" x="{_f(x_lo)}" y="{y0}" '
                   f'width="{_f(x_hi - x_lo)}" height="{_f(ax.h)}" fill="#4c72b0" fill-opacity="0.15"/>')
    out.append("</g>")

    out.append('<g id="beats">')
    for b in beats:
        xb = _f(ax.x(b))
        out.append(f'<line class="beat" data-time="{_f(b)}" x1="{xb}" y1="{y0}" x2="{xb}" y2="{y1}" '
                   'stroke="#4c72b0" stroke-width="1"/>')
    out.append("</g>")

    if smoothed.size:
        pts = " ".join(f"{_f(ax.x(t))},{_f(ax.y(v))}" for t, v in zip(t_curve, smoothed))
        out.append(f'<polyline class="velocity" points="{pts}" fill="none" stroke="#222222" stroke-width="1.5"/>')

    out.append('<g id="accents">')
    for a in accents:
        v = float(np.interp(a, t_curve, smoothed)) if smoothed.size else 0.0
        out.append(f'<circle class="accent" data-time="{_f(a)}" cx="{_f(ax.x(a))}" cy="{_f(ax.y(v))}" r="4" '
                   'fill="#dd8452" stroke="#8c4a1c"/>')
    out.append("</g>")

    # axes and ticks
    out.append(f'<line x1="{MARGIN_L}" y1="{y1}" x2="{_f(MARGIN_L + ax.w)}" y2="{y1}" stroke="#000000"/>')
    out.append(f'<line x1="{MARGIN_L}" y1="{y0}" x2="{MARGIN_L}" y2="{y1}" stroke="#000000"/>')
    step = 1.0 if ax.t_max <= 15 else 5.0
    for t in np.arange(0.0, ax.t_max + 1e-9, step):
        xt = _f(ax.x(t))
        out.append(f'<line x1="{xt}" y1="{y1}" x2="{xt}" y2="{_f(MARGIN_T + ax.h + 4)}" stroke="#000000"/>')
        out.append(f'<text x="{xt}" y="{_f(MARGIN_T + ax.h + 16)}" text-anchor="middle">{t:g}</text>')
    out.append(f'<text x="{_f(MARGIN_L + ax.w / 2)}" y="{HEIGHT - 6}" text-anchor="middle">time (s)</text>')
    out.append(f'<text x="14" y="{_f(MARGIN_T + ax.h / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_f(MARGIN_T + ax.h / 2)})">speed (px/frame)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_clip(clip, tau: float) -> str:
    """SVG for a :class:`~mdalign.bench_harness.pipeline.ClipResult`."""
    return render_plot(clip.beats, clip.accents, clip.smoothed, clip.fps, tau,
                       duration=clip.duration, title=f"{clip.model_name} / {clip.clip_id}")
