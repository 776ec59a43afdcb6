"""SVG frames, filmstrips and CSV dumps of traced fronts.

All output is plain text with fixed number formatting so identical
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .trace import FrontFrame

PALETTE = ("#1f6fb4", "#c8322b", "#2a9a3c", "#8a55b8", "#c77c12")
EMPTY = "∅"


@dataclass(frozen=True)
class Style:
    size: int = 320
    margin: int = 28
    stroke: float = 1.4
    azimuth: float = -35.0
    elevation: float = 25.0
    wire_lines: int = 24
    gap: int = 40


def stratum_name(stratum: Sequence[str]) -> str:
    return "{" + ",".join(stratum) + "}" if stratum else EMPTY


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


# ------------------------------------------------------------ geometry

def _project(pts: np.ndarray, n: int, style: Style) -> np.ndarray:
    """(q..., z) -> plane coordinates; n = 2 uses an orthographic view."""
    if n == 1:
        return pts[:, :2]
    az, el = math.radians(style.azimuth), math.radians(style.elevation)
    q1, q2, z = pts[:, 0], pts[:, 1], pts[:, 2]
    u = math.cos(az) * q1 - math.sin(az) * q2
    depth = math.sin(az) * q1 + math.cos(az) * q2
    v = z * math.cos(el) + depth * math.sin(el)
    return np.column_stack([u, v])


def _frame_lines(frame: FrontFrame, style: Style):
    """Per (component, stratum) lists of projected polylines."""
    out = {}
    for b in frame.branches:
        key = (b.component, b.stratum)
        lines = out.setdefault(key, [])
        if frame.n == 1:
            lines.extend(b.polylines())
            continue
        step = max(1, b.shape[0] // style.wire_lines)
        for axis in (0, 1):
            grid = np.column_stack([b.q, b.z]).reshape(b.shape + (3,))
            ok = b.valid.reshape(b.shape)
            if axis == 1:
                grid, ok = grid.transpose(1, 0, 2), ok.T
            for r in range(0, b.shape[0], step):
                idx = np.flatnonzero(ok[r])
                if not len(idx):
                    continue
                for chunk in np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1):
                    lines.append(grid[r][chunk])
    return {k: [_project(pl, frame.n, style) for pl in v] for k, v in out.items()}


def view_bounds(frames: Sequence[FrontFrame], style: Style = Style()):
    """Common plot window for a set of frames."""
    lo = np.array([np.inf, np.inf])
    hi = -lo
    for f in frames:
        for lines in _frame_lines(f, style).values():
            for pl in lines:
                lo = np.minimum(lo, pl.min(axis=0))
                hi = np.maximum(hi, pl.max(axis=0))
    if not np.all(np.isfinite(lo)):
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    span = np.maximum(hi - lo, 1e-6)
    return lo - 0.05 * span, hi + 0.05 * span


# ------------------------------------------------------------ svg

def _panel(frame: FrontFrame, bounds, style: Style, title: str) -> list[str]:
    lo, hi = bounds
    s, mg = style.size, style.margin
    inner = s - 2 * mg
    # fronts are read topologically, so each axis fills the panel
    scale = inner / (hi - lo)

    def to_px(p):
        return mg + (p[:, 0] - lo[0]) * scale[0], s - (mg + (p[:, 1] - lo[1]) * scale[1])

    els = [f'<rect x="0" y="0" width="{s}" height="{s}" fill="white" stroke="#bbbbbb"/>']
    if frame.n == 1:
        for a, b in (([lo[0], 0.0], [hi[0], 0.0]), ([0.0, lo[1]], [0.0, hi[1]])):
            px, py = to_px(np.array([a, b]))
            if lo[0] <= 0 <= hi[0] and lo[1] <= 0 <= hi[1]:
                els.append(f'<line x1="{_fmt(px[0])}" y1="{_fmt(py[0])}" x2="{_fmt(px[1])}" y2="{_fmt(py[1])}" '
                           'stroke="#dddddd" stroke-width="0.8"/>')
    lines = _frame_lines(frame, style)
    legend = []
    for (i, stratum), pls in sorted(lines.items()):
        color = PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="5,3"' if stratum else ""
        width = style.stroke if frame.n == 1 else style.stroke * 0.5
        for pl in pls:
            if len(pl) < 2:
                continue
            px, py = to_px(pl)
            d = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
            els.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>')
        absent = "" if any(len(pl) for pl in pls) else " (absent)"
        legend.append((color, dash, f"F{i + 1} {stratum_name(stratum)}{absent}"))
    for ev in frame.events.values():
        for q, z in ev.locations:
            px, py = to_px(np.array([[q, z]]))
            els.append(f'<circle cx="{_fmt(px[0])}" cy="{_fmt(py[0])}" r="3" fill="none" stroke="black"/>')
    els.append(f'<text x="{mg}" y="{mg - 10}" font-family="sans-serif" font-size="12">{escape(title)}</text>')
    for k, (color, dash, text) in enumerate(legend):
        y = mg + 8 + 13 * k
        els.append(f'<line x1="{s - 110}" y1="{y - 4}" x2="{s - 94}" y2="{y - 4}" stroke="{color}" stroke-width="1.5"{dash}/>')
        els.append(f'<text x="{s - 90}" y="{y}" font-family="sans-serif" font-size="10">{escape(text)}</text>')
    for k, ev in enumerate(sorted(frame.events.values(), key=lambda e: e.pair)):
        els.append(f'<text x="{mg}" y="{s - 8 - 12 * k}" font-family="sans-serif" font-size="10">'
                   f'{escape(ev.describe())}</text>')
    return els


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n')
    return head + "\n".join(body) + "\n</svg>\n"


def frame_svg(frame: FrontFrame, bounds=None, style: Style = Style(), label: str = "") -> str:
    bounds = view_bounds([frame], style) if bounds is None else bounds
    title = f"{label}  t = {_fmt(frame.t)}".strip()
    return _svg(style.size, style.size, _panel(frame, bounds, style, title))


def filmstrip_svg(frames: Sequence[FrontFrame], bounds=None, style: Style = Style(), label: str = "") -> str:
    """Panels left to right in sweep order, joined by double arrows."""
    if not frames:
        raise ValueError("nothing to render")
    bounds = view_bounds(frames, style) if bounds is None else bounds
    s, gap = style.size, style.gap
    body = []
    for k, f in enumerate(frames):
        x0 = k * (s + gap)
        body.append(f'<g transform="translate({x0},0)">')
        body.extend(_panel(f, bounds, style, f"{label}  t = {_fmt(f.t)}".strip()))
        body.append("</g>")
        if k + 1 < len(frames):
            body.append(f'<text x="{x0 + s + gap / 2}" y="{s / 2}" text-anchor="middle" '
                        f'font-family="sans-serif" font-size="20">↔</text>')
    width = len(frames) * s + (len(frames) - 1) * gap
    return _svg(width, s, body)


def render(frames: Sequence[FrontFrame], out_dir: str | Path, stem: str,
           style: Style = Style(), label: str = "") -> list[Path]:
    """Write ``{stem}_t{index}.svg`` per frame plus ``{stem}_filmstrip.svg``."""
    if not frames:
        raise ValueError("nothing to render")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bounds = view_bounds(frames, style)
    paths = []
    for k, f in enumerate(frames):
        p = out / f"{stem}_t{k}.svg"
        p.write_text(frame_svg(f, bounds, style, label), encoding="utf-8")
        paths.append(p)
    p = out / f"{stem}_filmstrip.svg"
    p.write_text(filmstrip_svg(frames, bounds, style, label), encoding="utf-8")
    paths.append(p)
    return paths


# ------------------------------------------------------------ csv

def _num(v: float) -> str:
    s = f"{v:.12f}"
    return s[1:] if s == "-0.000000000000" else s


def csv_header(frames: Sequence[FrontFrame], q: Sequence[str]) -> list[str]:
    r = max((b.x.shape[1] for f in frames for b in f.branches), default=0)
    k = max((b.y.shape[1] for f in frames for b in f.branches), default=0)
    xs = ["x"] if r == 1 else [f"x{i + 1}" for i in range(r)]
    ys = ["y"] if k == 1 else [f"y{i + 1}" for i in range(k)]
    return ["component", "stratum", "t", *q, "z", *xs, *ys, "s", *[f"p_{v}" for v in q]]


def write_csv(frames: Sequence[FrontFrame], path: str | Path, q: Sequence[str]) -> Path:
    """Point dump, one row per front point, values with 12 decimals.

    Missing state columns (a component without x, say) are left empty.
    The stratum column lists the pinned x variables, ``-`` for none.
    """
    header = csv_header(frames, q)
    r = sum(1 for h in header if h.startswith("x"))
    k = sum(1 for h in header if h.startswith("y"))
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for f in frames:
            for b in f.branches:
                stratum = ",".join(b.stratum) or "-"
                for i in np.flatnonzero(b.valid):
                    xs = [_num(v) for v in b.x[i]] + [""] * (r - b.x.shape[1])
                    ys = [_num(v) for v in b.y[i]] + [""] * (k - b.y.shape[1])
                    w.writerow([b.component + 1, stratum, _num(f.t), *(_num(v) for v in b.q[i]),
                                _num(b.z[i]), *xs, *ys, _num(b.s[i]), *(_num(v) for v in b.p[i])])
    return path
