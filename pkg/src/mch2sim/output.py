"""Result serialization: CSV, JSON with embedded manifest, and SVG plots.

Floats are serialized with Python's shortest round-trip repr so that a
replayed run reproduces byte-identical files.  The SVG writer is
self-contained (no plotting library) for the same reason.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class RunManifest:
    """Everything needed to reconstruct a run bit-for-bit."""

    tool: str
    version: str
    command: list
    config: dict
    base_seed: int
    member_seeds: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def write_csv(path, header, rows) -> None:
    rows = list(rows)
    if not rows:
        raise ValueError(f"refusing to write empty CSV {path}")
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, manifest: RunManifest, report) -> None:
    payload = {"manifest": manifest.to_dict(), "report": report}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_manifest(path, manifest: RunManifest, wall_clock_s: float) -> None:
    payload = manifest.to_dict()
    payload["wall_clock_s"] = wall_clock_s
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# minimal deterministic SVG line plots


_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e, hi_e = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0 ** e for e in range(int(lo_e), int(hi_e) + 1)]
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** math.floor(math.log10(span / 4))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(span):
        out.append(t)
        t += step
    return out


def emit_svg(
    path,
    series: dict,
    xlabel: str,
    ylabel: str,
    title: str = "",
    loglog: bool = False,
    annotations: list | None = None,
) -> None:
    """Write a line plot; `series` maps label -> (x array, y array)."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    nonempty = {k: v for k, v in series.items() if len(v[0]) > 0}
    if not nonempty:
        parts.append(
            f'<text x="{_W / 2}" y="{_H / 2}" text-anchor="middle" '
            f'font-size="16">no data</text></svg>'
        )
        Path(path).write_text("\n".join(parts) + "\n")
        return

    def tx(vals):
        return [math.log10(v) for v in vals] if loglog else list(vals)

    xs = [x for x_arr, _ in nonempty.values() for x in x_arr]
    ys = [y for _, y_arr in nonempty.values() for y in y_arr]
    if loglog:
        xs = [x for x in xs if x > 0]
        ys = [y for y in ys if y > 0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 1, y_hi + 1

    lx_lo, lx_hi = tx([x_lo, x_hi])
    ly_lo, ly_hi = tx([y_lo, y_hi])

    def px(x):
        lx = math.log10(x) if loglog else x
        return _ML + (lx - lx_lo) / (lx_hi - lx_lo) * (_W - _ML - _MR)

    def py(y):
        ly = math.log10(y) if loglog else y
        return _H - _MB - (ly - ly_lo) / (ly_hi - ly_lo) * (_H - _MT - _MB)

    # axes and ticks
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>'
    )
    for t in _ticks(x_lo, x_hi, loglog):
        if x_lo <= t <= x_hi:
            parts.append(
                f'<line x1="{px(t):.1f}" y1="{_H - _MB}" x2="{px(t):.1f}" '
                f'y2="{_H - _MB + 5}" stroke="black"/>'
                f'<text x="{px(t):.1f}" y="{_H - _MB + 18}" font-size="11" '
                f'text-anchor="middle">{t:g}</text>'
            )
    for t in _ticks(y_lo, y_hi, loglog):
        if y_lo <= t <= y_hi:
            parts.append(
                f'<line x1="{_ML - 5}" y1="{py(t):.1f}" x2="{_ML}" '
                f'y2="{py(t):.1f}" stroke="black"/>'
                f'<text x="{_ML - 8}" y="{py(t):.1f}" font-size="11" '
                f'text-anchor="end" dominant-baseline="middle">{t:g}</text>'
            )

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    for idx, (label, (x_arr, y_arr)) in enumerate(nonempty.items()):
        pts = " ".join(
            f"{px(x):.2f},{py(y):.2f}"
            for x, y in zip(x_arr, y_arr)
            if not (loglog and (x <= 0 or y <= 0))
        )
        color = colors[idx % len(colors)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 6}" y="{_MT + 16 + 14 * idx}" font-size="12" '
            f'text-anchor="end" fill="{color}">{label}</text>'
        )

    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" font-size="13" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">'
        f"{ylabel}</text>"
    )
    if title:
        parts.append(
            f'<text x="{_W / 2}" y="18" font-size="14" text-anchor="middle">'
            f"{title}</text>"
        )
    for note in annotations or []:
        parts.append(
            f'<text x="{_ML + 10}" y="{_MT + 18}" font-size="12">{note}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
