"""Deterministic SVG plots of the CSV dumps.

Output depends only on the input rows: fixed canvas, fixed number
formatting, no timestamps, so two runs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math

__all__ = ["PlotError", "SCHEMAS", "plot_csv"]

WIDTH, HEIGHT, PAD = 640, 400, 48

# kind -> (x column, y columns)
SCHEMAS = {
    "systole": ("t", ("delta_prime",)),
    "recurrence": ("t", ("epsilon",)),
    "histogram": ("bin", ("occupancy", "area")),
}
_COLORS = ("#1f5fa8", "#c0392b")


class PlotError(ValueError):
    pass


def _rows(text: str, kind: str):
    if kind not in SCHEMAS:
        raise PlotError(f"unknown plot kind {kind!r}")
    xcol, ycols = SCHEMAS[kind]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise PlotError("no rows")
    missing = [c for c in (xcol, *ycols) if c not in reader.fieldnames]
    if missing:
        raise PlotError(f"schema mismatch: missing column(s) {', '.join(missing)}")
    rows = []
    for n, r in enumerate(reader, 2):
        try:
            rows.append((float(r[xcol]), [float(r[c]) for c in ycols]))
        except (TypeError, ValueError):
            raise PlotError(f"line {n}: non-numeric value") from None
    if not rows:
        raise PlotError("no rows")
    return rows, xcol, ycols


def _scale(lo, hi):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise PlotError("non-finite value")
    if hi - lo < 1e-300:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _n(v: float) -> str:
    return f"{v:.3f}"


def plot_csv(text: str, kind: str) -> str:
    """SVG text for a CSV of the given kind (systole, recurrence, histogram)."""
    rows, xcol, ycols = _rows(text, kind)
    xs = [x for x, _ in rows]
    ys = [y for _, ys_ in rows for y in ys_]
    x0, x1 = _scale(min(xs), max(xs))
    y0, y1 = _scale(min(0.0, min(ys)), max(ys))

    def px(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def py(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{xcol}</text>',
        f'<text x="{PAD}" y="{PAD - 12}" font-size="12">{", ".join(ycols)}</text>',
        f'<text x="{PAD}" y="{HEIGHT - PAD + 16}" font-size="10">{x0:.6g}</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 16}" text-anchor="end" font-size="10">{x1:.6g}</text>',
        f'<text x="{PAD - 4}" y="{HEIGHT - PAD}" text-anchor="end" font-size="10">{y0:.6g}</text>',
        f'<text x="{PAD - 4}" y="{PAD + 4}" text-anchor="end" font-size="10">{y1:.6g}</text>',
    ]
    if kind == "histogram":
        # paired bars per bin: occupation time next to area
        n = len(rows)
        w = (WIDTH - 2 * PAD) / max(n, 1) / 2.5
        for k, (x, vals) in enumerate(rows):
            for m, v in enumerate(vals):
                left = PAD + (k + 0.25) * (WIDTH - 2 * PAD) / n + m * w
                top = py(max(v, 0.0))
                out.append(
                    f'<rect x="{_n(left)}" y="{_n(top)}" width="{_n(w)}" height="{_n(py(0.0) - top)}" '
                    f'fill="{_COLORS[m]}"/>'
                )
    else:
        for m, col in enumerate(ycols):
            pts = " ".join(f"{_n(px(x))},{_n(py(vals[m]))}" for x, vals in rows)
            out.append(f'<polyline fill="none" stroke="{_COLORS[m]}" stroke-width="1.5" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
