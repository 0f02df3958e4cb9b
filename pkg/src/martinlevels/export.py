"""Deterministic JSON/CSV/SVG writers.

JSON is emitted with sorted keys and no timestamps, so identical inputs give
byte-identical files; all writes are atomic (write to a sibling temp file,
then rename).  SVG embeds a tool version string and is excluded from
byte-level determinism checks.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

TOOL_VERSION = "martinlevels 0.1.0"


def _atomic_write(path, text, mode="w", newline=None):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, newline=newline) as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(path, obj):
    _atomic_write(path, canonical_json(obj))


def write_csv(path, header, rows):
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    _atomic_write(path, buf.getvalue(), newline="")


def _svg_path(points, sx, sy, tx, ty):
    cmds = []
    for k, (x, y) in enumerate(points):
        cmds.append(f"{'M' if k == 0 else 'L'} {sx * x + tx:.3f} {ty - sy * y:.3f}")
    return " ".join(cmds)


def write_svg_levels(path, curves, window, title="level sets", size=640):
    """Overlay of level polylines inside the window, one color per level."""
    (x0, y0), (x1, y1) = window.lower, window.upper
    aspect = (y1 - y0) / (x1 - x0)
    width, height = size, max(64, int(size * aspect))
    sx = width / (x1 - x0)
    sy = height / (y1 - y0)
    tx, ty = -sx * x0, height + sy * y0
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    levels = sorted({float(c.level) for c in curves})
    color_of = {lv: palette[i % len(palette)] for i, lv in enumerate(levels)}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<!-- {TOOL_VERSION} -->",
        f"<title>{title}</title>",
        f'<metadata>{{"levels": {sorted(levels)}, "window": [[{x0}, {y0}], [{x1}, {y1}]]}}</metadata>',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    # axes through the origin when visible
    if x0 < 0.0 < x1:
        parts.append(f'<line x1="{tx:.1f}" y1="0" x2="{tx:.1f}" y2="{height}" stroke="#ccc"/>')
    if y0 < 0.0 < y1:
        parts.append(f'<line x1="0" y1="{ty:.1f}" x2="{width}" y2="{ty:.1f}" stroke="#ccc"/>')
    for c in curves:
        if len(c.vertices) < 2:
            continue
        d = _svg_path(c.vertices, sx, sy, tx, ty)
        if c.closed:
            d += " Z"
        parts.append(f'<path d="{d}" fill="none" stroke="{color_of[float(c.level)]}" '
                     f'stroke-width="1.2"><title>c={c.level:g}</title></path>')
    parts.append("</svg>")
    _atomic_write(path, "\n".join(parts) + "\n")
