"""Static SVG rendering: one-frame duel trajectories and archive growth.

Hand-assembled SVG text with fixed-precision coordinates, so the same
input renders to the same bytes every time. The one-frame style puts a
dot at every recorded timestep per entity (later steps slightly larger)
over the environment's raster bounds; event steps get ring markers.
"""

from __future__ import annotations

from . import __version__

_PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

_W, _H, _M = 480, 480, 36


def _f(x: float) -> str:
    return f"{x:.2f}"


def _header(width: int, height: int, meta: dict) -> list:
    desc = f"advqd {__version__}"
    for k in sorted(meta or {}):
        desc += f" {k}={meta[k]}"
    return [f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {width} {height}" width="{width}" '
            f'height="{height}">',
            f"<desc>{desc}</desc>",
            f'<rect width="{width}" height="{height}" fill="#ffffff"/>']


def trajectory_svg(traj, meta: dict = None) -> str:
    """One-frame duel picture: per-entity timestep dots plus events."""
    x0, x1, y0, y1 = traj.raster_bounds
    sx = (_W - 2 * _M) / (x1 - x0)
    sy = (_H - 2 * _M) / (y1 - y0)

    def px(x):
        return _M + (x - x0) * sx

    def py(y):
        return _H - _M - (y - y0) * sy   # world y up, svg y down

    parts = _header(_W, _H, {"env": traj.env_id, **(meta or {})})
    parts.append(f'<rect x="{_M}" y="{_M}" width="{_W - 2 * _M}" '
                 f'height="{_H - 2 * _M}" fill="none" stroke="#cccccc"/>')
    n = traj.n_steps
    for e, name in enumerate(traj.entities):
        color = _PALETTE[e % len(_PALETTE)]
        dots = []
        for t in range(n):
            x, y = traj.positions[e, t]
            r = 1.0 + 1.5 * t / max(n - 1, 1)   # grows with time
            dots.append(f'<circle cx="{_f(px(x))}" cy="{_f(py(y))}" '
                        f'r="{_f(r)}"/>')
        parts.append(f'<g fill="{color}" fill-opacity="0.35" '
                     f'data-entity="{name}">' + "".join(dots) + "</g>")
        lx, ly = traj.positions[e, n - 1]
        parts.append(f'<circle cx="{_f(px(lx))}" cy="{_f(py(ly))}" r="4" '
                     f'fill="{color}"/>')
        parts.append(f'<text x="{_M + 4}" y="{14 + 12 * e}" '
                     f'font-size="10" fill="{color}">{name}</text>')
    for ev in traj.events:
        x, y = traj.positions[0, min(ev.step, n - 1)]
        parts.append(f'<circle cx="{_f(px(x))}" cy="{_f(py(y))}" r="6" '
                     f'fill="none" stroke="#000000" stroke-width="1.2">'
                     f"<title>{ev.kind} @ {ev.step}</title></circle>")
    parts.append(f'<text x="{_M + 4}" y="{_H - 8}" font-size="10" '
                 f'fill="#555555">{traj.env_id}, {n} steps</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def archive_sizes_svg(generations, sizes, meta: dict = None) -> str:
    """Cells per task archive across generations, one line per task slot.

    `sizes[g][t]` is the cell count of task t's archive in generation
    `generations[g]`."""
    if not generations or len(generations) != len(sizes):
        raise ValueError("need one size row per generation")
    n_task = len(sizes[0])
    y_max = max(max(row) for row in sizes)
    y_max = max(y_max, 1)
    x_lo, x_hi = generations[0], generations[-1]
    span = max(x_hi - x_lo, 1)

    def px(g):
        return _M + (g - x_lo) / span * (_W - 2 * _M)

    def py(v):
        return _H - _M - v / y_max * (_H - 2 * _M)

    parts = _header(_W, _H, meta or {})
    parts.append(f'<rect x="{_M}" y="{_M}" width="{_W - 2 * _M}" '
                 f'height="{_H - 2 * _M}" fill="none" stroke="#cccccc"/>')
    for t in range(n_task):
        color = _PALETTE[t % len(_PALETTE)]
        pts = " ".join(f"{_f(px(g))},{_f(py(row[t]))}"
                       for g, row in zip(generations, sizes))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5" '
                     f'data-task="{t}"/>')
    for g in generations:
        parts.append(f'<text x="{_f(px(g))}" y="{_H - _M + 14}" '
                     f'font-size="10" text-anchor="middle" '
                     f'fill="#555555">{g}</text>')
    for v in (0, y_max // 2, y_max):
        parts.append(f'<text x="{_M - 6}" y="{_f(py(v) + 3)}" '
                     f'font-size="10" text-anchor="end" '
                     f'fill="#555555">{v}</text>')
    parts.append(f'<text x="{_W // 2}" y="{_H - 6}" font-size="10" '
                 f'text-anchor="middle" fill="#555555">generation</text>')
    parts.append(f'<text x="{_M + 4}" y="{14}" font-size="10" '
                 f'fill="#555555">archive cells per task</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
