"""Minimal dependency-free SVG line charts for spectrum traces.

CSV stays the authoritative output; this exists so a run can drop a
quick-look figure next to the data without pulling in a plotting stack.
"""

from __future__ import annotations

import numpy as np

_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def line_chart(
    xs: np.ndarray,
    series: dict[str, np.ndarray],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    width: int = 720,
    height: int = 480,
) -> str:
    """Render labelled line series sharing one x axis as an SVG document."""
    xs = np.asarray(xs, dtype=float)
    pad_l, pad_r, pad_t, pad_b = 64, 16, 40, 48
    plot_w = width - pad_l - pad_r
    plot_h = height - pad_t - pad_b
    all_y = np.concatenate([np.asarray(ys, dtype=float) for ys in series.values()])
    y_min, y_max = float(all_y.min()), float(all_y.max())
    if y_max == y_min:
        y_max = y_min + 1.0
    x_min, x_max = float(xs.min()), float(xs.max())
    if x_max == x_min:
        x_max = x_min + 1.0

    def sx(x):
        return pad_l + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y):
        return pad_t + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad_l}" y="{pad_t}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#888"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        yv = y_min + frac * (y_max - y_min)
        xv = x_min + frac * (x_max - x_min)
        parts.append(
            f'<text x="{pad_l - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{yv:.3g}</text>'
        )
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{height - pad_b + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xv:.3g}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{pad_l + plot_w / 2}" y="{height - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{x_label}</text>'
        )
    if y_label:
        parts.append(
            f'<text x="16" y="{pad_t + plot_h / 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 16 {pad_t + plot_h / 2})">{y_label}</text>'
        )
    for idx, (name, ys) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - pad_r - 4}" y="{pad_t + 14 + 14 * idx}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
