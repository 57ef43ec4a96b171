"""Minimal deterministic SVG line plots for bound-vs-blocklength curves."""

from __future__ import annotations

_PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

_W, _H = 760, 500
_ML, _MR, _MT, _MB = 70, 170, 20, 45


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render(xs: list[float], columns: dict[str, list[float]]) -> str:
    """One polyline per column over the common x values; the asymptote
    column (if present) is dashed.  Output bytes depend only on the data."""
    if not xs or not columns:
        raise ValueError("nothing to plot")
    ys = [v for col in columns.values() for v in col]
    y_lo, y_hi = min(ys), max(ys)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad
    x_lo, x_hi = min(xs), max(xs)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
    ]
    for i in range(5):
        xv = x_lo + i * (x_hi - x_lo) / 4
        yv = y_lo + i * (y_hi - y_lo) / 4
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{_H - _MB + 18}" font-size="11" '
            f'text-anchor="middle">{xv:g}</text>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{sy(yv):.1f}" font-size="11" '
            f'text-anchor="end">{_fmt(yv)}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) // 2}" y="{_H - 8}" font-size="12" '
        f'text-anchor="middle">n</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) // 2}" font-size="12" '
        f'text-anchor="middle" transform="rotate(-90 16 {(_MT + _H - _MB) // 2})">distortion</text>'
    )
    for k, (name, col) in enumerate(columns.items()):
        color = _PALETTE[k % len(_PALETTE)]
        dash = ' stroke-dasharray="6,4"' if name == "asymptote" else ""
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, col))
        parts.append(f'<polyline fill="none" stroke="{color}"{dash} points="{pts}"/>')
        ly = _MT + 16 + 16 * k
        parts.append(
            f'<line x1="{_W - _MR + 8}" y1="{ly - 4}" x2="{_W - _MR + 30}" y2="{ly - 4}" '
            f'stroke="{color}"{dash}/>'
        )
        parts.append(
            f'<text x="{_W - _MR + 34}" y="{ly}" font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
