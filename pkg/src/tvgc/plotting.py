"""Plot-data assembly and a small deterministic SVG renderer.

The SVG is plain text built from fixed-precision coordinates, so the same
sequences always give the same bytes.
"""

import numpy as np

from tvgc.dating import date_episodes

WIDTH, HEIGHT = 800, 320
MARGIN = (50, 20, 20, 40)  # left, right, top, bottom


def _fmt(x):
    return f"{x:.2f}"


def _paths(xs, ys):
    """Polyline point strings, broken at missing values."""
    runs, cur = [], []
    for x, y in zip(xs, ys):
        if np.isfinite(y):
            cur.append(f"{_fmt(x)},{_fmt(y)}")
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return [" ".join(r) for r in runs]


def render_svg(statistic, critical_value, labels=None, title="") -> str:
    """Black statistic line, red dashed critical-value line, grey episode bands."""
    stat = np.asarray(statistic, dtype=float)
    cv = np.asarray(critical_value, dtype=float)
    n = stat.size
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom
    finite = np.concatenate([stat[np.isfinite(stat)], cv[np.isfinite(cv)], [0.0]])
    ymax = float(finite.max()) or 1.0
    ymax *= 1.05
    step = pw / max(n - 1, 1)
    xs = left + step * np.arange(n)

    def y_of(v):
        return top + ph * (1.0 - v / ymax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{title}</title>')
    for ep in date_episodes(stat, cv):
        x0 = xs[ep.start_index] - step / 2
        x1 = xs[ep.end_index] + step / 2
        out.append(f'<rect class="episode" x="{_fmt(max(x0, left))}" y="{_fmt(top)}" '
                   f'width="{_fmt(min(x1, left + pw) - max(x0, left))}" height="{_fmt(ph)}" '
                   f'fill="#cccccc" fill-opacity="0.6"/>')
    out.append(f'<line x1="{left}" y1="{_fmt(top + ph)}" x2="{left + pw}" y2="{_fmt(top + ph)}" '
               f'stroke="#444444"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{_fmt(top + ph)}" stroke="#444444"/>')
    for frac in (0.0, 0.5, 1.0):
        v = ymax * frac
        out.append(f'<text x="{left - 6}" y="{_fmt(y_of(v) + 4)}" font-size="10" '
                   f'text-anchor="end">{v:.1f}</text>')
    if labels is not None and n:
        for i in sorted({0, n // 2, n - 1}):
            out.append(f'<text x="{_fmt(xs[i])}" y="{HEIGHT - 12}" font-size="10" '
                       f'text-anchor="middle">{labels[i]}</text>')
    for pts in _paths(xs, y_of(cv)):
        out.append(f'<polyline class="critical-value" points="{pts}" fill="none" '
                   f'stroke="red" stroke-width="1" stroke-dasharray="6,3"/>')
    for pts in _paths(xs, y_of(stat)):
        out.append(f'<polyline class="statistic" points="{pts}" fill="none" '
                   f'stroke="black" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
