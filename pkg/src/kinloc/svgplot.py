"""Tiny deterministic SVG line-plot writer for sweep results.

Hand-rolled on purpose: the output must be byte-identical across runs and
machines, so no plotting library (font metrics, version strings, timestamps)
is acceptable.  Log-log axes, one polyline per series, fixed palette.
"""

import math

_WIDTH, _HEIGHT = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 30, 55          # margins: left right top bottom
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    # fixed-precision pixel coordinates keep the file stable across platforms
    return f"{x:.2f}"


def _log_ticks(lo: float, hi: float):
    first = math.floor(math.log10(lo))
    last = math.ceil(math.log10(hi))
    return [10.0 ** k for k in range(first, last + 1) if lo <= 10.0 ** k * (1 + 1e-12)
            and 10.0 ** k <= hi * (1 + 1e-12)]


def _tick_label(value: float) -> str:
    exp = math.log10(value)
    if abs(exp - round(exp)) < 1e-9:
        exp = round(exp)
        if -3 <= exp <= 3:
            return f"{value:.10g}"
        return f"1e{exp:+d}"
    return f"{value:.3g}"


def render_loglog(series: dict, xlabel: str, ylabel: str, title: str = "") -> str:
    """Render named (x, y) series to an SVG string with log-log axes.

    series maps a legend label to a pair of equal-length sequences.  Values
    <= 0 cannot be drawn on a log axis and raise ValueError.
    """
    if not series:
        raise ValueError("need at least one series")
    xs_all, ys_all = [], []
    for label, (xs, ys) in series.items():
        if len(xs) != len(ys) or len(xs) == 0:
            raise ValueError(f"series {label!r} must have equal nonzero lengths")
        if any(v <= 0 for v in xs) or any(v <= 0 for v in ys):
            raise ValueError(f"series {label!r} has nonpositive values; log axes need > 0")
        xs_all.extend(xs)
        ys_all.extend(ys)

    def span(vals):
        lo, hi = min(vals), max(vals)
        if lo == hi:                 # degenerate span: pad a decade around it
            lo, hi = lo / 10 ** 0.5, hi * 10 ** 0.5
        return math.log10(lo), math.log10(hi)

    lx0, lx1 = span(xs_all)
    ly0, ly1 = span(ys_all)
    px0, px1 = _ML, _WIDTH - _MR
    py0, py1 = _HEIGHT - _MB, _MT

    def sx(v):
        return px0 + (math.log10(v) - lx0) / (lx1 - lx0) * (px1 - px0)

    def sy(v):
        return py0 + (math.log10(v) - ly0) / (ly1 - ly0) * (py1 - py0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        '<g font-family="sans-serif" font-size="12" fill="#222">',
    ]
    if title:
        out.append(f'<text x="{(px0 + px1) / 2:.0f}" y="18" text-anchor="middle" '
                   f'font-size="14">{title}</text>')

    # frame
    out.append(f'<rect x="{px0}" y="{py1}" width="{px1 - px0}" height="{py0 - py1}" '
               'fill="none" stroke="#222"/>')

    for tick in _log_ticks(10 ** lx0, 10 ** lx1):
        x = sx(tick)
        out.append(f'<line x1="{_fmt(x)}" y1="{py0}" x2="{_fmt(x)}" y2="{py1}" '
                   'stroke="#ddd"/>')
        out.append(f'<text x="{_fmt(x)}" y="{py0 + 18}" text-anchor="middle">'
                   f'{_tick_label(tick)}</text>')
    for tick in _log_ticks(10 ** ly0, 10 ** ly1):
        y = sy(tick)
        out.append(f'<line x1="{px0}" y1="{_fmt(y)}" x2="{px1}" y2="{_fmt(y)}" '
                   'stroke="#ddd"/>')
        out.append(f'<text x="{px0 - 6}" y="{_fmt(y + 4)}" text-anchor="end">'
                   f'{_tick_label(tick)}</text>')

    out.append(f'<text x="{(px0 + px1) / 2:.0f}" y="{_HEIGHT - 12}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{(py0 + py1) / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(py0 + py1) / 2:.0f})">{ylabel}</text>')

    legend_y = py1 + 14
    for idx, (label, (xs, ys)) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.5"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" '
                       f'fill="{color}"/>')
        out.append(f'<line x1="{px1 - 150}" y1="{legend_y}" x2="{px1 - 120}" '
                   f'y2="{legend_y}" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{px1 - 114}" y="{legend_y + 4}">{label}</text>')
        legend_y += 16

    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sweep_figure(sweep) -> str:
    """SVG for a SweepResult: both estimator variants of the swept quantity."""
    if sweep.swept_parameter == "sigma_drr":
        series = {
            "acceleration LS": (sweep.grid, [p.rmse_accel_ls for p in sweep.points]),
            "acceleration WLS": (sweep.grid, [p.rmse_accel_wls for p in sweep.points]),
        }
        ylabel = "acceleration RMSE (m/s^2)"
        xlabel = "drr noise sigma (m/s^2)"
    else:
        series = {
            "velocity LS": (sweep.grid, [p.rmse_velocity_ls for p in sweep.points]),
            "velocity WLS": (sweep.grid, [p.rmse_velocity_wls for p in sweep.points]),
        }
        ylabel = "velocity RMSE (m/s)"
        xlabel = "range-rate noise sigma (m/s)"
    return render_loglog(series, xlabel, ylabel)
