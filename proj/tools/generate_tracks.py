#!/usr/bin/env python3
"""Generate the bundled track CSVs.

Each track is a smooth closed loop defined in polar form r(theta); waypoints
are resampled uniformly by arclength and written as
`x_m, y_m, w_tr_left_m, w_tr_right_m` rows with the closing row repeated.
"""

import argparse
import pathlib

import numpy as np

THETA = np.linspace(0.0, 2.0 * np.pi, 20001)


def superellipse_radius(theta, aspect, p):
    c = np.abs(np.cos(theta) / aspect) ** p
    s = np.abs(np.sin(theta)) ** p
    return (c + s) ** (-1.0 / p)


def polyline_metrics(x, y):
    """Arclength and per-vertex curvature radius of a dense closed polyline."""
    dx = np.gradient(x, edge_order=2)
    dy = np.gradient(y, edge_order=2)
    ddx = np.gradient(dx, edge_order=2)
    ddy = np.gradient(dy, edge_order=2)
    speed = np.hypot(dx, dy)
    kappa = (dx * ddy - dy * ddx) / speed**3
    seg = np.hypot(np.diff(x), np.diff(y))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    return arc, kappa


def resample(x, y, arc, spacing):
    length = arc[-1]
    n = max(int(round(length / spacing)), 8)
    s_new = np.linspace(0.0, length, n, endpoint=False)
    return np.interp(s_new, arc, x), np.interp(s_new, arc, y), length


def build(name, radius_fn, target_length, spacing, width_fn):
    r = radius_fn(THETA)
    x, y = r * np.cos(THETA), r * np.sin(THETA)
    arc, _ = polyline_metrics(x, y)
    scale = target_length / arc[-1]
    x, y = x * scale, y * scale
    arc, kappa = polyline_metrics(x, y)
    min_radius = 1.0 / np.max(np.abs(kappa))
    xs, ys, length = resample(x, y, arc, spacing)
    s_norm = np.linspace(0.0, 1.0, len(xs), endpoint=False)
    wl, wr = width_fn(s_norm)
    print(f"{name}: length {length:.2f} m, {len(xs)} points, "
          f"min radius {min_radius:.2f} m, "
          f"width [{np.min(wl + wr):.2f}, {np.max(wl + wr):.2f}] m")
    assert min_radius > np.max(np.maximum(wl, wr)) * 1.5, name
    return xs, ys, wl, wr


def write_csv(path, name, xs, ys, wl, wr):
    rows = [f"{x:.6f}, {y:.6f}, {l:.6f}, {r:.6f}"
            for x, y, l, r in zip(xs, ys, wl, wr)]
    rows.append(rows[0])  # close the loop
    text = f"# track: {name}\n# x_m, y_m, w_tr_left_m, w_tr_right_m\n"
    text += "\n".join(rows) + "\n"
    path.write_text(text)


def const_width(w):
    return lambda s: (np.full_like(s, w), np.full_like(s, w))


def wavy_width(base, amp, lobes):
    def fn(s):
        w = base + amp * np.sin(2.0 * np.pi * lobes * s)
        return w, base + amp * np.cos(2.0 * np.pi * lobes * s)
    return fn


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="assets/tracks",
                        help="output directory")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # porto: rounded-rectangle club circuit; corners wide enough to carry
    # the 5 m/s cap (lateral ~7.7 m/s^2 of the ~10.3 available).
    def porto_r(theta):
        base = superellipse_radius(theta, aspect=1.2, p=2.2)
        return base * (1.0 + 0.015 * np.cos(3.0 * theta))

    tracks = {
        "porto": build("porto", porto_r, 32.0, 0.30, const_width(0.8)),
        "test_oval": build(
            "test_oval",
            lambda t: superellipse_radius(t, aspect=1.35, p=2.6),
            23.1, 0.30, const_width(1.0)),
        "barcelona": build(
            "barcelona",
            lambda t: 1.0 + 0.10 * np.cos(2 * t) + 0.05 * np.cos(3 * t)
            + 0.035 * np.sin(5 * t) + 0.02 * np.cos(7 * t),
            236.8, 1.0, wavy_width(1.05, 0.15, 6)),
        "monaco": build(
            "monaco",
            lambda t: 1.0 + 0.12 * np.cos(2 * t + 0.8) + 0.07 * np.sin(3 * t)
            + 0.045 * np.cos(5 * t + 1.7) + 0.025 * np.sin(8 * t),
            178.3, 0.8, const_width(0.85)),
    }
    for name, (xs, ys, wl, wr) in tracks.items():
        write_csv(out / f"{name}.csv", name, xs, ys, wl, wr)


if __name__ == "__main__":
    main()
