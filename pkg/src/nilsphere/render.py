"""Deterministic SVG figures from run reports: orbit point chains, orbit
polylines with the extracted loop emphasized, shaded disks, and marked
fixed points.
"""

import math

import numpy as np

CANVAS = 640.0
MARGIN = 40.0
VIEW_RADIUS = 2.5  # stereographic clip radius in chart coordinates


def _frame(axis):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = int(np.argmin(np.abs(axis)))
    e1 = np.zeros(3)
    e1[k] = 1.0
    e1 -= (e1 @ axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return axis, e1, e2


class _Projection:
    def __init__(self, kind, axis=(0.0, 0.0, 1.0)):
        if kind not in ("stereographic_north", "stereographic_south",
                        "orthographic"):
            raise ValueError(f"unknown projection {kind!r}")
        self.kind = kind
        self.axis, self.e1, self.e2 = _frame(axis)

    def chart(self, v):
        """(u, w, visible) chart coordinates of a unit vector."""
        v = np.asarray(v, dtype=float)
        if self.kind == "stereographic_north":
            denom = 1.0 - v[2]
            if denom < 1e-9:
                return 0.0, 0.0, False
            u, w = v[0] / denom, v[1] / denom
            return u, w, math.hypot(u, w) <= VIEW_RADIUS
        if self.kind == "stereographic_south":
            denom = 1.0 + v[2]
            if denom < 1e-9:
                return 0.0, 0.0, False
            u, w = v[0] / denom, v[1] / denom
            return u, w, math.hypot(u, w) <= VIEW_RADIUS
        u = float(v @ self.e1)
        w = float(v @ self.e2)
        return u, w, float(v @ self.axis) >= 0.0

    def to_px(self, u, w):
        half = CANVAS / 2.0
        scale = (half - MARGIN) / VIEW_RADIUS if "stereo" in self.kind else half - MARGIN
        return half + u * scale, half - w * scale


def _slerp_chain(a, b, max_step=0.05):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ang = math.acos(max(-1.0, min(1.0, float(a @ b))))
    n = max(1, int(math.ceil(ang / max_step)))
    if ang < 1e-12:
        return [a]
    so = math.sin(ang)
    return [
        (math.sin((1 - t) * ang) * a + math.sin(t * ang) * b) / so
        for t in (i / n for i in range(n + 1))
    ]


def _path(points, proj, close=False):
    """SVG path string through projected points, split on invisibility."""
    segs = []
    pen = False
    for v in points:
        u, w, vis = proj.chart(v)
        if not vis:
            pen = False
            continue
        x, y = proj.to_px(u, w)
        segs.append(f"{'L' if pen else 'M'}{x:.2f},{y:.2f}")
        pen = True
    if close and segs and segs[-1].startswith("L"):
        segs.append("Z")
    return "".join(segs)


def _polyline_path(vertices, proj, closed=False):
    pts = []
    n = len(vertices)
    last = n if not closed else n + 1
    for i in range(last - 1):
        a = vertices[i % n]
        b = vertices[(i + 1) % n]
        pts.extend(_slerp_chain(a, b))
    return _path(pts, proj, close=closed)


def render_svg(report, projection="stereographic_north", axis=(0.0, 0.0, 1.0)):
    """Render the geometric content of a run report to an SVG document."""
    proj = _Projection(projection, axis)
    body = []
    payload = report.payload if hasattr(report, "payload") else report
    outputs = (payload or {}).get("outputs") or {}

    def emit_curve(curve, hue):
        poly = [np.asarray(p) for p in curve["polyline"]]
        body.append(
            f'<path d="{_polyline_path(poly, proj, curve.get("polyline_closed", False))}" '
            f'fill="none" stroke="{hue}" stroke-width="0.8" opacity="0.55"/>'
        )
        loop = [np.asarray(p) for p in curve["loop"]]
        loop_path = _polyline_path(loop, proj, closed=True)
        body.append(
            f'<path d="{loop_path}" fill="#ffcf66" fill-opacity="0.25" '
            f'stroke="{hue}" stroke-width="1.6" fill-rule="evenodd"/>'
        )
        for p in curve["representative_points"]:
            emit_point(p, "#888888", 2.0)

    def emit_point(p, color, r=3.0):
        u, w, vis = proj.chart(np.asarray(p, dtype=float))
        if not vis:
            return
        x, y = proj.to_px(u, w)
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>')

    def emit_fix(rep, color):
        emit_point(rep["point"], color, 4.0)

    if "curve" in outputs:
        emit_curve(outputs["curve"], "#2266cc")
    for key in ("curves",):
        for i, c in enumerate(outputs.get(key) or []):
            emit_curve(c, ["#2266cc", "#cc4422", "#22aa66"][i % 3])
    if "points" in outputs:  # orbit task
        for p in outputs["points"]:
            emit_point(p, "#2266cc", 1.2)
        emit_point(outputs["points"][0], "#cc4422", 3.0)
    for key, color in (("nested", "#cc2222"), ("direct", "#227722"),
                       ("first", "#cc2222"), ("second", "#227722")):
        if key in outputs and outputs[key]:
            emit_fix(outputs[key], color)

    half = CANVAS / 2.0
    rim = ""
    if projection == "orthographic":
        rim = (
            f'<circle cx="{half}" cy="{half}" r="{half - MARGIN}" fill="none" '
            f'stroke="#333333" stroke-width="1"/>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS:.0f}" '
        f'height="{CANVAS:.0f}" viewBox="0 0 {CANVAS:.0f} {CANVAS:.0f}">\n'
        f'<rect width="{CANVAS:.0f}" height="{CANVAS:.0f}" fill="white" '
        f'stroke="#333333"/>\n'
        + rim + "\n".join(body) + "\n</svg>\n"
    )
