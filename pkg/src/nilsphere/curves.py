"""Orbit polylines, the simple closed loop they contain, and the geometric
checks built on top: ball exclusion around moved points, disjointness and
distance of two curves, and containment in an enclosed disk.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels, dynamics
from .diffeo import BORDERLINE, INSIDE, in_neighborhood_vk
from .errors import (
    AntipodalOrbitStep,
    FixedBasePoint,
    NotInV1,
    TruncationBeforeClosure,
)
from .sphere_geom import (
    EPS_ANTIPODAL,
    EPS_ON_CURVE,
    ON_CURVE,
    LoopPartition,
    SpherePoint,
    SphericalPolyline,
    _unit,
    geodesic_distance,
    loop_partition,
    point_component,
)

SELF_INTERSECTION = "self_intersection"
EXACT_PERIOD = "exact_period"
TRUNCATED = "truncated"


@dataclass
class CharacterCurve:
    """Orbit polyline of a map at a recurrent point together with the simple
    closed loop extracted from it and the two-sided partition it cuts."""

    base: SpherePoint
    map_id: str
    polyline: SphericalPolyline
    loop: SphericalPolyline
    closure_kind: str
    partition: LoopPartition


def _build(f, p, max_segments):
    """Grow the orbit polyline until closure.

    Returns (vertices array, closure kind, loop vertices array)."""
    x0 = _unit(p)
    x1 = f.apply(x0)
    if geodesic_distance(x0, x1) <= EPS_ON_CURVE:
        raise FixedBasePoint("base point is numerically fixed by the map")
    verts = np.empty((max_segments + 1, 3))
    verts[0] = x0
    x = x0
    count = 1
    for i in range(1, max_segments + 1):
        xn = f.apply(x)
        if float(x @ xn) <= -1.0 + EPS_ANTIPODAL:
            raise AntipodalOrbitStep("consecutive orbit points are antipodal")
        if geodesic_distance(xn, x0) < dynamics.DELTA_EXACT and i > 1:
            return verts[:count], EXACT_PERIOD, verts[:count]
        # the new edge is (x, xn); compare against edges 0 .. i-3
        if i >= 3:
            j, kind, pt = _kernels.scan_edge_hits(
                verts[: i - 2], verts[1: i - 1], x, xn
            )
            if kind != _kernels.KIND_NONE:
                verts[count] = xn
                count += 1
                loop = _assemble_loop(verts[:count], j, np.asarray(pt))
                return verts[:count], SELF_INTERSECTION, loop
        verts[count] = xn
        count += 1
        x = xn
    return verts[:count], TRUNCATED, None


def _assemble_loop(verts, j, pt):
    """Closed loop from the crossing point on edge j through the vertices up
    to the point where the last edge re-enters."""
    inner = verts[j + 1: len(verts) - 1]
    pts = [pt]
    for v in inner:
        pts.append(v)
    # drop duplicates at the seams (crossing can sit on a vertex)
    cleaned = [pts[0]]
    for v in pts[1:]:
        if np.linalg.norm(v - cleaned[-1]) > 1e-12:
            cleaned.append(v)
    if len(cleaned) > 2 and np.linalg.norm(cleaned[-1] - cleaned[0]) <= 1e-12:
        cleaned.pop()
    return np.array(cleaned)


def build_character_polyline(f, p, max_segments):
    """Polyline through the forward orbit of p, stopping at the first
    self-intersection, at an exact period, or at the segment budget."""
    if max_segments < 1:
        raise ValueError("max_segments must be >= 1")
    verts, kind, _ = _build(f, p, max_segments)
    return SphericalPolyline(verts, closed=(kind == EXACT_PERIOD))


def extract_character_curve(f, p, max_segments, map_id=""):
    """Simple closed loop inside the orbit polyline, with its partition.

    The base point must be (numerically) recurrent and not fixed; with too
    small a budget the construction stops with TruncationBeforeClosure."""
    verts, kind, loop_verts = _build(f, p, max_segments)
    if kind == TRUNCATED:
        raise TruncationBeforeClosure(
            f"no closure within {max_segments} segments"
        )
    polyline = SphericalPolyline(verts, closed=(kind == EXACT_PERIOD))
    loop = SphericalPolyline(loop_verts, closed=True)
    return CharacterCurve(
        base=SpherePoint(verts[0]),
        map_id=map_id,
        polyline=polyline,
        loop=loop,
        closure_kind=kind,
        partition=loop_partition(loop),
    )


@dataclass
class BallExclusionReport:
    radius: float
    nearest_fixed_distance: float
    holds: bool
    borderline_warning: bool


def verify_ball_exclusion(f, p, mesh_level=4, fp_tol=1e-10, slack=1e-9):
    """Check that f has no fixed point within 4 d(p, f(p)) of a moved p."""
    membership = in_neighborhood_vk(f, 1, mesh_level)
    if membership.verdict not in (INSIDE, BORDERLINE):
        raise NotInV1("map is outside the base identity neighborhood")
    pv = _unit(p)
    step = geodesic_distance(pv, f.apply(pv))
    if step <= EPS_ON_CURVE:
        raise FixedBasePoint("base point is numerically fixed by the map")
    radius = 4.0 * step
    fixed = dynamics.fixed_points_of_map(f, mesh_level, fp_tol)
    nearest = min(
        (geodesic_distance(pv, q.vec) for q in fixed), default=float("inf")
    )
    return BallExclusionReport(
        radius=radius,
        nearest_fixed_distance=float(nearest),
        holds=nearest >= radius - slack,
        borderline_warning=(membership.verdict == BORDERLINE),
    )


def curves_disjoint(c1, c2):
    """True iff no segment of one polyline meets a segment of the other."""
    s1, e1 = c1.polyline.edge_arrays
    s2, e2 = c2.polyline.edge_arrays
    _, _, kind, _ = _kernels.polyline_pair_hit(s1, e1, s2, e2)
    return kind == _kernels.KIND_NONE


def curve_distance(c1, c2):
    """Minimal geodesic distance between the two polylines (exact arc-to-arc
    distances over all segment pairs; zero when they intersect)."""
    s1, e1 = c1.polyline.edge_arrays
    s2, e2 = c2.polyline.edge_arrays
    return float(_kernels.min_polyline_distance(s1, e1, s2, e2))


def curve_in_disk(curve, partition, side):
    """True iff the whole orbit polyline lies in the given component.

    No edge may cross the partition loop, and the (connected) polyline must
    classify to `side`."""
    if side not in (0, 1):
        raise ValueError("side must be 0 or 1")
    s1, e1 = curve.polyline.edge_arrays
    s2, e2 = partition.loop.edge_arrays
    _, _, kind, _ = _kernels.polyline_pair_hit(s1, e1, s2, e2)
    if kind != _kernels.KIND_NONE:
        return False
    where = point_component(partition, curve.polyline.vertices[0])
    if where == ON_CURVE:
        return False
    return where == side
