"""Spherical geometry kernel: points, minimal geodesic arcs, polylines,
simple-loop partitions of the sphere, and point classification.

Conventions: points are unit vectors in R^3, distances are radians, areas
steradians.  Dot products are clamped to [-1, 1] before arccos throughout.
"""

import math

import numpy as np

from . import _kernels
from .errors import AntipodalEndpoints, DegenerateLoop, GeometryError

EPS_UNIT = 1e-12
EPS_ANTIPODAL = 1e-9
EPS_ON_CURVE = 1e-9
EPS_AREA = 1e-10

ON_CURVE = "on_curve"


def _unit(v):
    """Coerce array-like / SpherePoint to a unit float ndarray of shape (3,)."""
    if isinstance(v, SpherePoint):
        return v.vec
    a = np.asarray(v, dtype=float)
    n = np.linalg.norm(a)
    if not np.isfinite(n) or n == 0.0:
        raise ValueError("cannot normalize zero or non-finite vector")
    return a / n


class SpherePoint:
    """A point of the unit 2-sphere; renormalized on construction."""

    __slots__ = ("_v",)

    def __init__(self, x, y=None, z=None):
        if y is None:
            v = np.asarray(x, dtype=float).reshape(3).copy()
        else:
            v = np.array([x, y, z], dtype=float)
        n = np.linalg.norm(v)
        if not np.isfinite(n) or n == 0.0:
            raise ValueError("SpherePoint needs a nonzero finite vector")
        v /= n
        v.flags.writeable = False
        self._v = v

    @property
    def vec(self):
        return self._v

    @property
    def x(self):
        return float(self._v[0])

    @property
    def y(self):
        return float(self._v[1])

    @property
    def z(self):
        return float(self._v[2])

    def __iter__(self):
        return iter(self._v.tolist())

    def __repr__(self):
        return f"SpherePoint({self.x:.12g}, {self.y:.12g}, {self.z:.12g})"

    def approx_eq(self, other, tol=EPS_UNIT):
        return geodesic_distance(self, other) <= tol


def geodesic_distance(a, b):
    """Length in radians of the minimal geodesic from a to b, i.e. the angle
    arccos(clamp(a.b)); computed in atan2 form, which keeps full precision
    near coincident and near antipodal pairs.

    Defined for every pair including antipodal (returns pi)."""
    va, vb = _unit(a), _unit(b)
    cx = va[1] * vb[2] - va[2] * vb[1]
    cy = va[2] * vb[0] - va[0] * vb[2]
    cz = va[0] * vb[1] - va[1] * vb[0]
    return math.atan2(
        math.sqrt(cx * cx + cy * cy + cz * cz),
        va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2],
    )


def rows_geodesic(A, B):
    """Rowwise geodesic distances between two (n, 3) unit arrays."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    return np.arctan2(
        np.linalg.norm(np.cross(A, B), axis=-1), np.sum(A * B, axis=-1)
    )


def chord_distance(a, b):
    """Ambient Euclidean distance between two sphere points."""
    return float(np.linalg.norm(_unit(a) - _unit(b)))


class GeodesicArc:
    """Oriented minimal geodesic segment; endpoints must not be antipodal."""

    __slots__ = ("start", "end", "length", "_sv", "_ev")

    def __init__(self, start, end):
        sv, ev = _unit(start), _unit(end)
        d = float(sv @ ev)
        if d <= -1.0 + EPS_ANTIPODAL:
            raise AntipodalEndpoints(
                "arc endpoints are antipodal within tolerance"
            )
        self._sv = sv
        self._ev = ev
        self.start = start if isinstance(start, SpherePoint) else SpherePoint(sv)
        self.end = end if isinstance(end, SpherePoint) else SpherePoint(ev)
        self.length = float(np.arccos(np.clip(d, -1.0, 1.0)))

    def point_at(self, t):
        """Slerp parameterization, t in [0, 1]; exact at the endpoints."""
        if t == 0.0:
            return SpherePoint(self._sv)
        if t == 1.0:
            return SpherePoint(self._ev)
        omega = self.length
        if omega < 1e-14:
            return SpherePoint(self._sv)
        so = math.sin(omega)
        v = (
            math.sin((1.0 - t) * omega) / so * self._sv
            + math.sin(t * omega) / so * self._ev
        )
        return SpherePoint(v)

    def sample(self, n):
        """n+1 points from start to end inclusive."""
        return [self.point_at(i / n) for i in range(n + 1)]

    def __repr__(self):
        return f"GeodesicArc({self.start!r}, {self.end!r})"


def minimal_arc(a, b):
    return GeodesicArc(a, b)


class SphericalPolyline:
    """Ordered vertices joined by minimal geodesic arcs."""

    def __init__(self, vertices, closed=False):
        pts = [v if isinstance(v, SpherePoint) else SpherePoint(v) for v in vertices]
        if len(pts) < 2:
            raise ValueError("polyline needs at least two vertices")
        self.vertices = tuple(pts)
        self.closed = bool(closed)
        arr = np.array([p.vec for p in pts])
        if closed:
            starts = arr
            ends = np.vstack([arr[1:], arr[:1]])
        else:
            starts = arr[:-1]
            ends = arr[1:]
        dots = np.sum(starts * ends, axis=1)
        if np.any(dots <= -1.0 + EPS_ANTIPODAL):
            raise AntipodalEndpoints("consecutive polyline vertices antipodal")
        self._starts = starts
        self._ends = ends

    @property
    def n_edges(self):
        return len(self._starts)

    @property
    def edge_arrays(self):
        """(starts, ends) as (n,3) float arrays; do not mutate."""
        return self._starts, self._ends

    def edge(self, i):
        return GeodesicArc(self._starts[i], self._ends[i])

    def edge_lengths(self):
        dots = np.clip(np.sum(self._starts * self._ends, axis=1), -1.0, 1.0)
        return np.arccos(dots)

    def total_length(self):
        return float(self.edge_lengths().sum())

    def sample(self, n_total):
        """About n_total points stratified along edges by length."""
        lengths = self.edge_lengths()
        total = lengths.sum()
        out = []
        for i in range(self.n_edges):
            k = max(1, int(round(n_total * lengths[i] / total))) if total > 0 else 1
            arc = GeodesicArc(self._starts[i], self._ends[i])
            for j in range(k):
                out.append(arc.point_at(j / k))
        return out

    def __repr__(self):
        return (
            f"SphericalPolyline({len(self.vertices)} vertices, "
            f"closed={self.closed})"
        )


def arc_intersection(a, b):
    """A point common to both closed arcs, or None.

    Transversal crossings, shared endpoints and touches all report a point;
    for cocircular overlaps the first overlap point along `a` is returned.
    """
    kind, pt = _kernels.arc_pair_intersection(
        tuple(a.start), tuple(a.end), tuple(b.start), tuple(b.end)
    )
    if kind == _kernels.KIND_NONE:
        return None
    return SpherePoint(pt)


def polyline_first_self_intersection(polyline):
    """Earliest non-adjacent edge pair (i < j, j > i+1) that intersects.

    Scans j ascending, then i ascending; exact closure of an open polyline
    (last vertex equal to the first within EPS_UNIT) shows up as a touch of
    the last edge with the first at the shared vertex.  Returns
    (i, j, SpherePoint) or None.
    """
    starts, ends = polyline.edge_arrays
    m = len(starts)
    for j in range(2, m):
        # edges 0 .. j-2 are non-adjacent to j, except the cyclic pair (0, m-1)
        i, kind, pt = _kernels.scan_edge_hits(
            starts[: j - 1], ends[: j - 1], starts[j], ends[j]
        )
        if kind != _kernels.KIND_NONE:
            return i, j, SpherePoint(pt)
    return None


def is_simple_loop(loop):
    """True when a closed polyline has no self-intersection besides closure."""
    if not loop.closed:
        return False
    starts, ends = loop.edge_arrays
    m = len(starts)
    for j in range(2, m):
        lo = 1 if j == m - 1 else 0  # skip the cyclic (0, m-1) adjacency
        if lo >= j - 1:
            continue
        _, kind, _ = _kernels.scan_edge_hits(
            starts[lo: j - 1], ends[lo: j - 1], starts[j], ends[j]
        )
        if kind != _kernels.KIND_NONE:
            return False
    return True


def _turning_angles(loop):
    starts, ends = loop.edge_arrays
    n = len(starts)
    angles = np.empty(n)
    for k in range(n):
        u = starts[k]
        v = ends[k]
        w = ends[(k + 1) % n]
        # arrival direction at v from u; departure direction at v toward w
        nin = np.cross(u, v)
        nin /= np.linalg.norm(nin)
        nout = np.cross(v, w)
        nout /= np.linalg.norm(nout)
        tin = np.cross(nin, v)
        tout = np.cross(nout, v)
        angles[k] = math.atan2(float(np.cross(tin, tout) @ v), float(tin @ tout))
    return angles


class LoopPartition:
    """The two complementary components of a simple closed loop.

    Component 0 is the one to the left of the traversal direction; its area
    comes from the Gauss-Bonnet polygon formula (2*pi minus total turning).
    """

    def __init__(self, loop, component_areas, representative_points):
        self.loop = loop
        self.component_areas = component_areas
        self.representative_points = representative_points

    def __repr__(self):
        a0, a1 = self.component_areas
        return f"LoopPartition(areas=({a0:.6g}, {a1:.6g}))"


def _representatives(loop):
    """Two points strictly off the loop, one in each component.

    Offsets the first edge midpoint along +/- the edge normal (left side of
    the traversal is the + side), shrinking the offset until both points
    clear the loop.
    """
    starts, ends = loop.edge_arrays
    lengths = loop.edge_lengths()
    k = int(np.argmax(lengths))
    arc = GeodesicArc(starts[k], ends[k])
    mid = arc.point_at(0.5).vec
    n = np.cross(starts[k], ends[k])
    n /= np.linalg.norm(n)
    eta = 0.05
    for _ in range(40):
        plus = SpherePoint(math.cos(eta) * mid + math.sin(eta) * n)
        minus = SpherePoint(math.cos(eta) * mid - math.sin(eta) * n)
        dp = _kernels.min_point_to_arcs(plus.vec, starts, ends)
        dm = _kernels.min_point_to_arcs(minus.vec, starts, ends)
        if min(dp, dm) > max(EPS_ON_CURVE * 10.0, eta * 0.5):
            return plus, minus
        eta *= 0.5
    raise GeometryError("could not place representative points off the loop")


def loop_partition(loop):
    """Partition the sphere along a simple closed polyline.

    Raises DegenerateLoop when one side has area below EPS_AREA."""
    if not loop.closed:
        raise ValueError("loop_partition needs a closed polyline")
    turning = _turning_angles(loop)
    area_left = 2.0 * math.pi - float(turning.sum())
    if area_left < 0.0:
        area_left += 4.0 * math.pi
    area_right = 4.0 * math.pi - area_left
    if min(area_left, area_right) < EPS_AREA:
        raise DegenerateLoop("loop encloses numerically zero area on one side")
    plus, minus = _representatives(loop)
    return LoopPartition(loop, (area_left, area_right), (plus, minus))


def _tangent_frame(v):
    k = int(np.argmin(np.abs(v)))
    e1 = np.zeros(3)
    e1[k] = 1.0
    e1 = e1 - (e1 @ v) * v
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    return e1, e2


_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def point_component(partition, x):
    """Component id (0 or 1) of x, or ON_CURVE when x lies on the loop.

    Classification is the crossing parity of a geodesic path from x to the
    component-0 representative; ambiguous paths (vertex grazes, tangencies)
    are retried against slightly shifted targets inside component 0.
    """
    xv = _unit(x)
    starts, ends = partition.loop.edge_arrays
    if _kernels.min_point_to_arcs(xv, starts, ends) <= EPS_ON_CURVE:
        return ON_CURVE
    rep = partition.representative_points[0].vec
    rep_clear = _kernels.min_point_to_arcs(rep, starts, ends)
    e1, e2 = _tangent_frame(rep)
    eta = min(0.2, rep_clear / 3.0)
    for attempt in range(24):
        if attempt == 0:
            target = rep
        else:
            phi = attempt * _GOLDEN_ANGLE
            step = eta * (0.3 + 0.7 * ((attempt * 7919) % 11) / 10.0)
            target = rep + step * (math.cos(phi) * e1 + math.sin(phi) * e2)
            target = target / np.linalg.norm(target)
        if float(xv @ target) <= -1.0 + 1e-9:
            continue  # antipodal path is ill-defined; shift the target
        count, clean = _kernels.count_path_crossings(xv, target, starts, ends)
        if clean:
            return 0 if count % 2 == 0 else 1
    raise GeometryError("crossing parity unresolved after retries")


def classify_points(partition, points):
    """Vector form of point_component; returns a list of 0/1/ON_CURVE."""
    return [point_component(partition, p) for p in np.asarray(points, dtype=float)]
