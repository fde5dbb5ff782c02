"""Pure numpy fallback for the arc-geometry kernels.

The scalar pair primitive is written with plain floats so the compiled
backend can mirror it statement by statement; the batch entry points use
vectorized sign tests to prefilter candidate pairs and only run the scalar
primitive on those.

All tolerances are sines of angles (plane tests) or chord lengths, which
agree to first order with angular distances at the scales involved.
"""

import math

import numpy as np

KIND_NONE = 0
KIND_CROSS = 1
KIND_TOUCH = 2
KIND_OVERLAP = 3

EPS_PLANE = 1e-12       # plane membership: |sin(angle off great-circle plane)|
EPS_POINT = 1e-12       # chord tolerance for coincident endpoints
EPS_PARALLEL = 1e-12    # |n_a x n_b| below which circles count as equal
EPS_ANGLE = 1e-12       # slack on angular containment along an arc
EPS_DEGENERATE = 1e-14  # |a0 x a1| below which an arc is a point

TWO_PI = 2.0 * math.pi


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _norm(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def _scale(a, s):
    return (a[0] * s, a[1] * s, a[2] * s)


def _chord(a, b):
    return math.sqrt(
        (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2
    )


def _angle_on_circle(p, anchor, ea):
    """Angle of p from `anchor` around the circle with tangent frame ea."""
    return math.atan2(_dot(p, ea), _dot(p, anchor))


def _on_arc(p, a0, nhat, length, slack):
    """Angular containment of p (assumed on the great circle) in arc [a0, .]."""
    ea = _cross(nhat, a0)
    t = _angle_on_circle(p, a0, ea)
    return -slack <= t <= length + slack


def _point_vs_arc(p, a0, a1, eps):
    """TOUCH if p lies on arc [a0,a1] within eps tolerances, else NONE."""
    na = _cross(a0, a1)
    la = _norm(na)
    if la < EPS_DEGENERATE:
        if _chord(p, a0) <= max(eps, EPS_POINT):
            return KIND_TOUCH, p
        return KIND_NONE, None
    nhat = _scale(na, 1.0 / la)
    if abs(_dot(p, nhat)) > max(eps, EPS_PLANE):
        return KIND_NONE, None
    length = math.atan2(la, _dot(a0, a1))
    if _on_arc(p, a0, nhat, length, max(eps, EPS_ANGLE)):
        return KIND_TOUCH, p
    return KIND_NONE, None


def arc_pair_intersection(a0, a1, b0, b1, eps=EPS_PLANE):
    """Intersection of the closed minimal arcs [a0,a1] and [b0,b1].

    Returns (kind, point) where kind is one of the KIND_* constants and
    point is a unit 3-tuple (None when kind is KIND_NONE).  For overlapping
    cocircular arcs the first overlap point along [a0,a1] is returned.
    """
    a0 = tuple(a0)
    a1 = tuple(a1)
    b0 = tuple(b0)
    b1 = tuple(b1)

    na = _cross(a0, a1)
    la = _norm(na)
    nb = _cross(b0, b1)
    lb = _norm(nb)

    if la < EPS_DEGENERATE and lb < EPS_DEGENERATE:
        if _chord(a0, b0) <= max(eps, EPS_POINT):
            return KIND_TOUCH, a0
        return KIND_NONE, None
    if la < EPS_DEGENERATE:
        return _point_vs_arc(a0, b0, b1, eps)
    if lb < EPS_DEGENERATE:
        kind, pt = _point_vs_arc(b0, a0, a1, eps)
        return kind, pt

    nahat = _scale(na, 1.0 / la)
    nbhat = _scale(nb, 1.0 / lb)
    len_a = math.atan2(la, _dot(a0, a1))
    len_b = math.atan2(lb, _dot(b0, b1))

    cr = _cross(nahat, nbhat)
    s = _norm(cr)
    if s < EPS_PARALLEL:
        # Same great circle (possibly opposite orientation): angular overlap.
        ea = _cross(nahat, a0)
        orient = 1.0 if _dot(nahat, nbhat) > 0.0 else -1.0
        tb0 = _angle_on_circle(b0, a0, ea) % TWO_PI
        if orient > 0.0:
            lo, hi = tb0, tb0 + len_b
        else:
            lo, hi = tb0 - len_b, tb0
        slack = max(eps, EPS_ANGLE)
        best = None
        # Candidate overlap-start angles along A, tested mod 2*pi.
        for t in (0.0, lo % TWO_PI, (lo % TWO_PI) - TWO_PI):
            if t < -slack or t > len_a + slack:
                continue
            shifted = t
            # membership of angle t in [lo, hi] mod 2*pi
            delta = (shifted - lo) % TWO_PI
            if delta <= (hi - lo) + slack or delta >= TWO_PI - slack:
                tt = min(max(t, 0.0), len_a)
                if best is None or tt < best:
                    best = tt
        if best is None:
            return KIND_NONE, None
        c, sn = math.cos(best), math.sin(best)
        pt = (
            c * a0[0] + sn * ea[0],
            c * a0[1] + sn * ea[1],
            c * a0[2] + sn * ea[2],
        )
        return KIND_OVERLAP, pt

    # Coincident endpoints first: exact closure shows up here.
    ept = max(eps, EPS_POINT)
    if _chord(a0, b0) <= ept:
        return KIND_TOUCH, a0
    if _chord(a0, b1) <= ept:
        return KIND_TOUCH, a0
    if _chord(a1, b0) <= ept:
        return KIND_TOUCH, a1
    if _chord(a1, b1) <= ept:
        return KIND_TOUCH, a1

    s0 = _dot(nahat, b0)
    s1 = _dot(nahat, b1)
    t0 = _dot(nbhat, a0)
    t1 = _dot(nbhat, a1)
    epl = max(eps, EPS_PLANE)
    slack = max(eps, EPS_ANGLE)

    # Endpoint-on-arc touches.
    if abs(s0) <= epl and _on_arc(b0, a0, nahat, len_a, slack):
        return KIND_TOUCH, b0
    if abs(s1) <= epl and _on_arc(b1, a0, nahat, len_a, slack):
        return KIND_TOUCH, b1
    if abs(t0) <= epl and _on_arc(a0, b0, nbhat, len_b, slack):
        return KIND_TOUCH, a0
    if abs(t1) <= epl and _on_arc(a1, b0, nbhat, len_b, slack):
        return KIND_TOUCH, a1

    # Transversal crossing: both arcs must straddle the other's plane and
    # cross it at the same one of the two circle intersection points.
    if s0 * s1 < 0.0 and t0 * t1 < 0.0:
        u = _scale(cr, 1.0 / s)
        mid_a = (a0[0] + a1[0], a0[1] + a1[1], a0[2] + a1[2])
        if _dot(u, mid_a) < 0.0:
            u = (-u[0], -u[1], -u[2])
        mid_b = (b0[0] + b1[0], b0[1] + b1[1], b0[2] + b1[2])
        if _dot(u, mid_b) > 0.0:
            return KIND_CROSS, u
    return KIND_NONE, None


# -- batch scans -------------------------------------------------------------

def _edge_normals(starts, ends):
    na = np.cross(starts, ends)
    la = np.linalg.norm(na, axis=1)
    safe = np.where(la > EPS_DEGENERATE, la, 1.0)
    return na / safe[:, None], la


def _candidate_mask(starts, ends, b0, b1, eps):
    """Superset of edge indices whose arc could intersect [b0, b1].

    Combines plane sign tests with an endpoint-proximity bound (any point of
    an arc is within its length of both endpoints, so intersecting arcs have
    endpoint sets within len_a + len_b of each other).  The proximity bound
    keeps cocircular polylines from flooding the scalar primitive."""
    b0 = np.asarray(b0, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    nb = np.cross(b0, b1)
    lb = np.linalg.norm(nb)

    lens = np.arccos(np.clip(np.sum(starts * ends, axis=1), -1.0, 1.0))
    len_b = math.acos(max(-1.0, min(1.0, float(b0 @ b1))))
    near = np.maximum.reduce(
        [starts @ b0, starts @ b1, ends @ b0, ends @ b1]
    )
    proximity = np.arccos(np.clip(near, -1.0, 1.0)) <= lens + len_b + 1e-9

    if lb < EPS_DEGENERATE:
        return proximity
    nbhat = nb / lb
    s0 = starts @ nbhat
    s1 = ends @ nbhat
    guard = max(eps, EPS_PLANE) + 1e-15
    same_side_b = ((s0 > guard) & (s1 > guard)) | ((s0 < -guard) & (s1 < -guard))

    nahat, la = _edge_normals(starts, ends)
    t0 = nahat @ b0
    t1 = nahat @ b1
    same_side_a = ((t0 > guard) & (t1 > guard)) | ((t0 < -guard) & (t1 < -guard))

    degenerate = la < EPS_DEGENERATE
    return (~(same_side_b | same_side_a) | degenerate) & proximity


def scan_edge_hits(starts, ends, b0, b1, eps=EPS_PLANE):
    """First intersection of [b0,b1] against the arcs (starts[i], ends[i]).

    Scans i ascending; returns (i, kind, point) or (-1, KIND_NONE, None).
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    if len(starts) == 0:
        return -1, KIND_NONE, None
    mask = _candidate_mask(starts, ends, b0, b1, eps)
    for i in np.flatnonzero(mask):
        kind, pt = arc_pair_intersection(starts[i], ends[i], b0, b1, eps)
        if kind != KIND_NONE:
            return int(i), kind, pt
    return -1, KIND_NONE, None


def polyline_pair_hit(s1, e1, s2, e2, eps=EPS_PLANE):
    """First intersecting pair between two edge lists (i over the first,
    scanned ascending; j over the second).  Returns (i, j, kind, point) or
    (-1, -1, KIND_NONE, None)."""
    s1 = np.asarray(s1, dtype=float)
    e1 = np.asarray(e1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    for i in range(len(s1)):
        j, kind, pt = scan_edge_hits(s2, e2, s1[i], e1[i], eps)
        if kind != KIND_NONE:
            return i, j, kind, pt
    return -1, -1, KIND_NONE, None


def _gdist(a, b):
    return math.atan2(_norm(_cross(a, b)), _dot(a, b))


def _point_to_arc_distance(p, a0, a1):
    na = _cross(a0, a1)
    la = _norm(na)
    d0 = _gdist(p, a0)
    d1 = _gdist(p, a1)
    if la < EPS_DEGENERATE:
        return min(d0, d1)
    nhat = _scale(na, 1.0 / la)
    h = _dot(p, nhat)
    foot = (p[0] - h * nhat[0], p[1] - h * nhat[1], p[2] - h * nhat[2])
    fl = _norm(foot)
    if fl < 1e-12:
        return 0.5 * math.pi
    foot = _scale(foot, 1.0 / fl)
    length = math.atan2(la, _dot(a0, a1))
    if _on_arc(foot, a0, nhat, length, EPS_ANGLE):
        return abs(math.asin(max(-1.0, min(1.0, h))))
    return min(d0, d1)


def arc_distance(a0, a1, b0, b1):
    """Exact minimal geodesic distance between two closed minimal arcs."""
    a0 = tuple(a0)
    a1 = tuple(a1)
    b0 = tuple(b0)
    b1 = tuple(b1)
    kind, _ = arc_pair_intersection(a0, a1, b0, b1)
    if kind != KIND_NONE:
        return 0.0
    best = min(
        _point_to_arc_distance(a0, b0, b1),
        _point_to_arc_distance(a1, b0, b1),
        _point_to_arc_distance(b0, a0, a1),
        _point_to_arc_distance(b1, a0, a1),
    )
    na = _cross(a0, a1)
    la = _norm(na)
    nb = _cross(b0, b1)
    lb = _norm(nb)
    if la < EPS_DEGENERATE or lb < EPS_DEGENERATE:
        return best
    nahat = _scale(na, 1.0 / la)
    nbhat = _scale(nb, 1.0 / lb)
    len_a = math.atan2(la, _dot(a0, a1))
    # Interior-interior critical pairs: extremal points of the plane-distance
    # |x . n_b| over circle A, paired with their nearest point on circle B.
    w = (
        nbhat[0] - _dot(nahat, nbhat) * nahat[0],
        nbhat[1] - _dot(nahat, nbhat) * nahat[1],
        nbhat[2] - _dot(nahat, nbhat) * nahat[2],
    )
    wl = _norm(w)
    if wl < EPS_PARALLEL:
        return best
    w = _scale(w, 1.0 / wl)
    len_b = math.atan2(lb, _dot(b0, b1))
    for astar in (w, (-w[0], -w[1], -w[2])):
        if not _on_arc(astar, a0, nahat, len_a, EPS_ANGLE):
            continue
        h = _dot(astar, nbhat)
        foot = (
            astar[0] - h * nbhat[0],
            astar[1] - h * nbhat[1],
            astar[2] - h * nbhat[2],
        )
        fl = _norm(foot)
        if fl < 1e-12:
            continue
        foot = _scale(foot, 1.0 / fl)
        if _on_arc(foot, b0, nbhat, len_b, EPS_ANGLE):
            best = min(best, _gdist(astar, foot))
    return best


def min_polyline_distance(s1, e1, s2, e2):
    """Minimum arc-to-arc distance over all edge pairs of two polylines."""
    s1 = np.asarray(s1, dtype=float)
    e1 = np.asarray(e1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    # Vertex-to-vertex distances give a cheap upper bound used for pruning.
    dots = np.clip(s1 @ s2.T, -1.0, 1.0)
    bound = float(np.arccos(dots).min())
    best = bound
    len1 = np.arccos(np.clip(np.sum(s1 * e1, axis=1), -1.0, 1.0))
    len2 = np.arccos(np.clip(np.sum(s2 * e2, axis=1), -1.0, 1.0))
    reach = len1[:, None] + len2[None, :]
    cand = np.argwhere(np.arccos(dots) <= best + reach + 1e-12)
    for i, j in cand:
        d = arc_distance(s1[i], e1[i], s2[j], e2[j])
        if d < best:
            best = d
            if best == 0.0:
                return 0.0
    return best


def min_point_to_arcs(p, starts, ends):
    """Minimum geodesic distance from p to a list of arcs."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    p = tuple(np.asarray(p, dtype=float))
    best = math.inf
    for i in range(len(starts)):
        d = _point_to_arc_distance(p, tuple(starts[i]), tuple(ends[i]))
        if d < best:
            best = d
    return best


def count_path_crossings(p, q, starts, ends, eps=EPS_PLANE, guard=1e-9):
    """Count transversal crossings of the arc [p,q] with the given arcs.

    Returns (count, clean).  clean is False whenever any configuration came
    within `guard` of being ambiguous (touch, overlap, near-endpoint hit,
    near-parallel planes); callers should then retry with a perturbed path.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)

    npath = np.cross(p, q)
    lpath = float(np.linalg.norm(npath))
    if lpath < EPS_DEGENERATE:
        # zero-length path: no crossings, clean only if far from every arc
        return 0, min_point_to_arcs(p, starts, ends) > guard
    nphat = npath / lpath
    len_p = math.atan2(lpath, float(p @ q))

    s0 = starts @ nphat
    s1 = ends @ nphat
    nahat, la = _edge_normals(starts, ends)
    t0 = nahat @ p
    t1 = nahat @ q
    same_side_path = ((s0 > guard) & (s1 > guard)) | ((s0 < -guard) & (s1 < -guard))
    same_side_edge = ((t0 > guard) & (t1 > guard)) | ((t0 < -guard) & (t1 < -guard))
    far = same_side_path | same_side_edge
    degenerate = la < EPS_DEGENERATE
    cand = np.flatnonzero(~far | degenerate)

    count = 0
    clean = True
    pt_tuple = tuple(p)
    qt_tuple = tuple(q)
    for i in cand:
        a0 = tuple(starts[i])
        a1 = tuple(ends[i])
        kind, x = arc_pair_intersection(a0, a1, pt_tuple, qt_tuple, eps)
        if kind == KIND_NONE:
            # near-miss check at the guard scale
            lo_kind, _ = arc_pair_intersection(a0, a1, pt_tuple, qt_tuple, guard)
            if lo_kind != KIND_NONE:
                clean = False
            continue
        if kind != KIND_CROSS:
            clean = False
            continue
        count += 1
        for endpoint in (a0, a1, pt_tuple, qt_tuple):
            if _chord(x, endpoint) < guard:
                clean = False
        na = _cross(a0, a1)
        lna = _norm(na)
        if lna > EPS_DEGENERATE:
            cosang = abs(_dot(_scale(na, 1.0 / lna), nphat))
            if cosang > 1.0 - 1e-8:
                clean = False
    # An endpoint of the path lying near any candidate arc is ambiguous.
    if clean:
        for i in cand:
            a0 = tuple(starts[i])
            a1 = tuple(ends[i])
            if _point_to_arc_distance(pt_tuple, a0, a1) < guard:
                clean = False
                break
            if _point_to_arc_distance(qt_tuple, a0, a1) < guard:
                clean = False
                break
    del len_p
    return count, clean
