# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled arc-geometry kernels; mirrors _numpy_backend semantics.

The scalar pair primitive is a straight port of the fallback's; batch entry
points replace the vectorized candidate masks with plain C loops.
"""

from libc.math cimport sqrt, atan2, acos, asin, cos, sin, fabs, fmod, INFINITY

import numpy as np

cdef int C_NONE = 0
cdef int C_CROSS = 1
cdef int C_TOUCH = 2
cdef int C_OVERLAP = 3

KIND_NONE = 0
KIND_CROSS = 1
KIND_TOUCH = 2
KIND_OVERLAP = 3

cdef double EPS_PLANE = 1e-12
cdef double EPS_POINT = 1e-12
cdef double EPS_PARALLEL = 1e-12
cdef double EPS_ANGLE = 1e-12
cdef double EPS_DEGENERATE = 1e-14
cdef double TWO_PI = 6.283185307179586476925287


cdef inline double _dot(double* a, double* b) noexcept nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef inline void _cross(double* a, double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline double _norm(double* a) noexcept nogil:
    return sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


cdef inline double _chord(double* a, double* b) noexcept nogil:
    cdef double dx = a[0] - b[0]
    cdef double dy = a[1] - b[1]
    cdef double dz = a[2] - b[2]
    return sqrt(dx * dx + dy * dy + dz * dz)


cdef inline double _clamp(double v) noexcept nogil:
    if v > 1.0:
        return 1.0
    if v < -1.0:
        return -1.0
    return v


cdef inline double _gdist(double* a, double* b) noexcept nogil:
    cdef double cr[3]
    _cross(a, b, cr)
    return atan2(_norm(cr), _dot(a, b))


cdef inline double _pymod_2pi(double x) noexcept nogil:
    cdef double r = fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    return r


cdef inline bint _on_arc(double* p, double* a0, double* nhat, double length,
                         double slack) noexcept nogil:
    cdef double ea[3]
    _cross(nhat, a0, ea)
    cdef double t = atan2(_dot(p, ea), _dot(p, a0))
    return -slack <= t <= length + slack


cdef int _point_vs_arc(double* p, double* a0, double* a1, double eps,
                       double* out) noexcept nogil:
    cdef double na[3]
    cdef double nhat[3]
    cdef double la, length, tol
    _cross(a0, a1, na)
    la = _norm(na)
    tol = eps if eps > EPS_POINT else EPS_POINT
    if la < EPS_DEGENERATE:
        if _chord(p, a0) <= tol:
            out[0] = p[0]; out[1] = p[1]; out[2] = p[2]
            return C_TOUCH
        return C_NONE
    nhat[0] = na[0] / la; nhat[1] = na[1] / la; nhat[2] = na[2] / la
    tol = eps if eps > EPS_PLANE else EPS_PLANE
    if fabs(_dot(p, nhat)) > tol:
        return C_NONE
    length = atan2(la, _dot(a0, a1))
    tol = eps if eps > EPS_ANGLE else EPS_ANGLE
    if _on_arc(p, a0, nhat, length, tol):
        out[0] = p[0]; out[1] = p[1]; out[2] = p[2]
        return C_TOUCH
    return C_NONE


cdef int _arc_pair(double* a0, double* a1, double* b0, double* b1,
                   double eps, double* out) noexcept nogil:
    """Scalar pair primitive; returns the KIND_* code, point in out[3]."""
    cdef double na[3]
    cdef double nb[3]
    cdef double nahat[3]
    cdef double nbhat[3]
    cdef double cr[3]
    cdef double ea[3]
    cdef double mid[3]
    cdef double la, lb, len_a, len_b, s, orient, tb0, lo, hi, slack, best
    cdef double s0, s1, t0, t1, ept, epl, c, sn, t, delta, shifted
    cdef int i

    _cross(a0, a1, na)
    la = _norm(na)
    _cross(b0, b1, nb)
    lb = _norm(nb)

    ept = eps if eps > EPS_POINT else EPS_POINT
    if la < EPS_DEGENERATE and lb < EPS_DEGENERATE:
        if _chord(a0, b0) <= ept:
            out[0] = a0[0]; out[1] = a0[1]; out[2] = a0[2]
            return C_TOUCH
        return C_NONE
    if la < EPS_DEGENERATE:
        return _point_vs_arc(a0, b0, b1, eps, out)
    if lb < EPS_DEGENERATE:
        return _point_vs_arc(b0, a0, a1, eps, out)

    nahat[0] = na[0] / la; nahat[1] = na[1] / la; nahat[2] = na[2] / la
    nbhat[0] = nb[0] / lb; nbhat[1] = nb[1] / lb; nbhat[2] = nb[2] / lb
    len_a = atan2(la, _dot(a0, a1))
    len_b = atan2(lb, _dot(b0, b1))

    _cross(nahat, nbhat, cr)
    s = _norm(cr)
    if s < EPS_PARALLEL:
        # same great circle: angular overlap, first point along A
        _cross(nahat, a0, ea)
        orient = 1.0 if _dot(nahat, nbhat) > 0.0 else -1.0
        tb0 = _pymod_2pi(atan2(_dot(b0, ea), _dot(b0, a0)))
        if orient > 0.0:
            lo = tb0; hi = tb0 + len_b
        else:
            lo = tb0 - len_b; hi = tb0
        slack = eps if eps > EPS_ANGLE else EPS_ANGLE
        best = INFINITY
        for i in range(3):
            if i == 0:
                t = 0.0
            elif i == 1:
                t = _pymod_2pi(lo)
            else:
                t = _pymod_2pi(lo) - TWO_PI
            if t < -slack or t > len_a + slack:
                continue
            shifted = t
            delta = _pymod_2pi(shifted - lo)
            if delta <= (hi - lo) + slack or delta >= TWO_PI - slack:
                if t < 0.0:
                    t = 0.0
                if t > len_a:
                    t = len_a
                if t < best:
                    best = t
        if best == INFINITY:
            return C_NONE
        c = cos(best); sn = sin(best)
        out[0] = c * a0[0] + sn * ea[0]
        out[1] = c * a0[1] + sn * ea[1]
        out[2] = c * a0[2] + sn * ea[2]
        return C_OVERLAP

    if _chord(a0, b0) <= ept or _chord(a0, b1) <= ept:
        out[0] = a0[0]; out[1] = a0[1]; out[2] = a0[2]
        return C_TOUCH
    if _chord(a1, b0) <= ept or _chord(a1, b1) <= ept:
        out[0] = a1[0]; out[1] = a1[1]; out[2] = a1[2]
        return C_TOUCH

    s0 = _dot(nahat, b0)
    s1 = _dot(nahat, b1)
    t0 = _dot(nbhat, a0)
    t1 = _dot(nbhat, a1)
    epl = eps if eps > EPS_PLANE else EPS_PLANE
    slack = eps if eps > EPS_ANGLE else EPS_ANGLE

    if fabs(s0) <= epl and _on_arc(b0, a0, nahat, len_a, slack):
        out[0] = b0[0]; out[1] = b0[1]; out[2] = b0[2]
        return C_TOUCH
    if fabs(s1) <= epl and _on_arc(b1, a0, nahat, len_a, slack):
        out[0] = b1[0]; out[1] = b1[1]; out[2] = b1[2]
        return C_TOUCH
    if fabs(t0) <= epl and _on_arc(a0, b0, nbhat, len_b, slack):
        out[0] = a0[0]; out[1] = a0[1]; out[2] = a0[2]
        return C_TOUCH
    if fabs(t1) <= epl and _on_arc(a1, b0, nbhat, len_b, slack):
        out[0] = a1[0]; out[1] = a1[1]; out[2] = a1[2]
        return C_TOUCH

    if s0 * s1 < 0.0 and t0 * t1 < 0.0:
        out[0] = cr[0] / s; out[1] = cr[1] / s; out[2] = cr[2] / s
        mid[0] = a0[0] + a1[0]; mid[1] = a0[1] + a1[1]; mid[2] = a0[2] + a1[2]
        if _dot(out, mid) < 0.0:
            out[0] = -out[0]; out[1] = -out[1]; out[2] = -out[2]
        mid[0] = b0[0] + b1[0]; mid[1] = b0[1] + b1[1]; mid[2] = b0[2] + b1[2]
        if _dot(out, mid) > 0.0:
            return C_CROSS
    return C_NONE


def arc_pair_intersection(a0, a1, b0, b1, double eps=1e-12):
    cdef double pa0[3]
    cdef double pa1[3]
    cdef double pb0[3]
    cdef double pb1[3]
    cdef double out[3]
    cdef int i, kind
    for i in range(3):
        pa0[i] = a0[i]; pa1[i] = a1[i]; pb0[i] = b0[i]; pb1[i] = b1[i]
    kind = _arc_pair(pa0, pa1, pb0, pb1, eps, out)
    if kind == C_NONE:
        return KIND_NONE, None
    return kind, (out[0], out[1], out[2])


cdef inline bint _proximity_ok(double* s, double* e, double len_edge,
                               double* b0, double* b1, double len_b) noexcept nogil:
    """Endpoint-distance prefilter: a hit needs the endpoint sets within
    len_edge + len_b of each other."""
    cdef double m = _dot(s, b0)
    cdef double v = _dot(s, b1)
    if v > m: m = v
    v = _dot(e, b0)
    if v > m: m = v
    v = _dot(e, b1)
    if v > m: m = v
    return acos(_clamp(m)) <= len_edge + len_b + 1e-9


def scan_edge_hits(starts, ends, b0, b1, double eps=1e-12):
    cdef double[:, ::1] S = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[:, ::1] E = np.ascontiguousarray(ends, dtype=np.float64)
    cdef double pb0[3]
    cdef double pb1[3]
    cdef double out[3]
    cdef double len_b, len_e
    cdef int i, j, kind
    cdef int m = S.shape[0]
    for i in range(3):
        pb0[i] = b0[i]; pb1[i] = b1[i]
    len_b = acos(_clamp(_dot(pb0, pb1)))
    for j in range(m):
        len_e = acos(_clamp(_dot(&S[j, 0], &E[j, 0])))
        if not _proximity_ok(&S[j, 0], &E[j, 0], len_e, pb0, pb1, len_b):
            continue
        kind = _arc_pair(&S[j, 0], &E[j, 0], pb0, pb1, eps, out)
        if kind != C_NONE:
            return j, kind, (out[0], out[1], out[2])
    return -1, KIND_NONE, None


def polyline_pair_hit(s1, e1, s2, e2, double eps=1e-12):
    cdef double[:, ::1] S1 = np.ascontiguousarray(s1, dtype=np.float64)
    cdef double[:, ::1] E1 = np.ascontiguousarray(e1, dtype=np.float64)
    cdef double[:, ::1] S2 = np.ascontiguousarray(s2, dtype=np.float64)
    cdef double[:, ::1] E2 = np.ascontiguousarray(e2, dtype=np.float64)
    cdef double out[3]
    cdef int i, j, kind
    cdef double len_i, len_j
    cdef int n1 = S1.shape[0]
    cdef int n2 = S2.shape[0]
    for i in range(n1):
        len_i = acos(_clamp(_dot(&S1[i, 0], &E1[i, 0])))
        for j in range(n2):
            len_j = acos(_clamp(_dot(&S2[j, 0], &E2[j, 0])))
            if not _proximity_ok(&S2[j, 0], &E2[j, 0], len_j,
                                 &S1[i, 0], &E1[i, 0], len_i):
                continue
            kind = _arc_pair(&S2[j, 0], &E2[j, 0], &S1[i, 0], &E1[i, 0],
                             eps, out)
            if kind != C_NONE:
                return i, j, kind, (out[0], out[1], out[2])
    return -1, -1, KIND_NONE, None


cdef double _point_to_arc(double* p, double* a0, double* a1) noexcept nogil:
    cdef double na[3]
    cdef double nhat[3]
    cdef double foot[3]
    cdef double la, d0, d1, h, fl, length
    _cross(a0, a1, na)
    la = _norm(na)
    d0 = _gdist(p, a0)
    d1 = _gdist(p, a1)
    if d1 < d0:
        d0 = d1
    if la < EPS_DEGENERATE:
        return d0
    nhat[0] = na[0] / la; nhat[1] = na[1] / la; nhat[2] = na[2] / la
    h = _dot(p, nhat)
    foot[0] = p[0] - h * nhat[0]
    foot[1] = p[1] - h * nhat[1]
    foot[2] = p[2] - h * nhat[2]
    fl = _norm(foot)
    if fl < 1e-12:
        return 1.5707963267948966
    foot[0] /= fl; foot[1] /= fl; foot[2] /= fl
    length = atan2(la, _dot(a0, a1))
    if _on_arc(foot, a0, nhat, length, EPS_ANGLE):
        d1 = fabs(asin(_clamp(h)))
        if d1 < d0:
            return d1
    return d0


cdef double _arc_distance(double* a0, double* a1, double* b0, double* b1) noexcept nogil:
    cdef double out[3]
    cdef double na[3]
    cdef double nb[3]
    cdef double nahat[3]
    cdef double nbhat[3]
    cdef double w[3]
    cdef double astar[3]
    cdef double foot[3]
    cdef double la, lb, best, d, wl, proj, h, fl, len_a, len_b
    cdef int sign
    if _arc_pair(a0, a1, b0, b1, EPS_PLANE, out) != C_NONE:
        return 0.0
    best = _point_to_arc(a0, b0, b1)
    d = _point_to_arc(a1, b0, b1)
    if d < best: best = d
    d = _point_to_arc(b0, a0, a1)
    if d < best: best = d
    d = _point_to_arc(b1, a0, a1)
    if d < best: best = d
    _cross(a0, a1, na)
    la = _norm(na)
    _cross(b0, b1, nb)
    lb = _norm(nb)
    if la < EPS_DEGENERATE or lb < EPS_DEGENERATE:
        return best
    nahat[0] = na[0] / la; nahat[1] = na[1] / la; nahat[2] = na[2] / la
    nbhat[0] = nb[0] / lb; nbhat[1] = nb[1] / lb; nbhat[2] = nb[2] / lb
    len_a = atan2(la, _dot(a0, a1))
    len_b = atan2(lb, _dot(b0, b1))
    proj = _dot(nahat, nbhat)
    w[0] = nbhat[0] - proj * nahat[0]
    w[1] = nbhat[1] - proj * nahat[1]
    w[2] = nbhat[2] - proj * nahat[2]
    wl = _norm(w)
    if wl < EPS_PARALLEL:
        return best
    w[0] /= wl; w[1] /= wl; w[2] /= wl
    for sign in range(2):
        astar[0] = w[0] if sign == 0 else -w[0]
        astar[1] = w[1] if sign == 0 else -w[1]
        astar[2] = w[2] if sign == 0 else -w[2]
        if not _on_arc(astar, a0, nahat, len_a, EPS_ANGLE):
            continue
        h = _dot(astar, nbhat)
        foot[0] = astar[0] - h * nbhat[0]
        foot[1] = astar[1] - h * nbhat[1]
        foot[2] = astar[2] - h * nbhat[2]
        fl = _norm(foot)
        if fl < 1e-12:
            continue
        foot[0] /= fl; foot[1] /= fl; foot[2] /= fl
        if _on_arc(foot, b0, nbhat, len_b, EPS_ANGLE):
            d = _gdist(astar, foot)
            if d < best:
                best = d
    return best


def arc_distance(a0, a1, b0, b1):
    cdef double pa0[3]
    cdef double pa1[3]
    cdef double pb0[3]
    cdef double pb1[3]
    cdef int i
    for i in range(3):
        pa0[i] = a0[i]; pa1[i] = a1[i]; pb0[i] = b0[i]; pb1[i] = b1[i]
    return _arc_distance(pa0, pa1, pb0, pb1)


def min_polyline_distance(s1, e1, s2, e2):
    cdef double[:, ::1] S1 = np.ascontiguousarray(s1, dtype=np.float64)
    cdef double[:, ::1] E1 = np.ascontiguousarray(e1, dtype=np.float64)
    cdef double[:, ::1] S2 = np.ascontiguousarray(s2, dtype=np.float64)
    cdef double[:, ::1] E2 = np.ascontiguousarray(e2, dtype=np.float64)
    cdef double best = INFINITY
    cdef double d, len_i, len_j, vertex_gap
    cdef int i, j
    cdef int n1 = S1.shape[0]
    cdef int n2 = S2.shape[0]
    for i in range(n1):
        len_i = acos(_clamp(_dot(&S1[i, 0], &E1[i, 0])))
        for j in range(n2):
            len_j = acos(_clamp(_dot(&S2[j, 0], &E2[j, 0])))
            vertex_gap = acos(_clamp(_dot(&S1[i, 0], &S2[j, 0])))
            if vertex_gap > best + len_i + len_j + 1e-12:
                continue
            d = _arc_distance(&S1[i, 0], &E1[i, 0], &S2[j, 0], &E2[j, 0])
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return best


def min_point_to_arcs(p, starts, ends):
    cdef double[:, ::1] S = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[:, ::1] E = np.ascontiguousarray(ends, dtype=np.float64)
    cdef double pp[3]
    cdef double best = INFINITY
    cdef double d
    cdef int i
    cdef int m = S.shape[0]
    for i in range(3):
        pp[i] = p[i]
    for i in range(m):
        d = _point_to_arc(pp, &S[i, 0], &E[i, 0])
        if d < best:
            best = d
    return best


def count_path_crossings(p, q, starts, ends, double eps=1e-12,
                         double guard=1e-9):
    cdef double[:, ::1] S = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[:, ::1] E = np.ascontiguousarray(ends, dtype=np.float64)
    cdef double pp[3]
    cdef double qq[3]
    cdef double out[3]
    cdef double na[3]
    cdef double npath[3]
    cdef double nphat[3]
    cdef double lpath, la, s0, s1, t0, t1, cosang
    cdef int i, kind, count = 0
    cdef bint clean = True
    cdef int m = S.shape[0]
    for i in range(3):
        pp[i] = p[i]; qq[i] = q[i]
    _cross(pp, qq, npath)
    lpath = _norm(npath)
    if lpath < EPS_DEGENERATE:
        return 0, min_point_to_arcs(p, starts, ends) > guard
    nphat[0] = npath[0] / lpath
    nphat[1] = npath[1] / lpath
    nphat[2] = npath[2] / lpath
    for i in range(m):
        s0 = _dot(&S[i, 0], nphat)
        s1 = _dot(&E[i, 0], nphat)
        _cross(&S[i, 0], &E[i, 0], na)
        la = _norm(na)
        if la >= EPS_DEGENERATE:
            t0 = (na[0] * pp[0] + na[1] * pp[1] + na[2] * pp[2]) / la
            t1 = (na[0] * qq[0] + na[1] * qq[1] + na[2] * qq[2]) / la
            if ((s0 > guard and s1 > guard) or (s0 < -guard and s1 < -guard)
                    or (t0 > guard and t1 > guard)
                    or (t0 < -guard and t1 < -guard)):
                continue
        kind = _arc_pair(&S[i, 0], &E[i, 0], pp, qq, eps, out)
        if kind == C_NONE:
            if _arc_pair(&S[i, 0], &E[i, 0], pp, qq, guard, out) != C_NONE:
                clean = False
            continue
        if kind != KIND_CROSS:
            clean = False
            continue
        count += 1
        if (_chord(out, &S[i, 0]) < guard or _chord(out, &E[i, 0]) < guard
                or _chord(out, pp) < guard or _chord(out, qq) < guard):
            clean = False
        if la >= EPS_DEGENERATE:
            cosang = fabs((na[0] * nphat[0] + na[1] * nphat[1]
                           + na[2] * nphat[2]) / la)
            if cosang > 1.0 - 1e-8:
                clean = False
    if clean:
        for i in range(m):
            s0 = _dot(&S[i, 0], nphat)
            s1 = _dot(&E[i, 0], nphat)
            _cross(&S[i, 0], &E[i, 0], na)
            la = _norm(na)
            if la >= EPS_DEGENERATE:
                t0 = (na[0] * pp[0] + na[1] * pp[1] + na[2] * pp[2]) / la
                t1 = (na[0] * qq[0] + na[1] * qq[1] + na[2] * qq[2]) / la
                if ((s0 > guard and s1 > guard)
                        or (s0 < -guard and s1 < -guard)
                        or (t0 > guard and t1 > guard)
                        or (t0 < -guard and t1 < -guard)):
                    continue
            if _point_to_arc(pp, &S[i, 0], &E[i, 0]) < guard:
                clean = False
                break
            if _point_to_arc(qq, &S[i, 0], &E[i, 0]) < guard:
                clean = False
                break
    return count, clean
