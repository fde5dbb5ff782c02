"""Cross-checks between the compiled kernels and the numpy fallback."""

import math

import numpy as np
import pytest

from nilsphere._kernels import backend_name, get_backend

NUMPY = get_backend("numpy")
try:
    CYTHON = get_backend("cython")
except ImportError:
    CYTHON = None

needs_cython = pytest.mark.skipif(CYTHON is None, reason="compiled kernels absent")


def rand_arcs(rng, n):
    v = rng.normal(size=(n, 2, 3))
    v /= np.linalg.norm(v, axis=2, keepdims=True)
    keep = np.einsum("ij,ij->i", v[:, 0], v[:, 1]) > -0.9
    return v[keep]


def test_backend_selected():
    assert backend_name() in ("cython", "numpy")


@needs_cython
def test_pair_primitive_agreement():
    rng = np.random.default_rng(42)
    arcs = rand_arcs(rng, 400)
    m = len(arcs) // 2
    for i in range(m):
        a = arcs[2 * i]
        b = arcs[2 * i + 1]
        kn, pn = NUMPY.arc_pair_intersection(a[0], a[1], b[0], b[1])
        kc, pc = CYTHON.arc_pair_intersection(a[0], a[1], b[0], b[1])
        assert kn == kc
        if pn is not None:
            assert np.allclose(pn, pc, atol=1e-14)


@needs_cython
def test_pair_primitive_agreement_touching():
    # arcs sharing endpoints, cocircular overlaps, zero-length arcs
    e = np.array([1.0, 0.0, 0.0])
    q = np.array([0.0, 1.0, 0.0])
    r = np.array([0.0, 0.0, 1.0])
    mid = (e + q) / np.linalg.norm(e + q)
    cases = [
        (e, q, q, r),              # shared endpoint
        (e, mid, mid, q),          # collinear split, shared midpoint
        (e, q, mid, r),            # touch at interior point
        (e, q, e, q),              # identical arcs (overlap)
        (e, mid, e, q),            # nested cocircular overlap
        (e, e, e, q),              # degenerate first arc on second
        (e, e, q, q),              # two degenerate arcs apart
    ]
    for a0, a1, b0, b1 in cases:
        kn, pn = NUMPY.arc_pair_intersection(a0, a1, b0, b1)
        kc, pc = CYTHON.arc_pair_intersection(a0, a1, b0, b1)
        assert kn == kc
        if pn is not None:
            assert np.allclose(pn, pc, atol=1e-14)


@needs_cython
def test_scan_agreement():
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(40, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    starts, ends = pts[:-1], pts[1:]
    for _ in range(50):
        b = rng.normal(size=(2, 3))
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        rn = NUMPY.scan_edge_hits(starts, ends, b[0], b[1])
        rc = CYTHON.scan_edge_hits(starts, ends, b[0], b[1])
        assert rn[0] == rc[0] and rn[1] == rc[1]
        if rn[2] is not None:
            assert np.allclose(rn[2], rc[2], atol=1e-12)


@needs_cython
def test_distance_agreement():
    rng = np.random.default_rng(19)
    arcs = rand_arcs(rng, 200)
    m = len(arcs) // 2
    for i in range(m):
        a, b = arcs[2 * i], arcs[2 * i + 1]
        dn = NUMPY.arc_distance(a[0], a[1], b[0], b[1])
        dc = CYTHON.arc_distance(a[0], a[1], b[0], b[1])
        assert dn == pytest.approx(dc, abs=1e-12)


@needs_cython
def test_distance_against_dense_sampling():
    rng = np.random.default_rng(3)
    arcs = rand_arcs(rng, 60)
    m = len(arcs) // 2

    def slerp(a, b, t):
        ang = math.acos(max(-1.0, min(1.0, float(a @ b))))
        if ang < 1e-12:
            return a
        return (math.sin((1 - t) * ang) * a + math.sin(t * ang) * b) / math.sin(ang)

    ts = np.linspace(0.0, 1.0, 200)
    for i in range(m):
        a, b = arcs[2 * i], arcs[2 * i + 1]
        exact = NUMPY.arc_distance(a[0], a[1], b[0], b[1])
        pa = np.array([slerp(a[0], a[1], t) for t in ts])
        pb = np.array([slerp(b[0], b[1], t) for t in ts])
        dots = np.clip(pa @ pb.T, -1, 1)
        sampled = float(np.arccos(dots).min())
        # dense sampling can only overestimate the true minimum, and only by
        # about one sample step on each arc
        step = (math.acos(max(-1, min(1, a[0] @ a[1])))
                + math.acos(max(-1, min(1, b[0] @ b[1])))) / len(ts)
        assert exact <= sampled + 1e-9
        assert sampled - exact < step + 1e-6


@needs_cython
def test_crossing_parity_agreement():
    rng = np.random.default_rng(11)
    n = 16
    loop = np.array(
        [
            [
                math.cos(2 * math.pi * i / n) * math.sqrt(0.91),
                math.sin(2 * math.pi * i / n) * math.sqrt(0.91),
                0.3,
            ]
            for i in range(n)
        ]
    )
    starts = loop
    ends = np.vstack([loop[1:], loop[:1]])
    for _ in range(100):
        pq = rng.normal(size=(2, 3))
        pq /= np.linalg.norm(pq, axis=1, keepdims=True)
        rn = NUMPY.count_path_crossings(pq[0], pq[1], starts, ends)
        rc = CYTHON.count_path_crossings(pq[0], pq[1], starts, ends)
        if rn[1] and rc[1]:  # compare only mutually clean configurations
            assert rn[0] == rc[0]


@needs_cython
def test_min_point_to_arcs_agreement():
    rng = np.random.default_rng(23)
    pts = rng.normal(size=(30, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    starts, ends = pts[:-1], pts[1:]
    for _ in range(100):
        p = rng.normal(size=3)
        p /= np.linalg.norm(p)
        dn = NUMPY.min_point_to_arcs(p, starts, ends)
        dc = CYTHON.min_point_to_arcs(p, starts, ends)
        assert dn == pytest.approx(dc, abs=1e-12)
