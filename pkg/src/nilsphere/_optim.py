"""Local refinement on the sphere: damped Newton / Gauss-Newton steps taken
in the tangent frame, with a pattern-search fallback for the non-smooth or
badly conditioned cases (fixed points of near-identity maps are elliptic,
so plain gradient descent is useless here).
"""

import math

import numpy as np

from .diffeo import tangent_frames
from .sphere_geom import geodesic_distance


def _unit_row(v):
    return v / np.linalg.norm(v)


def newton_fixed_point(f, x0, tol, max_iter=60, patience=3):
    """Refine x0 toward a fixed point of f; returns (point, converged).

    Newton solves the projected displacement in the local tangent frame;
    after `patience` divergent steps it falls back to pattern search on the
    displacement."""
    x = _unit_row(np.asarray(x0, dtype=float))
    divergent = 0
    for _ in range(max_iter):
        e1, e2 = tangent_frames(x[None, :])
        fx, (d1, d2) = f.push(x[None, :], (e1, e2))
        g = fx[0] - x
        gn = np.array([g @ e1[0], g @ e2[0]])
        disp = geodesic_distance(x, fx[0])
        if disp < tol:
            return x, True
        a = np.array(
            [
                [d1[0] @ e1[0] - 1.0, d2[0] @ e1[0]],
                [d1[0] @ e2[0], d2[0] @ e2[0] - 1.0],
            ]
        )
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        if abs(det) < 1e-16:
            break
        du = -np.linalg.solve(a, gn)
        scale = 1.0
        moved = False
        for _ in range(8):
            cand = _unit_row(x + scale * (du[0] * e1[0] + du[1] * e2[0]))
            cand_disp = geodesic_distance(cand, f.apply(cand))
            if cand_disp < disp:
                x = cand
                moved = True
                break
            scale *= 0.5
        if not moved:
            divergent += 1
            if divergent >= patience:
                break
    # pattern-search fallback on the displacement itself (bounded: seeds far
    # from any fixed point are abandoned rather than walked to one)
    x, val = pattern_search_min(
        lambda p: geodesic_distance(p, f.apply(p)),
        x,
        step0=1e-3,
        min_step=tol * 1e-3,
        max_iter=80,
    )
    return x, val < tol


def residual_of(maps, x):
    """Max geodesic displacement of x under the given maps."""
    if not maps:
        return 0.0
    return max(geodesic_distance(x, f.apply(np.asarray(x, dtype=float))) for f in maps)


def minimize_residual(maps, x0, tol, max_iter=80, patience=3):
    """Gauss-Newton on the stacked chord displacements of several maps.

    Returns (point, max geodesic residual, converged).  The sum of squared
    chords and the max geodesic residual share the same zero set."""
    x = _unit_row(np.asarray(x0, dtype=float))
    if not maps:
        return x, 0.0, True

    def ssq(p):
        return sum(
            float(np.sum((f.apply(p) - p) ** 2)) for f in maps
        )

    divergent = 0
    for _ in range(max_iter):
        res = residual_of(maps, x)
        if res < tol:
            return x, res, True
        e1, e2 = tangent_frames(x[None, :])
        rows = []
        jac = []
        for f in maps:
            fx, (d1, d2) = f.push(x[None, :], (e1, e2))
            rows.append(fx[0] - x)
            jac.append(np.stack([d1[0] - e1[0], d2[0] - e2[0]], axis=1))
        r = np.concatenate(rows)
        J = np.vstack(jac)
        jtj = J.T @ J
        jtr = J.T @ r
        det = jtj[0, 0] * jtj[1, 1] - jtj[0, 1] * jtj[1, 0]
        if abs(det) < 1e-20:
            break
        du = -np.linalg.solve(jtj, jtr)
        base = ssq(x)
        scale = 1.0
        moved = False
        for _ in range(10):
            cand = _unit_row(x + scale * (du[0] * e1[0] + du[1] * e2[0]))
            if ssq(cand) < base:
                x = cand
                moved = True
                break
            scale *= 0.5
        if not moved:
            divergent += 1
            if divergent >= patience:
                break
    x, val = pattern_search_min(
        lambda p: residual_of(maps, p), x, step0=1e-3, min_step=min(tol * 1e-3, 1e-12)
    )
    return x, val, val < tol


def pattern_search_min(fn, x0, step0=0.05, min_step=1e-12, max_iter=400):
    """Derivative-free descent over the sphere; returns (point, value)."""
    x = _unit_row(np.asarray(x0, dtype=float))
    best = fn(x)
    step = step0
    for _ in range(max_iter):
        if step < min_step:
            break
        e1, e2 = tangent_frames(x[None, :])
        improved = False
        for d in (e1[0], -e1[0], e2[0], -e2[0]):
            cand = _unit_row(x + step * d)
            v = fn(cand)
            if v < best:
                x, best = cand, v
                improved = True
                break
        if not improved:
            step *= 0.5
    return x, best


def spherical_cap_samples(center, radius, n, rng):
    """n quasi-uniform samples inside the geodesic cap (for seeding)."""
    center = _unit_row(np.asarray(center, dtype=float))
    e1, e2 = tangent_frames(center[None, :])
    u = rng.random(n)
    phi = rng.random(n) * 2.0 * math.pi
    # uniform in cap: colatitude from inverse CDF of sin
    theta = np.arccos(1.0 - u * (1.0 - math.cos(radius)))
    pts = (
        np.outer(np.cos(theta), center)
        + np.outer(np.sin(theta) * np.cos(phi), e1[0])
        + np.outer(np.sin(theta) * np.sin(phi), e2[0])
    )
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)
