"""Orbits, finite-budget recurrence, invariance checks, and fixed points of
a single map.  The topological notion of omega-recurrence is replaced by a
return test with an explicit iterate budget N and threshold delta; when it
fails the caller gets the observed best return distance back to act on.
"""

from dataclasses import dataclass

import numpy as np

from . import _optim
from ._mesh import icosphere_vertices, mesh_spacing
from .errors import NoFixedPointsFound, NoRecurrenceFound
from .sphere_geom import SpherePoint, _unit, geodesic_distance, rows_geodesic

DELTA_EXACT = 1e-9


@dataclass
class OrbitRecord:
    """Finite sample of a positive semi-orbit."""

    base: SpherePoint
    map_id: str
    points: list               # SpherePoints, length N+1
    min_return: tuple          # (index >= 1, geodesic distance)
    exact_period: int          # or None

    def step_distances(self):
        arr = np.array([p.vec for p in self.points])
        return rows_geodesic(arr[:-1], arr[1:])


@dataclass
class RecurrenceReport:
    recurrent: bool
    witness_index: int
    witness_distance: float
    delta: float


def _orbit_array(f, p, n):
    out = np.empty((n + 1, 3))
    out[0] = _unit(p)
    x = out[0]
    for i in range(1, n + 1):
        x = f.apply(x)
        out[i] = x
    return out


def semiorbit(f, p, n, map_id=""):
    """Record the first n iterates of p under f, the closest return to the
    base point, and the exact period if one shows up within DELTA_EXACT."""
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    arr = _orbit_array(f, p, n)
    dists = rows_geodesic(arr[1:], arr[0][None, :])
    idx = int(np.argmin(dists)) + 1
    exact = None
    hits = np.flatnonzero(dists < DELTA_EXACT)
    if hits.size:
        exact = int(hits[0]) + 1
    return OrbitRecord(
        base=SpherePoint(arr[0]),
        map_id=map_id,
        points=[SpherePoint(v) for v in arr],
        min_return=(idx, float(dists[idx - 1])),
        exact_period=exact,
    )


def recurrence_scan(f, p, n, delta):
    """Return test: recurrent iff some iterate 1..n comes back within delta."""
    if n < 1 or delta <= 0.0:
        raise ValueError("need n >= 1 and delta > 0")
    arr = _orbit_array(f, p, n)
    dists = rows_geodesic(arr[1:], arr[0][None, :])
    idx = int(np.argmin(dists)) + 1
    best = float(dists[idx - 1])
    return RecurrenceReport(best < delta, idx, best, float(delta))


def _forward_min_returns(arr, start):
    """min_{j>i} d(x_j, x_i) for each i in [start, len-2], chunked.

    Selection only needs the monotone surrogate arccos(max forward dot)."""
    n = len(arr)
    out = np.full(n, np.inf)
    chunk = 512
    for lo in range(start, n - 1, chunk):
        hi = min(lo + chunk, n - 1)
        dots = arr[lo:hi] @ arr.T
        for r in range(hi - lo):
            i = lo + r
            out[i] = float(dots[r, i + 1:].max())
    return np.arccos(np.clip(out, -1.0, 1.0))


def best_recurrent_candidate(f, p, n):
    """Orbit point with the smallest forward return distance (trailing half
    of the budget) together with its own recurrence report (no threshold)."""
    arr = _orbit_array(f, p, n)
    start = n // 2
    returns = _forward_min_returns(arr, start)
    i = int(np.argmin(returns))
    candidate = arr[i]
    report = recurrence_scan(f, candidate, n, np.inf)
    return SpherePoint(candidate), report


def recurrent_point_in_closure(f, p, n, delta):
    """Numerical stand-in for a minimal-set point in the orbit closure.

    Picks the orbit point (over the trailing half of the budget) with the
    smallest forward return distance, then demands that point itself pass
    the recurrence scan at delta."""
    candidate, report = best_recurrent_candidate(f, p, n)
    if not report.witness_distance < delta:
        raise NoRecurrenceFound(
            f"best return {report.witness_distance:.3e} exceeds delta {delta:.1e} "
            f"within budget {n}",
            min_return_distance=report.witness_distance,
            witness_index=report.witness_index,
        )
    return candidate


@dataclass
class InvarianceReport:
    fixed_points: list
    max_violation: float
    violations: list
    tol: float


def invariance_check(maps, g_set, f, samples=8, tol=1e-8, mesh_level=3):
    """Numerical form of the invariance lemma: common fixed points of g_set,
    pushed through f, should again be fixed by g_set.

    `maps` is the ambient generator list; it is echoed for provenance and
    not used by the computation (the lemma quantifies only over g_set and f).
    """
    del maps
    mesh = icosphere_vertices(mesh_level)
    res = np.zeros(len(mesh))
    for g in g_set:
        gx = g.apply(mesh)
        res = np.maximum(res, rows_geodesic(mesh, gx))
    order = np.argsort(res)
    found = []
    budget = max(4 * samples, 24)  # refinement attempts, not all seeds converge
    for idx in order[:budget]:
        if len(found) >= samples:
            break
        x, r, ok = _optim.minimize_residual(list(g_set), mesh[idx], tol)
        if not ok:
            continue
        if any(geodesic_distance(x, q) < 10.0 * tol for q in found):
            continue
        found.append(x)
    if not found:
        raise NoFixedPointsFound("no common fixed points of g_set at this tolerance")
    violations = []
    for x in found:
        y = f.apply(x)
        violations.append(_optim.residual_of(list(g_set), y))
    return InvarianceReport(
        fixed_points=[SpherePoint(x) for x in found],
        max_violation=float(max(violations)),
        violations=[float(v) for v in violations],
        tol=tol,
    )


def fixed_points_of_map(f, mesh_level=4, tol=1e-9):
    """All numerically-fixed points reachable from mesh seeds.

    Every returned point x satisfies d(x, f(x)) < tol.  Maps that move no
    mesh vertex beyond tol short-circuit to the mesh itself (degenerate
    near-identity case: every returned point is fixed, nothing more is
    claimed)."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    mesh = icosphere_vertices(mesh_level)
    fx = f.apply(mesh)
    disp = rows_geodesic(mesh, fx)
    if float(disp.max()) < tol:
        return [SpherePoint(v) for v in mesh]
    capture = 4.0 * mesh_spacing(mesh_level) * float(disp.max()) + 10.0 * tol
    seeds = np.flatnonzero(disp < capture)
    kept = np.empty((0, 3))
    for idx in seeds:
        if disp[idx] < tol:
            x, ok = mesh[idx], True
        else:
            x, ok = _optim.newton_fixed_point(f, mesh[idx], tol)
        if not ok:
            continue
        if geodesic_distance(x, f.apply(x)) >= tol:
            continue
        if len(kept):
            gaps = rows_geodesic(kept, x[None, :])
            if float(gaps.min()) < 10.0 * tol:
                continue
        kept = np.vstack([kept, x])
    return [SpherePoint(v) for v in kept]
