"""Common-fixed-point search.

The constructive route mirrors the inductive existence proof: peel off the
commutator subgroup via its level generating sets (recursing on the claimed
nilpotency length), then extend generator by generator, each time localizing
the search inside a disk enclosed by the orbit curve of the offending map at
a recurrent point.  The disk chain is kept as an auditable trace; a direct
multi-start residual minimizer cross-validates the result.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _optim, curves, dynamics, group_words
from ._mesh import icosphere_vertices
from .diffeo import (
    OUTSIDE,
    WordMap,
    c1_deviation,
    in_neighborhood_vk,
)
from .errors import (
    HypothesisViolation,
    NoConvergence,
    NoRecurrenceFound,
    OrbitNotFinite,
    OrbitTrivial,
    TruncationBeforeClosure,
)
from .sphere_geom import (
    ON_CURVE,
    SpherePoint,
    _unit,
    geodesic_distance,
    point_component,
    rows_geodesic,
)

NESTED_DISK = "nested_disk"
DIRECT_MINIMIZE = "direct_minimize"
HYBRID = "hybrid"


@dataclass
class SolveConfig:
    tol: float = 1e-8
    orbit_budget: int = 10_000          # N: iterates for recurrence scans
    delta: float = 1e-6                 # recurrence return threshold
    max_segments: int = 4096            # curve segment budget
    mesh_level: int = 4
    seed: int = 0
    orbit_cap: int = 100_000            # group-orbit closure cap
    eps_nil: float = 1e-9               # nilpotency certificate tolerance
    margin: float = 0.05                # Vk verdict safety margin
    rho: float = 0.9                    # required disk-area shrink factor
    stall_rounds: int = 50
    max_rounds: int = 200
    initial_point: tuple = None         # optional starting candidate


@dataclass
class ActionSpec:
    """A finitely generated action: named generators, the claimed nilpotency
    length, and the neighborhood verdicts backing the hypotheses."""

    generators: dict
    k: int
    eps_nil: float
    memberships: dict

    @classmethod
    def build(cls, generators, k, eps_nil=1e-9, mesh_level=4, margin=0.05):
        if k < 1:
            raise ValueError("claimed nilpotency length must be >= 1")
        memberships = {
            name: in_neighborhood_vk(g, k, mesh_level, margin)
            for name, g in generators.items()
        }
        return cls(dict(generators), int(k), float(eps_nil), memberships)


@dataclass
class FixReport:
    point: SpherePoint
    residual: float
    method: str
    trace: list = field(default_factory=list)


def residual(spec, x):
    """Max geodesic displacement of x under the spec's generators."""
    xv = _unit(x)
    return _optim.residual_of(list(spec.generators.values()), xv)


def _word_map(w, table):
    return WordMap(w.letters, table)


def check_hypotheses(spec, config):
    """Vk membership for every generator plus the depth-k commutator
    triviality certificate; raises HypothesisViolation on failure."""
    for name, mem in spec.memberships.items():
        if mem.verdict == OUTSIDE:
            raise HypothesisViolation(
                f"generator {name!r} is outside the level-{spec.k} neighborhood "
                f"(estimate {mem.estimate.sampled_sup:.3e} > bound {mem.bound:.3e})"
            )
    levels = group_words.level_sets(spec.generators.keys(), spec.k).levels
    for w in levels[spec.k]:
        dev = c1_deviation(_word_map(w, spec.generators), config.mesh_level)
        if dev.sampled_sup >= spec.eps_nil:
            raise HypothesisViolation(
                f"depth-{spec.k} commutator {w} has deviation "
                f"{dev.sampled_sup:.3e} >= eps_nil {spec.eps_nil:.1e}"
            )


def _seed_points(maps, config, disk=None, extra=None, cap=48):
    """Mesh seeds ordered by residual, restricted to a disk side when given.

    Classification against a long loop is expensive, so seeds are classified
    lazily in residual order and collection stops at `cap` in-disk seeds."""
    mesh = icosphere_vertices(config.mesh_level)
    if extra is not None and len(extra):
        mesh = np.vstack([np.asarray(extra, dtype=float), mesh])
    if maps:
        res = np.zeros(len(mesh))
        for f in maps:
            fx = f.apply(mesh)
            res = np.maximum(res, rows_geodesic(mesh, fx))
        mesh = mesh[np.argsort(res, kind="stable")]
    if disk is None:
        return mesh
    partition, side = disk
    seeds = [partition.representative_points[side].vec]
    for v in mesh:
        if len(seeds) >= cap:
            break
        if point_component(partition, v) == side:
            seeds.append(v)
    seeds = np.array(seeds)
    if maps and len(seeds) > 1:
        res = np.zeros(len(seeds))
        for f in maps:
            res = np.maximum(res, rows_geodesic(seeds, f.apply(seeds)))
        seeds = seeds[np.argsort(res, kind="stable")]
    return seeds


def _minimize_over_seeds(maps, seeds, config, disk=None, tries=24):
    """Refine seeds in order until one converges (and lands in the disk)."""
    best_x, best_r = None, math.inf
    for x0 in seeds[:tries]:
        x, r, ok = _optim.minimize_residual(maps, x0, config.tol)
        if disk is not None:
            partition, side = disk
            if point_component(partition, x) != side:
                if r < best_r and best_x is None:
                    pass  # out-of-disk candidates are never preferred
                continue
        if r < best_r:
            best_x, best_r = x, r
        if ok:
            return best_x, best_r, True
    return best_x, best_r, False


def _recurrent_with_retry(f, p, config, trace):
    """Recurrent-point search with an adaptive threshold: when the budget
    fails at the configured delta, the observed best return distance is
    accepted instead (curve building only needs eventual closure), up to an
    absolute ceiling past which the orbit is treated as drifting."""
    candidate, report = dynamics.best_recurrent_candidate(
        f, p, config.orbit_budget
    )
    if report.witness_distance < config.delta:
        return candidate
    ceiling = max(10.0 * config.delta, 0.1)
    if not math.isfinite(report.witness_distance) or (
        report.witness_distance > ceiling
    ):
        raise NoRecurrenceFound(
            f"best return {report.witness_distance:.3e} exceeds the drift "
            f"ceiling {ceiling:.3e} within budget {config.orbit_budget}",
            min_return_distance=report.witness_distance,
            witness_index=report.witness_index,
        )
    trace.append(
        {
            "stage": "recurrence_retry",
            "delta_used": 1.25 * report.witness_distance,
            "observed_min_return": report.witness_distance,
        }
    )
    return candidate


def find_common_fixed_point(spec, config=None):
    """Locate a point fixed (within tol) by every generator.

    Follows the inductive proof as an iterative refinement: first solve the
    derived sub-action coming from the level generating sets, then extend
    one generator at a time through disks enclosed by orbit curves.  Each
    disk is recorded in the trace.  Raises HypothesisViolation when the spec
    fails its certificates and NoConvergence (carrying the best candidate)
    when budgets run out."""
    config = config or SolveConfig()
    check_hypotheses(spec, config)
    trace = []
    method = NESTED_DISK

    gen_maps = list(spec.generators.values())
    derived = group_words.derived_generators(spec.generators.keys(), spec.k)
    base_maps = []
    if derived and spec.k >= 2:
        dmaps = {
            f"d{i}": _word_map(w, spec.generators) for i, w in enumerate(derived)
        }
        subspec = ActionSpec.build(
            dmaps, spec.k - 1, spec.eps_nil, config.mesh_level, config.margin
        )
        sub_report = find_common_fixed_point(subspec, config)
        base_maps = list(dmaps.values())
        p = sub_report.point.vec
        trace.append(
            {
                "stage": "base_algebra",
                "derived_count": len(derived),
                "sub_residual": sub_report.residual,
                "sub_trace": sub_report.trace,
            }
        )
    elif config.initial_point is not None:
        p = _unit(np.asarray(config.initial_point, dtype=float))
    else:
        seeds = _seed_points(gen_maps, config)
        p = seeds[0]

    disk = None
    processed = []
    queue = list(spec.generators.items())
    idx = 0
    rounds = 0
    stall = 0
    prev_area = 4.0 * math.pi
    best_candidate = (p, _optim.residual_of(gen_maps, p))

    while idx < len(queue):
        name, f = queue[idx]
        if geodesic_distance(p, f.apply(p)) < config.tol:
            processed.append(f)
            idx += 1
            continue
        rounds += 1
        if rounds > config.max_rounds:
            raise NoConvergence(
                "generator extension exceeded the round budget",
                best=FixReport(SpherePoint(best_candidate[0]), best_candidate[1],
                               method, trace),
            )
        try:
            y = _recurrent_with_retry(f, p, config, trace)
            curve = curves.extract_character_curve(
                f, y.vec, config.max_segments, map_id=name
            )
        except (NoRecurrenceFound, TruncationBeforeClosure) as exc:
            # curve route unavailable: fall back to direct descent for this map
            method = HYBRID
            trace.append({"stage": "direct_fallback", "map": name,
                          "reason": type(exc).__name__})
            maps_needed = base_maps + processed + [f]
            x, r, ok = _minimize_over_seeds(
                maps_needed, _seed_points(maps_needed, config, disk, [p]),
                config, disk
            )
            if not ok:
                raise NoConvergence(
                    f"no fixed point found for generator {name!r}",
                    best=FixReport(SpherePoint(best_candidate[0]),
                                   best_candidate[1], method, trace),
                ) from exc
            p = x
            processed.append(f)
            idx += 1
            continue

        where = point_component(curve.partition, p)
        if where == ON_CURVE:
            areas = curve.partition.component_areas
            side = 0 if areas[0] <= areas[1] else 1
        else:
            side = where
        disk = (curve.partition, side)
        area = curve.partition.component_areas[side]
        steps = rows_geodesic(*curve.polyline.edge_arrays)
        trace.append(
            {
                "stage": "disk",
                "map": name,
                "areas": list(curve.partition.component_areas),
                "side": side,
                "closure": curve.closure_kind,
                "loop_vertices": len(curve.loop.vertices),
                "loop": [list(map(float, v.vec)) for v in curve.loop.vertices],
                "base_point": list(map(float, y.vec)),
                "min_orbit_step": float(steps.min()),
            }
        )
        if area > config.rho * prev_area:
            stall += 1
            if stall >= config.stall_rounds:
                raise NoConvergence(
                    "disk areas stopped shrinking",
                    best=FixReport(SpherePoint(best_candidate[0]),
                                   best_candidate[1], method, trace),
                )
        else:
            stall = 0
        prev_area = area

        maps_needed = base_maps + processed + [f]
        seeds = _seed_points(maps_needed, config, disk, [y.vec])
        x, r, ok = _minimize_over_seeds(maps_needed, seeds, config, disk)
        if x is not None:
            p = x
            full = _optim.residual_of(gen_maps, p)
            if full < best_candidate[1]:
                best_candidate = (p, full)
        if ok:
            processed.append(f)
            idx += 1

    x, res, ok = _optim.minimize_residual(gen_maps, p, config.tol)
    if not ok:
        raise NoConvergence(
            "final polish did not reach the tolerance",
            best=FixReport(SpherePoint(x), res, method, trace),
        )
    return FixReport(SpherePoint(x), res, method, trace)


def direct_minimize(spec, disk=None, config=None):
    """Multi-start local minimization of the residual (cross-validation
    oracle for the constructive route)."""
    config = config or SolveConfig()
    maps = list(spec.generators.values())
    if not maps:
        seeds = _seed_points(maps, config, disk)
        return FixReport(SpherePoint(seeds[0]), 0.0, DIRECT_MINIMIZE, [])
    rng = np.random.default_rng(config.seed)
    jitter = _optim.spherical_cap_samples(
        np.array([0.0, 0.0, 1.0]), math.pi * 0.999, 16, rng
    )
    seeds = _seed_points(maps, config, disk, jitter)
    x, r, ok = _minimize_over_seeds(maps, seeds, config, disk, tries=40)
    if not ok:
        raise NoConvergence(
            "direct minimization failed on every seed",
            best=None if x is None else FixReport(SpherePoint(x), r,
                                                  DIRECT_MINIMIZE, []),
        )
    return FixReport(SpherePoint(x), r, DIRECT_MINIMIZE, [])


def _group_orbit(spec, p, delta, cap):
    """Orbit of p under the generated group, deduplicated at scale delta.

    Raises OrbitNotFinite past the cap; the scan applies every generator and
    its inverse to the frontier until no new points appear."""
    gens = []
    for g in spec.generators.values():
        gens.append(g)
        gens.append(g.inverse())
    cell = max(delta, 1e-12)

    def key(v):
        return (int(v[0] // cell), int(v[1] // cell), int(v[2] // cell))

    points = [_unit(p)]
    grid = {}

    def register(v):
        k = key(v)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    for idx in grid.get((k[0] + dx, k[1] + dy, k[2] + dz), ()):
                        if geodesic_distance(points[idx], v) < delta:
                            return False
        grid.setdefault(k, []).append(len(points))
        points.append(v)
        return True

    grid[key(points[0])] = [0]
    frontier = np.array([points[0]])
    while len(frontier):
        new = []
        for g in gens:
            images = g.apply(frontier)
            for v in np.atleast_2d(images):
                if register(v):
                    new.append(v)
                    if len(points) > cap:
                        raise OrbitNotFinite(
                            f"orbit exceeded cap {cap} at dedup scale {delta:.1e}"
                        )
        frontier = np.array(new) if new else np.empty((0, 3))
    return np.array(points)


def find_two_fixed_points(spec, p, config=None):
    """Two fixed points separated by the orbit curve of a moved base point.

    Requires the group orbit of p to be finite (within delta) and
    nontrivial; the curve then closes exactly and the search runs once
    inside each complementary disk."""
    config = config or SolveConfig()
    check_hypotheses(spec, config)
    pv = _unit(p)

    orbit = _group_orbit(spec, pv, config.delta, config.orbit_cap)
    if len(orbit) < 2:
        raise OrbitTrivial("the base point is fixed by every generator")

    mover = None
    mover_name = None
    threshold = max(10.0 * config.tol, 1e-9)
    for name, g in spec.generators.items():
        if geodesic_distance(pv, g.apply(pv)) > threshold:
            mover, mover_name = g, name
            break
    if mover is None:
        raise OrbitTrivial("no generator moves the base point")

    curve = curves.extract_character_curve(
        mover, pv, config.max_segments, map_id=mover_name
    )
    reports = []
    for side in (0, 1):
        disk = (curve.partition, side)
        maps = list(spec.generators.values())
        seeds = _seed_points(maps, config, disk)
        x, r, ok = _minimize_over_seeds(maps, seeds, config, disk, tries=40)
        if not ok:
            raise NoConvergence(
                f"no fixed point found inside component {side}",
                best=None if x is None else FixReport(SpherePoint(x), r,
                                                      NESTED_DISK, []),
            )
        trace = [
            {
                "stage": "two_point_disk",
                "map": mover_name,
                "side": side,
                "areas": list(curve.partition.component_areas),
                "closure": curve.closure_kind,
                "loop_vertices": len(curve.loop.vertices),
            }
        ]
        reports.append(FixReport(SpherePoint(x), r, NESTED_DISK, trace))

    a, b = reports
    ca = point_component(curve.partition, a.point)
    cb = point_component(curve.partition, b.point)
    if ca == cb or ON_CURVE in (ca, cb):
        raise NoConvergence(
            "the two candidates did not separate across the curve",
            best=a,
        )
    if geodesic_distance(a.point, b.point) <= 2.0 * config.tol:
        raise NoConvergence("the two candidates coincide", best=a)
    return a, b
