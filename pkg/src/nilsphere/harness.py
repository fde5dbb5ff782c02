"""Scenario ingestion and deterministic experiment running.

A scenario is a JSON document:

    {
      "schema_version": 1,
      "seed": 0,
      "fields":     {name: {"kind": ..., ...params}},
      "generators": {name: {"type": ..., ...params}},
      "k": 1,
      "config":     {tol, orbit_budget, delta, mesh_level, max_segments, ...},
      "task":       {"kind": "fix", ...params}
    }

Reports are JSON with a deterministic "payload" (byte-identical across runs
for the same scenario and seed) and a "meta" block for volatile data such as
wall time.  See docs/schemas.md for the field-by-field description.
"""

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, curves, diffeo, dynamics, group_words, solver
from .errors import (
    DanglingReference,
    NilsphereError,
    NoConvergence,
    ParseError,
    SchemaError,
)
from .sphere_geom import SpherePoint, geodesic_distance, rows_geodesic

SCHEMA_VERSION = 1

TASK_KINDS = (
    "norm",
    "check-vk",
    "orbit",
    "curve",
    "fix",
    "fix2",
    "verify-algebra",
    "verify-lemmas",
)

# error code -> CLI exit code; 2 hypothesis violations, 3 budget exhaustion
ERROR_EXIT_CODES = {
    "HypothesisViolation": 2,
    "NotInV1": 2,
    "OrbitTrivial": 2,
    "OrbitNotFinite": 2,
    "NotNilpotent": 2,
    "NoConvergence": 3,
    "NoRecurrenceFound": 3,
    "TruncationBeforeClosure": 3,
    "NoFixedPointsFound": 3,
}


@dataclass
class Scenario:
    schema_version: int
    seed: int
    fields: dict          # name -> VectorField
    generators: dict      # name -> MapExpr
    k: int
    config: solver.SolveConfig
    task: dict
    raw: dict = field(repr=False, default=None)


@dataclass
class RunReport:
    payload: dict
    meta: dict

    def to_json(self):
        return json.dumps(
            {"payload": self.payload, "meta": self.meta},
            indent=2,
            sort_keys=True,
        )

    def payload_bytes(self):
        """Canonical bytes used for determinism comparisons."""
        return json.dumps(self.payload, sort_keys=True).encode()


def _require(cond, message, where):
    if not cond:
        raise SchemaError(message, where=where)


def _build_generator(name, spec_dict, fields, generators):
    where = f"generators.{name}"
    _require(isinstance(spec_dict, dict), "generator must be an object", where)
    kind = spec_dict.get("type")
    if kind == "rotation":
        return diffeo.Rotation(spec_dict["axis"], spec_dict["angle"])
    if kind == "twist":
        profile = diffeo.BumpProfile(
            spec_dict["amplitude"], spec_dict["center"], spec_dict["radius"]
        )
        return diffeo.Twist(spec_dict["axis"], profile)
    if kind == "mobius":
        coeffs = [complex(c[0], c[1]) for c in spec_dict["coefficients"]]
        _require(len(coeffs) == 4, "mobius needs 4 complex coefficients", where)
        return diffeo.MobiusStereo(*coeffs)
    if kind == "flow":
        fname = spec_dict["field"]
        if fname not in fields:
            raise DanglingReference(
                f"flow references unknown field {fname!r}", where=where
            )
        steps = spec_dict.get("steps")
        if steps is None:
            steps = diffeo.calibrate_flow_steps(fields[fname], spec_dict["time"])
        return diffeo.FlowMap(fields[fname], spec_dict["time"], steps)
    if kind == "word":
        letters = [(l[0], int(l[1])) for l in spec_dict["letters"]]
        for gname, _ in letters:
            if gname not in generators:
                raise DanglingReference(
                    f"word references unknown generator {gname!r}", where=where
                )
        return diffeo.WordMap(letters, generators)
    raise SchemaError(f"unknown generator type {kind!r}", where=where)


_CONFIG_KEYS = {
    "tol", "orbit_budget", "delta", "max_segments", "mesh_level", "seed",
    "orbit_cap", "eps_nil", "margin", "rho", "stall_rounds", "max_rounds",
    "initial_point",
}


def load_scenario(path):
    """Parse and validate a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}",
                         where=str(path))
    return scenario_from_dict(raw)


def scenario_from_dict(raw):
    _require(isinstance(raw, dict), "scenario must be a JSON object", "$")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})",
            where="schema_version",
        )
    seed = int(raw.get("seed", 0))

    fields = {}
    for name, fdef in (raw.get("fields") or {}).items():
        _require(isinstance(fdef, dict), "field must be an object", f"fields.{name}")
        kind = fdef.get("kind")
        params = {k: v for k, v in fdef.items() if k != "kind"}
        try:
            fields[name] = diffeo.make_field(name, kind, params)
        except (KeyError, ValueError) as exc:
            raise SchemaError(str(exc), where=f"fields.{name}")

    generators = {}
    for name, gdef in (raw.get("generators") or {}).items():
        try:
            generators[name] = _build_generator(name, gdef, fields, generators)
        except KeyError as exc:
            raise SchemaError(f"missing key {exc}", where=f"generators.{name}")

    k = int(raw.get("k", 1))
    _require(k >= 1, "k must be >= 1", "k")

    cfg_raw = dict(raw.get("config") or {})
    unknown = set(cfg_raw) - _CONFIG_KEYS
    _require(not unknown, f"unknown config keys {sorted(unknown)}", "config")
    cfg_raw.setdefault("seed", seed)
    if "initial_point" in cfg_raw and cfg_raw["initial_point"] is not None:
        cfg_raw["initial_point"] = tuple(cfg_raw["initial_point"])
    config = solver.SolveConfig(**cfg_raw)

    task = raw.get("task")
    _require(isinstance(task, dict) and "kind" in task, "task.kind required", "task")
    _require(task["kind"] in TASK_KINDS,
             f"unknown task kind {task['kind']!r}", "task.kind")

    return Scenario(
        schema_version=version,
        seed=seed,
        fields=fields,
        generators=generators,
        k=k,
        config=config,
        task=dict(task),
        raw=raw,
    )


def _resolve_map(scenario, name, where="task.map"):
    if name not in scenario.generators:
        raise DanglingReference(f"unknown generator {name!r}", where=where)
    return scenario.generators[name]


def _point(value):
    return SpherePoint(value)


def _point_out(p):
    v = p.vec if isinstance(p, SpherePoint) else np.asarray(p, dtype=float)
    return [float(v[0]), float(v[1]), float(v[2])]


def _estimate_out(est):
    return {
        "sampled_sup": est.sampled_sup,
        "mesh_level": est.mesh_level,
        "refined": est.refined,
        "margin": est.margin,
    }


def _membership_out(mem):
    return {
        "k": mem.k,
        "bound": mem.bound,
        "verdict": mem.verdict,
        "estimate": _estimate_out(mem.estimate),
    }


def _fix_report_out(rep):
    return {
        "point": _point_out(rep.point),
        "residual": rep.residual,
        "method": rep.method,
        "trace": rep.trace,
    }


def _curve_out(curve):
    return {
        "map": curve.map_id,
        "base": _point_out(curve.base),
        "closure_kind": curve.closure_kind,
        "polyline": [_point_out(v) for v in curve.polyline.vertices],
        "polyline_closed": curve.polyline.closed,
        "loop": [_point_out(v) for v in curve.loop.vertices],
        "component_areas": [float(a) for a in curve.partition.component_areas],
        "representative_points": [
            _point_out(r) for r in curve.partition.representative_points
        ],
    }


def _spec_for(scenario):
    return solver.ActionSpec.build(
        scenario.generators,
        scenario.k,
        eps_nil=scenario.config.eps_nil,
        mesh_level=scenario.config.mesh_level,
        margin=scenario.config.margin,
    )


# -- task runners ------------------------------------------------------------

def _run_norm(scenario):
    task = scenario.task
    names = task.get("maps") or [task["map"]]
    out = {}
    for name in names:
        f = _resolve_map(scenario, name)
        est = diffeo.c1_deviation(f, scenario.config.mesh_level)
        entry = {"estimate": _estimate_out(est)}
        if isinstance(f, diffeo.Rotation):
            entry["exact"] = f.exact_c1_norm()
        out[name] = entry
    return {"norms": out}


def _run_check_vk(scenario):
    task = scenario.task
    name = task["map"]
    f = _resolve_map(scenario, name)
    ks = task.get("ks") or [task.get("k", scenario.k)]
    out = {}
    for k in ks:
        out[str(k)] = _membership_out(
            diffeo.in_neighborhood_vk(
                f, int(k), scenario.config.mesh_level, scenario.config.margin
            )
        )
    return {"map": name, "memberships": out}


def _run_orbit(scenario):
    task = scenario.task
    f = _resolve_map(scenario, task["map"])
    p = _point(task["point"])
    n = int(task.get("n", scenario.config.orbit_budget))
    record = dynamics.semiorbit(f, p, n, map_id=task["map"])
    rec = dynamics.recurrence_scan(f, p, n, scenario.config.delta)
    return {
        "map": task["map"],
        "base": _point_out(record.base),
        "n": n,
        "min_return": {"index": record.min_return[0],
                       "distance": record.min_return[1]},
        "exact_period": record.exact_period,
        "recurrent": rec.recurrent,
        "witness_index": rec.witness_index,
        "witness_distance": rec.witness_distance,
        "delta": rec.delta,
        "points": [_point_out(q) for q in record.points],
    }


def _run_curve(scenario):
    task = scenario.task
    f = _resolve_map(scenario, task["map"])
    p = _point(task["point"])
    max_segments = int(task.get("max_segments", scenario.config.max_segments))
    curve = curves.extract_character_curve(f, p.vec, max_segments,
                                           map_id=task["map"])
    return {"curve": _curve_out(curve)}


def _run_fix(scenario):
    task = scenario.task
    spec = _spec_for(scenario)
    method = task.get("method", "nested")
    out = {"k": scenario.k,
           "memberships": {n: _membership_out(m)
                           for n, m in spec.memberships.items()}}
    if method in ("nested", "both"):
        rep = solver.find_common_fixed_point(spec, scenario.config)
        out["nested"] = _fix_report_out(rep)
    if method in ("direct", "both"):
        rep = solver.direct_minimize(spec, config=scenario.config)
        out["direct"] = _fix_report_out(rep)
    if method == "both":
        d = geodesic_distance(
            out["nested"]["point"], out["direct"]["point"]
        )
        out["methods_agree_distance"] = float(d)
    return out


def _run_fix2(scenario):
    task = scenario.task
    spec = _spec_for(scenario)
    p = _point(task["point"])
    a, b = solver.find_two_fixed_points(spec, p.vec, scenario.config)
    return {
        "first": _fix_report_out(a),
        "second": _fix_report_out(b),
        "separation": geodesic_distance(a.point, b.point),
    }


def _oracle_matrices(task, where="task"):
    n = int(task["n"])
    m = int(task["m"])
    mats = []
    for g in task["gens"]:
        if isinstance(g, dict) and "elementary" in g:
            r, c = g["elementary"]
            mats.append(group_words.elementary_transvection(n, m, int(r), int(c)))
        else:
            mats.append(tuple(tuple(int(v) for v in row) for row in g))
    if not mats:
        raise SchemaError("verify-algebra needs at least one generator", where)
    return n, m, mats


def _run_verify_algebra(scenario):
    n, m, mats = _oracle_matrices(scenario.task)
    oracle = group_words.FiniteGroupOracle(n, m, mats)
    report = group_words.verify_section_2(oracle, mats)
    return {
        "n": n,
        "m": m,
        "group_order": len(oracle.elements),
        "chain_orders": list(report.chain_orders),
        "nilpotency_length": report.nilpotency_length,
        "bilinearity_holds": report.bilinearity_holds,
        "level_generation_holds": report.level_generation_holds,
        "derived_generation_holds": report.derived_generation_holds,
        "all_hold": report.all_hold,
    }


def _sampled_pairs(scenario, count, rng):
    """Deterministic rotation/twist pairs inside the base neighborhood."""
    out = []
    while len(out) < count:
        kind = rng.integers(0, 2)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        if kind == 0:
            angle = float(rng.uniform(1e-4, 0.004))
            out.append(diffeo.Rotation(axis, angle))
        else:
            center = float(rng.uniform(-0.5, 0.5))
            radius = float(rng.uniform(0.15, 0.35))
            amp_cap = 1.0 / (60.0 * 1.3 * (1.0 + 1.72 / radius))
            amplitude = float(rng.uniform(0.2, 1.0) * amp_cap)
            out.append(
                diffeo.Twist(axis, diffeo.BumpProfile(amplitude, center, radius))
            )
    return out


def _run_verify_lemmas(scenario):
    task = scenario.task
    lemma = task.get("lemma")
    cfg = scenario.config
    if lemma == "commutator-bound":
        if "samples" in task:
            rng = np.random.default_rng(scenario.seed)
            n = int(task["samples"])
            maps = _sampled_pairs(scenario, 2 * n, rng)
            results = []
            for i in range(n):
                rep = diffeo.verify_prop_5_1(
                    maps[2 * i], maps[2 * i + 1], cfg.mesh_level
                )
                results.append({"lhs": rep.lhs, "rhs": rep.rhs,
                                "holds": rep.holds})
            return {
                "lemma": lemma,
                "samples": n,
                "all_hold": all(r["holds"] for r in results),
                "results": results,
            }
        f = _resolve_map(scenario, task["f"])
        g = _resolve_map(scenario, task["g"])
        rep = diffeo.verify_prop_5_1(f, g, cfg.mesh_level)
        return {"lemma": lemma, "lhs": rep.lhs, "rhs": rep.rhs,
                "holds": rep.holds}
    if lemma == "ball-exclusion":
        if "samples" in task:
            rng = np.random.default_rng(scenario.seed)
            n = int(task["samples"])
            maps = _sampled_pairs(scenario, n, rng)
            results = []
            for f in maps:
                for _ in range(32):
                    p = rng.normal(size=3)
                    p /= np.linalg.norm(p)
                    if geodesic_distance(p, f.apply(p)) > 1e-6:
                        break
                rep = curves.verify_ball_exclusion(f, p, cfg.mesh_level)
                results.append({"radius": rep.radius,
                                "nearest": rep.nearest_fixed_distance,
                                "holds": rep.holds})
            return {"lemma": lemma, "samples": n,
                    "all_hold": all(r["holds"] for r in results),
                    "results": results}
        f = _resolve_map(scenario, task["map"])
        rep = curves.verify_ball_exclusion(f, _point(task["point"]).vec,
                                           cfg.mesh_level)
        return {"lemma": lemma, "radius": rep.radius,
                "nearest": rep.nearest_fixed_distance, "holds": rep.holds}
    if lemma in ("curve-disjoint", "curve-distance"):
        specs = task["curves"]
        built = []
        orbit_steps = []
        for c in specs:
            f = _resolve_map(scenario, c["map"], where="task.curves")
            curve = curves.extract_character_curve(
                f, _point(c["point"]).vec,
                int(c.get("max_segments", cfg.max_segments)),
                map_id=c["map"],
            )
            built.append(curve)
            steps = rows_geodesic(*curve.polyline.edge_arrays)
            orbit_steps.append(float(steps.min()))
        out = {
            "lemma": lemma,
            "curves": [_curve_out(c) for c in built],
            "min_orbit_steps": orbit_steps,
        }
        if lemma == "curve-disjoint":
            out["disjoint"] = curves.curves_disjoint(built[0], built[1])
        else:
            out["distance"] = curves.curve_distance(built[0], built[1])
            out["step_bound_r"] = min(orbit_steps)
            out["holds"] = out["distance"] >= out["step_bound_r"] - 1e-9
        return out
    if lemma == "invariance":
        g_set = [_resolve_map(scenario, n, "task.g_set") for n in task["g_set"]]
        f = _resolve_map(scenario, task["f"], "task.f")
        rep = dynamics.invariance_check(
            list(scenario.generators.values()), g_set, f,
            samples=int(task.get("samples", 8)), tol=cfg.tol,
            mesh_level=min(cfg.mesh_level, 3),
        )
        return {
            "lemma": lemma,
            "max_violation": rep.max_violation,
            "violations": rep.violations,
            "fixed_points": [_point_out(q) for q in rep.fixed_points],
            "holds": rep.max_violation < 10.0 * cfg.tol,
        }
    raise SchemaError(f"unknown lemma {lemma!r}", where="task.lemma")


_RUNNERS = {
    "norm": _run_norm,
    "check-vk": _run_check_vk,
    "orbit": _run_orbit,
    "curve": _run_curve,
    "fix": _run_fix,
    "fix2": _run_fix2,
    "verify-algebra": _run_verify_algebra,
    "verify-lemmas": _run_verify_lemmas,
}


def run(scenario):
    """Execute the scenario's task; errors become machine-readable payload
    entries (the raised condition is preserved under "error")."""
    started = time.perf_counter()
    payload = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "seed": scenario.seed,
        "k": scenario.k,
        "task": scenario.task,
        "config": {
            "tol": scenario.config.tol,
            "orbit_budget": scenario.config.orbit_budget,
            "delta": scenario.config.delta,
            "max_segments": scenario.config.max_segments,
            "mesh_level": scenario.config.mesh_level,
            "eps_nil": scenario.config.eps_nil,
            "margin": scenario.config.margin,
            "orbit_cap": scenario.config.orbit_cap,
        },
    }
    try:
        payload["outputs"] = _RUNNERS[scenario.task["kind"]](scenario)
        payload["error"] = None
    except NilsphereError as exc:
        payload["outputs"] = None
        payload["error"] = {
            "code": type(exc).__name__,
            "message": str(exc),
        }
        if isinstance(exc, NoConvergence) and exc.best is not None:
            payload["error"]["best"] = _fix_report_out(exc.best)
    wall = time.perf_counter() - started
    meta = {"wall_time_s": wall}
    return RunReport(payload=payload, meta=meta)


def exit_code_for(report):
    if report.payload.get("error") is None:
        return 0
    return ERROR_EXIT_CODES.get(report.payload["error"]["code"], 1)
