"""Command-line front end.

Every subcommand resolves a scene (JSON file, overridden by flags), runs one
evaluator or checker and prints a single JSON report that embeds the
resolved scene.  Exit codes: 0 success, 2 malformed scene, 3 geometry error,
4 numerical non-convergence, 5 a requested tolerance was not met.
"""

from __future__ import annotations

import argparse
import json
from itertools import combinations
import math
import os
import sys

import numpy as np

from . import axioms, bundle, gerbe
from .catalog import CATALOG, get_entry
from .cech import check_bundle_cocycle, check_gerbe_cocycle
from .errors import BadParameter, GeometryError, NumericalError
from .numerics import QuadConfig
from .partitions.builders import build_surface_partition
from .partitions.paths import (LabeledLoopPartition, LabeledPathPartition, build_loop_partition,
                               build_path_partition, constant_partition)
from .partitions.volume import build_volume_partition
from .phase import Phase

EXIT_OK, EXIT_SCHEMA, EXIT_GEOMETRY, EXIT_NUMERICAL, EXIT_TOLERANCE = 0, 2, 3, 4, 5

COMMANDS = ("check", "transport", "surface", "stokes", "stokes2", "reconstruct", "reconstruct-gerbe",
            "axioms", "axioms2")

DEFAULT_TOLERANCE = {"check": 1e-6, "stokes": 1e-5, "stokes2": 1e-5, "reconstruct": 1e-4,
                     "reconstruct-gerbe": 1e-3, "axioms": 1e-5, "axioms2": 1e-5}

SCENE_KEYS = {"geometry", "object", "partition", "quad", "options"}


class SchemaError(Exception):
    pass


# ---------------------------------------------------------------------------
# scene handling


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_pairs(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise SchemaError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def _parse_floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise SchemaError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise SchemaError(f"expected comma-separated integers, got {text!r}") from exc


def load_scene(path) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            scene = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read scene {path}: {exc}") from exc
    if not isinstance(scene, dict):
        raise SchemaError("a scene must be a JSON object")
    unknown = set(scene) - SCENE_KEYS
    if unknown:
        raise SchemaError(f"unknown scene fields {sorted(unknown)}")
    return scene


def resolve_scene(args) -> dict:
    """Merge the scene file with command-line flags (flags win)."""
    scene = load_scene(args.scene)
    for key in SCENE_KEYS:
        if key in scene and not isinstance(scene[key], dict):
            raise SchemaError(f"scene field {key!r} must be an object")
    geometry = dict(scene.get("geometry", {}))
    obj = dict(scene.get("object", {}))
    partition = dict(scene.get("partition", {}))
    quad = dict(scene.get("quad", {}))
    options = dict(scene.get("options", {}))

    if args.geometry:
        geometry["name"] = args.geometry
    geometry["params"] = {**geometry.get("params", {}), **_parse_pairs(args.param)}
    if args.map:
        obj["map"] = args.map
    obj["params"] = {**obj.get("params", {}), **_parse_pairs(args.map_param)}

    if args.resolution:
        partition["resolution"] = _parse_ints(args.resolution)
    if args.n_samples is not None:
        partition["n_samples"] = args.n_samples
    if args.breakpoints:
        partition["breakpoints"] = _parse_floats(args.breakpoints)
    if args.labels:
        partition["labels"] = _parse_ints(args.labels)

    for name in ("order", "tol", "max_depth"):
        value = getattr(args, name)
        if value is not None:
            quad["order_1d" if name == "order" else name] = value
    if args.no_adaptive:
        quad["adaptive"] = False

    for name in ("seed", "trials", "tolerance", "h", "n_points", "expect", "threads"):
        value = getattr(args, name)
        if value is not None:
            options[name] = value
    if args.point:
        options["point"] = _parse_floats(args.point)
    if args.vector:
        options["vector"] = _parse_floats(args.vector)
    if args.vector2:
        options["vector2"] = _parse_floats(args.vector2)
    if args.charts:
        options["charts"] = _parse_ints(args.charts)
    if args.mutant:
        options["mutant"] = True
    options.setdefault("seed", 0)
    if "threads" not in options and os.environ.get("HOLONOMY_THREADS"):
        try:
            options["threads"] = int(os.environ["HOLONOMY_THREADS"])
        except ValueError as exc:
            raise SchemaError("HOLONOMY_THREADS must be an integer") from exc
    options["tolerance"] = float(options.get("tolerance", DEFAULT_TOLERANCE.get(args.command, 1e-6)))

    if "name" not in geometry:
        raise SchemaError("no geometry given (use --geometry or a scene file)")
    if geometry["name"] not in CATALOG:
        raise SchemaError(f"unknown geometry {geometry['name']!r}; choose from {sorted(CATALOG)}")
    allowed = set(QuadConfig().to_dict())
    if set(quad) - allowed:
        raise SchemaError(f"unknown quadrature fields {sorted(set(quad) - allowed)}")
    return {"command": args.command, "geometry": geometry, "object": obj, "partition": partition,
            "quad": quad, "options": options}


def quad_config(scene) -> QuadConfig:
    try:
        return QuadConfig().with_(**scene["quad"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad quadrature settings: {exc}") from exc


def _entry(scene):
    g = scene["geometry"]
    return get_entry(g["name"], **g.get("params", {}))


def _map(entry, scene, kinds):
    obj = scene["object"]
    if "map" not in obj:
        raise SchemaError(f"no map given (use --map); {entry.name} offers {sorted(entry.maps)}")
    try:
        spec = entry.map(obj["map"], **obj.get("params", {}))
    except TypeError as exc:
        raise SchemaError(f"bad map parameters: {exc}") from exc
    except GeometryError as exc:
        raise SchemaError(str(exc)) from exc
    if spec.kind not in kinds:
        raise SchemaError(f"map {obj['map']!r} is a {spec.kind}; this command needs one of {kinds}")
    return spec


def _resolution(scene, default):
    res = scene["partition"].get("resolution", default)
    res = [int(r) for r in (res if isinstance(res, (list, tuple)) else [res])]
    return tuple(res * 2) if len(res) == 1 else tuple(res)


def _bundle_of(entry):
    if entry.bundle is None:
        raise SchemaError(f"{entry.name} carries no bundle data")
    return entry.bundle


def _gerbe_of(entry):
    if entry.gerbe is None:
        raise SchemaError(f"{entry.name} carries no gerbe data")
    return entry.gerbe


def _expect(result: dict, scene, phase: Phase) -> bool:
    """Compare against an expected phase when one was requested."""
    expected = scene["options"].get("expect")
    if expected is None:
        return True
    defect = phase.distance(Phase(float(expected)))
    result["expected"] = float(expected)
    result["expected_defect"] = defect
    return defect <= scene["options"]["tolerance"]


# ---------------------------------------------------------------------------
# commands; each returns (result dict, passed)


def cmd_check(scene):
    entry = _entry(scene)
    tol = scene["options"]["tolerance"]
    out, ok = {}, True
    if entry.bundle is not None:
        rep = check_bundle_cocycle(entry.bundle, tol)
        out["bundle"] = rep.to_dict()
        ok &= rep.passed
    if entry.gerbe is not None:
        rep = check_gerbe_cocycle(entry.gerbe, tol)
        out["gerbe"] = rep.to_dict()
        ok &= rep.passed
    return out, ok


def cmd_transport(scene):
    entry = _entry(scene)
    data = _bundle_of(entry)
    quad = quad_config(scene)
    spec = _map(entry, scene, ("path", "loop", "point"))
    part = scene["partition"]
    n_samples = int(part.get("n_samples", 200))
    if spec.kind == "loop":
        if "breakpoints" in part:
            T = LabeledLoopPartition(part["breakpoints"], part.get("labels", []))
        else:
            T = build_loop_partition(spec.fn, entry.cover, n_samples)
        phase = bundle.z_loop_from_bundle(data, spec.fn, T, quad)
    else:
        a, b = spec.interval
        if "breakpoints" in part:
            T = LabeledPathPartition(part["breakpoints"], part.get("labels", []))
        elif spec.kind == "point":
            y = spec.fn(np.array([a]))
            T = constant_partition(a, b, int(np.argmax(entry.cover.margins(y)[0])))
        else:
            T = build_path_partition(spec.fn, entry.cover, n_samples, a, b)
        phase = bundle.z_path_from_bundle(data, spec.fn, T, quad)
    result = {"kind": spec.kind, "partition": T.to_dict(), **phase.to_dict()}
    return result, _expect(result, scene, phase)


def _surface_partition(entry, spec, scene, default=(8, 8)):
    part = scene["partition"]
    res = _resolution(scene, default)
    labels = part.get("labels")
    return build_surface_partition(spec.fn, spec.domain, entry.cover, res, labels=labels), res


def cmd_surface(scene):
    entry = _entry(scene)
    data = _gerbe_of(entry)
    spec = _map(entry, scene, ("surface",))
    T, res = _surface_partition(entry, spec, scene)
    so = gerbe.SurfaceObject(spec.fn, T)
    terms = gerbe.surface_terms(data, so, quad_config(scene))
    phase = gerbe.z_surface(data, so, quad_config(scene))
    result = {"kind": "surface", "resolution": list(res), "partition": T.to_dict(),
              "terms": {k: terms[k] for k in ("vertices", "edges", "faces", "n_vertex_factors",
                                                "n_edge_factors")},
              **phase.to_dict()}
    return result, _expect(result, scene, phase)


def cmd_stokes(scene):
    entry = _entry(scene)
    data = _bundle_of(entry)
    spec = _map(entry, scene, ("surface",))
    T, res = _surface_partition(entry, spec, scene)
    rep = bundle.stokes_check_1d(data, spec.fn, T, quad_config(scene))
    result = {"resolution": list(res), "partition": T.to_dict(), **rep.to_dict()}
    return result, rep.defect <= scene["options"]["tolerance"]


def cmd_stokes2(scene):
    entry = _entry(scene)
    data = _gerbe_of(entry)
    spec = _map(entry, scene, ("volume",))
    n = _resolution(scene, (8,))[0]
    lower, upper = spec.interval
    labels = scene["partition"].get("labels")
    V = build_volume_partition(spec.fn, entry.cover, n, lower, upper, labels=labels)
    rep = gerbe.stokes_check_2d(data, spec.fn, V, quad_config(scene))
    result = {"resolution": n, "partition": V.to_dict(), **rep.to_dict()}
    return result, rep.defect <= scene["options"]["tolerance"]


def _points(entry, scene):
    opts = scene["options"]
    if "point" in opts:
        return [np.asarray(opts["point"], dtype=float)]
    if entry.random_point is None:
        raise SchemaError(f"{entry.name} has no point generator; pass --point")
    rng = np.random.default_rng(int(opts["seed"]))
    return [np.asarray(entry.random_point(rng), dtype=float) for _ in range(int(opts.get("n_points", 20)))]


def _chart_sets(cover, y, size, scene):
    charts = scene["options"].get("charts")
    m = cover.margins(y[None])[0]
    inside = [int(c) for c in np.where(m > 0)[0]]
    if charts is not None:
        wanted = [int(c) for c in charts[:size]]
        return [tuple(wanted)] if all(c in inside for c in wanted) else []
    return list(combinations(inside, size))


def _vectors(cover, y, scene, count):
    opts = scene["options"]
    given = [opts.get("vector"), opts.get("vector2")][:count]
    frame = cover.frame(y[None])[0]
    return [np.asarray(g, dtype=float) if g is not None else frame[k] for k, g in enumerate(given)]


def cmd_reconstruct(scene):
    entry = _entry(scene)
    data = _bundle_of(entry)
    quad = quad_config(scene)
    h = float(scene["options"].get("h", 1e-4))
    Z = bundle.bundle_functor(data, quad)
    cover = entry.cover
    rows, g_res, a_res, skipped = [], 0.0, 0.0, 0
    for y in _points(entry, scene):
        for i, j in _chart_sets(cover, y, 2, scene):
            rec = bundle.reconstruct_g(Z, y, i, j)
            err = rec.distance(Phase(float(data.transition_angle(i, j, y[None])[0])))
            g_res = max(g_res, err)
            rows.append({"point": y.tolist(), "charts": [i, j], "g": rec.to_dict(), "residual": err})
        (v,) = _vectors(cover, y, scene, 1)
        for (j,) in _chart_sets(cover, y, 1, scene):
            try:
                rec = bundle.reconstruct_A(Z, j, y, v, h)
            except GeometryError:
                skipped += 1
                continue
            err = abs(rec - float(data.connection(j, y[None], v[None])[0]))
            a_res = max(a_res, err)
            rows.append({"point": y.tolist(), "charts": [j], "vector": v.tolist(), "A": rec, "residual": err})
    tol = scene["options"]["tolerance"]
    result = {"h": h, "max_residual_g": g_res, "max_residual_A": a_res, "skipped": skipped, "values": rows}
    return result, g_res <= 1e-9 and a_res <= tol


def cmd_reconstruct_gerbe(scene):
    entry = _entry(scene)
    data = _gerbe_of(entry)
    quad = quad_config(scene)
    h = float(scene["options"].get("h", 1e-4))
    Z = gerbe.gerbe_functor(data, quad)
    cover = entry.cover
    rows, res, skipped = [], {"g3": 0.0, "A2": 0.0, "F": 0.0}, 0
    for y in _points(entry, scene):
        for i, j, k in _chart_sets(cover, y, 3, scene):
            rec = gerbe.reconstruct_g3(Z, y[None], i, j, k)
            err = rec.distance(Phase(float(data.transition_angle(i, j, k, y[None])[0])))
            res["g3"] = max(res["g3"], err)
            rows.append({"point": y.tolist(), "charts": [i, j, k], "g3": rec.to_dict(), "residual": err})
        v, w = _vectors(cover, y, scene, 2)
        for j, k in _chart_sets(cover, y, 2, scene):
            try:
                rec = gerbe.reconstruct_A2(Z, j, k, y[None], v[None], h)
            except GeometryError:
                skipped += 1
                continue
            err = abs(rec - float(data.connection(j, k, y[None], v[None])[0]))
            res["A2"] = max(res["A2"], err)
            rows.append({"point": y.tolist(), "charts": [j, k], "A2": rec, "residual": err})
        for (j,) in _chart_sets(cover, y, 1, scene):
            try:
                rec = gerbe.reconstruct_F(Z, j, y[None], v[None], w[None], h)
            except GeometryError:
                skipped += 1
                continue
            err = abs(rec - float(data.curving(j, y[None], v[None], w[None])[0]))
            res["F"] = max(res["F"], err)
            rows.append({"point": y.tolist(), "charts": [j], "F": rec, "residual": err})
    tol = scene["options"]["tolerance"]
    result = {"h": h, **{f"max_residual_{k}": v for k, v in res.items()}, "skipped": skipped, "values": rows}
    return result, res["g3"] <= 1e-9 and res["A2"] <= tol and res["F"] <= tol


def cmd_axioms(scene):
    entry = _entry(scene)
    data = _bundle_of(entry)
    opts = scene["options"]
    make = bundle.broken_bundle_functor if opts.get("mutant") else bundle.bundle_functor
    if entry.random_path is None:
        raise SchemaError(f"{entry.name} has no random path generator")
    rep = axioms.axiom_suite_1d(make(data, quad_config(scene)), entry.cover, int(opts.get("trials", 50)),
                                opts["tolerance"], int(opts["seed"]), entry.random_path, entry.random_point)
    return rep.to_dict(), rep.passed


def cmd_axioms2(scene):
    entry = _entry(scene)
    data = _gerbe_of(entry)
    opts = scene["options"]
    make = gerbe.broken_gerbe_functor if opts.get("mutant") else gerbe.gerbe_functor
    if entry.random_surface is None or entry.random_loop is None:
        raise SchemaError(f"{entry.name} has no random surface / loop generators")
    res = _resolution(scene, (8, 8))
    rep = axioms.axiom_suite_2d(make(data, quad_config(scene)), entry.cover, int(opts.get("trials", 30)),
                                opts["tolerance"], int(opts["seed"]), entry.random_surface, entry.random_loop,
                                resolution=res)
    return rep.to_dict(), rep.passed


HANDLERS = {"check": cmd_check, "transport": cmd_transport, "surface": cmd_surface, "stokes": cmd_stokes,
            "stokes2": cmd_stokes2, "reconstruct": cmd_reconstruct, "reconstruct-gerbe": cmd_reconstruct_gerbe,
            "axioms": cmd_axioms, "axioms2": cmd_axioms2}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holonomy", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scene", help="JSON scene file; flags override its fields")
    parser.add_argument("--geometry", help=f"catalog entry: {', '.join(sorted(CATALOG))}")
    parser.add_argument("--param", action="append", metavar="KEY=VALUE", help="geometry parameter")
    parser.add_argument("--map", help="named map of the geometry")
    parser.add_argument("--map-param", action="append", metavar="KEY=VALUE", help="map parameter")
    parser.add_argument("--resolution", help="partition resolution, e.g. 8 or 8,16")
    parser.add_argument("--n-samples", type=int, help="samples used to build path / loop partitions")
    parser.add_argument("--breakpoints", help="explicit breakpoints (paths) or angles (loops)")
    parser.add_argument("--labels", help="explicit labels, comma separated")
    parser.add_argument("--order", type=int, help="Gauss-Legendre order for 1-D integrals")
    parser.add_argument("--tol", type=float, help="adaptive quadrature tolerance")
    parser.add_argument("--max-depth", type=int, help="maximum adaptive bisection depth")
    parser.add_argument("--no-adaptive", action="store_true", help="single refinement level, no adaptivity")
    parser.add_argument("--seed", type=int, help="seed of the random generator (default 0)")
    parser.add_argument("--trials", type=int, help="number of random trials")
    parser.add_argument("--tolerance", type=float, help="pass / fail tolerance of the command")
    parser.add_argument("--expect", type=float, help="expected phase for transport / surface")
    parser.add_argument("--point", help="ambient point, comma separated")
    parser.add_argument("--n-points", type=int, help="number of random points to reconstruct at")
    parser.add_argument("--vector", help="tangent vector, comma separated")
    parser.add_argument("--vector2", help="second tangent vector (curving reconstruction)")
    parser.add_argument("--charts", help="chart indices, comma separated")
    parser.add_argument("--h", type=float, help="finite-difference step for reconstruction")
    parser.add_argument("--mutant", action="store_true", help="run the axiom suite on a deliberately broken functor")
    parser.add_argument("--threads", type=int, help="worker cap (evaluation is single-threaded)")
    return parser


def run(argv=None) -> tuple:
    """Parse arguments and execute; returns (exit code, report dict)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    scene = None
    try:
        scene = resolve_scene(args)
        result, passed = HANDLERS[args.command](scene)
        report = {"scene": scene, "result": result, "passed": bool(passed)}
        return (EXIT_OK if passed else EXIT_TOLERANCE), report
    except (SchemaError, BadParameter) as exc:
        code, kind, err = EXIT_SCHEMA, "schema", exc
    except GeometryError as exc:
        code, kind, err = EXIT_GEOMETRY, "geometry", exc
    except NumericalError as exc:
        code, kind, err = EXIT_NUMERICAL, "numerical", exc
    return code, {"scene": scene, "error": {"kind": kind, "type": type(err).__name__, "message": str(err)},
                  "passed": False}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def main(argv=None) -> int:
    code, report = run(argv)
    json.dump(_jsonable(report), sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
