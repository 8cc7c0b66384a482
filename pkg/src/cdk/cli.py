"""Command-line front end: ``cdk solve|oracle|beam|classify <file>``.

Exit codes: 0 converged global minimum (or oracle MATCH), 1 oracle
MISMATCH, 2 no interior dual stationary point (the hard case), 3 solver
failure or any other non-certified outcome, 64 input error, 65 oracle
refused.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from importlib import resources

import jsonschema
import numpy as np

from . import beam as beam_mod
from .core import (
    CanonicalFunction,
    QuadraticCanonicalProblem,
    SolveReport,
    TrialityKind,
    classify_triality,
    dual_state,
    eval_primal,
    primal_gradient,
)
from .errors import CDKError, InvalidInput, Refused
from .problems import bqp, distance_geometry, double_well, dynamics, maxcut, oracles, two_surface
from .solvers import SolverOptions, linear_perturbation, multistart

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_HARD_CASE = 2
EXIT_FAILED = 3
EXIT_INPUT = 64
EXIT_REFUSED = 65

class InputError(Exception):
    pass


def _schema():
    text = resources.files("cdk").joinpath("problem_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _check_finite(obj, path="$"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise InputError(f"non-finite number at {path}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


def validate_document(doc):
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "document"
        raise InputError(f"schema error at {where}: {exc.message}") from None
    _check_finite(doc)
    if doc["family"] not in doc:
        raise InputError(f"family tag {doc['family']!r} has no matching parameter block")
    return doc


def load_document(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    return validate_document(doc)


def digest(doc):
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def solver_options(doc, args) -> SolverOptions:
    opts = dict(doc.get("solver", {}))
    if getattr(args, "seed", None) is not None:
        opts["seed"] = args.seed
    return SolverOptions(**opts)


# ---------------------------------------------------------------------------
# problem construction


def _dw_spec(block):
    return double_well.DoubleWellSpec(block["n"], block["alpha"], block["lam"], block["f"])


def _bqp_spec(block):
    if "generate" in block:
        g = block["generate"]
        return bqp.random_bqp(g["n"], g["seed"], g.get("f_scale", 1.0))
    return bqp.BooleanQPSpec(np.array(block["Q"]), np.array(block["f"]))


def _mc_spec(block):
    if "generate" in block:
        g = block["generate"]
        return maxcut.random_graph(g["n"], g["seed"], g.get("density", 0.5))
    return maxcut.MaxCutSpec(np.array(block["W"]))


def _dg_spec(block):
    return distance_geometry.DistanceGeometrySpec(
        block["dim"], block["n_sensors"], tuple(map(tuple, block.get("anchors", ()))),
        tuple(map(tuple, block["edges"])), block.get("gauge"))


def _dyn_spec(block):
    kw = {k: v for k, v in block.items() if k != "observations"}
    obs = {int(k): v for k, v in block.get("observations", {}).items()}
    return dynamics.DynamicsSpec(observations=obs, **kw)


def _ts_spec(block, args):
    kw = dict(block)
    if getattr(args, "perturb", None) is not None:
        kw["k"] = 1.0 / args.perturb if args.perturb else None
    return two_surface.TwoSurfaceSpec(**kw)


def _raw_problem(block):
    m = len(block["c"])
    ind = np.array(block.get("indicator", [False] * m), dtype=bool)
    phi = CanonicalFunction(np.array(block["weights"], dtype=float), ind)
    n = len(block["f"])
    H = np.array(block["H"], dtype=float).reshape(m, n, n) if m else np.zeros((0, n, n))
    b = np.array(block["b"], dtype=float).reshape(m, n) if m else np.zeros((0, n))
    return QuadraticCanonicalProblem(A=np.array(block["A"]), f=np.array(block["f"]), H=H, b=b,
                                     c=np.array(block["c"], dtype=float), phi=phi, name="raw_canonical")


def build_problem(doc, args) -> QuadraticCanonicalProblem:
    fam = doc["family"]
    block = doc[fam]
    if fam == "double_well":
        p = double_well.build_double_well(_dw_spec(block))
    elif fam == "boolean_qp":
        p = bqp.build_boolean_qp(_bqp_spec(block))
    elif fam == "max_cut":
        eps = block.get("eps", 0.0)
        if getattr(args, "perturb", None) is not None:
            eps = args.perturb
        return maxcut.build_max_cut(_mc_spec(block), eps)
    elif fam == "distance_geometry":
        p = distance_geometry.build_distance_geometry(_dg_spec(block))
    elif fam == "dynamics_lsq":
        p = dynamics.build_dynamics_least_squares(_dyn_spec(block))
    elif fam == "raw_canonical":
        p = _raw_problem(block)
    else:
        raise InputError(f"family {fam!r} has no single canonical problem")
    pert = doc.get("perturbation")
    magnitude = pert["magnitude"] if pert else 0.0
    if getattr(args, "perturb", None) is not None:
        magnitude = args.perturb
    if magnitude:
        direction = np.array(pert["direction"]) if pert and "direction" in pert else np.eye(p.n)[0]
        if direction.shape != (p.n,):
            raise InputError("perturbation direction has the wrong length")
        p = linear_perturbation(p, direction, magnitude)
    return p


def _beam_setup(doc, args):
    block = dict(doc["beam"])
    if getattr(args, "elements", None) is not None:
        block["elements"] = args.elements
        validate_document({**doc, "beam": block})
    mesh = beam_mod.BeamMesh(block["elements"])
    kw = {k: block[k] for k in ("L", "EI", "alphaE", "E", "f", "bc") if k in block}
    if "lam" in block:
        model = beam_mod.BeamModel(lam=block["lam"], **kw)
    else:
        model = beam_mod.default_model(mesh, factor=block.get("lam_factor", 2.0), **kw)
    return model, mesh


# ---------------------------------------------------------------------------
# records


def _num(x):
    return float(x)


def _vec(v):
    return [float(t) for t in np.asarray(v, dtype=float).reshape(-1)]


def report_record(rep: SolveReport, doc) -> dict:
    rec = {
        "digest": digest(doc),
        "family": doc["family"],
        "route": rep.route,
        "status": rep.status,
        "primal": _vec(rep.primal),
        "dual": _vec(rep.dual),
        "pi": _num(rep.pi),
        "pi_dual": _num(rep.pi_dual),
        "gap": _num(rep.gap),
        "triality": {"class": rep.triality.kind.value, "margin": _num(rep.triality.margin)},
        "residuals": {"primal": _num(rep.primal_residual), "dual": _num(rep.dual_residual)},
        "iterations": int(rep.iterations),
        "flags": sorted(rep.flags),
    }
    if rep.branches:
        rec["branches"] = [{"dual": _vec(b.dual), "primal": _vec(b.primal), "pi": _num(b.pi),
                            "pi_dual": _num(b.pi_dual), "class": b.triality.kind.value}
                           for b in rep.branches]
    if "branch" in rep.extra:
        rec["branch"] = rep.extra["branch"]
        rec["morse_index"] = int(rep.extra["morse_index"])
    return rec


def two_surface_record(sol, doc, certified) -> dict:
    return {
        "digest": digest(doc),
        "family": "two_surface",
        "route": "analytic",
        "status": "converged",
        "primal": _vec(np.concatenate([sol.x, sol.y])),
        "dual": [sol.lam, sol.mu, sol.s],
        "pi": sol.objective,
        "pi_dual": sol.pi_dual,
        "gap": sol.gap,
        "triality": {"class": certified, "margin": float(sol.definiteness.margin)},
        "residuals": {"primal": sol.stationarity, "g": sol.g_residual, "h": sol.h_residual},
        "iterations": 0,
        "flags": [],
    }


def exit_code_for(rep: SolveReport) -> int:
    """0 for a certified global minimum, 2 for the hard case, 3 otherwise."""
    if "NoInteriorStationaryPoint" in rep.flags or rep.triality.kind is TrialityKind.BOUNDARY:
        return EXIT_HARD_CASE
    if rep.converged and rep.triality.kind is TrialityKind.GLOBAL_MIN:
        return EXIT_OK
    return EXIT_FAILED


def _flatten(rec, prefix=""):
    rows = []
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flatten(v, key + "."))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                rows.extend(_flatten(item, f"{key}.{i}."))
        elif isinstance(v, list):
            if not v:
                rows.append((key, ""))
            for i, item in enumerate(v):
                rows.append((f"{key}.{i}", item))
        else:
            rows.append((key, v))
    return rows


def _cell(v):
    return repr(v) if isinstance(v, float) else str(v)


def emit(rec, fmt, out):
    if fmt == "json":
        out.write(json.dumps(rec, sort_keys=True) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(rec):
        w.writerow([k, _cell(v)])


# ---------------------------------------------------------------------------
# commands


def _timed(fn, args):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def cmd_solve(args, out) -> int:
    doc = load_document(args.file)
    fam = doc["family"]
    if fam == "two_surface":
        sols, wall = _timed(lambda: two_surface.solve_two_surface(_ts_spec(doc[fam], args)), args)
        best = sols[0]
        kind = best.definiteness.kind.value
        certified = "GlobalMin" if kind == "PositiveDefinite" else ("Boundary" if "Singular" in kind
                                                                     else "Unclassified")
        rec = two_surface_record(best, doc, certified)
        rec["alternatives"] = len(sols) - 1
        code = {"GlobalMin": EXIT_OK, "Boundary": EXIT_HARD_CASE}.get(certified, EXIT_FAILED)
    elif fam == "beam":
        model, mesh = _beam_setup(doc, args)
        perturb = args.perturb if args.perturb is not None else 1e-6
        reps, wall = _timed(lambda: beam_mod.solve_three_branches(model, mesh, solver_options(doc, args),
                                                                  perturb=perturb), args)
        rec = report_record(reps[0], doc)
        code = exit_code_for(reps[0])
    else:
        p = build_problem(doc, args)
        rep, wall = _timed(lambda: multistart(p, solver_options(doc, args)), args)
        rec = report_record(rep, doc)
        code = exit_code_for(rep)
    if not args.deterministic:
        rec["wall_time"] = wall
    emit(rec, args.format, out)
    return code


def _dw_oracle(spec: double_well.DoubleWellSpec):
    if spec.n == 1:
        f = spec.f[0]

        def energy(x):
            return double_well.double_well_energy(spec, np.atleast_1d(x))

        R = 2.0 * (1.0 + math.sqrt(2.0 * abs(spec.lam)) + (abs(f) / spec.alpha) ** (1.0 / 3.0))
        x, v = oracles.grid_minimize_1d(energy, -R, R)
        return np.array([x]), v
    p = double_well.build_double_well(spec)
    return _descent_oracle(p, scale=1.0 + math.sqrt(2.0 * abs(spec.lam)))


def _descent_oracle(p, starts=(), scale=1.0, count=16, seed=0):
    rng = np.random.default_rng(seed)
    pts = list(starts) + [rng.standard_normal(p.n) * scale for _ in range(count)]
    x, v = oracles.multistart_descent(lambda x: eval_primal(p, x), lambda x: primal_gradient(p, x), pts)
    return x, v


def cmd_oracle(args, out) -> int:
    doc = load_document(args.file)
    fam = doc["family"]
    block = doc[fam]
    extra = {}
    if fam == "two_surface":
        spec = _ts_spec(block, args)
        sols = two_surface.solve_two_surface(spec)
        solver_value = sols[0].objective
        oracle_value, ox, oy = two_surface.polar_grid_oracle(spec)
        oracle_point = np.concatenate([ox, oy])
        solver_point = np.concatenate([sols[0].x, sols[0].y])
    elif fam == "beam":
        model, mesh = _beam_setup(doc, args)
        reps = beam_mod.solve_three_branches(model, mesh, solver_options(doc, args))
        p = beam_mod.assemble_beam(model, mesh)
        starts = [r.primal for r in reps]
        scale = 1.0 + max(float(np.abs(r.primal).max()) for r in reps)
        oracle_point, oracle_value = _descent_oracle(p, starts + [np.zeros(p.n)], scale=scale, count=16)
        solver_value, solver_point = reps[0].pi, reps[0].primal
    else:
        if fam == "boolean_qp":
            spec = _bqp_spec(block)
            oracle_point, oracle_value = oracles.brute_force_binary(spec.Q, spec.f, "01")
            p = build_problem(doc, args)
        elif fam == "max_cut":
            spec = _mc_spec(block)
            oracle_point, cut = maxcut.max_cut_oracle(spec)
            p = build_problem(doc, args)
            # compare in the unperturbed energy 1/4 x'Wx
            oracle_value = 0.25 * float(oracle_point @ spec.W @ oracle_point)
            extra["oracle_cut"] = cut
        elif fam == "double_well":
            p = build_problem(doc, args)
            oracle_point, oracle_value = _dw_oracle(_dw_spec(block)) if "perturbation" not in doc \
                and args.perturb is None else _descent_oracle(p)
        else:
            p = build_problem(doc, args)
            if p.phi.indicator.any():
                raise InputError("no oracle for constrained raw problems")
            oracle_point, oracle_value = _descent_oracle(p, p.initial_guesses, count=16)
        rep = multistart(p, solver_options(doc, args))
        solver_point = rep.primal
        solver_value = rep.pi
        if fam == "max_cut":
            solver_value = 0.25 * float(rep.primal @ spec.W @ rep.primal)
            extra["solver_cut"] = maxcut.cut_value(spec.W, rep.primal)
    abs_gap = abs(solver_value - oracle_value)
    rel_gap = abs_gap / max(1.0, abs(oracle_value))
    match = abs_gap <= args.tol * (1.0 + abs(oracle_value))
    rec = {
        "digest": digest(doc),
        "family": fam,
        "solver": {"value": float(solver_value), "primal": _vec(solver_point)},
        "oracle": {"value": float(oracle_value), "primal": _vec(oracle_point)},
        "abs_gap": float(abs_gap),
        "rel_gap": float(rel_gap),
        "tol": float(args.tol),
        "verdict": "MATCH" if match else "MISMATCH",
        **extra,
    }
    emit(rec, args.format, out)
    return EXIT_OK if match else EXIT_MISMATCH


def cmd_beam(args, out) -> int:
    doc = load_document(args.file)
    if doc["family"] != "beam":
        raise InputError("the beam command needs a beam scenario")
    model, mesh = _beam_setup(doc, args)
    perturb = args.perturb if args.perturb is not None else 1e-6
    reps = beam_mod.solve_three_branches(model, mesh, solver_options(doc, args), perturb=perturb)
    tables = [(r.extra["branch"], beam_mod.export_deflection(r, model, mesh)) for r in reps]
    if args.format == "json":
        rec = {
            "digest": digest(doc),
            "lam": model.lam,
            "lam_c": reps[0].extra["lam_c"],
            "branches": [{**report_record(r, doc),
                          "deflection": [[float(x), float(w)] for x, w in tab]}
                         for r, (_, tab) in zip(reps, tables)],
        }
        out.write(json.dumps(rec, sort_keys=True) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "chi", "branch"])
        for name, tab in tables:
            for x, v in tab:
                w.writerow([repr(float(x)), repr(float(v)), name])
        w.writerow([])
        w.writerow(["branch", "pi", "gap", "class", "morse_index", "route"])
        for r in reps:
            w.writerow([r.extra["branch"], repr(r.pi), repr(r.gap), r.triality.kind.value,
                        r.extra["morse_index"], r.route])
    if not all(r.converged and r.primal_residual <= 1e-6 * (1 + abs(r.pi)) for r in reps):
        return EXIT_FAILED
    return EXIT_OK


def _read_point(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = text.split()
    if isinstance(obj, dict):
        obj = obj.get("dual", obj.get("S"))
    try:
        S = np.atleast_1d(np.asarray(obj, dtype=float))
    except (TypeError, ValueError):
        raise InputError("dual point must be a list of numbers") from None
    if S.ndim != 1 or not np.all(np.isfinite(S)):
        raise InputError("dual point must be a finite vector")
    return S


def cmd_classify(args, out) -> int:
    doc = load_document(args.file)
    if doc["family"] == "beam":
        model, mesh = _beam_setup(doc, args)
        p = beam_mod.assemble_beam(model, mesh)
    else:
        p = build_problem(doc, args)
    S = _read_point(args.point)
    if S.shape[0] != p.m:
        raise InputError(f"dual point has length {S.shape[0]}, problem has {p.m} measures")
    tc = classify_triality(p, S)
    state = dual_state(p, S, allow_boundary=True)
    rec = {
        "digest": digest(doc),
        "dual": _vec(S),
        "class": tc.kind.value,
        "margin": float(tc.margin),
        "pi_dual": float(state.value),
        "grad_norm": float(np.linalg.norm(state.grad)),
        "primal": _vec(state.chi),
    }
    emit(rec, args.format, out)
    return EXIT_OK


def make_parser():
    ap = argparse.ArgumentParser(prog="cdk", description="Canonical duality solvers.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file", help="problem file (JSON)")
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        sp.add_argument("--tol", type=float, default=1e-6, help="oracle agreement tolerance")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--elements", type=int, default=None, help="beam mesh override")
        sp.add_argument("--perturb", type=float, default=None, help="linear perturbation magnitude")
        sp.add_argument("--deterministic", action="store_true", help="omit wall-clock fields")

    for name, fn in (("solve", cmd_solve), ("oracle", cmd_oracle), ("beam", cmd_beam),
                     ("classify", cmd_classify)):
        sp = sub.add_parser(name)
        common(sp)
        if name == "classify":
            sp.add_argument("point", help="dual point: JSON list, {\"dual\": [...]} or whitespace numbers")
        sp.set_defaults(func=fn)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.format is None:
        args.format = "csv" if args.command == "beam" else "json"
    if args.seed is not None and args.seed < 0:
        err.write("cdk: --seed must be nonnegative\n")
        return EXIT_INPUT
    if not args.tol > 0:
        err.write("cdk: --tol must be positive\n")
        return EXIT_INPUT
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (InputError, InvalidInput, ValueError) as exc:
        err.write(f"cdk: {exc}\n")
        return EXIT_INPUT
    except Refused as exc:
        err.write(f"cdk: refused: {exc}\n")
        return EXIT_REFUSED
    except CDKError as exc:
        err.write(f"cdk: {type(exc).__name__}: {exc}\n")
        return EXIT_FAILED
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
