"""Command-line interface: dataset files in, verdict reports out.

Exit codes: 0 satisfied, 1 negative verdict, 2 input or usage error.
Observation positions in reports (witness cycles, permutations) are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import fields as fl
from . import generators as gen
from .core import Dataset, InputError
from .rationality import (
    DEFAULT_TOLERANCE,
    CapExceeded,
    Verdict,
    brute_force_cycle_check,
    check_garp,
    check_harp,
)
from .transport import (
    TransportInstance,
    cost_decomposition_check,
    diagonal_report,
    solve_discrete_ot,
)
from .utility import (
    DEFAULT_SAMPLES,
    AfriatInfeasible,
    AfriatUtility,
    afriat_from_homogeneous,
    afriat_solve,
    build_homogeneous_utility,
    verify_rationalization,
)

__all__ = ["main", "parse_dataset", "dump_dataset", "write_dataset", "load_instance", "DEFAULT_SEED"]

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2
DEFAULT_SEED = 0
MACHINE_DIGITS = 12
HUMAN_DIGITS = 6

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class CommandError(Exception):
    """Raised inside a command to produce an exit-2 report."""


# ---------------------------------------------------------------- input files


def _number(text: str, where: str) -> float:
    t = text.strip()
    if not _NUMBER.match(t):
        raise InputError(f"{where}: not a decimal number: {text!r}")
    value = float(t)
    if not math.isfinite(value):
        raise InputError(f"{where}: value out of range: {text!r}")
    if value <= 0:
        raise InputError(f"{where}: value must be strictly positive, got {text.strip()}")
    return value


def _finish(ids: list[str], q: list[list[float]], p: list[list[float]]) -> Dataset:
    if not ids:
        raise InputError("dataset has no observations")
    seen: dict[str, int] = {}
    for k, name in enumerate(ids):
        if name in seen:
            raise InputError(f"observation {k + 1}: duplicate id {name!r} (first used by observation {seen[name] + 1})")
        seen[name] = k
    return Dataset.from_arrays(np.array(q), np.array(p), ids)


def _parse_csv(text: str) -> Dataset:
    rows = list(csv.reader(io.StringIO(text, newline="")))
    while rows and not rows[-1]:
        rows.pop()
    if not rows:
        raise InputError("row 1: missing header")
    header = [h.strip() for h in rows[0]]
    width = len(header)
    if width < 3 or width % 2 == 0 or header[0] != "id":
        raise InputError(f"row 1: header must be id,q1..qm,p1..pm; got {','.join(header)!r}")
    m = (width - 1) // 2
    expected = ["id"] + [f"q{k}" for k in range(1, m + 1)] + [f"p{k}" for k in range(1, m + 1)]
    for col, (got, want) in enumerate(zip(header, expected), start=1):
        if got != want:
            raise InputError(f"row 1, column {col}: expected header {want!r}, got {got!r}")
    ids, qs, ps = [], [], []
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            raise InputError(f"row {r}: blank line inside data")
        if len(row) != width:
            raise InputError(f"row {r}: expected {width} columns, got {len(row)}")
        name = row[0].strip()
        if not name:
            raise InputError(f"row {r}, column 1 (id): empty id")
        vals = [_number(row[c], f"row {r}, column {c + 1} ({header[c]})") for c in range(1, width)]
        ids.append(name)
        qs.append(vals[:m])
        ps.append(vals[m:])
    return _finish(ids, qs, ps)


def _json_number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"{where}: expected a number, got {v!r}")
    return _number(repr(float(v)), where)


def _parse_json_dataset(doc: Any) -> Dataset:
    if not isinstance(doc, dict) or "observations" not in doc:
        raise InputError('expected an object with "dimension" and "observations"')
    obs = doc["observations"]
    if not isinstance(obs, list):
        raise InputError('"observations" must be a list')
    m = doc.get("dimension")
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise InputError(f'"dimension" must be a positive integer, got {m!r}')
    ids, qs, ps = [], [], []
    for k, rec in enumerate(obs, start=1):
        where = f"observation {k}"
        if not isinstance(rec, dict):
            raise InputError(f"{where}: expected an object")
        missing = {"id", "quantities", "prices"} - rec.keys()
        if missing:
            raise InputError(f"{where}: missing field(s) {sorted(missing)}")
        vecs = []
        for key in ("quantities", "prices"):
            vec = rec[key]
            if not isinstance(vec, list) or len(vec) != m:
                raise InputError(f"{where}, field {key}: expected {m} values")
            vecs.append([_json_number(v, f"{where}, field {key}[{j + 1}]") for j, v in enumerate(vec)])
        ids.append(str(rec["id"]))
        qs.append(vecs[0])
        ps.append(vecs[1])
    return _finish(ids, qs, ps)


def _detect_format(path: str, fmt: str | None) -> str:
    if fmt:
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix in (".csv", ".json"):
        return suffix[1:]
    raise InputError(f"{path}: cannot infer format from extension; use --input-format")


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not valid UTF-8") from exc


def _load_json(path: str) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def parse_dataset(path: str, fmt: str | None = None) -> Dataset:
    """Read a dataset from CSV or JSON; ``fmt`` defaults to the file extension."""
    kind = _detect_format(path, fmt)
    if kind == "csv":
        return _parse_csv(_read_text(path))
    return _parse_json_dataset(_load_json(path))


def load_instance(path: str, fmt: str | None = None) -> Dataset | TransportInstance:
    """A dataset, or for JSON files with ``sources`` a transport instance."""
    kind = _detect_format(path, fmt)
    if kind == "json":
        doc = _load_json(path)
        if isinstance(doc, dict) and "sources" in doc:
            try:
                return TransportInstance(
                    doc["sources"], doc.get("targets"), doc.get("source_weights"), doc.get("target_weights")
                )
            except (TypeError, ValueError) as exc:
                raise InputError(f"transport instance: {exc}") from exc
        return _parse_json_dataset(doc)
    return parse_dataset(path, kind)


def dump_dataset(data: Dataset, fmt: str) -> str:
    """Serialise with shortest round-trip floats, so parse and dump are inverse."""
    labels = data.labels
    if fmt == "csv":
        m = data.dimension
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id"] + [f"q{k}" for k in range(1, m + 1)] + [f"p{k}" for k in range(1, m + 1)])
        for i in range(data.n):
            w.writerow([labels[i]] + [repr(float(v)) for v in data.quantities[i]] + [repr(float(v)) for v in data.prices[i]])
        return buf.getvalue()
    rows = [
        json.dumps({"id": labels[i], "quantities": data.quantities[i].tolist(), "prices": data.prices[i].tolist()})
        for i in range(data.n)
    ]
    body = ",\n".join("    " + r for r in rows)
    return f'{{\n  "dimension": {data.dimension},\n  "observations": [\n{body}\n  ]\n}}\n'


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_dataset(data: Dataset, path: str, fmt: str | None = None) -> None:
    _atomic_write(path, dump_dataset(data, _detect_format(path, fmt)))


# ---------------------------------------------------------------- reports


def _round(x: Any, digits: int) -> Any:
    if isinstance(x, dict):
        return {k: _round(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v, digits) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist(), digits)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{digits}g}") + 0.0
    return x


def render_json(report: dict) -> str:
    return json.dumps(_round(report, MACHINE_DIGITS), sort_keys=True, indent=2) + "\n"


def _fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return "n/a" if not math.isfinite(float(x)) else f"{float(x) + 0.0:.{HUMAN_DIGITS}g}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if x is None:
        return "-"
    return str(x)


def _lines(report: dict, indent: str = "") -> list[str]:
    out = []
    for key, value in report.items():
        if isinstance(value, dict):
            out.append(f"{indent}{key}:")
            out.extend(_lines(value, indent + "  "))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            out.append(f"{indent}{key}:")
            for k, item in enumerate(value, start=1):
                out.append(f"{indent}  [{k}]")
                out.extend(_lines(item, indent + "    "))
        elif isinstance(value, list) and value and isinstance(value[0], (list, np.ndarray)):
            out.append(f"{indent}{key}:")
            out.extend(f"{indent}  {_fmt(row)}" for row in value)
        else:
            out.append(f"{indent}{key}: {_fmt(value)}")
    return out


def render_text(report: dict) -> str:
    head = report.get("result", "")
    return "\n".join(([head] if head else []) + _lines({k: v for k, v in report.items() if k != "result"})) + "\n"


def render(report: dict, fmt: str) -> str:
    return render_json(report) if fmt == "json" else render_text(report)


def _one_based(seq) -> list[int] | None:
    return None if seq is None else [int(i) + 1 for i in seq]


def _verdict_block(v: Verdict, data: Dataset) -> dict:
    d = v.to_dict()
    d["witness"] = _one_based(v.witness)
    d["witness_ids"] = None if v.witness is None else [data.labels[i] for i in v.witness]
    return d


# ---------------------------------------------------------------- commands


def _base(args, command: str, path: str | None) -> dict:
    out: dict[str, Any] = {"command": command, "tolerance": args.tolerance, "seed": args.seed}
    if path is not None:
        out["input"] = path
    return out


def run_check(args, path: str) -> tuple[int, dict]:
    data = parse_dataset(path, args.input_format)
    rep = _base(args, "check", path)
    rep.update(n=data.n, m=data.dimension)
    if args.method == "garp":
        v = check_garp(data, args.tolerance)
    elif args.method == "brute-force":
        try:
            v = brute_force_cycle_check(data, tolerance=args.tolerance)
        except CapExceeded as exc:
            raise CommandError(str(exc)) from exc
    else:
        v = check_harp(data, tolerance=args.tolerance)
    rep["verdict"] = _verdict_block(v, data)
    rep["result"] = "RATIONALIZABLE" if v.rationalizable else "VIOLATED"
    return (EXIT_OK if v.rationalizable else EXIT_VIOLATION), rep


def run_utility(args, path: str) -> tuple[int, dict]:
    data = parse_dataset(path, args.input_format)
    rep = _base(args, "utility", path)
    rep.update(n=data.n, m=data.dimension, ids=data.labels, model=args.model, verify_samples=args.verify_samples)
    harp = check_harp(data, tolerance=args.tolerance)
    if args.model == "homogeneous" or args.certificate == "homogeneous":
        if not harp.rationalizable:
            rep["verdict"] = _verdict_block(harp, data)
            rep["result"] = "NOT RATIONALIZABLE"
            return EXIT_VIOLATION, rep
        model = build_homogeneous_utility(data, tolerance=args.tolerance)
    if args.model == "homogeneous":
        rep["potentials"] = model.potentials
        rep["utility_at_data"] = model.values(data.quantities)
        check_model = model
    else:
        if args.certificate == "homogeneous":
            sol = afriat_from_homogeneous(model)
        else:
            try:
                sol = afriat_solve(data, tolerance=args.tolerance)
            except AfriatInfeasible as exc:
                rep["verdict"] = _verdict_block(exc.verdict, data)
                rep["result"] = "NOT RATIONALIZABLE"
                return EXIT_VIOLATION, rep
        rep["certificate"] = args.certificate
        rep["levels"] = sol.levels
        rep["multipliers"] = sol.multipliers
        rep["afriat_residual"] = sol.residual(data)
        rep["notes"] = list(sol.notes)
        check_model = AfriatUtility(sol, data)
        rep["utility_at_data"] = check_model.values(data.quantities)
    ver = verify_rationalization(check_model, data, args.verify_samples, args.tolerance, args.seed)
    rep["verification"] = ver.to_dict()
    rep["result"] = "RATIONALIZED" if ver.passed else "VERIFICATION FAILED"
    return (EXIT_OK if ver.passed else EXIT_VIOLATION), rep


def _instance_block(inst: TransportInstance) -> dict:
    k, l = inst.shape
    return {"sources": k, "targets": l, "uniform_square": bool(inst.is_uniform_square())}


def run_transport(args, path: str) -> tuple[int, dict]:
    obj = load_instance(path, args.input_format)
    rep = _base(args, "transport", path)
    inst = TransportInstance.from_dataset(obj) if isinstance(obj, Dataset) else obj
    rep["instance"] = _instance_block(inst)
    plan, duals = solve_discrete_ot(inst)
    dual_block = {
        "source_potentials": duals.phi,
        "target_potentials": duals.psi,
        "dual_value": duals.dual_value(inst),
        "feasibility_gap": duals.feasibility_gap(inst),
        "slackness_gap": duals.slackness_gap(plan, inst),
    }
    if args.mode == "solve":
        rep["optimal_value"] = plan.value
        rep["plan"] = plan.plan
        rep["marginal_error"] = plan.marginal_error(inst)
        rep["duals"] = dual_block
        rep["cost_decomposition_residual"] = cost_decomposition_check(plan, inst)
        rep["result"] = "SOLVED"
        return EXIT_OK, rep
    if isinstance(obj, Dataset):
        data = obj
    elif inst.is_uniform_square():
        data = Dataset.from_arrays(inst.sources, inst.targets)
    else:
        raise CommandError("--diagonal-check needs a dataset or a square instance with uniform weights")
    dr = diagonal_report(data, tolerance=args.tolerance)
    n = data.n
    rep["identity_value"] = dr.identity_value
    rep["optimal_value"] = dr.optimal_value
    rep["optimal_permutation"] = _one_based(dr.optimal_permutation)
    rep["diagonal_optimal"] = dr.diagonal_optimal
    rep["duals"] = dual_block
    rep["cost_decomposition_residual"] = cost_decomposition_check(plan, inst)
    rep["note"] = f"values are totals over the {n} pairs; the uniform coupling's value is total/{n}"
    rep["result"] = "DIAGONAL OPTIMAL" if dr.diagonal_optimal else "DIAGONAL NOT OPTIMAL"
    return (EXIT_OK if dr.diagonal_optimal else EXIT_VIOLATION), rep


def _float_list(text: str | None, what: str) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CommandError(f"{what}: expected comma-separated numbers, got {text!r}") from exc


def run_generate(args) -> tuple[int, dict, str | None]:
    rep = _base(args, "generate", args.input)
    rep.pop("tolerance")
    alpha = _float_list(args.alpha, "--alpha")
    weights = _float_list(args.weights, "--weights")
    if args.kind == "inject-violation":
        if not args.input:
            raise CommandError("--inject-violation needs --input")
        base = parse_dataset(args.input, args.input_format)
        data = gen.inject_violation(base, strength=args.strength, seed=args.seed)
        rep.update(generator="inject-violation", strength=args.strength)
    else:
        m = len(alpha) if (alpha and args.kind == "cobb-douglas") else args.m
        if args.kind == "cobb-douglas":
            data = gen.gen_cobb_douglas(args.n, m, alpha=alpha, seed=args.seed)
            rep.update(generator="cobb-douglas", alpha=alpha or [1.0 / m] * m)
        else:
            data = gen.gen_ces(args.n, m, rho=args.rho, weights=weights, seed=args.seed)
            rep.update(generator="ces", rho=args.rho, weights=weights or [1.0 / m] * m)
        data = Dataset.from_arrays(data.quantities, data.prices, [str(i + 1) for i in range(data.n)])
    rep.update(n=data.n, m=data.dimension)
    fmt = args.output_format or (_detect_format(args.out, None) if args.out else "csv")
    text = dump_dataset(data, fmt)
    if args.out:
        _atomic_write(args.out, text)
        rep["output"] = args.out
        rep["result"] = f"wrote {data.n} observations to {args.out}"
        return EXIT_OK, rep, None
    return EXIT_OK, rep, text


def _make_field(args, m: int) -> fl.SmoothDemandField:
    alpha = _float_list(args.alpha, "--alpha")
    if args.field == "cobb-douglas":
        return fl.cobb_douglas_field(alpha or [1.0 / m] * m)
    if args.field == "ces":
        weights = _float_list(args.weights, "--weights") or [1.0] * m
        return fl.ces_field(args.rho, weights)
    return fl.non_potential_field(m)


def _loops(count: int, m: int, seed: int) -> list[fl.ClosedPath]:
    if count < 1:
        raise CommandError("--loops must be at least 1")
    loops = fl.standard_loops(m)[:count]
    rng = np.random.default_rng(seed)
    while len(loops) < count:
        center = np.exp(rng.uniform(np.log(0.5), np.log(4.0), m))
        plane = tuple(int(v) for v in sorted(rng.choice(m, 2, replace=False)))
        radii = (float(rng.uniform(0.2, 0.6)) * center[plane[0]], float(rng.uniform(0.2, 0.6)) * center[plane[1]])
        loops.append(fl.ellipse(center, radii, plane))
    return loops


def run_fields(args) -> tuple[int, dict]:
    rep = _base(args, "fields", None)
    alpha = _float_list(args.alpha, "--alpha")
    weights = _float_list(args.weights, "--weights")
    m = len(alpha) if (alpha and args.field == "cobb-douglas") else (len(weights) if (weights and args.field == "ces") else args.m)
    field = _make_field(args, m)
    rep.update(field=field.tag, m=m, mode=args.mode)
    if args.mode == "inverse-demand":
        rng = np.random.default_rng(args.seed)
        pts = np.exp(rng.uniform(np.log(0.5), np.log(4.0), (args.points, m)))
        if field.log_gradient is None:
            raise CommandError(f"field {field.tag} comes from no utility; inverse-demand needs one")
        r = fl.check_inverse_demand(field, pts, tolerance=args.residual_tolerance)
        rep["inverse_demand"] = r.to_dict()
        rep["result"] = "PASS" if r.passed else "FAIL"
        return (EXIT_OK if r.passed else EXIT_VIOLATION), rep
    n_values = [int(v) for v in (_float_list(args.N, "--N") or [])]
    if any(v < 2 for v in n_values):
        raise CommandError("--N values must be at least 2")
    if args.constant_path:
        paths = [fl.constant_path([2.0] * m)]
    else:
        paths = _loops(args.loops, m, args.seed)
    r = fl.potentiality_check(field, paths, n_values=n_values, threshold=args.threshold, min_ratio=args.min_ratio)
    rep["path_integral"] = r.to_dict()
    rep["result"] = "PASS" if r.passed else "FAIL"
    return (EXIT_OK if r.passed else EXIT_VIOLATION), rep


# ---------------------------------------------------------------- driver


def _guard(fn: Callable[[], tuple], args, command: str, path: str | None) -> tuple:
    try:
        return fn()
    except (InputError, CommandError) as exc:
        where = f"{path}: " if path else ""
        rep = _base(args, command, path)
        rep["error"] = f"{where}{exc}"
        rep["result"] = "INPUT ERROR"
        return (EXIT_INPUT, rep) + ((None,) if command == "generate" else ())


def _report_path(out_dir: str, path: str, command: str, fmt: str) -> str:
    ext = "json" if fmt == "json" else "txt"
    return str(Path(out_dir) / f"{Path(path).stem}.{command}.{ext}")


def _batch(args, runner, command: str, out) -> int:
    paths: list[str] = args.inputs

    def one(path: str) -> tuple[int, dict]:
        code, rep = _guard(lambda: runner(args, path), args, command, path)
        if args.out_dir:
            _atomic_write(_report_path(args.out_dir, path, command, args.format), render(rep, args.format))
        return code, rep

    if args.jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(one, paths))
    else:
        results = [one(p) for p in paths]

    for code, rep in results:
        if code == EXIT_INPUT:
            print(f"error: {rep['error']}", file=sys.stderr)
    if not args.out_dir:
        if len(results) == 1:
            out.write(render(results[0][1], args.format))
        elif args.format == "json":
            out.write(render_json({"reports": [r for _, r in results]}))
        else:
            out.write("\n".join(render_text(r) for _, r in results))
    return max(code for code, _ in results)


def _env_tolerance() -> float:
    raw = os.environ.get("REVPREF_TOLERANCE")
    if raw is None or not raw.strip():
        return DEFAULT_TOLERANCE
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"REVPREF_TOLERANCE is not a number: {raw!r}")
    if not value >= 0 or not math.isfinite(value):
        raise InputError(f"REVPREF_TOLERANCE must be a nonnegative number, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=argparse.SUPPRESS,
                        help="cycle-sum and value tolerance (default 1e-9, or REVPREF_TOLERANCE)")
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS, help="report format")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="files processed concurrently")
    common.add_argument("--input-format", choices=("csv", "json"), default=argparse.SUPPRESS,
                        help="override format detection from the file extension")

    parser = argparse.ArgumentParser(prog="revpref", description=__doc__.splitlines()[0], parents=[common])
    parser.set_defaults(tolerance=None, format="text", seed=DEFAULT_SEED, jobs=1, input_format=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def batch_inputs(p):
        p.add_argument("inputs", nargs="+", metavar="FILE", help="dataset file(s)")
        p.add_argument("--out-dir", help="write one report per input file here")

    p = sub.add_parser("check", parents=[common], help="test a dataset for rationalizability")
    batch_inputs(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--harp", dest="method", action="store_const", const="harp", help="negative-cycle test (default)")
    g.add_argument("--garp", dest="method", action="store_const", const="garp", help="revealed-preference closure")
    g.add_argument("--brute-force", dest="method", action="store_const", const="brute-force",
                   help="enumerate all cycles (n <= 8)")
    p.set_defaults(method="harp")

    p = sub.add_parser("utility", parents=[common], help="construct and verify a utility")
    batch_inputs(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--homogeneous", dest="model", action="store_const", const="homogeneous", help="(default)")
    g.add_argument("--afriat", dest="model", action="store_const", const="afriat")
    p.add_argument("--certificate", choices=("lp", "homogeneous"), default="lp",
                   help="Afriat numbers from the LP or from the homogeneous utility")
    p.add_argument("--verify-samples", type=int, default=DEFAULT_SAMPLES, help="random bundles per observation")
    p.set_defaults(model="homogeneous")

    p = sub.add_parser("transport", parents=[common], help="diagonal coupling and optimal transport")
    batch_inputs(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--diagonal-check", dest="mode", action="store_const", const="diagonal", help="(default)")
    g.add_argument("--solve", dest="mode", action="store_const", const="solve")
    p.set_defaults(mode="diagonal")

    p = sub.add_parser("generate", parents=[common], help="write a synthetic dataset")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cobb-douglas", dest="kind", action="store_const", const="cobb-douglas", help="(default)")
    g.add_argument("--ces", dest="kind", action="store_const", const="ces")
    g.add_argument("--inject-violation", dest="kind", action="store_const", const="inject-violation")
    p.add_argument("-n", type=int, default=5, help="observations (default 5)")
    p.add_argument("-m", type=int, default=2, help="goods (default 2)")
    p.add_argument("--alpha", help="comma-separated Cobb-Douglas exponents")
    p.add_argument("--rho", type=float, default=0.5, help="CES substitution parameter (default 0.5)")
    p.add_argument("--weights", help="comma-separated CES weights")
    p.add_argument("--strength", type=float, default=1.0, help="violation strength in [0, 1]")
    p.add_argument("--input", help="dataset to perturb (--inject-violation)")
    p.add_argument("--out", help="output file (.csv or .json); stdout when omitted")
    p.add_argument("--output-format", choices=("csv", "json"), help="override the --out extension")
    p.set_defaults(kind="cobb-douglas")

    p = sub.add_parser("fields", parents=[common], help="closed-path sums and inverse demand")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--path-integral", dest="mode", action="store_const", const="path-integral", help="(default)")
    g.add_argument("--inverse-demand", dest="mode", action="store_const", const="inverse-demand")
    p.add_argument("--field", choices=("cobb-douglas", "ces", "non-potential"), default="cobb-douglas")
    p.add_argument("--alpha", help="comma-separated Cobb-Douglas exponents (default equal)")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--weights", help="comma-separated CES weights")
    p.add_argument("-m", type=int, default=2, help="goods when no exponents are given")
    p.add_argument("--loops", type=int, default=3, help="number of loops (first three are fixed)")
    p.add_argument("--N", default=",".join(str(v) for v in fl.DEFAULT_N_VALUES), help="discretisation sizes")
    p.add_argument("--threshold", type=float, default=fl.DEFAULT_THRESHOLD, help="bound on |sum| at the largest N")
    p.add_argument("--min-ratio", type=float, default=fl.DEFAULT_MIN_RATIO, help="required decay per refinement")
    p.add_argument("--constant-path", action="store_true", help="use a constant loop")
    p.add_argument("--points", type=int, default=50, help="sample points for --inverse-demand")
    p.add_argument("--residual-tolerance", type=float, default=1e-8, help="inverse-demand tolerance")
    p.set_defaults(mode="path-integral")
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tolerance is None:
            args.tolerance = _env_tolerance()
        if not args.tolerance >= 0:
            raise InputError("--tolerance must be nonnegative")
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command in ("check", "utility", "transport"):
        runner = {"check": run_check, "utility": run_utility, "transport": run_transport}[args.command]
        return _batch(args, runner, args.command, out)

    if args.command == "generate":
        code, rep, text = _guard(lambda: run_generate(args), args, "generate", args.input)
        if code == EXIT_INPUT:
            print(f"error: {rep['error']}", file=sys.stderr)
        if text is not None:
            out.write(text)
        else:
            out.write(render(rep, args.format))
        return code

    code, rep = _guard(lambda: run_fields(args), args, "fields", None)
    if code == EXIT_INPUT:
        print(f"error: {rep['error']}", file=sys.stderr)
    out.write(render(rep, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
