"""Command line interface.

Subcommands: generate, solve, path, diagnose, benchmark, screen. Every run
writes its outputs into a fresh directory <out>/<timestamp>-<digest8> (the
default base directory comes from $GLASSOKIT_OUT, falling back to ./runs),
together with a manifest recording the command, flags, seeds, input digests
and library version. The run directory's absolute path is the last line on
stdout. Exit codes: 0 when everything converged, 1 on solver trouble or
non-convergence, 2 on usage errors. All files are written atomically.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .datagen import gen_ar2_precision, gen_sparse_precision, lambda_grid, lambda_max, sample_gaussian
from .evaluation import EdgeSet, path_solve, roc_auc, screen_components, shd
from .linalg import chol, load_matrix_csv, save_csv, save_matrix_csv, spd_inverse
from .solver import SolverConfig, check_stationarity, solve


@dataclass
class RunManifest:
    command: str
    args: dict
    seed: int | None
    input_digests: dict
    version: str
    started_at: str
    finished_at: str = ""
    extra: dict = field(default_factory=dict)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path, obj) -> None:
    d = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_rows_csv(path, header, rows) -> None:
    d = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join("" if _is_nan(v) else _fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _is_nan(v) -> bool:
    return isinstance(v, float) and v != v


def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _make_run_dir(base, command: str, args_dict: dict) -> str:
    digest = hashlib.sha256(
        json.dumps({"command": command, "args": args_dict}, sort_keys=True).encode()
    ).hexdigest()[:8]
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%f")
    run_dir = os.path.join(base, f"{stamp}-{digest}")
    os.makedirs(run_dir, exist_ok=False)
    return run_dir


def _public_args(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _start_run(args: argparse.Namespace, inputs: dict) -> tuple[str, RunManifest]:
    base = args.out or os.environ.get("GLASSOKIT_OUT") or "runs"
    public = _public_args(args)
    run_dir = _make_run_dir(base, args.command, public)
    manifest = RunManifest(
        command=args.command,
        args=public,
        seed=getattr(args, "seed", None),
        input_digests={k: _sha256(v) for k, v in inputs.items()},
        version=__version__,
        started_at=_utc_now(),
    )
    return run_dir, manifest


def _finish_run(run_dir: str, manifest: RunManifest, extra: dict | None = None) -> None:
    manifest.finished_at = _utc_now()
    manifest.extra = extra or {}
    _write_json(os.path.join(run_dir, "manifest.json"), asdict(manifest))
    print(os.path.abspath(run_dir))


def _fail_run(run_dir: str, manifest: RunManifest, exc: BaseException) -> int:
    record = {"error": type(exc).__name__, "message": str(exc)}
    _write_json(os.path.join(run_dir, "error.json"), record)
    _finish_run(run_dir, manifest, extra=record)
    print(f"error: {exc}", file=sys.stderr)
    return 1


# ---------------------------------------------------------------------------
# generate

def cmd_generate(args) -> int:
    run_dir, manifest = _start_run(args, {})
    try:
        if args.model == "sparse-random":
            gt = gen_sparse_precision(args.p, args.zero_fraction, seed=args.seed)
        else:
            gt = gen_ar2_precision(args.p)
        ds = sample_gaussian(gt, args.n, seed=args.seed)
        sigma = spd_inverse(chol(gt.theta_star))
        save_matrix_csv(os.path.join(run_dir, "theta_star.csv"), gt.theta_star)
        save_matrix_csv(os.path.join(run_dir, "sigma.csv"), sigma)
        save_csv(os.path.join(run_dir, "Y.csv"), ds.Y)
        save_matrix_csv(os.path.join(run_dir, "S.csv"), ds.S)
        _write_json(os.path.join(run_dir, "edges.json"),
                    {"p": gt.p, "edges": sorted([list(e) for e in gt.edges])})
        _write_json(os.path.join(run_dir, "meta.json"), {
            "model": gt.model, "p": gt.p, "n": ds.n, "seed": args.seed,
            "zero_fraction_achieved": gt.zero_fraction, "n_edges": len(gt.edges),
        })
    except Exception as exc:
        return _fail_run(run_dir, manifest, exc)
    _finish_run(run_dir, manifest)
    return 0


# ---------------------------------------------------------------------------
# solve / diagnose

def _solver_config_from(args, record_diagnostics: bool) -> SolverConfig:
    return SolverConfig(
        lam=args.lam, backend=args.backend, outer_tol=args.tol,
        max_sweeps=args.max_sweeps, inner_tol=args.inner_tol,
        record_diagnostics=record_diagnostics,
    )


def cmd_solve(args) -> int:
    inputs = {"s_file": args.s_file}
    if args.warm_start:
        inputs["warm_start"] = args.warm_start
    run_dir, manifest = _start_run(args, inputs)
    try:
        s = load_matrix_csv(args.s_file)
        warm = load_matrix_csv(args.warm_start) if args.warm_start else None
        est = solve(s, _solver_config_from(args, record_diagnostics=True), warm_start=warm)
        save_matrix_csv(os.path.join(run_dir, "theta_hat.csv"), est.theta)
        _write_rows_csv(os.path.join(run_dir, "trace.csv"),
                        ["sweep", "objective", "min_eig", "max_rel_change"],
                        est.trace.rows())
        residual = check_stationarity(est.theta, s, args.lam)
        _write_json(os.path.join(run_dir, "kkt.json"), {
            "lambda": args.lam, "residual": residual,
            "converged": est.trace.converged, "sweeps": est.trace.sweeps,
            "inner_iters": est.trace.total_inner, "backend": args.backend,
        })
    except Exception as exc:
        return _fail_run(run_dir, manifest, exc)
    _finish_run(run_dir, manifest, extra={"converged": est.trace.converged})
    return 0 if est.trace.converged else 1


def cmd_diagnose(args) -> int:
    run_dir, manifest = _start_run(args, {"s_file": args.s_file})
    try:
        s = load_matrix_csv(args.s_file)
        est = solve(s, _solver_config_from(args, record_diagnostics=True))
        rows = []
        prev_obj = None
        for sweep, obj, eig, rel in est.trace.rows():
            delta = (obj - prev_obj) if (prev_obj is not None) else float("nan")
            rows.append((sweep, obj, delta, eig, rel))
            prev_obj = obj
        _write_rows_csv(os.path.join(run_dir, "diagnostics.csv"),
                        ["sweep", "objective", "objective_delta", "min_eig", "criterion_diff"],
                        rows)
    except Exception as exc:
        return _fail_run(run_dir, manifest, exc)
    _finish_run(run_dir, manifest, extra={"converged": est.trace.converged})
    return 0 if est.trace.converged else 1


# ---------------------------------------------------------------------------
# path

def _validate_grid_text(text: str, parser) -> np.ndarray | None:
    """Usage-level grid validation; returns the explicit grid or None for auto."""
    if text == "auto":
        return None
    try:
        vals = np.array([float(tok) for tok in text.split(",") if tok.strip() != ""])
    except ValueError:
        parser.error(f"could not parse grid: {text!r}")
    if vals.size == 0:
        parser.error("grid is empty")
    if (np.diff(vals) >= 0).any() or (vals <= 0).any():
        parser.error("grid must be positive and strictly decreasing")
    return vals


def cmd_path(args, parser) -> int:
    explicit = _validate_grid_text(args.grid, parser)
    run_dir, manifest = _start_run(args, {"s_file": args.s_file})
    try:
        s = load_matrix_csv(args.s_file)
        grid = lambda_grid(lambda_max(s)) if explicit is None else explicit
        res = path_solve(s, grid, start=args.start, backend=args.backend,
                         outer_tol=args.tol, max_sweeps=args.max_sweeps,
                         inner_tol=args.inner_tol)
        entries = []
        for i, e in enumerate(res.entries):
            entries.append({
                "lambda": e.lam, "sweeps": e.sweeps, "inner_iters": e.inner_iters,
                "wall_time": e.wall_time, "converged": e.converged,
                "n_edges": len(e.edges), "edges": sorted([list(t) for t in e.edges.edges]),
            })
            if args.save_matrices:
                save_matrix_csv(os.path.join(run_dir, f"theta_{i:04d}.csv"), e.theta)
        _write_json(os.path.join(run_dir, "results.json"), {
            "start": res.start, "backend": res.backend,
            "total_sweeps": res.total_sweeps, "all_converged": res.all_converged,
            "entries": entries,
        })
    except Exception as exc:
        return _fail_run(run_dir, manifest, exc)
    _finish_run(run_dir, manifest, extra={"all_converged": res.all_converged})
    return 0 if res.all_converged else 1


# ---------------------------------------------------------------------------
# screen

def cmd_screen(args) -> int:
    run_dir, manifest = _start_run(args, {"s_file": args.s_file})
    try:
        s = load_matrix_csv(args.s_file)
        comps = screen_components(s, args.tau)
        _write_json(os.path.join(run_dir, "components.json"), {
            "tau": args.tau, "p": int(s.shape[0]),
            "n_components": len(comps),
            "sizes": [len(c) for c in comps],
            "components": comps,
        })
    except Exception as exc:
        return _fail_run(run_dir, manifest, exc)
    _finish_run(run_dir, manifest)
    return 0


# ---------------------------------------------------------------------------
# benchmark

def _run_cell(cell: dict, defaults: dict) -> dict:
    model = cell.get("model", "sparse-random")
    p, n = int(cell["p"]), int(cell["n"])
    seed = int(cell.get("seed", 0))
    start = cell.get("start", "cold")
    backends = cell.get("backends", ["dual-qp"])
    outer_tol = float(cell.get("outer_tol", defaults.get("outer_tol", 1e-4)))
    if model == "sparse-random":
        gt = gen_sparse_precision(p, float(cell.get("zero_fraction", 0.7)), seed=seed)
    elif model == "ar2":
        gt = gen_ar2_precision(p)
    else:
        raise ValueError(f"unknown model {model!r}")
    ds = sample_gaussian(gt, n, seed=seed)
    grid_spec = cell.get("grid", "auto")
    if grid_spec == "auto":
        grid = lambda_grid(lambda_max(ds.S))
    else:
        grid = np.asarray(grid_spec, dtype=np.float64)
    truth = EdgeSet(p=p, edges=gt.edges)
    out = {"model": model, "p": p, "n": n, "seed": seed, "start": start,
           "backends": {}, "backend_shd": None}
    paths = {}
    for backend in backends:
        t0 = time.perf_counter()
        res = path_solve(ds.S, grid, start=start, backend=backend, outer_tol=outer_tol)
        wall = time.perf_counter() - t0
        paths[backend] = res
        out["backends"][backend] = {
            "auc": roc_auc(res, truth).auc,
            "total_sweeps": res.total_sweeps,
            "wall_time": wall,
            "all_converged": res.all_converged,
            "edges_per_lambda": [len(e.edges) for e in res.entries],
        }
    if len(backends) >= 2:
        first = paths[backends[0]]
        out["backend_shd"] = {
            b: [shd(a.edges, c.edges) for a, c in zip(first.entries, paths[b].entries)]
            for b in backends[1:]
        }
    return out


def cmd_benchmark(args, parser) -> int:
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read benchmark config: {exc}")
    cells = config.get("cells", [])
    if not cells:
        parser.error("benchmark config has no cells")
    run_dir, manifest = _start_run(args, {"config": args.config})
    defaults = {k: v for k, v in config.items() if k != "cells"}
    jobs = int(args.jobs or config.get("jobs", 1))
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(_run_cell, cell, defaults) for cell in cells]
            for cell, fut in zip(cells, futs):
                try:
                    results.append(fut.result())
                except Exception as exc:  # record and continue
                    results.append({"cell": cell, "error": type(exc).__name__,
                                    "message": str(exc)})
    else:
        for cell in cells:
            try:
                results.append(_run_cell(cell, defaults))
            except Exception as exc:
                results.append({"cell": cell, "error": type(exc).__name__,
                                "message": str(exc)})
    ok = all(
        "error" not in r and all(b["all_converged"] for b in r["backends"].values())
        for r in results
    )
    _write_json(os.path.join(run_dir, "report.json"),
                {"cells": results, "all_ok": ok})
    rows = []
    for r in results:
        if "error" in r:
            continue
        for backend, stats in r["backends"].items():
            rows.append((r["model"], r["p"], r["n"], r["seed"], backend,
                         stats["auc"], stats["total_sweeps"], stats["wall_time"],
                         int(stats["all_converged"])))
    _write_rows_csv(os.path.join(run_dir, "benchmark_table.csv"),
                    ["model", "p", "n", "seed", "backend", "auc",
                     "total_sweeps", "wall_time", "converged"],
                    rows)
    _finish_run(run_dir, manifest, extra={"all_ok": ok})
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser

def _nonneg_float(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _pos_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _add_solver_flags(sp):
    sp.add_argument("--backend", choices=["dual-qp", "primal-cd"], default="dual-qp")
    sp.add_argument("--tol", type=float, default=1e-4, help="outer tolerance")
    sp.add_argument("--inner-tol", dest="inner_tol", type=float, default=1e-7)
    sp.add_argument("--max-sweeps", dest="max_sweeps", type=int, default=500)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glassokit",
        description="Sparse precision matrix estimation by penalized likelihood.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesize a ground truth and Gaussian sample")
    g.add_argument("--model", choices=["sparse-random", "ar2"], default="sparse-random")
    g.add_argument("--p", type=_pos_int, required=True)
    g.add_argument("--n", type=_pos_int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--zero-fraction", dest="zero_fraction", type=float, default=0.7)
    g.add_argument("--out", default=None)

    so = sub.add_parser("solve", help="single penalized solve")
    so.add_argument("--s-file", dest="s_file", required=True)
    so.add_argument("--lambda", dest="lam", type=_nonneg_float, required=True)
    so.add_argument("--warm-start", dest="warm_start", default=None)
    _add_solver_flags(so)
    so.add_argument("--out", default=None)

    pa = sub.add_parser("path", help="solve along a penalty grid")
    pa.add_argument("--s-file", dest="s_file", required=True)
    pa.add_argument("--grid", default="auto",
                    help="'auto' or comma-separated decreasing penalties")
    pa.add_argument("--start", choices=["cold", "warm"], default="cold")
    pa.add_argument("--save-matrices", dest="save_matrices", action="store_true")
    _add_solver_flags(pa)
    pa.add_argument("--out", default=None)

    d = sub.add_parser("diagnose", help="per-sweep objective/eigenvalue trace")
    d.add_argument("--s-file", dest="s_file", required=True)
    d.add_argument("--lambda", dest="lam", type=_nonneg_float, required=True)
    _add_solver_flags(d)
    d.add_argument("--out", default=None)

    b = sub.add_parser("benchmark", help="run a grid of benchmark cells")
    b.add_argument("--config", required=True, help="JSON benchmark description")
    b.add_argument("--jobs", type=_pos_int, default=None)
    b.add_argument("--out", default=None)

    sc = sub.add_parser("screen", help="covariance thresholding components")
    sc.add_argument("--s-file", dest="s_file", required=True)
    sc.add_argument("--tau", type=_nonneg_float, required=True)
    sc.add_argument("--out", default=None)

    return parser


def _require_file(parser, path, flag: str) -> None:
    if not os.path.isfile(path):
        parser.error(f"{flag}: no such file: {path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate":
        if not 0 <= args.zero_fraction < 1:
            parser.error("--zero-fraction must lie in [0, 1)")
        if args.model == "ar2" and args.p < 3:
            parser.error("--model ar2 needs p >= 3")
        return cmd_generate(args)
    if args.command == "solve":
        _require_file(parser, args.s_file, "--s-file")
        if args.warm_start:
            _require_file(parser, args.warm_start, "--warm-start")
        return cmd_solve(args)
    if args.command == "path":
        _require_file(parser, args.s_file, "--s-file")
        return cmd_path(args, parser)
    if args.command == "diagnose":
        _require_file(parser, args.s_file, "--s-file")
        return cmd_diagnose(args)
    if args.command == "benchmark":
        return cmd_benchmark(args, parser)
    if args.command == "screen":
        _require_file(parser, args.s_file, "--s-file")
        return cmd_screen(args)
    parser.error(f"unknown command {args.command!r}")


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
