"""Command line entry point: ``starmeasure {solve,check,attractor,oracle,render}``.

Exit codes: 0 success, 1 oracle violations, 2 validation failure,
3 no convergence within max_iter, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__, kernels, oracle
from .config import ConfigError, load_config
from .errors import ConvergenceError, StarMeasureError, ValidationError
from .fixpoint import SolverConfig, solve
from .gifs import attractor_set, check_contraction, validate
from .measures import read_csv, write_csv
from .render import render_pgm
from .spaces import GridSpace

log = logging.getLogger("starmeasure")

EXIT_OK, EXIT_ORACLE, EXIT_VALIDATION, EXIT_NONCONVERGED, EXIT_IO = 0, 1, 2, 3, 4


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.solver = SolverConfig(**{**cfg.solver.__dict__, "contraction_seed": args.seed})
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_render(mu, path):
    space = mu.space
    if isinstance(space, GridSpace) and space.dim in (1, 2):
        render_pgm(mu, path, strip=space.dim == 1)
        return True
    return False


def cmd_solve(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    system = cfg.system
    t0 = time.perf_counter()
    contraction = check_contraction(system, cfg.solver.contraction_samples, cfg.seed)
    t_check = time.perf_counter() - t0
    status, code = "converged", EXIT_OK
    t1 = time.perf_counter()
    try:
        mu, trace = solve(system, cfg.solver, force=args.force, threads=args.threads, contraction=contraction)
    except ConvergenceError as exc:
        mu, trace = exc.measure, exc.trace
        status, code = "max_iter_exhausted", EXIT_NONCONVERGED
    t_solve = time.perf_counter() - t1
    write_csv(mu, out / "measure.csv")
    (out / "trace.csv").write_text(trace.to_csv(timings=not args.no_timings))
    rendered = cfg.render and _write_render(mu, out / "render.pgm")
    report = {
        "config": cfg.raw,
        "validation": validate(system).as_dict(),
        "contraction": contraction.as_dict(),
        "status": status,
        "iterations": len(trace),
        "final_residual": trace.final_residual,
        "epsilon": trace.epsilon,
        "mode": trace.mode,
        "exact": trace.exact,
        "warnings": trace.warnings,
        "support_size": int((mu.values > 0).sum()),
        "artifacts": ["measure.csv", "trace.csv", "report.json"] + (["render.pgm"] if rendered else []),
        "engine": {"version": __version__, "backend": kernels.backend.NAME},
    }
    if not args.no_timings:
        report["timings"] = {"contraction_check": t_check, "solve": t_solve}
    (out / "report.json").write_text(_dump(report))
    print(f"{status}: {len(trace)} iterations, residual {trace.final_residual:.6g} (epsilon {trace.epsilon:.6g})")
    return code


def cmd_check(args) -> int:
    cfg = _load(args)
    contraction = check_contraction(cfg.system, cfg.solver.contraction_samples, cfg.seed)
    report = {"validation": validate(cfg.system).as_dict(), "contraction": contraction.as_dict()}
    text = _dump(report)
    if args.out:
        (_out_dir(args) / "check.json").write_text(text)
    sys.stdout.write(text)
    print(f"verdict: {contraction.verdict} ({contraction.summary()})")
    return EXIT_OK


def cmd_attractor(args) -> int:
    cfg = _load(args)
    A = attractor_set(cfg.system, threads=args.threads)
    space = cfg.space
    lines = []
    if isinstance(space, GridSpace):
        lines.append(",".join(["point_index"] + [f"x{k}" for k in range(space.dim)]))
        for i in A:
            lines.append(",".join([str(int(i))] + [repr(float(c)) for c in space.coords[i]]))
    else:
        lines.append("point_index")
        lines.extend(str(int(i)) for i in A)
    (_out_dir(args) / "attractor.csv").write_text("\n".join(lines) + "\n")
    print(f"attractor: {len(A)} points")
    return EXIT_OK


def cmd_oracle(args) -> int:
    reports = oracle.run_suite(args.suite)
    payload = {
        "suite": args.suite,
        "reports": [r.as_dict() for r in reports],
        "instances": sum(r.instances for r in reports),
        "violations": sum(r.violations for r in reports),
    }
    text = _dump(payload)
    if args.out:
        (_out_dir(args) / "oracle.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if payload["violations"] == 0 else EXIT_ORACLE


def cmd_render(args) -> int:
    cfg = _load(args)
    mu = read_csv(cfg.space, args.measure)
    target = Path(args.out or "render.pgm")
    if target.is_dir():
        target = target / "render.pgm"
    if not _write_render(mu, target):
        raise ValidationError(["render needs a 1D or 2D grid space"])
    print(f"wrote {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="starmeasure", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--out", help="output directory (render: file or directory)")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${kernels.THREADS_ENV} or 1)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--force", action="store_true", help="iterate non-contractive systems anyway")

    s = sub.add_parser("solve", help="compute the invariant measure")
    common(s)
    s.add_argument("--no-timings", action="store_true", help="omit wall times so reports are byte-stable")
    s.set_defaults(func=cmd_solve)
    c = sub.add_parser("check", help="validate the system and sample its contraction constants")
    common(c)
    c.set_defaults(func=cmd_check)
    a = sub.add_parser("attractor", help="compute the Hutchinson attractor as a point set")
    common(a)
    a.set_defaults(func=cmd_attractor)
    o = sub.add_parser("oracle", help="run the exact finite-model checks")
    common(o, config=False)
    o.add_argument("--suite", choices=oracle.SUITES, default="all")
    o.set_defaults(func=cmd_oracle)
    r = sub.add_parser("render", help="render a measure CSV as PGM")
    common(r)
    r.add_argument("--measure", required=True, help="measure CSV (point_index,value)")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("STARMEASURE_LOG", "WARNING"), format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except StarMeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
