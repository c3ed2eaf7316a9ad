"""Command-line entry point.

Subcommands: simulate, eoc, turing, compare-imex, contraction, mesh.
Options may come from a ``key = value`` config file (--config); explicit
flags override file values.  Exit codes: 0 success, 1 validation error,
2 run failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as rdio
from .harness import (
    RunConfig,
    picard_contraction_probe,
    run_eoc,
    run_imex_comparison,
    run_simulation,
)
from .kinetics import SchnakenbergParams, turing_analysis
from .linsolve import LinearSolveConfig
from .mesh import load_mesh, mesh_spacing, save_mesh, unit_cube_mesh, unit_square_mesh
from .stepping import NonlinearPolicy, SchemeConfig


def _parse_levels(spec: str):
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return range(int(lo), int(hi) + 1)
    return [int(p) for p in spec.split(",")]


def _parse_bool(s) -> bool:
    if isinstance(s, bool):
        return s
    return str(s).lower() in ("1", "true", "yes", "on")


_RUN_KEYS = {
    "mesh_kind": str, "mesh_n": int, "mesh_path": str,
    "a": float, "b": float, "d": float, "gamma": float,
    "scheme": str, "tau": float,
    "method": str, "mode": str, "tol": float, "count": int,
    "rel_tol": float, "restart": int, "preconditioner": str,
    "t_end": float, "stop_tol": float,
    "ic": str, "amplitude": float, "seed": int, "ic_path": str,
    "sources": _parse_bool,
    "norm": str, "snapshot_every": int, "out": str, "label": str,
}


def build_run_config(values: dict) -> RunConfig:
    """Assemble a RunConfig from string-ish key/value settings."""
    opts = {}
    for key, raw in values.items():
        if raw is None:
            continue
        if key not in _RUN_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        opts[key] = _RUN_KEYS[key](raw)

    params = SchnakenbergParams(
        a=opts.get("a", 0.1), b=opts.get("b", 0.9),
        d=opts.get("d", 10.0), gamma=opts.get("gamma", 29.0),
    )
    scheme = SchemeConfig.parse(opts.get("scheme", "fsts"), opts.get("tau", 0.01))
    policy = NonlinearPolicy(
        method=opts.get("method", "newton"),
        mode=opts.get("mode", "adaptive"),
        tol=opts.get("tol", 1e-5),
        count=opts.get("count", 1),
    )
    linear = LinearSolveConfig(
        rel_tol=opts.get("rel_tol", 1e-8),
        restart=opts.get("restart", 30),
        preconditioner=opts.get("preconditioner", "jacobi"),
    )
    return RunConfig(
        mesh_kind=opts.get("mesh_kind", "square"),
        mesh_n=opts.get("mesh_n", 32),
        mesh_path=opts.get("mesh_path"),
        params=params,
        scheme=scheme,
        policy=policy,
        linear=linear,
        t_end=opts.get("t_end", 30.0),
        stop_tol=opts.get("stop_tol", 1e-4),
        ic=opts.get("ic", "equilibrium"),
        amplitude=opts.get("amplitude", 1e-2),
        seed=opts.get("seed", 0),
        ic_path=opts.get("ic_path"),
        sources_on=opts.get("sources", False),
        norm=opts.get("norm", "mass"),
        snapshot_every=opts.get("snapshot_every", 0),
        outdir=opts.get("out"),
        label=opts.get("label", "run"),
    )


def _merged_run_values(args) -> dict:
    values: dict = {}
    if args.config:
        values.update(rdio.parse_config_file(args.config))
    for key in _RUN_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _add_run_flags(sub) -> None:
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--mesh-kind", dest="mesh_kind", choices=["square", "cube", "file"])
    sub.add_argument("--mesh-n", dest="mesh_n", type=int)
    sub.add_argument("--mesh-path", dest="mesh_path")
    for name in ("a", "b", "d", "gamma"):
        sub.add_argument(f"--{name}", type=float)
    sub.add_argument("--scheme")
    sub.add_argument("--tau", type=float)
    sub.add_argument("--method", choices=["picard", "newton"])
    sub.add_argument("--mode", choices=["adaptive", "fixed"])
    sub.add_argument("--tol", type=float)
    sub.add_argument("--count", type=int)
    sub.add_argument("--rel-tol", dest="rel_tol", type=float)
    sub.add_argument("--restart", type=int)
    sub.add_argument("--preconditioner", choices=["none", "jacobi"])
    sub.add_argument("--t-end", dest="t_end", type=float)
    sub.add_argument("--stop-tol", dest="stop_tol", type=float)
    sub.add_argument("--ic", choices=["equilibrium", "manufactured", "file"])
    sub.add_argument("--amplitude", type=float)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--ic-path", dest="ic_path")
    sub.add_argument("--sources", action="store_const", const=True, default=None)
    sub.add_argument("--norm", choices=["mass", "euclidean"])
    sub.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    sub.add_argument("--out")
    sub.add_argument("--label")


def _cmd_simulate(args) -> int:
    cfg = build_run_config(_merged_run_values(args))
    if args.turing:
        cfg.report_turing = True
    trace, _ = run_simulation(cfg)
    print(
        f"{cfg.label}: scheme={cfg.scheme.label} stopped_by={trace.stopped_by} "
        f"end_time={trace.end_time:.4f} total_iterations={trace.total_iterations}"
    )
    return 2 if trace.stopped_by == "failure" else 0


def _cmd_eoc(args) -> int:
    policy = NonlinearPolicy(method=args.method or "newton", tol=args.tol or 1e-5)
    report = run_eoc(args.scheme, _parse_levels(args.levels), policy)
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "eoc.csv"
    rdio.write_eoc_csv(path, report, {"scheme": args.scheme, "levels": args.levels})
    for i, row in enumerate(report.rows):
        alpha = f" alpha={report.alpha_u[i - 1]:.4f}" if i > 0 else ""
        print(f"level {row.level}: tau={row.tau:g} n={row.n} "
              f"E_u={row.error_u:.6e}{alpha}")
    print(f"wrote {path}")
    return 0


def _cmd_turing(args) -> int:
    p = SchnakenbergParams(a=args.a, b=args.b, d=args.d, gamma=args.gamma)
    report = turing_analysis(p, mode_cap=args.cap, edge_rtol=args.edge_rtol)
    payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n")
    print(payload)
    return 0


def _cmd_compare_imex(args) -> int:
    cfg = build_run_config(_merged_run_values(args))
    schemes = tuple(args.schemes.split(","))
    variants = tuple(args.variants.split(","))
    comparison = run_imex_comparison(cfg, schemes=schemes, variants=variants)
    rows = []
    for (scheme, variant), summary in comparison.results.items():
        rows.append({"scheme": scheme, "variant": variant, **summary})
        print(
            f"{scheme:>5s} {variant:>8s}: end_time={summary['end_time']:.4f} "
            f"stopped_by={summary['stopped_by']} max|u|={summary['max_u_inf']:.3e}"
        )
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        rdio.write_summary_json(outdir / "imex_comparison.json",
                                {"seed": cfg.seed, "runs": rows})
    return 0


def _cmd_contraction(args) -> int:
    taus = [float(t) for t in args.tau_list.split(",")]
    mesh = unit_square_mesh(args.n)
    p = SchnakenbergParams(a=args.a, b=args.b, d=args.d, gamma=args.gamma)
    rows = picard_contraction_probe(mesh, p, taus, seed=args.seed)
    for row in rows:
        print(f"tau={row.tau:g}: max_ratio={row.max_ratio:.4e} "
              f"iterations={row.iterations}")
    if args.out:
        rdio.write_csv(
            args.out,
            "tau,max_ratio,iterations",
            [(r.tau, r.max_ratio, r.iterations) for r in rows],
            {"seed": args.seed, "n": args.n},
        )
    return 0


def _cmd_mesh(args) -> int:
    if args.mesh_cmd == "gen":
        mesh = unit_square_mesh(args.n) if args.kind == "square" else unit_cube_mesh(args.n)
        save_mesh(mesh, args.out)
        print(f"wrote {args.out}: {mesh.n_vertices} vertices, {mesh.n_cells} cells")
        return 0
    mesh = load_mesh(args.path)
    spacing = mesh_spacing(mesh)
    print(
        f"{args.path}: dim={mesh.dim} vertices={mesh.n_vertices} "
        f"cells={mesh.n_cells} h_max={spacing.h_max:.6g}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rd", description="Reaction-diffusion FEM experiment harness"
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run a pattern simulation")
    _add_run_flags(sim)
    sim.add_argument("--turing", action="store_true",
                     help="include the Turing analysis in summary.json")
    sim.set_defaults(func=_cmd_simulate)

    eoc = subs.add_parser("eoc", help="manufactured-solution convergence study")
    eoc.add_argument("--scheme", required=True)
    eoc.add_argument("--levels", default="1..5", help="e.g. 1..5 or 2,3,4")
    eoc.add_argument("--method", choices=["picard", "newton"])
    eoc.add_argument("--tol", type=float)
    eoc.add_argument("--out")
    eoc.set_defaults(func=_cmd_eoc)

    tur = subs.add_parser("turing", help="linear stability analysis")
    tur.add_argument("--a", type=float, required=True)
    tur.add_argument("--b", type=float, required=True)
    tur.add_argument("--d", type=float, required=True)
    tur.add_argument("--gamma", type=float, required=True)
    tur.add_argument("--cap", type=int, default=8)
    tur.add_argument("--edge-rtol", dest="edge_rtol", type=float, default=5e-3)
    tur.add_argument("-o", "--out")
    tur.set_defaults(func=_cmd_turing)

    cmp_ = subs.add_parser("compare-imex", help="IMEX vs fully implicit variants")
    _add_run_flags(cmp_)
    cmp_.add_argument("--schemes", default="be,cn,cnb5,fsts")
    cmp_.add_argument("--variants", default="imex,newton1,picard,newton")
    cmp_.set_defaults(func=_cmd_compare_imex)

    con = subs.add_parser("contraction", help="Picard contraction probe")
    con.add_argument("--tau-list", dest="tau_list", default="1e-2,1e-3,1e-4")
    con.add_argument("--n", type=int, default=8)
    con.add_argument("--a", type=float, default=0.1)
    con.add_argument("--b", type=float, default=0.9)
    con.add_argument("--d", type=float, default=10.0)
    con.add_argument("--gamma", type=float, default=29.0)
    con.add_argument("--seed", type=int, default=0)
    con.add_argument("--out")
    con.set_defaults(func=_cmd_contraction)

    msh = subs.add_parser("mesh", help="generate or inspect mesh files")
    msubs = msh.add_subparsers(dest="mesh_cmd", required=True)
    gen = msubs.add_parser("gen")
    gen.add_argument("--kind", choices=["square", "cube"], default="square")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("-o", "--out", required=True)
    chk = msubs.add_parser("check")
    chk.add_argument("path")
    msh.set_defaults(func=_cmd_mesh)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - run failures map to exit 2
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
