"""Command-line entry point.

Exit codes: 0 success, 1 acceptance criterion failed, 2 bad configuration,
3 runtime abort (e.g. positivity loss).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, limit, relaxation
from .closure import lam_diffusion_matrix, lam_force_identity_residual
from .config import ExperimentConfig
from .errors import ConfigError, MixtureError
from .mixture import diffusion_matrix

log = logging.getLogger("mcdiff")

EXIT_OK, EXIT_CRITERIA, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _fmt(v) -> str:
    return "nan" if v is None else format(float(v), ".17g")


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_check(cfg: ExperimentConfig, out: Path, args) -> int:
    spec = cfg.mixture_spec()
    report = harness.certify_structure(spec, int(cfg.check.get("samples", 100)), rng=args.seed)
    _write_json(out / "report.json", report)
    for c in report["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['condition']:<36} max_violation={c['max_violation']:.3e}")
    return EXIT_OK if report["pass"] else EXIT_CRITERIA


def cmd_simulate(cfg: ExperimentConfig, out: Path, args) -> int:
    spec = cfg.mixture_spec()
    u0 = cfg.profile().build(cfg.grid["M"], float(cfg.grid["length"]))
    t_end, cfl = float(cfg.time["T_end"]), float(cfg.time["cfl"])
    snaps_at = cfg.time.get("snapshot_times", [])
    if args.model == "relaxation":
        from .closure import well_prepared_state
        _, snaps = relaxation.advance(spec, well_prepared_state(spec, u0), t_end, cfl,
                                      snapshot_times=snaps_at)
        entropy = relaxation.total_entropy
    else:
        _, snaps = limit.advance(spec, u0, t_end, cfl, snapshot_times=snaps_at)
        entropy = limit.limit_total_entropy
    for t, fld in sorted(snaps.items()):
        path = out / f"{args.model}_t{t:.6f}.csv"
        fld.to_csv(path)
        print(f"t={t:.6f}  entropy={entropy(spec, fld):.12e}  -> {path}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: Path, args) -> int:
    spec = cfg.mixture_spec()
    rows = harness.epsilon_sweep(spec, cfg.profile(), cfg.sweep["eps_list"], cfg.grid["M"],
                                 float(cfg.time["T_end"]), float(cfg.time["cfl"]),
                                 length=float(cfg.grid["length"]),
                                 samples=int(cfg.sweep.get("samples", 20)),
                                 workers=args.threads)
    running = harness.running_orders(rows)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epsilon", "error", "fitted_order_running"])
        for row, order in zip(rows, running):
            w.writerow([_fmt(row.epsilon), _fmt(row.error), _fmt(order)])
    order = harness.fit_order(rows)
    lo, hi = cfg.sweep.get("order_band", [1.6, 2.4])
    ok = lo <= order <= hi
    _write_json(out / "report.json", {
        "condition": "epsilon_rate", "samples": len(rows), "fitted_order": order,
        "order_band": [lo, hi], "pass": ok,
        "rows": [{"epsilon": r.epsilon, "error": r.error, "steps": r.steps} for r in rows],
    })
    for row, o in zip(rows, running):
        print(f"eps={row.epsilon:<10g} error={row.error:.6e}" + ("" if o is None else f"  order={o:.4f}"))
    print(f"fitted order {order:.4f} (band [{lo}, {hi}]): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CRITERIA


def cmd_lam_compare(cfg: ExperimentConfig, out: Path, args) -> int:
    spec = cfg.mixture_spec()
    n = spec.N
    rng = np.random.default_rng(args.seed)
    u0 = cfg.profile().build(cfg.grid["M"], float(cfg.grid["length"]))
    rho = u0.densities[0]
    variants = {"ones": np.ones(n), "ramp": np.arange(1.0, n + 1.0)}
    tables = {k: lam_diffusion_matrix(spec, rho, w) for k, w in variants.items()}
    residual = 0.0
    for _ in range(100):
        dens = rng.uniform(0.2, 2.0, size=(16, n))
        grads = rng.uniform(-1.0, 1.0, size=(16, n, spec.d))
        residual = max(residual, lam_force_identity_residual(spec, dens, grads))
    spread = float(np.max(np.abs(tables["ones"] - tables["ramp"])))
    D = diffusion_matrix(spec, rho)
    ok = residual <= 1e-12 and spread > 1e-8
    payload = {
        "densities": rho.tolist(),
        "lam_D": {k: v.tolist() for k, v in tables.items()},
        "lam_D_asymmetry": {k: float(np.max(np.abs(v - v.T))) for k, v in tables.items()},
        "lam_D_omega_spread": spread,
        "D": D.tolist(),
        "force_identity_residual": residual,
        "pass": ok,
    }
    _write_json(out / "lam_compare.json", payload)
    for k, v in tables.items():
        print(f"Lam Dbar, omega={k}:\n{np.array2string(v, precision=6)}")
    print(f"max |Dbar(ones) - Dbar(ramp)| = {spread:.3e}")
    print(f"D (omega-free):\n{np.array2string(D, precision=6)}")
    print(f"force identity residual = {residual:.3e}")
    return EXIT_OK if ok else EXIT_CRITERIA


COMMANDS = {"check": cmd_check, "simulate": cmd_simulate, "sweep": cmd_sweep,
            "lam-compare": cmd_lam_compare}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="experiment JSON (default: built-in standard test)")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=0, help="sampling seed for check/lam-compare")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="mcdiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="certify the entropy/dissipation structure")
    sim = sub.add_parser("simulate", parents=[common], help="run one solver and write snapshots")
    sim.add_argument("--model", choices=("relaxation", "limit"), default="relaxation")
    sub.add_parser("sweep", parents=[common], help="epsilon sweep and fitted rate")
    sub.add_parser("lam-compare", parents=[common], help="compare with Lam's diffusion law")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig.standard()
        out = args.out if args.out is not None else cfg.output_dir
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MixtureError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
