"""Command-line driver: ``electromech {bistability,squeezing,entanglement,verify}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import GridSpec, RunConfig, load_config
from .covariance import diffusion_matrix, drift_matrix, entanglement_sweep, is_stable, steady_covariance
from .errors import ConfigError, ElectromechError, NumericalError
from .model import derive
from .oracle import lyapunov_check, random_stable_points, run_all
from .squeezing import max_squeezing_scan, squeezing_spectrum
from .steady_state import bistability_curve, mean_fields, mean_fields_from_phonon_number, turning_points

log = logging.getLogger("electromech")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

DEFAULT_I_B = GridSpec(1e2, 1e16, 10_000, "log")
DEFAULT_OMEGA = GridSpec(-3.0, 3.0, 4001)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write(outdir, name, text):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _map(fn, items, threads):
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(fn, items))


def run_bistability(cfg: RunConfig, threads=1):
    """S-curve rows and turning points as ``{filename: csv_text}``."""
    base = cfg.system_params()
    derived = derive(base)
    curve = bistability_curve(derived, (cfg.I_b or DEFAULT_I_B).values())

    def eigen_tag(pt):
        d = derive(base.replace(P=pt.P))
        return is_stable(d, mean_fields_from_phonon_number(pt.I_b, d))

    stable = _map(eigen_tag, curve, threads)
    rows = [(p.P, p.I_a, p.I_b, p.branch.value, p.stable_hint, p.F, s) for p, s in zip(curve, stable)]
    tps = turning_points(curve)
    return {
        "bistability.csv": _csv_text(
            ["P_watt", "I_a", "I_b", "branch", "stable_hint", "F_factor", "stable_eigen"], rows),
        "turning_points.csv": _csv_text(["P_watt", "I_b"], tps),
    }


def run_squeezing(cfg: RunConfig, threads=1):
    base = cfg.system_params()
    derived = derive(base)
    spec = cfg.omega or DEFAULT_OMEGA
    x = spec.values()
    omegas = x * derived.omega_m
    if cfg.power is not None:
        result = max_squeezing_scan(base, cfg.power.values(), omegas, cfg.branch, threads)
        rows = [(p.P, p.S_min, p.stable) for p in result.points]
        return {"squeezing_scan.csv": _csv_text(["P_watt", "S_min", "stable"], rows)}
    means = mean_fields(derived, cfg.branch)
    if is_stable(derived, means):
        pts = squeezing_spectrum(derived, means, omegas, check_stability=False)
        rows = [(xi, p.S_minus, p.S_plus, True) for xi, p in zip(x, pts)]
    else:
        rows = [(xi, None, None, False) for xi in x]
    return {"squeezing.csv": _csv_text(["omega_over_omega_m", "S_minus", "S_plus", "stable"], rows)}


def run_entanglement(cfg: RunConfig, threads=1):
    if cfg.variable is None or cfg.sweep is None:
        raise ConfigError("entanglement needs 'variable' and 'grid'")
    base = cfg.system_params()
    points = entanglement_sweep(base, cfg.variable, cfg.sweep.values(), cfg.branch, threads)
    rows = [(p.value, p.E_N, p.stable) for p in points]
    return {"entanglement.csv": _csv_text(["sweep_value", "E_N", "stable"], rows)}


def run_verify(cfg: RunConfig, threads=1):
    """All oracle checks plus Lyapunov-vs-flow on random stable draws."""
    base = cfg.system_params()
    reports = run_all(base, cfg.branch, inject_fault=cfg.inject_fault)

    def draw_check(item):
        _, d, m = item
        rates = (d.kappa_a, d.kappa_c, d.gamma_m)
        R, D = drift_matrix(d, m), diffusion_matrix(d)
        return lyapunov_check(R, D, steady_covariance(R, D, rates))

    if cfg.random_draws > 0:
        draws = random_stable_points(base, cfg.random_draws, cfg.seed)
        for i, rep in enumerate(_map(draw_check, draws, threads)):
            rep.check_name = f"lyapunov_vs_flow_draw_{i}"
            reports.append(rep)
    payload = {
        "all_pass": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }
    text = json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n"
    return {"verify.json": text}, payload["all_pass"], reports


COMMANDS = {
    "bistability": run_bistability,
    "squeezing": run_squeezing,
    "entanglement": run_entanglement,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="electromech",
        description="Steady state, squeezing and entanglement of a qubit-assisted electromechanical circuit.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("bistability", "squeezing", "entanglement", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration (default: built-in base parameters)")
        p.add_argument("--out", help="output directory (overrides output.directory; default '.')")
        p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        outdir = args.out or cfg.directory or "."
        if args.command == "verify":
            files, ok, reports = run_verify(cfg, args.threads)
            for rep in reports:
                print(rep)
        else:
            files, ok = COMMANDS[args.command](cfg, args.threads), True
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ElectromechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name, text in files.items():
        print(_write(outdir, name, text))
    return EXIT_OK if ok else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
