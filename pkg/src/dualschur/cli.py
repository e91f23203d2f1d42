"""``ddsolve`` command line entry point.

CSV columns per experiment
--------------------------
split-dof       n, t, d_A, d_B, v_A, v_B, lambda, v_A_w, v_B_w, lambda_w,
                d_exact, lambda_exact, <diagnostics>, diverged
heat1d/heat2d   n, t, l2_error_d, l2_error_v, <diagnostics>, diverged
                (--snapshots adds <out>_snapshots.csv: t, x[, y], u, u_exact, v, v_exact)
converge        elements, h, n_dof, l2_error_d, l2_error_v, rate_d, rate_v
baumgarte       n, t, lambda, d_interface_A, d_interface_B, drift_identity_gap,
                <diagnostics>, diverged
counterexample  n, s, s_weighted

<diagnostics> = energy_d, energy_v, drift_d, drift_d_inf, drift_v, drift_v_inf,
                lambda_norm, state_max

Columns suffixed _w hold values at the weighted level n + gamma.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

from .exceptions import DualSchurError
from .experiments import EXPERIMENTS, ExperimentConfig, run

_FLOATS = ("gamma", "dt", "t_end", "alpha", "conductivity", "capacity_density")
_INTS = ("mesh", "dims", "n_terms", "seed", "workers")
_LISTS = {"levels": int, "snapshots": float}


def _parse_list(text, kind):
    return tuple(kind(x) for x in str(text).replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ddsolve",
        description="Dual Schur domain decomposition experiments.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--method", help="d, modified-d, v or baumgarte")
    p.add_argument("--gamma", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--mesh", type=int, help="elements per subdomain and direction")
    p.add_argument("--alpha", type=float, help="Baumgarte parameter")
    p.add_argument("--dims", type=int, choices=(1, 2), help="dimension for converge")
    p.add_argument("--levels", help="mesh hierarchy for converge, e.g. 10,20,40")
    p.add_argument("--snapshots", help="times for nodal snapshots, e.g. 0.05,0.5")
    p.add_argument("--n-terms", dest="n_terms", type=int)
    p.add_argument("--conductivity", type=float)
    p.add_argument("--capacity-density", dest="capacity_density", type=float)
    p.add_argument("--seed", type=int, help="power-iteration seed (default: $DDSOLVE_SEED)")
    p.add_argument("--workers", type=int, help="threads for independent mesh levels")
    p.add_argument("--config", type=Path,
                   help="INI file; keys in [common] and [<experiment>] sections")
    p.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    p.add_argument("--summary", action="store_true",
                   help="print a one-line JSON verdict to stdout")
    return p


def _read_config(path: Path, experiment: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(f"cannot read config file {path}")
    out = {}
    for section in ("common", experiment):
        if cp.has_section(section):
            for key, val in cp.items(section):
                out[key.replace("-", "_")] = val
    return out


def _coerce(values: dict) -> dict:
    out = {}
    for key, val in values.items():
        if val is None:
            continue
        if key in _LISTS:
            out[key] = _parse_list(val, _LISTS[key])
        elif key in _FLOATS:
            out[key] = float(val)
        elif key in _INTS:
            out[key] = int(val)
        elif key == "method":
            out[key] = str(val)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return out


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = _read_config(args.config, args.experiment) if args.config else {}
    flags = {k: getattr(args, k) for k in
             (*_FLOATS, *_INTS, *_LISTS, "method")}
    values.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig(args.experiment, **_coerce(values))


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if hasattr(x, "item"):
        return _json_safe(x.item())
    return x


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        table = run(cfg)
    except (DualSchurError, ValueError, OSError) as exc:
        print(f"ddsolve: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out)
        snaps = table.extra.get("snapshots")
        if snaps is not None and snaps.rows:
            snaps.to_csv(args.out.with_name(args.out.stem + "_snapshots.csv"))
    elif not args.summary:
        table.write(sys.stdout)
    if args.summary:
        summary = {"experiment": cfg.experiment, **table.summary}
        print(json.dumps({k: _json_safe(v) for k, v in summary.items()}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
