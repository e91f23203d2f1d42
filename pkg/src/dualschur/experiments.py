"""Experiment drivers producing rectangular CSV tables.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns a
:class:`CsvTable` whose ``summary`` dict holds the stability verdict and
headline numbers. Divergence never escapes as an exception: the table ends
with a row flagged ``diverged = true``.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import analytic, stability
from .decomposition import partition_1d, partition_2d, split_dof_problem
from .exceptions import Diverged, GammaOutOfRange
from .fem import Mesh1D, Mesh2D, assemble_1d, assemble_2d, l2_error
from .linalg import DEFAULT_SEED, max_generalized_eigenvalue
from .steppers import (Baumgarte, TrapezoidalConfig, check_well_posed,
                       method_from_name, simulate)

EXPERIMENTS = ("split-dof", "heat1d", "heat2d", "converge", "baumgarte", "counterexample")

_DEFAULTS = {
    "split-dof": dict(method="d", gamma=0.25, dt=0.01, t_end=0.7),
    "heat1d": dict(method="d", gamma=0.75, dt=1e-3, t_end=0.5, mesh=10),
    "heat2d": dict(method="modified-d", gamma=0.75, dt=1e-3, t_end=0.5, mesh=10),
    "converge": dict(method="d", gamma=0.75, dt=1e-5, t_end=0.01, dims=1),
    "baumgarte": dict(method="baumgarte", gamma=0.1, dt=1e-3, t_end=2.0, mesh=10, alpha=1.0),
    "counterexample": dict(gamma=0.5, n_terms=5),
}


def env_seed() -> int:
    raw = os.environ.get("DDSOLVE_SEED")
    return DEFAULT_SEED if raw in (None, "") else int(raw)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters.

    Fields left as ``None`` take the experiment's defaults. ``mesh`` counts
    elements per subdomain along each direction.
    """
    experiment: str
    method: str | None = None
    gamma: float | None = None
    dt: float | None = None
    t_end: float | None = None
    mesh: int | None = None
    alpha: float | None = None
    dims: int | None = None
    levels: tuple[int, ...] = (10, 20, 40)
    snapshots: tuple[float, ...] = ()
    n_terms: int | None = None
    conductivity: float = 1.0
    capacity_density: float = 1.0
    seed: int = field(default_factory=env_seed)
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {', '.join(EXPERIMENTS)}")
        for key, val in _DEFAULTS[self.experiment].items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, val)
        object.__setattr__(self, "levels", tuple(int(x) for x in self.levels))
        object.__setattr__(self, "snapshots", tuple(float(x) for x in self.snapshots))
        if self.experiment == "counterexample":
            if self.n_terms is None or self.n_terms < 1:
                raise ValueError("n_terms must be >= 1")
            if not 0.0 < self.gamma <= 0.5:
                raise GammaOutOfRange(f"counterexamples need 0 < gamma <= 1/2, got {self.gamma}")
            return
        if self.dt is None or not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end is None or self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.mesh is not None and self.mesh < 1:
            raise ValueError("mesh must be >= 1")
        if self.dims not in (None, 1, 2):
            raise ValueError("dims must be 1 or 2")
        if len(self.levels) < 2 or any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be an increasing list of at least two meshes")
        if self.conductivity <= 0 or self.capacity_density <= 0:
            raise ValueError("material parameters must be positive")
        # raises for bad gamma / alpha / gamma = 0 with d-type coupling
        check_well_posed(self.coupling, self.trapezoid)
        self.n_steps

    @property
    def coupling(self):
        return method_from_name(self.method, self.alpha)

    @property
    def trapezoid(self) -> TrapezoidalConfig:
        return TrapezoidalConfig(self.gamma, self.dt)

    @property
    def n_steps(self) -> int:
        n = self.t_end / self.dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ValueError(f"t_end = {self.t_end} is not a whole number of steps of {self.dt}")
        return int(round(n))


@dataclass
class CsvTable:
    header: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def append(self, row: Sequence):
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} fields, header has {len(self.header)}")
        self.rows.append(list(row))

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def write(self, stream):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_fmt(x) for x in r])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        self.write(buf)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


_DIAG = ["energy_d", "energy_v", "drift_d", "drift_d_inf", "drift_v", "drift_v_inf",
         "lambda_norm", "state_max"]


def _diag_values(rec: stability.StepRecord):
    return [getattr(rec, k) for k in _DIAG]


def _diverged_row(header, n, exc: Diverged):
    row = [math.nan] * len(header)
    row[0] = n
    row[header.index("t")] = float(getattr(exc.state, "t", math.nan))
    row[header.index("state_max")] = float(exc.state.max_abs()) if exc.state else math.inf
    row[-1] = True
    return row


def _finish(table: CsvTable, scale: float, diverged: bool, **extra):
    smax = table.column("state_max")
    smax = smax[np.isfinite(smax)] if diverged else smax
    verdict = "diverged" if diverged else stability.verdict(smax, scale)
    table.summary.update(verdict=verdict, steps=len(table.rows) - 1 - int(diverged),
                         max_state=float(np.max(smax)) if smax.size else math.inf, **extra)
    return table


def _run_levels(problem, cfg: ExperimentConfig, header, row_fn, scale):
    """Shared time loop: one CSV row per level, diagnostics appended."""
    method, tcfg = cfg.coupling, cfg.trapezoid
    monitor = stability.EnergyMonitor(problem, tcfg, method)
    table = CsvTable(header)
    diverged = False
    n = 0
    try:
        for lvl in simulate(problem, method, tcfg, cfg.n_steps):
            rec = stability.energy_step(lvl, monitor)
            table.append([lvl.n, lvl.t, *row_fn(lvl, rec), *_diag_values(rec), False])
            n = lvl.n + 1
    except Diverged as exc:
        table.append(_diverged_row(header, n, exc))
        diverged = True
    return table, monitor, diverged


def run_split_dof(cfg: ExperimentConfig) -> CsvTable:
    """Two single-dof subdomains ``m_A = m_B = 1, k_A = 10, k_B = 1``, unit start."""
    problem = split_dof_problem()
    header = ["n", "t", "d_A", "d_B", "v_A", "v_B", "lambda", "v_A_w", "v_B_w", "lambda_w",
              "d_exact", "lambda_exact", *_DIAG, "diverged"]

    def row(lvl, rec):
        u, lam = analytic.split_dof_exact(lvl.t)
        return [lvl.d[0][0], lvl.d[1][0], lvl.v[0][0], lvl.v[1][0], lvl.lam[0],
                lvl.v_weighted[0][0], lvl.v_weighted[1][0], lvl.lam_weighted[0],
                float(u), float(lam)]

    table, _, diverged = _run_levels(problem, cfg, header, row, 1.0)
    lam = table.column("lambda")
    lam_w = table.column("lambda_w")
    return _finish(table, 1.0, diverged,
                   max_lambda=float(np.nanmax(np.abs(lam))),
                   max_lambda_weighted=float(np.nanmax(np.abs(lam_w))))


def _heat_problem(dims, n_sub, k, rho_cp):
    if dims == 1:
        mesh = Mesh1D(2 * n_sub, 2.0)
        system = assemble_1d(mesh, k, rho_cp, initial=lambda x: np.cos(np.pi * x / 2))
        return partition_1d(system, 2)
    mesh = Mesh2D(2 * n_sub, 2 * n_sub, 2.0, 2.0)
    system = assemble_2d(mesh, k, rho_cp,
                         initial=lambda c: np.cos(np.pi * c[:, 0] / 2) * np.cos(np.pi * c[:, 1] / 2))
    return partition_2d(system)


def _heat_errors(problem, lvl, dims, k, rho_cp):
    ref = problem.reference
    d = ref.full(problem.gather(lvl.d))
    v = np.zeros(ref.mesh.n_nodes)
    v[ref.free] = problem.gather(lvl.v)
    t = lvl.t
    if dims == 1:
        ed = l2_error(d, lambda x: analytic.heat1d_neumann(x, t, k, rho_cp), ref.mesh)
        ev = l2_error(v, lambda x: analytic.heat1d_neumann_rate(x, t, k, rho_cp), ref.mesh)
    else:
        ed = l2_error(d, lambda x, y: analytic.heat2d_neumann(x, y, t, k, rho_cp), ref.mesh)
        ev = l2_error(v, lambda x, y: analytic.heat2d_neumann_rate(x, y, t, k, rho_cp), ref.mesh)
    return ed, ev, d, v


def run_heat(cfg: ExperimentConfig) -> CsvTable:
    """Insulated bar (``heat1d``) or square (``heat2d``) with cosine start.

    Snapshot rows at the requested times land in ``table.extra["snapshots"]``
    as their own ``CsvTable``.
    """
    dims = 1 if cfg.experiment == "heat1d" else 2
    k, rc = cfg.conductivity, cfg.capacity_density
    problem = _heat_problem(dims, cfg.mesh, k, rc)
    coords = problem.reference.mesh.node_coords.reshape(problem.reference.mesh.n_nodes, -1)
    snap_cols = ["t", "x"] + (["y"] if dims == 2 else []) + ["u", "u_exact", "v", "v_exact"]
    snaps = CsvTable(snap_cols)
    wanted = {int(round(s / cfg.dt)) for s in cfg.snapshots}
    header = ["n", "t", "l2_error_d", "l2_error_v", *_DIAG, "diverged"]

    def row(lvl, rec):
        ed, ev, d, v = _heat_errors(problem, lvl, dims, k, rc)
        if lvl.n in wanted:
            if dims == 1:
                ue = analytic.heat1d_neumann(coords[:, 0], lvl.t, k, rc)
                ve = analytic.heat1d_neumann_rate(coords[:, 0], lvl.t, k, rc)
            else:
                ue = analytic.heat2d_neumann(coords[:, 0], coords[:, 1], lvl.t, k, rc)
                ve = analytic.heat2d_neumann_rate(coords[:, 0], coords[:, 1], lvl.t, k, rc)
            for i in range(coords.shape[0]):
                snaps.append([lvl.t, *coords[i], d[i], ue[i], v[i], ve[i]])
        return [ed, ev]

    table, _, diverged = _run_levels(problem, cfg, header, row, 1.0)
    table.extra["snapshots"] = snaps
    ed = table.column("l2_error_d")
    return _finish(table, 1.0, diverged,
                   final_l2_error_d=float(ed[-1]) if not diverged else math.nan)


def _final_errors(cfg: ExperimentConfig, n_sub: int):
    k, rc = cfg.conductivity, cfg.capacity_density
    problem = _heat_problem(cfg.dims, n_sub, k, rc)
    last = None
    for lvl in simulate(problem, cfg.coupling, cfg.trapezoid, cfg.n_steps):
        last = lvl
    ed, ev, _, _ = _heat_errors(problem, last, cfg.dims, k, rc)
    return 2.0 / (2 * n_sub), problem.reference.n_dof, ed, ev


def run_convergence(cfg: ExperimentConfig) -> CsvTable:
    """L2 errors at ``t_end`` over meshes with ``levels`` elements per subdomain direction.

    ``rate`` is ``log2(e(h) / e(h/2))``; levels should double.
    """
    header = ["elements", "h", "n_dof", "l2_error_d", "l2_error_v", "rate_d", "rate_v"]
    table = CsvTable(header)
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        results = list(pool.map(lambda n: _final_errors(cfg, n), cfg.levels))
    prev = None
    for n_sub, (h, ndof, ed, ev) in zip(cfg.levels, results):
        if prev is None:
            rd = rv = math.nan
        else:
            ratio = prev[0] / h
            rd = math.log(prev[1] / ed) / math.log(ratio)
            rv = math.log(prev[2] / ev) / math.log(ratio)
        table.append([n_sub, h, ndof, ed, ev, rd, rv])
        prev = (h, ed, ev)
    rates = table.column("rate_d")
    table.summary.update(verdict="completed", rate_d=float(rates[-1]),
                         rate_v=float(table.column("rate_v")[-1]),
                         rates_d=[float(r) for r in rates[1:]])
    return table


def baumgarte_problem(n_sub: int = 10, k: float = 1.0, rho_cp: float = 1.0):
    """Bar ``[0, 2]``, zero flux at 0, zero temperature at 2, unit start, two subdomains."""
    mesh = Mesh1D(2 * n_sub, 2.0)
    system = assemble_1d(mesh, k, rho_cp, initial=np.ones(mesh.n_nodes),
                         dirichlet={mesh.n_nodes - 1: 0.0})
    return partition_1d(system, 2)


def run_baumgarte(cfg: ExperimentConfig) -> CsvTable:
    problem = baumgarte_problem(cfg.mesh, cfg.conductivity, cfg.capacity_density)
    method = cfg.coupling
    omegas = [max_generalized_eigenvalue(s.M, s.K, seed=cfg.seed) for s in problem.subdomains]
    crit = [stability.critical_time_step(s.M, s.K, cfg.gamma, w)
            for s, w in zip(problem.subdomains, omegas)]
    info = dict(omega_max=omegas, critical_dt=crit,
                alpha_max=stability.baumgarte_alpha_max(cfg.gamma))
    if isinstance(method, Baumgarte):
        try:
            info["baumgarte_critical_dt"] = [stability.baumgarte_critical_dt(cfg.gamma, method.alpha, w)
                                             for w in omegas]
        except stability.AlphaOutOfRange:
            info["baumgarte_critical_dt"] = [0.0 for _ in omegas]
    ratio = cfg.dt / method.alpha if isinstance(method, Baumgarte) else math.nan
    header = ["n", "t", "lambda", "d_interface_A", "d_interface_B", "drift_identity_gap",
              *_DIAG, "diverged"]

    def row(lvl, rec):
        gap = abs(rec.drift_d - ratio * rec.drift_v)
        return [lvl.lam[0], lvl.d[0][-1], lvl.d[1][0], gap]

    table, _, diverged = _run_levels(problem, cfg, header, row, 1.0)
    drift = table.column("drift_d_inf")
    gaps = table.column("drift_identity_gap")
    ok = ~np.isnan(gaps)
    return _finish(table, 1.0, diverged, **info,
                   max_drift_d_inf=float(np.nanmax(drift)),
                   max_drift_identity_gap=float(np.max(gaps[ok])) if ok.any() else math.nan)


def run_counterexample(cfg: ExperimentConfig) -> CsvTable:
    s, w = stability.counterexample_sequence(cfg.gamma, cfg.n_terms)
    table = CsvTable(["n", "s", "s_weighted"])
    for n in range(s.size):
        table.append([n, s[n], w[n] if n < w.size else math.nan])
    growth = float(abs(s[-1] / s[-2])) if s.size > 2 and s[-2] != 0 else math.nan
    table.summary.update(verdict="unbounded-integer-sequence", n_terms=int(s.size),
                         max_abs_s=float(np.max(np.abs(s))),
                         max_abs_weighted=float(np.max(np.abs(w))) if w.size else 0.0,
                         growth_ratio=growth)
    return table


_RUNNERS = {
    "split-dof": run_split_dof,
    "heat1d": run_heat,
    "heat2d": run_heat,
    "converge": run_convergence,
    "baumgarte": run_baumgarte,
    "counterexample": run_counterexample,
}


def run(cfg: ExperimentConfig) -> CsvTable:
    return _RUNNERS[cfg.experiment](cfg)


def sweep(configs: Sequence[ExperimentConfig], workers: int = 4) -> list[CsvTable]:
    """Run independent configurations concurrently."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))


def with_updates(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **changes)
