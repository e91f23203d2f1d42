"""Time stepping for the decomposed system under four coupling methods.

Every subdomain uses the same generalized trapezoidal scheme::

    M_i v_i + K_i d_i = f_i + C_i^T lam
    d_i^(n) = d_i^(n-1) + dt ((1 - gamma) v_i^(n-1) + gamma v_i^(n))

and the methods differ only in which interface condition closes the system:

* ``DContinuity``: ``sum C_i d_i^(n) = 0`` at integer levels.
* ``ModifiedDContinuity``: balance at ``n + gamma``, ``sum C_i d_i^(n+1) = 0``.
* ``VContinuity``: ``sum C_i v_i^(n) = 0``.
* ``Baumgarte(alpha)``: ``sum C_i (v_i^(n) + alpha / dt d_i^(n)) = 0``.

Each step eliminates the subdomain unknowns, solves the interface problem
``G lam = R`` with a Cholesky factor of ``G = sum C_i Mt_i^{-1} C_i^T``
(``Mt_i = M_i + gamma dt K_i``) and back-substitutes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .decomposition import DecomposedProblem
from .exceptions import Diverged, IllPosedForwardEuler
from .fem import SemiDiscreteSystem
from .linalg import CholeskyFactor, as_operator, as_symmetric, spd_factor

BLOWUP = 1e100


@dataclass(frozen=True)
class TrapezoidalConfig:
    gamma: float
    dt: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class DContinuity:
    name = "d"
    needs_implicit = True


@dataclass(frozen=True)
class ModifiedDContinuity:
    name = "modified-d"
    needs_implicit = True


@dataclass(frozen=True)
class VContinuity:
    name = "v"
    needs_implicit = False


@dataclass(frozen=True)
class Baumgarte:
    alpha: float
    name = "baumgarte"
    needs_implicit = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("the Baumgarte parameter must be positive")


CouplingMethod = DContinuity | ModifiedDContinuity | VContinuity | Baumgarte

METHOD_NAMES = ("d", "modified-d", "v", "baumgarte")


def method_from_name(name: str, alpha: float | None = None) -> CouplingMethod:
    key = name.lower().replace("_", "-")
    if key in ("d", "d-continuity"):
        return DContinuity()
    if key in ("modified-d", "modified", "modified-d-continuity", "mod-d"):
        return ModifiedDContinuity()
    if key in ("v", "v-continuity"):
        return VContinuity()
    if key == "baumgarte":
        if alpha is None:
            raise ValueError("Baumgarte coupling needs alpha")
        return Baumgarte(alpha)
    raise ValueError(f"unknown coupling method {name!r}")


def check_well_posed(method: CouplingMethod, cfg: TrapezoidalConfig) -> None:
    if method.needs_implicit and cfg.gamma == 0.0:
        raise IllPosedForwardEuler(
            f"{method.name}-continuity coupling is under-determined with gamma = 0"
        )


@dataclass(frozen=True, eq=False)
class CouplingState:
    """Per-subdomain ``d`` and ``v`` plus the interface multipliers.

    ``weighted`` marks states whose ``v`` and ``lam`` live at level
    ``n - 1 + gamma`` (the output of the modified d-continuity step) while
    ``d`` is at the integer level ``n``.
    """
    t: float
    d: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    lam: np.ndarray
    n: int = 0
    weighted: bool = False

    def max_abs(self) -> float:
        vals = [np.max(np.abs(x), initial=0.0) for x in (*self.d, *self.v, self.lam)]
        return float(max(vals))


class SchurOperator:
    """Factored interface operator for a fixed ``(gamma, dt)``."""

    def __init__(self, problem: DecomposedProblem, cfg: TrapezoidalConfig):
        self.cfg = cfg
        gdt = cfg.gamma * cfg.dt
        self.mass = [as_operator(s.M) for s in problem.subdomains]
        self.stiff = [as_operator(s.K) for s in problem.subdomains]
        self.factors = [spd_factor(m + gdt * k) for m, k in zip(self.mass, self.stiff)]
        # Mt_i^{-1} C_i^T, one column per constraint
        self.flex = [f.solve(s.C.T) for f, s in zip(self.factors, problem.subdomains)]
        g = sum(s.C.dense @ y for s, y in zip(problem.subdomains, self.flex))
        self.G = as_symmetric(g, rtol=1e-10)
        self.G_factor = CholeskyFactor(self.G)

    def solve_interface(self, r: np.ndarray) -> np.ndarray:
        return self.G_factor.solve(r)


def build_schur(problem: DecomposedProblem, cfg: TrapezoidalConfig,
                method: CouplingMethod | None = None) -> SchurOperator:
    if method is not None:
        check_well_posed(method, cfg)
    return SchurOperator(problem, cfg)


def _guard(state: CouplingState) -> CouplingState:
    m = state.max_abs()
    if not np.isfinite(m) or m > BLOWUP:
        raise Diverged(f"state norm {m:.3e} exceeded {BLOWUP:.0e} at t = {state.t:.6g}",
                       state=state)
    return state


def _forcing(problem, t):
    return [s.forcing(t) if s.has_forcing else None for s in problem.subdomains]


def step_d_continuity(state: CouplingState, problem: DecomposedProblem,
                      cfg: TrapezoidalConfig, schur: SchurOperator | None = None) -> CouplingState:
    """Advance ``(d, v, lam)`` from level ``n - 1`` to ``n``."""
    check_well_posed(DContinuity(), cfg)
    schur = schur or SchurOperator(problem, cfg)
    g, dt = cfg.gamma, cfg.dt
    gdt = g * dt
    t = state.t + dt
    fs = _forcing(problem, t)
    xs = []
    for m, fac, d, v, f in zip(schur.mass, schur.factors, state.d, state.v, fs):
        rhs = m @ (d + (1 - g) * dt * v)
        if f is not None:
            rhs = rhs + gdt * f
        xs.append(fac.solve(rhs))
    lam = -schur.solve_interface(problem.constraint_residual(xs)) / gdt
    d_new, v_new = [], []
    for x, y, d, v in zip(xs, schur.flex, state.d, state.v):
        dn = x + gdt * (y @ lam)
        d_new.append(dn)
        v_new.append((dn - d) / gdt - ((1 - g) / g) * v)
    return _guard(CouplingState(t, tuple(d_new), tuple(v_new), lam, state.n + 1))


def step_modified_d_continuity(state: CouplingState, problem: DecomposedProblem,
                               cfg: TrapezoidalConfig,
                               schur: SchurOperator | None = None) -> CouplingState:
    """Advance ``d`` from ``n`` to ``n + 1``.

    The returned state holds ``d^(n+1)`` with the weighted ``v^(n+gamma)``
    and ``lam^(n+gamma)``; integer-level values come from
    :func:`interpolate_integer_levels` once the next step is known.
    """
    check_well_posed(ModifiedDContinuity(), cfg)
    schur = schur or SchurOperator(problem, cfg)
    g, dt = cfg.gamma, cfg.dt
    t0, t1 = state.t, state.t + dt
    f0, f1 = _forcing(problem, t0), _forcing(problem, t1)
    xs = []
    for m, k, fac, d, fa, fb in zip(schur.mass, schur.stiff, schur.factors, state.d, f0, f1):
        rhs = m @ d - (1 - g) * dt * (k @ d)
        if fa is not None:
            rhs = rhs + dt * ((1 - g) * fa + g * fb)
        xs.append(fac.solve(rhs))
    lam = -schur.solve_interface(problem.constraint_residual(xs)) / dt
    d_new, v_new = [], []
    for x, y, d in zip(xs, schur.flex, state.d):
        dn = x + dt * (y @ lam)
        d_new.append(dn)
        v_new.append((dn - d) / dt)
    return _guard(CouplingState(t1, tuple(d_new), tuple(v_new), lam, state.n + 1,
                                weighted=True))


def _v_type_step(state, problem, cfg, schur, alpha):
    schur = schur or SchurOperator(problem, cfg)
    g, dt = cfg.gamma, cfg.dt
    t = state.t + dt
    fs = _forcing(problem, t)
    xs, avec = [], []
    for k, fac, d, v, f in zip(schur.stiff, schur.factors, state.d, state.v, fs):
        a = d + (1 - g) * dt * v
        rhs = -(k @ a)
        if f is not None:
            rhs = rhs + f
        xs.append(fac.solve(rhs))
        avec.append(a)
    r = problem.constraint_residual(xs)
    if alpha is not None:
        r = r + (alpha / (dt * (1 + alpha * g))) * problem.constraint_residual(avec)
    lam = -schur.solve_interface(r)
    d_new, v_new = [], []
    for x, y, a in zip(xs, schur.flex, avec):
        vn = x + y @ lam
        v_new.append(vn)
        d_new.append(a + g * dt * vn)
    return _guard(CouplingState(t, tuple(d_new), tuple(v_new), lam, state.n + 1))


def step_v_continuity(state: CouplingState, problem: DecomposedProblem,
                      cfg: TrapezoidalConfig, schur: SchurOperator | None = None) -> CouplingState:
    return _v_type_step(state, problem, cfg, schur, None)


def step_baumgarte(state: CouplingState, problem: DecomposedProblem,
                   cfg: TrapezoidalConfig, alpha: float,
                   schur: SchurOperator | None = None) -> CouplingState:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return _v_type_step(state, problem, cfg, schur, alpha)


def step(state: CouplingState, problem: DecomposedProblem, cfg: TrapezoidalConfig,
         method: CouplingMethod, schur: SchurOperator | None = None) -> CouplingState:
    if isinstance(method, DContinuity):
        return step_d_continuity(state, problem, cfg, schur)
    if isinstance(method, ModifiedDContinuity):
        return step_modified_d_continuity(state, problem, cfg, schur)
    if isinstance(method, VContinuity):
        return step_v_continuity(state, problem, cfg, schur)
    if isinstance(method, Baumgarte):
        return step_baumgarte(state, problem, cfg, method.alpha, schur)
    raise TypeError(f"unknown coupling method {method!r}")


def interpolate_integer_levels(prev, curr, gamma: float):
    """Integer-level value from two consecutive weighted values.

    ``x^(n) = gamma x^(n-1+gamma) + (1 - gamma) x^(n+gamma)``. ``prev`` and
    ``curr`` may be arrays or equal-length sequences of arrays.
    """
    if isinstance(prev, (list, tuple)):
        return type(prev)(gamma * np.asarray(p) + (1 - gamma) * np.asarray(c)
                          for p, c in zip(prev, curr))
    return gamma * np.asarray(prev) + (1 - gamma) * np.asarray(curr)


def weighted_level(curr, nxt, gamma: float):
    """``x^(n+gamma) = (1 - gamma) x^(n) + gamma x^(n+1)``."""
    if isinstance(curr, (list, tuple)):
        return type(curr)((1 - gamma) * np.asarray(a) + gamma * np.asarray(b)
                          for a, b in zip(curr, nxt))
    return (1 - gamma) * np.asarray(curr) + gamma * np.asarray(nxt)


def initial_state(problem: DecomposedProblem, method: CouplingMethod | None = None,
                  cfg: TrapezoidalConfig | None = None, t0: float = 0.0,
                  d0: Sequence[np.ndarray] | None = None) -> CouplingState:
    """Consistent start: ``v^(0)`` and ``lam^(0)`` from the balance at ``t0``.

    Solves ``M_i v_i + K_i d_i = f_i + C_i^T lam`` together with the rate
    form of the method's interface condition (``sum C_i v_i = 0``, or
    ``sum C_i v_i = -(alpha / dt) sum C_i d_i`` for Baumgarte).
    """
    d = tuple(np.array(x, dtype=float) for x in (d0 if d0 is not None
                                                  else [s.initial for s in problem.subdomains]))
    facs = [spd_factor(as_operator(s.M)) for s in problem.subdomains]
    xs, ys = [], []
    for s, fac, di in zip(problem.subdomains, facs, d):
        rhs = -(as_operator(s.K) @ di)
        if s.has_forcing:
            rhs = rhs + s.forcing(t0)
        xs.append(fac.solve(rhs))
        ys.append(fac.solve(s.C.T))
    g = sum(s.C.dense @ y for s, y in zip(problem.subdomains, ys))
    target = np.zeros(problem.n_constraints)
    if isinstance(method, Baumgarte):
        target = -(method.alpha / cfg.dt) * problem.constraint_residual(d)
    lam = CholeskyFactor(g).solve(target - problem.constraint_residual(xs))
    v = tuple(x + y @ lam for x, y in zip(xs, ys))
    return CouplingState(t0, d, v, lam, 0)


@dataclass(frozen=True, eq=False)
class Level:
    """Integer-level solution at ``t_n`` with the ``n + gamma`` rates/multipliers."""
    n: int
    t: float
    d: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    lam: np.ndarray
    v_weighted: tuple[np.ndarray, ...]
    lam_weighted: np.ndarray


def simulate(problem: DecomposedProblem, method: CouplingMethod, cfg: TrapezoidalConfig,
             n_steps: int, state: CouplingState | None = None) -> Iterator[Level]:
    """Yield levels ``0 .. n_steps``.

    One extra step is taken internally because the weighted quantities for
    level ``n`` (and, for the modified method, the integer rates) depend on
    the step that follows it. ``Diverged`` propagates from the stepper after
    every completed level has been yielded.
    """
    check_well_posed(method, cfg)
    schur = build_schur(problem, cfg, method)
    state = state or initial_state(problem, method, cfg)
    g = cfg.gamma
    if isinstance(method, ModifiedDContinuity):
        # w holds d^(n+1) with v^(n+gamma), lam^(n+gamma)
        w = step_modified_d_continuity(state, problem, cfg, schur)
        yield Level(0, state.t, state.d, state.v, state.lam, w.v, w.lam)
        for n in range(1, n_steps + 1):
            w_next = step_modified_d_continuity(w, problem, cfg, schur)
            yield Level(n, w.t, w.d,
                        interpolate_integer_levels(w.v, w_next.v, g),
                        interpolate_integer_levels(w.lam, w_next.lam, g),
                        w_next.v, w_next.lam)
            w = w_next
        return
    cur = state
    for n in range(n_steps + 1):
        nxt = step(cur, problem, cfg, method, schur)
        yield Level(n, cur.t, cur.d, cur.v, cur.lam,
                    weighted_level(cur.v, nxt.v, g), weighted_level(cur.lam, nxt.lam, g))
        cur = nxt


def monolithic_initial_rate(system: SemiDiscreteSystem, d0=None, t0: float = 0.0) -> np.ndarray:
    d0 = system.initial if d0 is None else np.asarray(d0, dtype=float)
    return CholeskyFactor(system.M).solve(system.forcing(t0) - system.K @ d0)


def step_monolithic(system: SemiDiscreteSystem, d, v, t: float, cfg: TrapezoidalConfig,
                    factor: CholeskyFactor | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One undecomposed trapezoidal step from ``(d, v)`` at ``t`` to ``t + dt``.

    ``factor`` is an optional Cholesky factor of ``M + gamma dt K`` to reuse
    across steps.
    """
    g, dt = cfg.gamma, cfg.dt
    factor = factor or CholeskyFactor(system.M + g * dt * system.K)
    a = np.asarray(d) + (1 - g) * dt * np.asarray(v)
    v_new = factor.solve(system.forcing(t + dt) - system.K @ a)
    return a + g * dt * v_new, v_new


def simulate_monolithic(system: SemiDiscreteSystem, cfg: TrapezoidalConfig, n_steps: int,
                        d0=None, v0=None) -> Iterator[tuple[float, np.ndarray, np.ndarray]]:
    """Yield ``(t_n, d^(n), v^(n))`` for ``n = 0 .. n_steps``."""
    d = system.initial.copy() if d0 is None else np.asarray(d0, dtype=float)
    v = monolithic_initial_rate(system, d) if v0 is None else np.asarray(v0, dtype=float)
    factor = CholeskyFactor(system.M + cfg.gamma * cfg.dt * system.K)
    yield 0.0, d, v
    for n in range(1, n_steps + 1):
        d, v = step_monolithic(system, d, v, (n - 1) * cfg.dt, cfg, factor)
        yield n * cfg.dt, d, v
