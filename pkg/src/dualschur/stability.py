"""Energy-method stability diagnostics for the coupled schemes.

Critical time steps, Baumgarte parameter bounds, per-step energy and drift
records, and the scalar sequences that show when a bounded weighted
sequence ``s^(n+gamma) = (1 - gamma) s^(n) + gamma s^(n+1)`` forces the
integer sequence to be bounded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decomposition import DecomposedProblem
from .exceptions import AlphaOutOfRange, GammaOutOfRange, NotPositiveDefinite
from .linalg import as_operator, as_symmetric, max_generalized_eigenvalue, spd_factor
from .steppers import Baumgarte, BLOWUP, CouplingMethod, TrapezoidalConfig

BOUNDED_FACTOR = 1e3
UNBOUNDED_FACTOR = 1e6


def _gap(gamma: float) -> float:
    """``|1 - 2 gamma|``, computed so that e.g. gamma = 0.1 gives exactly 0.8."""
    return abs(1.0 - 2.0 * gamma)


def critical_time_step(M, K, gamma: float, omega_max: float | None = None) -> float:
    """Largest stable step of the unconstrained scheme on ``(M, K)``.

    ``2 / (omega_max (1 - 2 gamma))`` for ``gamma < 1/2``, ``inf`` otherwise.
    """
    if not 0.0 <= gamma <= 1.0:
        raise GammaOutOfRange(f"gamma must lie in [0, 1], got {gamma}")
    if gamma >= 0.5:
        return math.inf
    if omega_max is None:
        omega_max = max_generalized_eigenvalue(M, K)
    if omega_max == 0.0:
        return math.inf
    return 2.0 / (omega_max * _gap(gamma))


def baumgarte_alpha_max(gamma: float) -> float:
    """Upper bound ``1 / |gamma - 1/2|`` on the Baumgarte parameter."""
    if not 0.0 <= gamma <= 1.0:
        raise GammaOutOfRange(f"gamma must lie in [0, 1], got {gamma}")
    if gamma >= 0.5:
        return math.inf
    return 2.0 / _gap(gamma)


def alpha_star(gamma: float, alpha: float) -> float:
    return 1.0 + alpha * (gamma - 0.5)


def baumgarte_critical_dt(gamma: float, alpha: float, omega_max: float) -> float:
    """``alpha* / (|gamma - 1/2| omega_max)`` with ``alpha* = 1 + alpha (gamma - 1/2)``."""
    if gamma >= 0.5:
        return math.inf
    if omega_max < 0:
        raise ValueError("omega_max must be non-negative")
    a_max = baumgarte_alpha_max(gamma)
    if alpha > a_max * (1 + 1e-12):
        raise AlphaOutOfRange(f"alpha = {alpha} exceeds the bound {a_max} for gamma = {gamma}")
    if omega_max == 0.0:
        return math.inf
    a_star = max(1.0 - alpha * _gap(gamma) / 2.0, 0.0)
    return 2.0 * a_star / (_gap(gamma) * omega_max)


@dataclass(frozen=True)
class StepRecord:
    t: float
    energy_d: float
    energy_v: float
    drift_d: float
    drift_d_inf: float
    drift_d_1: float
    drift_v: float
    drift_v_inf: float
    drift_v_1: float
    lambda_norm: float
    state_max: float
    diverged: bool = False


@dataclass(eq=False)
class EnergyMonitor:
    """Accumulates energy and drift diagnostics along one run.

    ``energy_d`` is ``sum d_i^T A_i d_i`` with ``A_i = M_i + (gamma - 1/2) dt
    K_i``. ``energy_v`` uses ``A_i`` as well, except for Baumgarte coupling
    where the conserved-decreasing form is ``alpha M_i + dt K_i``.
    """
    problem: DecomposedProblem
    cfg: TrapezoidalConfig
    method: CouplingMethod | None = None
    history: list[StepRecord] = field(default_factory=list)

    def __post_init__(self):
        shift = (self.cfg.gamma - 0.5) * self.cfg.dt
        subs = self.problem.subdomains
        self.A = [as_operator(as_symmetric(s.M + shift * s.K)) for s in subs]
        if isinstance(self.method, Baumgarte):
            a, dt = self.method.alpha, self.cfg.dt
            self.V = [as_operator(as_symmetric(a * s.M + dt * s.K)) for s in subs]
        else:
            self.V = self.A
        self._admissible = None

    @property
    def admissible(self) -> bool:
        """All ``A_i`` positive definite (checked on first use)."""
        if self._admissible is None:
            self._admissible = all(_is_spd(a) for a in self.A)
        return self._admissible

    def energy_d(self, d) -> float:
        return float(sum(x @ a @ x for a, x in zip(self.A, d)))

    def energy_v(self, v) -> float:
        return float(sum(x @ a @ x for a, x in zip(self.V, v)))

    def energies_d(self) -> np.ndarray:
        return np.array([r.energy_d for r in self.history])

    def energies_v(self) -> np.ndarray:
        return np.array([r.energy_v for r in self.history])


def _is_spd(a) -> bool:
    try:
        spd_factor(a)
    except NotPositiveDefinite:
        return False
    return True


def energy_step(state, monitor: EnergyMonitor) -> StepRecord:
    """Record diagnostics for one solution level.

    ``state`` is anything with ``t``, ``d``, ``v`` and ``lam`` attributes
    (a ``CouplingState`` or a ``Level`` from ``simulate``).
    """
    p = monitor.problem
    cd = p.constraint_residual(state.d)
    cv = p.constraint_residual(state.v)
    vals = [np.max(np.abs(x), initial=0.0) for x in (*state.d, *state.v, state.lam)]
    smax = float(max(vals))
    rec = StepRecord(
        t=float(state.t),
        energy_d=monitor.energy_d(state.d),
        energy_v=monitor.energy_v(state.v),
        drift_d=float(np.linalg.norm(cd)),
        drift_d_inf=float(np.max(np.abs(cd), initial=0.0)),
        drift_d_1=float(np.sum(np.abs(cd))),
        drift_v=float(np.linalg.norm(cv)),
        drift_v_inf=float(np.max(np.abs(cv), initial=0.0)),
        drift_v_1=float(np.sum(np.abs(cv))),
        lambda_norm=float(np.linalg.norm(state.lam)),
        state_max=smax,
        diverged=not np.isfinite(smax) or smax > BLOWUP,
    )
    monitor.history.append(rec)
    return rec


def is_non_increasing(values, rtol: float = 1e-12) -> bool:
    """Each entry is at most the previous one, up to ``rtol`` of the first."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return True
    slack = rtol * max(abs(values[0]), np.max(np.abs(values)) * 1e-3, np.finfo(float).tiny)
    return bool(np.all(np.diff(values) <= slack))


def verdict(series, scale: float) -> str:
    """Classify a run from its per-step maxima.

    ``bounded`` when the maximum stays within ``1e3 * scale``; ``unbounded``
    when it exceeds ``1e6 * scale`` and the running envelope keeps growing;
    ``inconclusive`` in between.
    """
    series = np.abs(np.asarray(series, dtype=float))
    if series.size == 0:
        return "bounded"
    if not np.all(np.isfinite(series)):
        return "unbounded"
    peak = series.max()
    if peak <= BOUNDED_FACTOR * scale:
        return "bounded"
    if peak > UNBOUNDED_FACTOR * scale and growing_envelope(series):
        return "unbounded"
    return "inconclusive"


def growing_envelope(series, windows: int = 4) -> bool:
    """True if the running maximum strictly increases over the last windows."""
    env = np.maximum.accumulate(np.abs(np.asarray(series, dtype=float)))
    if env.size < windows + 1:
        return bool(env[-1] > env[0])
    idx = np.unique(np.linspace(env.size // 2, env.size - 1, windows + 1).astype(int))
    return bool(np.all(np.diff(env[idx]) > 0))


def jump_average_identities_check(x_n, x_n1, gamma: float, S, rtol: float = 1e-12) -> bool:
    """Check the two jump/average identities for a pair of levels.

    ``(1 - g) x^n + g x^(n+1) = (g - 1/2) [x] + {x}`` and
    ``{x}^T S [x] = 1/2 [x^T S x]`` for symmetric ``S``.
    """
    x0 = np.asarray(x_n, dtype=float)
    x1 = np.asarray(x_n1, dtype=float)
    S = as_symmetric(S)
    jump = x1 - x0
    avg = 0.5 * (x1 + x0)
    lhs = (1 - gamma) * x0 + gamma * x1
    rhs = (gamma - 0.5) * jump + avg
    scale = max(np.max(np.abs(x0), initial=0.0), np.max(np.abs(x1), initial=0.0), 1e-300)
    first = np.max(np.abs(lhs - rhs), initial=0.0) <= rtol * scale * 4
    q_l = float(avg @ S @ jump)
    q_r = 0.5 * (float(x1 @ S @ x1) - float(x0 @ S @ x0))
    qscale = max(np.max(np.abs(S), initial=0.0) * scale ** 2 * x0.size, 1e-300)
    second = abs(q_l - q_r) <= rtol * qscale * 4
    return bool(first and second)


def counterexample_sequence(gamma: float, n_terms: int) -> tuple[np.ndarray, np.ndarray]:
    """Bounded weighted sequence whose integer sequence is unbounded.

    For ``gamma = 1/2`` the weighted values alternate ``+1, -1, ...`` and
    ``s = 0, 2, -4, 6, ...``. For ``gamma < 1/2`` the weighted values are the
    constant 1 and ``s`` follows from ``s^(0) = 0``. Returns ``(s, weighted)``
    with ``len(weighted) == n_terms - 1``.
    """
    if not 0.0 < gamma <= 0.5:
        raise GammaOutOfRange(f"counterexamples exist only for 0 < gamma <= 1/2, got {gamma}")
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    k = np.arange(n_terms - 1)
    if gamma == 0.5:
        weighted = np.where(k % 2 == 0, 1.0, -1.0)
    else:
        weighted = np.ones(n_terms - 1)
    s = proposition_bounded_reconstruction(weighted, 0.0, gamma)
    return s, weighted


def proposition_bounded_reconstruction(weighted, s0: float, gamma: float) -> np.ndarray:
    """Recover ``s^(0..N)`` from ``s^(0)`` and ``s^(n+gamma)``, ``n < N``.

    ``s^(n+1) = (s^(n+gamma) - (1 - gamma) s^(n)) / gamma``.
    """
    if not 0.0 < gamma <= 1.0:
        raise GammaOutOfRange(f"reconstruction needs 0 < gamma <= 1, got {gamma}")
    weighted = np.asarray(weighted, dtype=float)
    s = np.empty(weighted.size + 1)
    s[0] = s0
    c = (1.0 - gamma) / gamma
    for n, w in enumerate(weighted):
        s[n + 1] = w / gamma - c * s[n]
    return s


def reconstruction_bound(weighted_bound: float, s0: float, gamma: float) -> float:
    """``max(|s0|, M / (2 gamma - 1))``, valid for ``gamma > 1/2``."""
    if gamma <= 0.5:
        return math.inf
    return max(abs(s0), weighted_bound / (2.0 * gamma - 1.0))
