"""Independent reference solutions for one coupled step.

Each function assembles the full block system (subdomain balances,
trapezoidal relations, constraint rows) and solves it with numpy directly,
with no elimination or Schur complement.
"""
import numpy as np


def _layout(problem):
    sizes = [s.n_dof for s in problem.subdomains]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    return sizes, offs, int(offs[-1]), problem.n_constraints


def _split(x, offs, n_sub):
    return [x[offs[i]:offs[i + 1]] for i in range(n_sub)]


def full_step(problem, d, v, t, gamma, dt, kind, alpha=None):
    """Integer-level step for ``kind`` in {"d", "v", "baumgarte"}.

    Unknowns ``[d_1..d_S, v_1..v_S, lam]``.
    """
    sizes, offs, n, m = _layout(problem)
    S = len(sizes)
    A = np.zeros((2 * n + m, 2 * n + m))
    b = np.zeros(2 * n + m)
    for i, s in enumerate(problem.subdomains):
        di = slice(offs[i], offs[i + 1])
        vi = slice(n + offs[i], n + offs[i + 1])
        # balance
        A[di, di] = s.K
        A[di, vi] = s.M
        A[di, 2 * n:] = -s.C.dense.T
        b[di] = s.forcing(t + dt)
        # trapezoidal relation
        A[vi, di] = np.eye(sizes[i])
        A[vi, vi] = -gamma * dt * np.eye(sizes[i])
        b[vi] = d[i] + (1 - gamma) * dt * v[i]
        # constraint
        cd = s.C.dense
        if kind == "d":
            A[2 * n:, di] = cd
        elif kind == "v":
            A[2 * n:, vi] = cd
        else:
            A[2 * n:, vi] = cd
            A[2 * n:, di] = (alpha / dt) * cd
    x = np.linalg.solve(A, b)
    return _split(x[:n], offs, S), _split(x[n:2 * n], offs, S), x[2 * n:]


def full_modified_step(problem, d, t, gamma, dt):
    """Balance at ``n + gamma`` and constraint at ``n + 1``.

    Unknowns ``[d_1^(n+1)..d_S^(n+1), lam^(n+gamma)]``; returns
    ``(d_new, v_weighted, lam_weighted)``.
    """
    sizes, offs, n, m = _layout(problem)
    S = len(sizes)
    A = np.zeros((n + m, n + m))
    b = np.zeros(n + m)
    for i, s in enumerate(problem.subdomains):
        di = slice(offs[i], offs[i + 1])
        A[di, di] = s.M / dt + gamma * s.K
        A[di, n:] = -s.C.dense.T
        b[di] = s.M @ d[i] / dt - (1 - gamma) * s.K @ d[i]
        b[di] += (1 - gamma) * s.forcing(t) + gamma * s.forcing(t + dt)
        A[n:, di] = s.C.dense
    x = np.linalg.solve(A, b)
    d_new = _split(x[:n], offs, S)
    v_w = [(a - c) / dt for a, c in zip(d_new, d)]
    return d_new, v_w, x[n:]
