"""Closed-form reference solutions."""
from __future__ import annotations

import numpy as np

SERIES_TOL = 1e-14
SERIES_MAX_TERMS = 10_000


def heat1d_neumann(x, t, k=1.0, rho_cp=1.0):
    """Insulated bar on ``[0, 2]`` started from ``cos(pi x / 2)``."""
    x = np.asarray(x, dtype=float)
    return np.exp(-(k / rho_cp) * (np.pi ** 2 / 4) * t) * np.cos(np.pi * x / 2)


def heat1d_neumann_rate(x, t, k=1.0, rho_cp=1.0):
    return -(k / rho_cp) * (np.pi ** 2 / 4) * heat1d_neumann(x, t, k, rho_cp)


def heat2d_neumann(x, y, t, k=1.0, rho_cp=1.0):
    """Insulated square ``[0, 2]^2`` started from ``cos(pi x / 2) cos(pi y / 2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (np.exp(-(k / rho_cp) * (np.pi ** 2 / 2) * t)
            * np.cos(np.pi * x / 2) * np.cos(np.pi * y / 2))


def heat2d_neumann_rate(x, y, t, k=1.0, rho_cp=1.0):
    return -(k / rho_cp) * (np.pi ** 2 / 2) * heat2d_neumann(x, y, t, k, rho_cp)


def heat1d_mixed_series(x, t, L=2.0, n_terms=SERIES_MAX_TERMS, diffusivity=1.0):
    """Bar of length ``L``, zero flux at 0, zero temperature at ``L``, unit start.

    Fourier cosine series of the separation-of-variables solution,
    ``(4/pi) sum (-1)^n / (2n+1) cos(mu_n x) exp(-diffusivity mu_n^2 t)`` with
    ``mu_n = (2n+1) pi / (2L)``. Terms are added until one falls below 1e-14
    in magnitude or ``n_terms`` have been summed.
    """
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise ValueError("t must be non-negative")
    total = np.zeros_like(x)
    for n in range(int(n_terms)):
        mu = (2 * n + 1) * np.pi / (2 * L)
        amp = (4 / np.pi) * (-1) ** n / (2 * n + 1) * np.exp(-diffusivity * mu * mu * t)
        total = total + amp * np.cos(mu * x)
        if abs(amp) < SERIES_TOL:
            break
    # cos(mu_n L) is zero in exact arithmetic
    return np.where(np.isclose(x, L, rtol=0, atol=1e-15 * L), 0.0, total)


def split_dof_exact(t, m_a=1.0, m_b=1.0, k_a=10.0, k_b=1.0, u0=1.0):
    """Shared temperature and interface multiplier of the split single dof.

    With ``u_A = u_B = u`` the sum of the two balances gives
    ``(m_a + m_b) u' + (k_a + k_b) u = 0``; subdomain A's balance then
    returns ``lam = m_a u' + k_a u``.
    """
    if m_a <= 0 or m_b <= 0:
        raise ValueError("masses must be positive")
    t = np.asarray(t, dtype=float)
    u = u0 * np.exp(-(k_a + k_b) * t / (m_a + m_b))
    lam = (k_a * m_b - k_b * m_a) / (m_a + m_b) * u
    return u, lam
