"""Dual Schur partitioning of an assembled system into subdomains.

Each subdomain re-assembles only its own elements, so interface nodes are
duplicated and every copy sees just its neighbouring elements. Copies of a
shared node are tied together by signed Boolean constraint rows. Copies are
ordered by subdomain index and chained pairwise (first - second, second -
third, ...), so a cross point shared by four subdomains gets three
independent rows and the lower-indexed subdomain always carries ``+1``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import IndivisiblePartition, NotPositiveDefinite
from .fem import Mesh1D, Mesh2D, SemiDiscreteSystem, assemble
from .linalg import CholeskyFactor, as_operator, as_symmetric, spd_factor


class SignedBooleanMatrix:
    """Constraint matrix with entries in ``{-1, 0, +1}``.

    Each row holds at most one nonzero.
    """

    def __init__(self, entries):
        raw = np.array(entries, ndmin=2)
        if raw.ndim != 2:
            raise ValueError("expected a 2D array")
        if raw.size and not np.isin(raw, (-1, 0, 1)).all():
            raise ValueError("entries must be -1, 0 or +1")
        a = raw.astype(np.int8)
        if np.any(np.count_nonzero(a, axis=1) > 1):
            raise ValueError("each row may hold at most one nonzero")
        a.setflags(write=False)
        self.entries = a
        self.dense = a.astype(float)
        self.dense.setflags(write=False)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def norm1(self) -> float:
        """Induced 1-norm (maximum absolute column sum).

        This exceeds 1 for a copy of a cross-point node that sits in two
        chain rows.
        """
        if self.entries.size == 0:
            return 0.0
        return float(np.max(np.sum(np.abs(self.dense), axis=0)))

    def row_norm(self) -> float:
        """Maximum absolute row sum; at most 1 by construction."""
        if self.entries.size == 0:
            return 0.0
        return float(np.max(np.sum(np.abs(self.dense), axis=1)))

    def __matmul__(self, x):
        return self.dense @ x

    @property
    def T(self):
        return self.dense.T

    def __repr__(self):
        return f"SignedBooleanMatrix(shape={self.shape}, nnz={np.count_nonzero(self.entries)})"


@dataclass(frozen=True, eq=False)
class Subdomain:
    M: np.ndarray
    K: np.ndarray
    C: SignedBooleanMatrix
    initial: np.ndarray
    local_to_global: np.ndarray
    system: SemiDiscreteSystem | None = None
    load_fn: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        if self.C.cols != self.M.shape[0]:
            raise ValueError("constraint matrix columns must match subdomain dofs")

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    @property
    def has_forcing(self) -> bool:
        if self.load_fn is not None:
            return True
        return self.system is not None and self.system.has_forcing

    def forcing(self, t: float) -> np.ndarray:
        if self.load_fn is not None:
            return np.asarray(self.load_fn(t), dtype=float)
        if self.system is not None and self.system.has_forcing:
            return self.system.forcing(t)
        return np.zeros(self.n_dof)


@dataclass(frozen=True, eq=False)
class DecomposedProblem:
    subdomains: tuple[Subdomain, ...]
    reference: SemiDiscreteSystem | None = None

    def __post_init__(self):
        rows = {s.C.rows for s in self.subdomains}
        if len(rows) != 1:
            raise ValueError("all constraint matrices need the same row count")

    @property
    def n_constraints(self) -> int:
        return self.subdomains[0].C.rows

    @property
    def n_subdomains(self) -> int:
        return len(self.subdomains)

    def constraint_residual(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        """``sum_i C_i x_i``."""
        return sum(s.C @ x for s, x in zip(self.subdomains, xs))

    def scatter(self, u: np.ndarray) -> list[np.ndarray]:
        """Restrict a reference (free-dof) vector to each subdomain."""
        return [np.asarray(u)[s.local_to_global] for s in self.subdomains]

    def gather(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        """Reference-dof vector; duplicated interface values are averaged."""
        n = self.reference.n_dof
        out = np.zeros(n)
        count = np.zeros(n)
        for s, x in zip(self.subdomains, xs):
            np.add.at(out, s.local_to_global, x)
            np.add.at(count, s.local_to_global, 1.0)
        return out / np.maximum(count, 1.0)

    def interface_operator(self, gamma: float = 0.0, dt: float = 0.0) -> np.ndarray:
        """``G = sum_i C_i (M_i + gamma dt K_i)^{-1} C_i^T``."""
        g = np.zeros((self.n_constraints, self.n_constraints))
        for s in self.subdomains:
            fac = spd_factor(as_operator(s.M) + gamma * dt * as_operator(s.K))
            g += s.C.dense @ fac.solve(s.C.T)
        return as_symmetric(g, rtol=1e-10)


def verify_independence(problem: DecomposedProblem, gamma: float, dt: float) -> bool:
    """True iff the interface operator ``G`` admits a Cholesky factorization."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    try:
        CholeskyFactor(problem.interface_operator(gamma, dt))
    except NotPositiveDefinite:
        return False
    return True


def _decompose(system: SemiDiscreteSystem, meshes, node_maps) -> DecomposedProblem:
    free_index = -np.ones(system.mesh.n_nodes, dtype=int)
    free_index[system.free] = np.arange(system.n_dof)
    full_initial = system.full(system.initial)

    parts = []
    copies = defaultdict(list)
    for p, (mesh, nodes) in enumerate(zip(meshes, node_maps)):
        local_dirichlet = {j: system.dirichlet[g] for j, g in enumerate(nodes)
                           if g in system.dirichlet}
        sub = assemble(mesh, system.conductivity, system.capacity_density,
                       source=system.source,
                       initial=full_initial[nodes], dirichlet=local_dirichlet)
        l2g = free_index[nodes[sub.free]]
        for local, g in enumerate(l2g):
            copies[g].append((p, local))
        parts.append((sub, l2g))

    rows = []
    for g in sorted(copies):
        chain = copies[g]
        for (pa, la), (pb, lb) in zip(chain, chain[1:]):
            rows.append(((pa, la, 1), (pb, lb, -1)))

    subdomains = []
    for p, (sub, l2g) in enumerate(parts):
        c = np.zeros((len(rows), sub.n_dof), dtype=np.int8)
        for r, row in enumerate(rows):
            for q, local, sign in row:
                if q == p:
                    c[r, local] = sign
        subdomains.append(Subdomain(M=sub.M, K=sub.K, C=SignedBooleanMatrix(c),
                                    initial=sub.initial, local_to_global=l2g,
                                    system=sub))
    return DecomposedProblem(tuple(subdomains), reference=system)


def partition_1d(system: SemiDiscreteSystem, s: int) -> DecomposedProblem:
    """Split a 1D system into ``s`` equal contiguous subdomains."""
    mesh = system.mesh
    if not isinstance(mesh, Mesh1D):
        raise TypeError("partition_1d needs a 1D system")
    if s < 2:
        raise ValueError("need at least two subdomains")
    if mesh.n_elems % s:
        raise IndivisiblePartition(f"{mesh.n_elems} elements cannot be split into {s} parts")
    ne = mesh.n_elems // s
    meshes, maps = [], []
    for p in range(s):
        meshes.append(Mesh1D(ne, mesh.h * ne, origin=mesh.origin + p * ne * mesh.h))
        maps.append(p * ne + np.arange(ne + 1))
    return _decompose(system, meshes, maps)


def partition_2d(system: SemiDiscreteSystem) -> DecomposedProblem:
    """Split a 2D system into a 2x2 layout of equal subdomains.

    Subdomains are numbered row-major from the bottom-left corner.
    """
    mesh = system.mesh
    if not isinstance(mesh, Mesh2D):
        raise TypeError("partition_2d needs a 2D system")
    if mesh.nx % 2 or mesh.ny % 2:
        raise IndivisiblePartition("nx and ny must both be even for a 2x2 layout")
    nxs, nys = mesh.nx // 2, mesh.ny // 2
    meshes, maps = [], []
    for qy in range(2):
        for qx in range(2):
            origin = (mesh.origin[0] + qx * nxs * mesh.hx, mesh.origin[1] + qy * nys * mesh.hy)
            sub = Mesh2D(nxs, nys, nxs * mesh.hx, nys * mesh.hy, origin=origin)
            i, j = np.meshgrid(qx * nxs + np.arange(nxs + 1), qy * nys + np.arange(nys + 1))
            meshes.append(sub)
            maps.append(mesh.node_index(i.ravel(), j.ravel()))
    return _decompose(system, meshes, maps)


def split_dof_problem(m_a: float = 1.0, m_b: float = 1.0, k_a: float = 10.0,
                      k_b: float = 1.0, u0: float = 1.0) -> DecomposedProblem:
    """One scalar degree of freedom split across two single-dof subdomains.

    ``m_A u_A' + k_A u_A = +lambda``, ``m_B u_B' + k_B u_B = -lambda``,
    ``u_A = u_B``.
    """
    c_a = SignedBooleanMatrix([[1]])
    c_b = SignedBooleanMatrix([[-1]])
    subs = (
        Subdomain(M=as_symmetric([[m_a]]), K=as_symmetric([[k_a]]), C=c_a,
                  initial=np.array([u0]), local_to_global=np.array([0])),
        Subdomain(M=as_symmetric([[m_b]]), K=as_symmetric([[k_b]]), C=c_b,
                  initial=np.array([u0]), local_to_global=np.array([0])),
    )
    return DecomposedProblem(subs)


def from_matrices(blocks: Sequence[tuple], initial: Sequence | None = None,
                  loads: Sequence[Callable] | None = None) -> DecomposedProblem:
    """Build a problem directly from ``(M_i, K_i, C_i)`` triples.

    ``loads`` optionally gives one forcing callable ``f_i(t)`` per subdomain.
    """
    subs = []
    for i, (m, k, c) in enumerate(blocks):
        c = c if isinstance(c, SignedBooleanMatrix) else SignedBooleanMatrix(c)
        m = as_symmetric(m)
        u0 = np.zeros(m.shape[0]) if initial is None else np.asarray(initial[i], float)
        subs.append(Subdomain(M=m, K=as_symmetric(k), C=c, initial=u0,
                              local_to_global=np.arange(m.shape[0]),
                              load_fn=None if loads is None else loads[i]))
    return DecomposedProblem(tuple(subs))
