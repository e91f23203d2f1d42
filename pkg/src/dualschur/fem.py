"""Galerkin finite elements for transient heat conduction.

Linear elements on uniform 1D meshes and bilinear quadrilaterals on uniform
tensor-product 2D meshes. Capacity matrices are consistent (not lumped).

Dirichlet nodes are eliminated: the assembled ``SemiDiscreteSystem`` carries
only the free rows and columns, with the prescribed (constant) values folded
into the load vector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
from scipy import sparse

_GAUSS2 = np.array([-1.0, 1.0]) / np.sqrt(3.0)


@dataclass(frozen=True)
class Mesh1D:
    n_elems: int
    length: float
    origin: float = 0.0

    def __post_init__(self):
        if self.n_elems < 1:
            raise ValueError("n_elems must be >= 1")
        if self.length <= 0:
            raise ValueError("length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n_elems

    @property
    def n_nodes(self) -> int:
        return self.n_elems + 1

    @property
    def node_coords(self) -> np.ndarray:
        return self.origin + self.h * np.arange(self.n_nodes)

    @property
    def elements(self) -> np.ndarray:
        e = np.arange(self.n_elems)
        return np.stack([e, e + 1], axis=1)


@dataclass(frozen=True)
class Mesh2D:
    """Uniform ``nx`` by ``ny`` grid of rectangles.

    Node ``(i, j)`` (column ``i``, row ``j``) has index ``j * (nx + 1) + i``.
    """
    nx: int
    ny: int
    lx: float
    ly: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("nx and ny must be >= 1")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("lx and ly must be positive")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    def node_index(self, i, j):
        return np.asarray(j) * (self.nx + 1) + np.asarray(i)

    @property
    def node_coords(self) -> np.ndarray:
        x = self.origin[0] + self.hx * np.arange(self.nx + 1)
        y = self.origin[1] + self.hy * np.arange(self.ny + 1)
        xx, yy = np.meshgrid(x, y)
        return np.stack([xx.ravel(), yy.ravel()], axis=1)

    @property
    def elements(self) -> np.ndarray:
        """Counter-clockwise node quadruples, one row per element."""
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        i, j = i.ravel(), j.ravel()
        return np.stack([self.node_index(i, j), self.node_index(i + 1, j),
                         self.node_index(i + 1, j + 1), self.node_index(i, j + 1)],
                        axis=1)


Mesh = Mesh1D | Mesh2D
Source = Callable[..., np.ndarray]


@dataclass(frozen=True, eq=False)
class SemiDiscreteSystem:
    """``M u' + K u = f`` on the free nodes of a mesh.

    ``source`` is a volumetric heat source ``q(coords, t)`` evaluated at the
    nodes and integrated with the unit-density mass matrix. ``dirichlet``
    maps node index to a constant prescribed temperature.

    The matrices are stored sparse; ``M`` and ``K`` give read-only dense
    copies built on first access.
    """
    mesh: Mesh
    conductivity: float
    capacity_density: float
    M_sparse: sparse.csr_array
    K_sparse: sparse.csr_array
    initial: np.ndarray
    free: np.ndarray
    dirichlet: Mapping[int, float] = field(default_factory=dict)
    source: Source | None = None
    _unit_mass: sparse.csr_array | None = None
    _k_full: sparse.csr_array | None = None

    @cached_property
    def M(self) -> np.ndarray:
        return _dense(self.M_sparse)

    @cached_property
    def K(self) -> np.ndarray:
        return _dense(self.K_sparse)

    @property
    def n_dof(self) -> int:
        return self.free.size

    def forcing(self, t: float) -> np.ndarray:
        f = np.zeros(self.n_dof)
        if self.source is not None:
            q = np.asarray(self.source(self.mesh.node_coords, t), dtype=float)
            f += (self._unit_mass @ q)[self.free]
        if self.dirichlet:
            nodes = np.fromiter(self.dirichlet, dtype=int)
            vals = np.array([self.dirichlet[i] for i in nodes], dtype=float)
            f -= self._k_full[self.free][:, nodes] @ vals
        return f

    @property
    def has_forcing(self) -> bool:
        return self.source is not None or any(v != 0 for v in self.dirichlet.values())

    def full(self, u) -> np.ndarray:
        """Expand a free-node vector to all mesh nodes."""
        out = np.zeros(self.mesh.n_nodes)
        out[self.free] = u
        for node, val in self.dirichlet.items():
            out[node] = val
        return out


def _element_matrices_1d(h, k, rho_cp):
    ke = (k / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    me = (rho_cp * h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    return ke, me


def _element_matrices_2d(hx, hy, k, rho_cp):
    # reference square [-1, 1]^2, nodes counter-clockwise from (-1, -1)
    xi_n = np.array([-1.0, 1.0, 1.0, -1.0])
    eta_n = np.array([-1.0, -1.0, 1.0, 1.0])
    ke = np.zeros((4, 4))
    me = np.zeros((4, 4))
    jac = hx * hy / 4.0
    for xi in _GAUSS2:
        for eta in _GAUSS2:
            n = 0.25 * (1 + xi_n * xi) * (1 + eta_n * eta)
            dn_dx = 0.25 * xi_n * (1 + eta_n * eta) * (2.0 / hx)
            dn_dy = 0.25 * eta_n * (1 + xi_n * xi) * (2.0 / hy)
            ke += k * (np.outer(dn_dx, dn_dx) + np.outer(dn_dy, dn_dy)) * jac
            me += rho_cp * np.outer(n, n) * jac
    return ke, me


def _dense(a) -> np.ndarray:
    # assembled from symmetric element matrices, so exactly symmetric
    out = a.toarray()
    out.setflags(write=False)
    return out


def _scatter(n_nodes, elements, local):
    rows = np.repeat(elements, elements.shape[1], axis=1)
    cols = np.tile(elements, (1, elements.shape[1]))
    vals = np.broadcast_to(local.ravel(), rows.shape)
    return sparse.coo_array((vals.ravel(), (rows.ravel(), cols.ravel())),
                            shape=(n_nodes, n_nodes)).tocsr()


def _build(mesh, ke, me, me_unit, conductivity, capacity_density,
           source, initial, dirichlet):
    if conductivity <= 0 or capacity_density <= 0:
        raise ValueError("conductivity and capacity_density must be positive")
    elements = mesh.elements
    k_full = _scatter(mesh.n_nodes, elements, ke)
    m_full = _scatter(mesh.n_nodes, elements, me)
    unit = _scatter(mesh.n_nodes, elements, me_unit) if source is not None else None
    dirichlet = {int(i): float(v) for i, v in (dirichlet or {}).items()}
    free = np.setdiff1d(np.arange(mesh.n_nodes), np.fromiter(dirichlet, dtype=int))
    if initial is None:
        u0 = np.zeros(mesh.n_nodes)
    elif callable(initial):
        u0 = np.asarray(initial(mesh.node_coords), dtype=float)
    else:
        u0 = np.asarray(initial, dtype=float)
    if u0.shape != (mesh.n_nodes,):
        raise ValueError("initial values must be given at every mesh node")
    return SemiDiscreteSystem(
        mesh=mesh, conductivity=conductivity, capacity_density=capacity_density,
        M_sparse=m_full[free][:, free], K_sparse=k_full[free][:, free],
        initial=u0[free].copy(), free=free, dirichlet=dirichlet, source=source,
        _unit_mass=unit, _k_full=k_full if dirichlet else None,
    )


def assemble_1d(mesh: Mesh1D, conductivity: float = 1.0, capacity_density: float = 1.0,
                *, source: Source | None = None, initial=None,
                dirichlet: Mapping[int, float] | None = None) -> SemiDiscreteSystem:
    """Assemble linear elements on a 1D mesh.

    ``initial`` may be an array of nodal values or a callable of the node
    coordinates.
    """
    ke, me = _element_matrices_1d(mesh.h, conductivity, capacity_density)
    _, me_unit = _element_matrices_1d(mesh.h, conductivity, 1.0)
    return _build(mesh, ke, me, me_unit, conductivity, capacity_density,
                  source, initial, dirichlet)


def assemble_2d(mesh: Mesh2D, conductivity: float = 1.0, capacity_density: float = 1.0,
                *, source: Source | None = None, initial=None,
                dirichlet: Mapping[int, float] | None = None) -> SemiDiscreteSystem:
    """Assemble bilinear quadrilaterals with 2x2 Gauss quadrature.

    A callable ``initial`` receives an ``(n_nodes, 2)`` coordinate array.
    """
    ke, me = _element_matrices_2d(mesh.hx, mesh.hy, conductivity, capacity_density)
    _, me_unit = _element_matrices_2d(mesh.hx, mesh.hy, conductivity, 1.0)
    return _build(mesh, ke, me, me_unit, conductivity, capacity_density,
                  source, initial, dirichlet)


def assemble(mesh: Mesh, *args, **kwargs) -> SemiDiscreteSystem:
    if isinstance(mesh, Mesh1D):
        return assemble_1d(mesh, *args, **kwargs)
    return assemble_2d(mesh, *args, **kwargs)


def l2_error(coeffs, exact: Callable[..., np.ndarray], mesh: Mesh) -> float:
    """L2 norm of ``u_h - exact`` with 2-point Gauss quadrature per direction.

    ``coeffs`` holds nodal values at every node of ``mesh``. ``exact`` is
    called as ``exact(x)`` in 1D and ``exact(x, y)`` in 2D with arrays.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.n_nodes,):
        raise ValueError(f"expected {mesh.n_nodes} nodal values, got {coeffs.shape}")
    elements = mesh.elements
    if isinstance(mesh, Mesh1D):
        x = mesh.node_coords
        total = 0.0
        for xi in _GAUSS2:
            n = np.array([(1 - xi) / 2, (1 + xi) / 2])
            uh = coeffs[elements] @ n
            xq = x[elements] @ n
            total += np.sum((uh - exact(xq)) ** 2) * mesh.h / 2
        return float(np.sqrt(total))

    xy = mesh.node_coords
    xi_n = np.array([-1.0, 1.0, 1.0, -1.0])
    eta_n = np.array([-1.0, -1.0, 1.0, 1.0])
    jac = mesh.hx * mesh.hy / 4.0
    total = 0.0
    for xi in _GAUSS2:
        for eta in _GAUSS2:
            n = 0.25 * (1 + xi_n * xi) * (1 + eta_n * eta)
            uh = coeffs[elements] @ n
            xq = xy[elements, 0] @ n
            yq = xy[elements, 1] @ n
            total += np.sum((uh - exact(xq, yq)) ** 2) * jac
    return float(np.sqrt(total))
