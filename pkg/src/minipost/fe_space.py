"""Mini-element mixed space on a structured mesh.

Velocity: per component, continuous P1 on interior nodes (homogeneous
Dirichlet) enriched with one cubic bubble 27*lam1*lam2*lam3 per cell.
Pressure: continuous P1 on all nodes; the zero-mean constraint is imposed
at solve time through a Lagrange multiplier, not by dropping a DOF.

Scalar velocity DOF numbering: interior nodes in lexicographic node order,
then bubbles in cell order.  The two components are stacked in blocks, so
a velocity vector reads [u1_scalar..., u2_scalar...].
"""

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh, locate_points
from .quadrature import QuadratureRule


@dataclass(frozen=True, eq=False)
class MixedSpace:
    mesh: Mesh
    node_to_vdof: np.ndarray      # (n_nodes,) scalar dof or -1 on boundary
    interior_nodes: np.ndarray    # (n_interior,)
    n_scalar: int                 # interior nodes + cells (per component)
    n_vel: int                    # 2 * n_scalar
    n_pre: int                    # all nodes
    cell_sdofs: np.ndarray = field(repr=False, default=None)  # (n_cells, 4)

    @property
    def n_interior(self) -> int:
        return self.interior_nodes.shape[0]

    @property
    def n_bubble(self) -> int:
        return self.mesh.cell_count

    def bubble_dof(self, cell: int) -> int:
        return self.n_interior + cell

    def component_slice(self, comp: int) -> slice:
        return slice(comp * self.n_scalar, (comp + 1) * self.n_scalar)


@dataclass
class MixedState:
    """Coefficient vectors of one mixed solution, tagged with its time."""

    space: MixedSpace
    velocity: np.ndarray   # (n_vel,)
    pressure: np.ndarray   # (n_pre,)
    time: float = 0.0

    def copy(self) -> "MixedState":
        return MixedState(self.space, self.velocity.copy(),
                          self.pressure.copy(), self.time)

    def linear_velocity(self) -> np.ndarray:
        """Velocity coefficients with all bubble coefficients zeroed."""
        v = self.velocity.copy()
        sp = self.space
        for comp in range(2):
            off = comp * sp.n_scalar
            v[off + sp.n_interior: off + sp.n_scalar] = 0.0
        return v


def zero_state(space: MixedSpace, time: float = 0.0) -> MixedState:
    return MixedState(space, np.zeros(space.n_vel), np.zeros(space.n_pre), time)


def build_mini_space(mesh: Mesh) -> MixedSpace:
    N = mesh.n_subdiv
    n_nodes = mesh.node_count
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    on_boundary = (x == 0.0) | (x == 1.0) | (y == 0.0) | (y == 1.0)
    interior = np.flatnonzero(~on_boundary)
    node_to_vdof = np.full(n_nodes, -1, dtype=np.int64)
    node_to_vdof[interior] = np.arange(interior.size)
    n_scalar = interior.size + mesh.cell_count
    # per-cell local scalar dofs: 3 P1 (or -1 on boundary) + bubble
    cell_sdofs = np.empty((mesh.cell_count, 4), dtype=np.int64)
    cell_sdofs[:, :3] = node_to_vdof[mesh.cells]
    cell_sdofs[:, 3] = interior.size + np.arange(mesh.cell_count)
    return MixedSpace(mesh=mesh, node_to_vdof=node_to_vdof,
                      interior_nodes=interior, n_scalar=n_scalar,
                      n_vel=2 * n_scalar, n_pre=n_nodes,
                      cell_sdofs=cell_sdofs)


def shape_values(bary: np.ndarray) -> np.ndarray:
    """Values of the 4 scalar shape functions (3 P1 + bubble) at barycentric
    points of shape (..., 3); returns (..., 4)."""
    bary = np.asarray(bary, dtype=float)
    out = np.empty(bary.shape[:-1] + (4,))
    out[..., :3] = bary
    out[..., 3] = 27.0 * bary[..., 0] * bary[..., 1] * bary[..., 2]
    return out


def shape_gradients(mesh: Mesh, cells, bary: np.ndarray) -> np.ndarray:
    """Physical gradients of the 4 shape functions on the given cells.

    cells: (...,) cell indices; bary: (..., 3).  Returns (..., 4, 2).
    """
    bary = np.asarray(bary, dtype=float)
    g = mesh.grad_bary[cells]                       # (..., 3, 2)
    out = np.empty(bary.shape[:-1] + (4, 2))
    out[..., :3, :] = g
    l1, l2, l3 = bary[..., 0], bary[..., 1], bary[..., 2]
    out[..., 3, :] = 27.0 * ((l2 * l3)[..., None] * g[..., 0, :]
                             + (l1 * l3)[..., None] * g[..., 1, :]
                             + (l1 * l2)[..., None] * g[..., 2, :])
    return out


def eval_basis(space: MixedSpace, cell: int, bary):
    """Shape values and physical gradients on one cell.

    Returns (values (4,), gradients (4, 2)) ordered P1 vertex 0..2, bubble.
    """
    bary = np.asarray(bary, dtype=float)
    return (shape_values(bary),
            shape_gradients(space.mesh, np.asarray(cell), bary))


def velocity_at(space: MixedSpace, vel_coeffs: np.ndarray, cells, bary,
                linear_part: bool = False, gradient: bool = False):
    """Evaluate a velocity coefficient vector at located points.

    cells: (n,) indices, bary: (n, 3).  Returns values (n, 2), and with
    gradient=True additionally (n, 2, 2) with entries d u_i / d x_j.
    """
    sp = space
    sdofs = sp.cell_sdofs[cells]                    # (n, 4)
    nfun = 3 if linear_part else 4
    vals = shape_values(bary)[:, :nfun]             # (n, nfun)
    coeffs = np.empty((len(cells), 2, nfun))
    for comp in range(2):
        off = comp * sp.n_scalar
        c = np.where(sdofs[:, :nfun] >= 0,
                     vel_coeffs[np.clip(sdofs[:, :nfun], 0, None) + off], 0.0)
        coeffs[:, comp, :] = c
    u = np.einsum("ncf,nf->nc", coeffs, vals)
    if not gradient:
        return u
    grads = shape_gradients(sp.mesh, cells, bary)[:, :nfun, :]   # (n, nfun, 2)
    du = np.einsum("ncf,nfd->ncd", coeffs, grads)
    return u, du


def pressure_at(space: MixedSpace, pre_coeffs: np.ndarray, cells, bary,
                gradient: bool = False):
    """Evaluate a P1 pressure coefficient vector at located points."""
    nodes = space.mesh.cells[cells]                 # (n, 3)
    c = pre_coeffs[nodes]
    p = np.einsum("nf,nf->n", c, bary)
    if not gradient:
        return p
    g = space.mesh.grad_bary[cells]                 # (n, 3, 2)
    dp = np.einsum("nf,nfd->nd", c, g)
    return p, dp


def evaluate_field(space: MixedSpace, state: MixedState, point,
                   which: str = "velocity", derivative: str = "value",
                   linear_part: bool = False):
    """Point evaluation of a mixed state (locate, then basis combination)."""
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    cells, bary = locate_points(space.mesh, pts)
    grad = derivative == "gradient"
    if which == "velocity":
        out = velocity_at(space, state.velocity, cells, bary,
                          linear_part=linear_part, gradient=grad)
    elif which == "pressure":
        out = pressure_at(space, state.pressure, cells, bary, gradient=grad)
    else:
        raise ValueError(f"unknown field {which!r}")
    if np.asarray(point).ndim == 1:
        return (out[0][0], out[1][0]) if grad else out[0]
    return out


def quadrature_points(space: MixedSpace, q: QuadratureRule):
    """Physical coordinates of all quadrature points, shape (n_cells, nq, 2)."""
    verts = space.mesh.nodes[space.mesh.cells]      # (nc, 3, 2)
    return np.einsum("qk,ckd->cqd", q.points, verts)
