"""Structured triangulations of the unit square.

The grid has nodes (i/N, j/N), 0 <= i, j <= N.  Each grid square is split
into two triangles by the diagonal running from its lower-left to its
upper-right corner, giving 2*N**2 congruent cells of area 1/(2*N**2).
Point location is closed form (no search tree needed).
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation of [0,1]^2 on an N x N grid."""

    n_subdiv: int
    nodes: np.ndarray          # (n_nodes, 2) float
    cells: np.ndarray          # (n_cells, 3) int, counterclockwise
    # affine geometry, precomputed once per mesh
    cell_areas: np.ndarray = field(repr=False, default=None)
    grad_bary: np.ndarray = field(repr=False, default=None)  # (n_cells, 3, 2)

    @property
    def h(self) -> float:
        return 1.0 / self.n_subdiv

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def cell_count(self) -> int:
        return self.cells.shape[0]

    def cell_vertices(self, c):
        return self.nodes[self.cells[c]]


def build_structured_mesh(n_subdiv: int) -> Mesh:
    """Triangulate [0,1]^2 on the (i/N, j/N) grid.

    In grid square (i, j) the lower triangle is cell 2*(j*N+i) with
    vertices (i,j), (i+1,j), (i+1,j+1) and the upper triangle is the
    next cell with vertices (i,j), (i+1,j+1), (i,j+1).
    """
    if n_subdiv < 1:
        raise ValueError(f"n_subdiv must be >= 1, got {n_subdiv}")
    N = n_subdiv
    ii, jj = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="xy")
    nodes = np.column_stack([ii.ravel() / N, jj.ravel() / N])

    def nid(i, j):
        return j * (N + 1) + i

    si, sj = np.meshgrid(np.arange(N), np.arange(N), indexing="xy")
    si, sj = si.ravel(), sj.ravel()
    lower = np.column_stack([nid(si, sj), nid(si + 1, sj), nid(si + 1, sj + 1)])
    upper = np.column_stack([nid(si, sj), nid(si + 1, sj + 1), nid(si, sj + 1)])
    cells = np.empty((2 * N * N, 3), dtype=np.int64)
    cells[0::2] = lower
    cells[1::2] = upper

    p0 = nodes[cells[:, 0]]
    p1 = nodes[cells[:, 1]]
    p2 = nodes[cells[:, 2]]
    d1, d2 = p1 - p0, p2 - p0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    areas = 0.5 * det
    # gradients of the barycentric coordinates (constant per cell)
    grad = np.empty((cells.shape[0], 3, 2))
    grad[:, 1, 0] = d2[:, 1] / det
    grad[:, 1, 1] = -d2[:, 0] / det
    grad[:, 2, 0] = -d1[:, 1] / det
    grad[:, 2, 1] = d1[:, 0] / det
    grad[:, 0] = -grad[:, 1] - grad[:, 2]
    return Mesh(n_subdiv=N, nodes=nodes, cells=cells,
                cell_areas=areas, grad_bary=grad)


def locate_points(mesh: Mesh, points: np.ndarray):
    """Locate an array of points; returns (cell indices, barycentric coords).

    Points exactly on grid lines or the in-square diagonal resolve to the
    containing cell of lowest index.  Rejects points outside [0,1]^2.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(pts < -1e-12) or np.any(pts > 1.0 + 1e-12):
        raise ValueError("point outside the closed unit square")
    pts = np.clip(pts, 0.0, 1.0)
    N = mesh.n_subdiv
    sx = pts[:, 0] * N
    sy = pts[:, 1] * N
    i = np.floor(sx).astype(np.int64)
    j = np.floor(sy).astype(np.int64)
    # points exactly on a grid line belong to the square on the lower side,
    # which holds the lower cell indices
    i = np.where((sx == i) & (i > 0), i - 1, i)
    j = np.where((sy == j) & (j > 0), j - 1, j)
    i = np.minimum(i, N - 1)
    j = np.minimum(j, N - 1)
    fx = sx - i
    fy = sy - j
    low = fy <= fx  # lower triangle shares the diagonal and has lower index
    cell = 2 * (j * N + i) + (~low).astype(np.int64)
    lam = np.empty((pts.shape[0], 3))
    # lower: vertices (i,j),(i+1,j),(i+1,j+1) -> lam = (1-fx, fx-fy, fy)
    # upper: vertices (i,j),(i+1,j+1),(i,j+1) -> lam = (1-fy, fx, fy-fx)
    lam[:, 0] = np.where(low, 1.0 - fx, 1.0 - fy)
    lam[:, 1] = np.where(low, fx - fy, fx)
    lam[:, 2] = np.where(low, fy, fy - fx)
    # kill roundoff-negative coordinates from points sitting on edges
    np.clip(lam, 0.0, None, out=lam)
    lam /= lam.sum(axis=1, keepdims=True)
    return cell, lam


def locate_point(mesh: Mesh, point):
    """Single-point version of :func:`locate_points`."""
    cell, lam = locate_points(mesh, np.asarray(point, dtype=float)[None, :])
    return int(cell[0]), lam[0]


def barycentric_to_physical(mesh: Mesh, cells, bary):
    """Map barycentric coordinates back to physical coordinates."""
    verts = mesh.nodes[mesh.cells[cells]]          # (..., 3, 2)
    return np.einsum("...k,...kd->...d", bary, verts)


def mesh_edges(mesh: Mesh):
    """Edge audit data: (edges, cells_per_edge) where cells_per_edge maps
    each undirected edge to the list of incident cells."""
    e = np.concatenate([mesh.cells[:, [0, 1]],
                        mesh.cells[:, [1, 2]],
                        mesh.cells[:, [2, 0]]])
    owner = np.tile(np.arange(mesh.cell_count), 3)
    e = np.sort(e, axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    e, owner = e[order], owner[order]
    edges, inverse = np.unique(e, axis=0, return_inverse=True)
    incident = [[] for _ in range(edges.shape[0])]
    for k, ei in enumerate(inverse):
        incident[ei].append(int(owner[k]))
    return edges, incident
