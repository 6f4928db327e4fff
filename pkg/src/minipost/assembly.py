"""Vectorized assembly of all discrete operators and load vectors.

Operators are assembled cell-wise with numpy einsum over precomputed basis
tables and scattered into scipy sparse matrices.  Convection uses the
skew-symmetrized form F(u,v) = (u.grad)v + 0.5*(div u)v, so the trilinear
form b(u,v,w) = (F(u,v), w) changes sign under swapping its last two
arguments (exactly for P1 fields, up to quadrature error with bubbles).

Assembly quadrature is the degree-6 rule; loads against analytic fields
use degree 10 so quadrature error stays far below discretization error.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fe_space import (MixedSpace, MixedState, pressure_at, shape_gradients,
                       shape_values, velocity_at)
from .mesh import locate_points
from .quadrature import rule

ASSEMBLY_DEGREE = 6
LOAD_DEGREE = 10


@lru_cache(maxsize=32)
def basis_tables(space: MixedSpace, degree: int):
    """Per-space quadrature tables: values (nq, 4), physical gradients
    (nc, nq, 4, 2), physical quadrature points (nc, nq, 2)."""
    q = rule(degree)
    nq = q.points.shape[0]
    nc = space.mesh.cell_count
    vals = shape_values(q.points)                                # (nq, 4)
    cells = np.repeat(np.arange(nc), nq)
    bary = np.tile(q.points, (nc, 1))
    grads = shape_gradients(space.mesh, cells, bary).reshape(nc, nq, 4, 2)
    verts = space.mesh.nodes[space.mesh.cells]
    pts = np.einsum("qk,ckd->cqd", q.points, verts)
    return q, vals, grads, pts


def _scatter_vector(space: MixedSpace, local: np.ndarray) -> np.ndarray:
    """Scatter local (nc, 2, 4) contributions into a global velocity vector."""
    sd = space.cell_sdofs                                        # (nc, 4)
    out = np.zeros(space.n_vel)
    for comp in range(2):
        mask = sd >= 0
        idx = sd[mask] + comp * space.n_scalar
        np.add.at(out, idx, local[:, comp, :][mask])
    return out


def _scatter_matrix(space, rows_local, cols_local, vals, shape):
    mask = (rows_local >= 0) & (cols_local >= 0)
    m = sp.coo_matrix((vals[mask], (rows_local[mask], cols_local[mask])),
                      shape=shape)
    return m.tocsr()


def assemble_stiffness(space: MixedSpace, nu: float) -> sp.csr_matrix:
    """nu * (grad phi_j, grad phi_i), block diagonal over the 2 components."""
    if nu <= 0:
        raise ValueError("viscosity must be positive")
    q, vals, grads, _ = basis_tables(space, ASSEMBLY_DEGREE)
    area = space.mesh.cell_areas
    loc = nu * np.einsum("c,q,cqad,cqbd->cab", area, q.weights, grads, grads)
    sd = space.cell_sdofs
    rows = np.broadcast_to(sd[:, :, None], loc.shape)
    cols = np.broadcast_to(sd[:, None, :], loc.shape)
    n = space.n_scalar
    scal = _scatter_matrix(space, rows.ravel(), cols.ravel(), loc.ravel(),
                           (n, n))
    return sp.block_diag([scal, scal], format="csr")


def assemble_mass(space: MixedSpace) -> sp.csr_matrix:
    """(phi_j, phi_i), block diagonal over the 2 components."""
    q, vals, grads, _ = basis_tables(space, ASSEMBLY_DEGREE)
    area = space.mesh.cell_areas
    loc = np.einsum("c,q,qa,qb->cab", area, q.weights, vals, vals)
    sd = space.cell_sdofs
    rows = np.broadcast_to(sd[:, :, None], loc.shape)
    cols = np.broadcast_to(sd[:, None, :], loc.shape)
    n = space.n_scalar
    scal = _scatter_matrix(space, rows.ravel(), cols.ravel(), loc.ravel(),
                           (n, n))
    return sp.block_diag([scal, scal], format="csr")


def assemble_divergence(space: MixedSpace) -> sp.csr_matrix:
    """(div phi_v, psi_q): rows are pressure nodes, columns velocity DOFs."""
    q, vals, grads, _ = basis_tables(space, ASSEMBLY_DEGREE)
    area = space.mesh.cell_areas
    # loc[c, a_pressure, b_velocity, m_component]
    loc = np.einsum("c,q,qa,cqbm->cabm", area, q.weights, vals[:, :3], grads)
    pnodes = space.mesh.cells                                    # (nc, 3)
    sd = space.cell_sdofs
    nc = space.mesh.cell_count
    rows = np.broadcast_to(pnodes[:, :, None, None], loc.shape).ravel()
    cols_s = np.broadcast_to(sd[:, None, :, None], loc.shape)
    comp = np.broadcast_to(np.arange(2)[None, None, None, :], loc.shape)
    cols = np.where(cols_s >= 0, cols_s + comp * space.n_scalar, -1).ravel()
    return _scatter_matrix(space, rows, cols, loc.ravel(),
                           (space.n_pre, space.n_vel))


def pressure_mean_vector(space: MixedSpace) -> np.ndarray:
    """Integrals of the pressure basis functions; entries sum to |Omega| = 1."""
    q, vals, _, _ = basis_tables(space, ASSEMBLY_DEGREE)
    area = space.mesh.cell_areas
    loc = np.einsum("c,q,qa->ca", area, q.weights, vals[:, :3])
    out = np.zeros(space.n_pre)
    np.add.at(out, space.mesh.cells.ravel(), loc.ravel())
    return out


def _gather_coeffs(space: MixedSpace, vel_coeffs: np.ndarray) -> np.ndarray:
    """Cell-local velocity coefficients, shape (nc, 2, 4); boundary nodes 0."""
    sd = space.cell_sdofs
    safe = np.clip(sd, 0, None)
    out = np.empty((sd.shape[0], 2, 4))
    for comp in range(2):
        c = vel_coeffs[safe + comp * space.n_scalar]
        out[:, comp, :] = np.where(sd >= 0, c, 0.0)
    return out


def _field_at_quad(space, vel_coeffs, vals, grads):
    """Velocity values (nc, nq, 2) and gradients (nc, nq, 2, 2) at the
    quadrature points of the given basis tables."""
    coeff = _gather_coeffs(space, vel_coeffs)
    u = np.einsum("ncf,qf->nqc", coeff, vals)
    du = np.einsum("ncf,nqfd->nqcd", coeff, grads)
    return u, du


@dataclass
class ConvectionData:
    vector: np.ndarray                  # b(u, u, phi_i) for every test DOF
    jacobian: sp.csr_matrix | None = None


def assemble_convection(space: MixedSpace, advecting,
                        want_jacobian: bool = False) -> ConvectionData:
    """Assemble b(u, u, .) and optionally its Gateaux derivative in u."""
    vel = advecting.velocity if isinstance(advecting, MixedState) else advecting
    q, vals, grads, _ = basis_tables(space, ASSEMBLY_DEGREE)
    area = space.mesh.cell_areas
    u, du = _field_at_quad(space, vel, vals, grads)
    div = du[..., 0, 0] + du[..., 1, 1]                          # (nc, nq)
    f_form = (np.einsum("nqj,nqij->nqi", u, du)
              + 0.5 * div[..., None] * u)                        # (nc, nq, 2)
    loc = np.einsum("c,q,cqi,qa->cia", area, q.weights, f_form, vals)
    vec = _scatter_vector(space, loc)
    if not want_jacobian:
        return ConvectionData(vector=vec)

    # derivative of F(u,u) in direction (phi_b e_m):
    #   phi_b du_i/dx_m + delta_im (u . grad phi_b)
    #   + 0.5 dphi_b/dx_m u_i + 0.5 (div u) phi_b delta_im
    udotg = np.einsum("nqj,nqbj->nqb", u, grads)                 # (nc, nq, 4)
    p_term = (np.einsum("qb,nqim->nqimb", vals, du)
              + 0.5 * np.einsum("nqbm,nqi->nqimb", grads, u))
    q_term = udotg + 0.5 * div[..., None] * vals[None, :, :]     # (nc, nq, 4)
    area_w = area[:, None] * q.weights[None, :]
    loc_p = np.einsum("cq,cqimb,qa->ciamb", area_w, p_term, vals)
    loc_q = np.einsum("cq,cqb,qa->cab", area_w, q_term, vals)
    loc_full = loc_p.copy()                                      # (nc,2,4,2,4)
    for i in range(2):
        loc_full[:, i, :, i, :] += loc_q
    sd = space.cell_sdofs
    n = space.n_scalar
    comp_i = np.arange(2)[None, :, None, None, None]
    comp_m = np.arange(2)[None, None, None, :, None]
    rows_s = np.broadcast_to(sd[:, None, :, None, None], loc_full.shape)
    cols_s = np.broadcast_to(sd[:, None, None, None, :], loc_full.shape)
    rows = np.where(rows_s >= 0, rows_s + comp_i * n, -1).ravel()
    cols = np.where(cols_s >= 0, cols_s + comp_m * n, -1).ravel()
    jac = _scatter_matrix(space, rows, cols, loc_full.ravel(),
                          (space.n_vel, space.n_vel))
    return ConvectionData(vector=vec, jacobian=jac)


def trilinear_form(space: MixedSpace, u_coeffs, v_coeffs, w_coeffs,
                   degree: int = ASSEMBLY_DEGREE) -> float:
    """b(u, v, w) = (F(u, v), w) by quadrature, for tests and audits."""
    q, vals, grads, _ = basis_tables(space, degree)
    area = space.mesh.cell_areas
    u, du_u = _field_at_quad(space, u_coeffs, vals, grads)
    v, dv = _field_at_quad(space, v_coeffs, vals, grads)
    w, _ = _field_at_quad(space, w_coeffs, vals, grads)
    div_u = du_u[..., 0, 0] + du_u[..., 1, 1]
    f_form = np.einsum("nqj,nqij->nqi", u, dv) + 0.5 * div_u[..., None] * v
    return float(np.einsum("c,q,cqi,cqi->", area, q.weights, f_form, w))


def assemble_load(space: MixedSpace, f, t: float) -> np.ndarray:
    """(f(t), phi_i) with the degree-10 rule; f maps (points (...,2), t) to
    velocity values of the same leading shape."""
    q, vals, grads, pts = basis_tables(space, LOAD_DEGREE)
    fv = np.asarray(f(pts, t), dtype=float)                      # (nc, nq, 2)
    area = space.mesh.cell_areas
    loc = np.einsum("c,q,cqi,qa->cia", area, q.weights, fv, vals)
    return _scatter_vector(space, loc)


def assemble_vector_field_load(space: MixedSpace, values_at) -> np.ndarray:
    """(g, phi_i) for a pointwise-evaluable field g(points (...,2)) -> (...,2)."""
    return assemble_load(space, lambda pts, _t: values_at(pts), 0.0)


def assemble_cross_load(fine_space: MixedSpace, coarse_space: MixedSpace,
                        coarse_state: MixedState, dstar: np.ndarray,
                        f, t: float, linear_part: bool = True) -> np.ndarray:
    """Right-hand side of the postprocessing Stokes problem on the fine space:

        (f(t), phi) - (F(u, u), phi) - (du/dt, phi)

    with u the coarse Galerkin velocity and du/dt its discrete time
    derivative (coefficient vector dstar), both evaluated at the fine
    quadrature points through point location.  With linear_part=True the
    coarse bubble coefficients are dropped from u and dstar.
    """
    out = assemble_load(fine_space, f, t)

    q, vals, grads, pts = basis_tables(fine_space, ASSEMBLY_DEGREE)
    nc, nq = pts.shape[:2]
    flat = pts.reshape(-1, 2)
    cells, bary = locate_points(coarse_space.mesh, flat)
    u, du = velocity_at(coarse_space, coarse_state.velocity, cells, bary,
                        linear_part=linear_part, gradient=True)
    ud = velocity_at(coarse_space, dstar, cells, bary,
                     linear_part=linear_part)
    u = u.reshape(nc, nq, 2)
    du = du.reshape(nc, nq, 2, 2)
    ud = ud.reshape(nc, nq, 2)
    div = du[..., 0, 0] + du[..., 1, 1]
    f_form = np.einsum("nqj,nqij->nqi", u, du) + 0.5 * div[..., None] * u
    area = fine_space.mesh.cell_areas
    loc = np.einsum("c,q,cqi,qa->cia", area, q.weights, f_form + ud, vals)
    return out - _scatter_vector(fine_space, loc)
