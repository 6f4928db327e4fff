"""Postprocessing-based a posteriori error estimation.

The computed Galerkin data is fed as right-hand side of a steady Stokes
problem on a richer space (same element, finer mesh).  The difference
between the postprocessed and the Galerkin solutions estimates the spatial
error; efficiency indexes are ratios of estimated to true error norms for
the first velocity component (L2 and full H1) and the pressure (L2/R).

An optional classical explicit residual estimator for the same induced
Stokes problem is provided as well (efficient but not asymptotically
exact, no attempt to calibrate its constant).
"""

from dataclasses import dataclass, asdict

import numpy as np

from .assembly import (ASSEMBLY_DEGREE, LOAD_DEGREE, assemble_cross_load,
                       basis_tables)
from .fe_space import MixedSpace, MixedState, pressure_at, velocity_at
from .manufactured import ManufacturedCase, error_norms
from .mesh import locate_points
from .stokes import StokesProblem, solve_stokes


@dataclass
class EstimatorReport:
    h: float
    h_fine: float
    k: float
    scheme: str
    t_star: float
    est_vel_L2: float = np.nan
    est_vel_H1: float = np.nan
    est_pre_L2R: float = np.nan
    true_vel_L2: float = np.nan
    true_vel_H1: float = np.nan
    true_pre_L2R: float = np.nan
    post_vel_L2: float = np.nan     # true errors of the postprocessed solution
    post_vel_H1: float = np.nan
    post_pre_L2R: float = np.nan
    theta_vel_L2: float = np.nan
    theta_vel_H1: float = np.nan
    theta_pre: float = np.nan

    def to_dict(self):
        return asdict(self)


def postprocess(coarse_space: MixedSpace, fine_space: MixedSpace,
                coarse_state: MixedState, dstar: np.ndarray, nu: float,
                f, t: float, linear_part: bool = True) -> MixedState:
    """Solve the postprocessing Stokes problem on the fine space with the
    Galerkin data (velocity, convection, discrete time derivative) on the
    right-hand side.  linear_part=True drops the coarse bubble coefficients
    (the convention used in all experiments); with linear_part=False and
    fine_space == coarse_space the Galerkin state is reproduced exactly."""
    rhs = assemble_cross_load(fine_space, coarse_space, coarse_state, dstar,
                              f, t, linear_part=linear_part)
    return solve_stokes(StokesProblem(fine_space, nu, rhs), time=t)


def difference_norms(fine_state: MixedState, coarse_state: MixedState,
                     linear_fine: bool = True, linear_coarse: bool = True):
    """Norms of (fine field - coarse field), integrated on the fine mesh
    with the degree-10 rule.  Returns dict with first-component velocity
    L2 and H1 norms, both-component aggregates, and the L2/R pressure norm."""
    fs, cs = fine_state.space, coarse_state.space
    q, vals, grads, pts = basis_tables(fs, LOAD_DEGREE)
    nc, nq = pts.shape[:2]
    fcells = np.repeat(np.arange(nc), nq)
    fbary = np.tile(q.points, (nc, 1))
    uf, duf = velocity_at(fs, fine_state.velocity, fcells, fbary,
                          linear_part=linear_fine, gradient=True)
    pf = pressure_at(fs, fine_state.pressure, fcells, fbary)

    ccells, cbary = locate_points(cs.mesh, pts.reshape(-1, 2))
    uc, duc = velocity_at(cs, coarse_state.velocity, ccells, cbary,
                          linear_part=linear_coarse, gradient=True)
    pc = pressure_at(cs, coarse_state.pressure, ccells, cbary)

    e = (uf - uc).reshape(nc, nq, 2)
    de = (duf - duc).reshape(nc, nq, 2, 2)
    ep = (pf - pc).reshape(nc, nq)
    area = fs.mesh.cell_areas
    w = q.weights

    def integral(field):
        return float(np.einsum("c,q,cq->", area, w, field))

    l2_sq = [integral(e[..., i] ** 2) for i in range(2)]
    h1_sq = [l2_sq[i] + integral((de[..., i, :] ** 2).sum(axis=-1))
             for i in range(2)]
    ep_mean = integral(ep)
    pre_sq = integral((ep - ep_mean) ** 2)
    return {
        "vel_L2": np.sqrt(l2_sq[0]), "vel_H1": np.sqrt(h1_sq[0]),
        "vel_L2_all": np.sqrt(sum(l2_sq)), "vel_H1_all": np.sqrt(sum(h1_sq)),
        "pre_L2R": np.sqrt(pre_sq),
    }


def estimate(coarse_state: MixedState, postprocessed_state: MixedState,
             case: ManufacturedCase | None, t: float,
             k: float = np.nan, scheme: str = "",
             linear_fine: bool = True) -> EstimatorReport:
    """Build the full report: estimator norms, and (when the exact solution
    is supplied) true errors plus efficiency indexes est/true."""
    cs, fs = coarse_state.space, postprocessed_state.space
    rep = EstimatorReport(h=cs.mesh.h, h_fine=fs.mesh.h, k=k, scheme=scheme,
                          t_star=t)
    est = difference_norms(postprocessed_state, coarse_state,
                           linear_fine=linear_fine, linear_coarse=True)
    rep.est_vel_L2 = est["vel_L2"]
    rep.est_vel_H1 = est["vel_H1"]
    rep.est_pre_L2R = est["pre_L2R"]
    if case is not None:
        tru = error_norms(cs, coarse_state, case, t, use_linear_part=True)
        rep.true_vel_L2 = tru.vel_L2
        rep.true_vel_H1 = tru.vel_H1
        rep.true_pre_L2R = tru.pre_L2R
        pos = error_norms(fs, postprocessed_state, case, t,
                          use_linear_part=linear_fine)
        rep.post_vel_L2 = pos.vel_L2
        rep.post_vel_H1 = pos.vel_H1
        rep.post_pre_L2R = pos.pre_L2R

        def ratio(a, b):
            return a / b if b > 1e-13 else np.nan

        rep.theta_vel_L2 = ratio(rep.est_vel_L2, rep.true_vel_L2)
        rep.theta_vel_H1 = ratio(rep.est_vel_H1, rep.true_vel_H1)
        rep.theta_pre = ratio(rep.est_pre_L2R, rep.true_pre_L2R)
    return rep


@dataclass(frozen=True)
class ResidualEstimate:
    eta_vel_H1: float
    eta_pre_L2R: float
    interior_part: float
    jump_part: float
    divergence_part: float


def residual_stokes_estimator(space: MixedSpace, state: MixedState,
                              f, dstar: np.ndarray, nu: float,
                              t: float) -> ResidualEstimate:
    """Classical explicit residual estimator for the Stokes problem induced
    by the Galerkin data (scale-free; efficiency, not exactness):

        eta^2 = sum_T h_T^2 ||R_T||^2 + sum_E h_E ||[nu du/dn - p n]||^2_E
                + sum_T ||div u_h||^2_T

    with R_T = f - F(u_h,u_h) - d_t u_h + nu*lap(u_h) - grad(p_h) (the
    Laplacian of the linear velocity part vanishes cell-wise)."""
    mesh = space.mesh
    q, vals, grads, pts = basis_tables(space, ASSEMBLY_DEGREE)
    nc, nq = pts.shape[:2]
    cells = np.repeat(np.arange(nc), nq)
    bary = np.tile(q.points, (nc, 1))
    u, du = velocity_at(space, state.velocity, cells, bary,
                        linear_part=True, gradient=True)
    udot = velocity_at(space, dstar, cells, bary, linear_part=True)
    _, dp = pressure_at(space, state.pressure, cells, bary, gradient=True)
    u = u.reshape(nc, nq, 2)
    du = du.reshape(nc, nq, 2, 2)
    udot = udot.reshape(nc, nq, 2)
    dp = dp.reshape(nc, nq, 2)
    fv = np.asarray(f(pts, t), dtype=float)
    div = du[..., 0, 0] + du[..., 1, 1]
    conv = np.einsum("nqj,nqij->nqi", u, du) + 0.5 * div[..., None] * u
    resid = fv - conv - udot - dp
    area = mesh.cell_areas
    w = q.weights
    h_t = np.sqrt(2.0 * area)          # structured right triangles: leg length
    interior = float(np.einsum("c,c,q,cqi,cqi->", h_t ** 2, area, w,
                               resid, resid))
    div_part = float(np.einsum("c,q,cq->", area, w, div ** 2))

    # edge jumps of nu*du/dn (p is continuous, its jump vanishes); the
    # linear-part gradient is constant per cell
    grad_cell = _p1_gradient_per_cell(space, state.velocity)   # (nc, 2, 2)
    from .mesh import mesh_edges
    edges, incident = mesh_edges(mesh)
    jump_sq = 0.0
    for e_idx in range(edges.shape[0]):
        inc = incident[e_idx]
        if len(inc) != 2:
            continue
        n0, n1 = edges[e_idx]
        tangent = mesh.nodes[n1] - mesh.nodes[n0]
        length = float(np.hypot(*tangent))
        normal = np.array([tangent[1], -tangent[0]]) / length
        jump = nu * (grad_cell[inc[0]] - grad_cell[inc[1]]) @ normal
        jump_sq += length ** 2 * float(jump @ jump)   # h_E * ||.||^2_E
    eta = float(np.sqrt(interior + jump_sq + div_part))
    return ResidualEstimate(eta_vel_H1=eta, eta_pre_L2R=eta,
                            interior_part=np.sqrt(interior),
                            jump_part=np.sqrt(jump_sq),
                            divergence_part=np.sqrt(div_part))


def _p1_gradient_per_cell(space: MixedSpace, vel_coeffs: np.ndarray):
    """Constant gradient of the linear velocity part on every cell."""
    sd = space.cell_sdofs[:, :3]
    safe = np.clip(sd, 0, None)
    g = space.mesh.grad_bary                          # (nc, 3, 2)
    out = np.empty((space.mesh.cell_count, 2, 2))
    for comp in range(2):
        c = np.where(sd >= 0, vel_coeffs[safe + comp * space.n_scalar], 0.0)
        out[:, comp, :] = np.einsum("nf,nfd->nd", c, g)
    return out


@dataclass(frozen=True)
class SeparationAudit:
    n_reports: int
    h: float
    est_spread_L2: float
    est_spread_H1: float
    est_spread_pre: float
    max_est_spread: float
    true_total_ratio: float
    per_norm_true_ratio: dict


def temporal_separation_audit(reports) -> SeparationAudit:
    """Across a k-sweep at fixed h: relative spread (max-min)/mean of each
    estimator norm, and max/min ratio of the true total error."""
    reports = list(reports)
    if len(reports) < 3:
        raise ValueError("need at least 3 reports across a k-sweep")
    hs = {r.h for r in reports}
    if len(hs) != 1:
        raise ValueError(f"reports mix mesh sizes: {sorted(hs)}")

    def spread(values):
        values = np.asarray(values)
        return float((values.max() - values.min()) / values.mean())

    s_l2 = spread([r.est_vel_L2 for r in reports])
    s_h1 = spread([r.est_vel_H1 for r in reports])
    s_pre = spread([r.est_pre_L2R for r in reports])
    totals = np.array([np.sqrt(r.true_vel_L2 ** 2 + r.true_vel_H1 ** 2
                               + r.true_pre_L2R ** 2) for r in reports])
    per_norm = {
        "vel_L2": float(max(r.true_vel_L2 for r in reports)
                        / min(r.true_vel_L2 for r in reports)),
        "vel_H1": float(max(r.true_vel_H1 for r in reports)
                        / min(r.true_vel_H1 for r in reports)),
        "pre_L2R": float(max(r.true_pre_L2R for r in reports)
                         / min(r.true_pre_L2R for r in reports)),
    }
    return SeparationAudit(
        n_reports=len(reports), h=hs.pop(),
        est_spread_L2=s_l2, est_spread_H1=s_h1, est_spread_pre=s_pre,
        max_est_spread=max(s_l2, s_h1, s_pre),
        true_total_ratio=float(totals.max() / totals.min()),
        per_norm_true_ratio=per_norm)
