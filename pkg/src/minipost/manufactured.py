"""Closed-form exact solutions, forcing terms and error norms.

The exact velocity derives from a stream function, so it is pointwise
divergence-free and vanishes on the boundary of the unit square:

    u1 =  2*pi*phi(t) * sin(pi x)^2 * sin(pi y) cos(pi y)
    u2 = -2*pi*phi(t) * sin(pi y)^2 * sin(pi x) cos(pi x)
    p  =  20*phi(t) * x^2 y

with temporal profile phi(t) = t ("linear") or sin((2pi + pi/2) t)
("sine").  All spatial and temporal derivatives are hand-derived; a
finite-difference oracle in the tests audits them.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import basis_tables, LOAD_DEGREE
from .fe_space import MixedSpace, MixedState, velocity_at, pressure_at

_SINE_OMEGA = 2.0 * np.pi + 0.5 * np.pi


@dataclass(frozen=True)
class ManufacturedCase:
    phi_profile: str = "linear"     # "linear" | "sine"
    nu: float = 0.05

    def __post_init__(self):
        if self.phi_profile not in ("linear", "sine"):
            raise ValueError(f"unknown phi profile {self.phi_profile!r}")

    def phi(self, t):
        if self.phi_profile == "linear":
            return t
        return np.sin(_SINE_OMEGA * t)

    def dphi(self, t):
        if self.phi_profile == "linear":
            return 1.0
        return _SINE_OMEGA * np.cos(_SINE_OMEGA * t)

    # -- spatial factors: u1 = 2*pi*phi * g(x) w(y), u2 = -2*pi*phi * g(y) w(x)
    #    with g(s) = sin(pi s)^2, w(s) = sin(pi s) cos(pi s)

    @staticmethod
    def _g(s):
        return np.sin(np.pi * s) ** 2

    @staticmethod
    def _dg(s):
        return np.pi * np.sin(2.0 * np.pi * s)

    @staticmethod
    def _ddg(s):
        return 2.0 * np.pi ** 2 * np.cos(2.0 * np.pi * s)

    @staticmethod
    def _w(s):
        return 0.5 * np.sin(2.0 * np.pi * s)

    @staticmethod
    def _dw(s):
        return np.pi * np.cos(2.0 * np.pi * s)

    @staticmethod
    def _ddw(s):
        return -2.0 * np.pi ** 2 * np.sin(2.0 * np.pi * s)

    def velocity(self, pts, t):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        a = 2.0 * np.pi * self.phi(t)
        return np.stack([a * self._g(x) * self._w(y),
                         -a * self._g(y) * self._w(x)], axis=-1)

    def velocity_gradient(self, pts, t):
        """d u_i / d x_j, shape (..., 2, 2)."""
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        a = 2.0 * np.pi * self.phi(t)
        du = np.empty(pts.shape[:-1] + (2, 2))
        du[..., 0, 0] = a * self._dg(x) * self._w(y)
        du[..., 0, 1] = a * self._g(x) * self._dw(y)
        du[..., 1, 0] = -a * self._g(y) * self._dw(x)
        du[..., 1, 1] = -a * self._dg(y) * self._w(x)
        return du

    def velocity_laplacian(self, pts, t):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        a = 2.0 * np.pi * self.phi(t)
        return np.stack([
            a * (self._ddg(x) * self._w(y) + self._g(x) * self._ddw(y)),
            -a * (self._ddg(y) * self._w(x) + self._g(y) * self._ddw(x)),
        ], axis=-1)

    def velocity_time_derivative(self, pts, t):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        a = 2.0 * np.pi * self.dphi(t)
        return np.stack([a * self._g(x) * self._w(y),
                         -a * self._g(y) * self._w(x)], axis=-1)

    def pressure(self, pts, t, mean_adjusted: bool = False):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        p = 20.0 * self.phi(t) * x ** 2 * y
        if mean_adjusted:
            p = p - self.pressure_mean(t)
        return p

    def pressure_mean(self, t):
        # mean of 20 x^2 y over the unit square
        return (10.0 / 3.0) * self.phi(t)

    def pressure_gradient(self, pts, t):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        c = 20.0 * self.phi(t)
        return np.stack([2.0 * c * x * y, c * x ** 2], axis=-1)

    def forcing(self, pts, t):
        """f = u_t - nu*lap(u) + (u.grad)u + grad(p)."""
        u = self.velocity(pts, t)
        du = self.velocity_gradient(pts, t)
        conv = np.einsum("...j,...ij->...i", u, du)
        return (self.velocity_time_derivative(pts, t)
                - self.nu * self.velocity_laplacian(pts, t)
                + conv + self.pressure_gradient(pts, t))


def exact(case: ManufacturedCase, x, y, t, gradients: bool = False):
    """Pointwise exact solution (velocity, pressure[, grad u, grad p])."""
    pts = np.stack([np.asarray(x, dtype=float),
                    np.asarray(y, dtype=float)], axis=-1)
    u = case.velocity(pts, t)
    p = case.pressure(pts, t)
    if not gradients:
        return u, p
    return u, p, case.velocity_gradient(pts, t), case.pressure_gradient(pts, t)


@dataclass(frozen=True)
class ErrorNorms:
    """Velocity errors per component plus the L2/R pressure error.

    H1 is the full norm sqrt(L2^2 + seminorm^2).  vel_L2 / vel_H1 refer to
    the first component (the quantity tabulated in the experiments);
    aggregate fields carry both components together.
    """

    vel_L2: float
    vel_H1: float
    vel2_L2: float
    vel2_H1: float
    vel_L2_all: float
    vel_H1_all: float
    pre_L2R: float


def error_norms(space: MixedSpace, state: MixedState, case: ManufacturedCase,
                t: float, use_linear_part: bool = True) -> ErrorNorms:
    """Quadrature (degree 10) errors of a mixed state against the exact
    solution; the pressure error is measured in the quotient norm."""
    q, vals, grads, pts = basis_tables(space, LOAD_DEGREE)
    nc, nq = pts.shape[:2]
    cells = np.repeat(np.arange(nc), nq)
    bary = np.tile(q.points, (nc, 1))
    uh, duh = velocity_at(space, state.velocity, cells, bary,
                          linear_part=use_linear_part, gradient=True)
    ph = pressure_at(space, state.pressure, cells, bary)
    uh = uh.reshape(nc, nq, 2)
    duh = duh.reshape(nc, nq, 2, 2)
    ph = ph.reshape(nc, nq)

    ue = case.velocity(pts, t)
    due = case.velocity_gradient(pts, t)
    pe = case.pressure(pts, t)

    area = space.mesh.cell_areas
    w = q.weights

    def integral(field):
        return float(np.einsum("c,q,cq->", area, w, field))

    e = ue - uh
    de = due - duh
    l2_sq = [integral(e[..., i] ** 2) for i in range(2)]
    h1_semi_sq = [integral((de[..., i, :] ** 2).sum(axis=-1)) for i in range(2)]
    ep = pe - ph
    ep_mean = integral(ep)          # domain area is 1
    pre_sq = integral((ep - ep_mean) ** 2)

    h1_sq = [l2_sq[i] + h1_semi_sq[i] for i in range(2)]
    return ErrorNorms(
        vel_L2=np.sqrt(l2_sq[0]), vel_H1=np.sqrt(h1_sq[0]),
        vel2_L2=np.sqrt(l2_sq[1]), vel2_H1=np.sqrt(h1_sq[1]),
        vel_L2_all=np.sqrt(l2_sq[0] + l2_sq[1]),
        vel_H1_all=np.sqrt(h1_sq[0] + h1_sq[1]),
        pre_L2R=np.sqrt(pre_sq))
