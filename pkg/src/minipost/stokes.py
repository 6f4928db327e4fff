"""Steady Stokes solves on the mixed mini-element space.

Used for the postprocessing problems and for the Stokes projection in the
convergence tests.  One factorization per (space, nu) pair is cached and
reused: the saddle matrix never changes within a sweep, only the load.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .assembly import (assemble_divergence, assemble_load, assemble_stiffness,
                       pressure_mean_vector)
from .fe_space import MixedSpace, MixedState
from .sparse_linalg import Factorization, SaddleSystem, factorize


@dataclass
class StokesProblem:
    space: MixedSpace
    nu: float
    rhs: np.ndarray    # (n_vel,)


@lru_cache(maxsize=16)
def stokes_factorization(space: MixedSpace, nu: float) -> Factorization:
    system = SaddleSystem(a_block=assemble_stiffness(space, nu),
                          div_block=assemble_divergence(space),
                          mean_vector=pressure_mean_vector(space))
    return factorize(system)


def solve_stokes(problem: StokesProblem, time: float = 0.0) -> MixedState:
    if problem.rhs.shape != (problem.space.n_vel,):
        raise ValueError("rhs length does not match the velocity space")
    fact = stokes_factorization(problem.space, problem.nu)
    u, p = fact.solve(problem.rhs)
    return MixedState(problem.space, u, p, time)


def stokes_projection(space: MixedSpace, case, t: float, nu: float) -> MixedState:
    """Discrete Stokes projection of the exact solution of a manufactured
    case: solve the steady problem with load g = -nu*lap(u) + grad(p)."""

    def g(pts, _t):
        return (-nu * case.velocity_laplacian(pts, t)
                + case.pressure_gradient(pts, t))

    rhs = assemble_load(space, g, t)
    return solve_stokes(StokesProblem(space, nu, rhs), time=t)
