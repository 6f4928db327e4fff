"""Fully implicit time integration of the spatially discrete system.

Backward Euler and two-step BDF with fixed step k; Newton's method with
the analytic convection Jacobian at every step.  The first BDF2 step is
bootstrapped with one backward Euler step.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .assembly import (assemble_convection, assemble_divergence,
                       assemble_load, assemble_mass, assemble_stiffness,
                       assemble_vector_field_load, pressure_mean_vector)
from .fe_space import MixedSpace, MixedState
from .sparse_linalg import (ConfigurationError, SaddleSystem, SolverFailure,
                            factorize)


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str                 # "euler" | "bdf2"
    k: float
    t_end: float
    nu: float
    newton_tol: float = 1e-10
    newton_max_iter: int = 25

    def __post_init__(self):
        if self.scheme not in ("euler", "bdf2"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if self.k <= 0:
            raise ConfigurationError("time step must be positive")
        steps = self.t_end / self.k
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigurationError(
                f"t_end={self.t_end} is not an integer number of steps k={self.k}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.k))


@dataclass
class Trajectory:
    states: list                      # MixedState at t_0 .. t_N (or a tail)
    newton_iters: list
    config: SchemeConfig

    @property
    def final(self) -> MixedState:
        return self.states[-1]


class StepFailure(RuntimeError):
    def __init__(self, message, residual_history):
        super().__init__(message)
        self.residual_history = residual_history


@lru_cache(maxsize=16)
def _operators(space: MixedSpace, nu: float):
    return (assemble_mass(space), assemble_stiffness(space, nu),
            assemble_divergence(space), pressure_mean_vector(space))


def initial_state(space: MixedSpace, u0, nu_for_cache: float = 1.0) -> MixedState:
    """Discrete Leray projection of u0: constrained L2 projection, so the
    initial velocity is discretely divergence-free."""
    mass, _, div, mean = _operators(space, nu_for_cache)
    system = SaddleSystem(a_block=mass, div_block=div, mean_vector=mean)
    rhs = assemble_vector_field_load(space, u0)
    fact = factorize(system)
    u, _ = fact.solve(rhs)
    return MixedState(space, u, np.zeros(space.n_pre), 0.0)


def _dt_coefficients(scheme: str, k: float):
    """(alpha, history weights) so that d_t U^n = alpha*U^n + sum w_i H_i
    with H the history states oldest first."""
    if scheme == "euler":
        return 1.0 / k, [-1.0 / k]
    return 1.5 / k, [0.5 / k, -2.0 / k]          # bdf2: (3U - 4U1 + U2)/(2k)


def step(space: MixedSpace, config: SchemeConfig, history, f,
         scheme: str | None = None) -> MixedState:
    """Advance one step to t = history[-1].time + k with Newton iteration.

    history: previous states oldest first (1 for Euler, 2 for BDF2).
    scheme overrides config.scheme for the BDF2 bootstrap step.
    """
    scheme = scheme or config.scheme
    need = 1 if scheme == "euler" else 2
    if len(history) < need:
        raise ConfigurationError(
            f"{scheme} needs {need} history states, got {len(history)}")
    history = history[-need:]
    k, nu = config.k, config.nu
    t_new = history[-1].time + k
    mass, stiff, div, mean = _operators(space, nu)
    alpha, hist_w = _dt_coefficients(scheme, k)
    hist_term = sum(w * mass @ s.velocity for w, s in zip(hist_w, history))
    load = assemble_load(space, f, t_new)

    u = history[-1].velocity.copy()
    p = history[-1].pressure.copy()
    lam = 0.0
    base = alpha * mass + stiff
    residuals = []
    for it in range(config.newton_max_iter):
        conv = assemble_convection(space, u, want_jacobian=True)
        r_u = base @ u + hist_term + conv.vector - div.T @ p - load
        r_p = div @ u + mean * lam
        r_c = mean @ p
        res = max(np.abs(r_u).max(), np.abs(r_p).max(), abs(r_c))
        residuals.append(res)
        if res <= config.newton_tol:
            state = MixedState(space, u, p, t_new)
            state.newton_iters = it
            return state
        system = SaddleSystem(a_block=(base + conv.jacobian).tocsr(),
                              div_block=div, mean_vector=mean)
        fact = factorize(system)
        rhs = np.concatenate([-r_u, -r_p, [-r_c]])
        dx = fact._lu.solve(rhs)
        u = u + dx[:space.n_vel]
        p = p + dx[space.n_vel:space.n_vel + space.n_pre]
        lam = lam + dx[-1]
    raise StepFailure(
        f"Newton did not reach tol {config.newton_tol} in "
        f"{config.newton_max_iter} iterations at t={t_new}", residuals)


def discrete_time_derivative(config: SchemeConfig, history,
                             scheme: str | None = None) -> np.ndarray:
    """Difference quotient d_t U^n of velocity coefficients.

    history holds the states oldest first, ending with U^n.  Along scheme
    trajectories this coincides with the operator-form time derivative in
    the discretely divergence-free sense (audited in the test suite).
    """
    scheme = scheme or config.scheme
    need = 2 if scheme == "euler" else 3
    if len(history) < need:
        raise ConfigurationError(
            f"{scheme} time derivative needs {need} states, got {len(history)}")
    h = history[-need:]
    k = config.k
    if scheme == "euler":
        return (h[-1].velocity - h[-2].velocity) / k
    return (3.0 * h[-1].velocity - 4.0 * h[-2].velocity
            + h[-3].velocity) / (2.0 * k)


def integrate(space: MixedSpace, config: SchemeConfig, u0, f,
              keep: str = "all") -> Trajectory:
    """Run the scheme from t=0 to t_end.  keep="all" stores every state,
    keep="tail" only the last three (enough for d_t* at the final level)."""
    state0 = initial_state(space, u0, config.nu)
    states = [state0]
    iters = []
    for n in range(config.n_steps):
        scheme = config.scheme
        if config.scheme == "bdf2" and n == 0:
            scheme = "euler"   # bootstrap step
        new = step(space, config, states, f, scheme=scheme)
        iters.append(new.newton_iters)
        states.append(new)
        if keep == "tail" and len(states) > 3:
            states.pop(0)
    return Trajectory(states=states, newton_iters=iters, config=config)
