"""Saddle-point systems and a deterministic sparse direct solver.

The mixed systems are bordered with a single Lagrange multiplier row
enforcing the zero-mean pressure constraint:

    [ A   -B^T  0 ] [u]   [b_u]
    [ B    0    c ] [p] = [b_p]
    [ 0   c^T   0 ] [l]   [ 0 ]

where c_q = integral of the q-th pressure basis function.  A direct LU
factorization (SuperLU) is used; meshes in this project stay small enough
that determinism and robustness beat iterative speed.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SolverFailure(RuntimeError):
    """Numerical failure of the sparse factorization or solve."""


class ConfigurationError(ValueError):
    """Structurally broken system (wrong shapes, missing constraint)."""


@dataclass
class SaddleSystem:
    a_block: sp.csr_matrix        # (n_vel, n_vel)
    div_block: sp.csr_matrix      # (n_pre, n_vel)
    mean_vector: np.ndarray       # (n_pre,)

    @property
    def n_vel(self) -> int:
        return self.a_block.shape[0]

    @property
    def n_pre(self) -> int:
        return self.div_block.shape[0]

    def bordered(self) -> sp.csc_matrix:
        nv, npre = self.n_vel, self.n_pre
        if self.div_block.shape != (npre, nv):
            raise ConfigurationError("divergence block shape mismatch")
        if self.mean_vector.shape != (npre,):
            raise ConfigurationError("mean-constraint vector shape mismatch")
        c = sp.csr_matrix(self.mean_vector.reshape(npre, 1))
        m = sp.bmat([[self.a_block, -self.div_block.T, None],
                     [self.div_block, None, c],
                     [None, c.T, None]], format="csc")
        return m


@dataclass
class Factorization:
    n_vel: int
    n_pre: int
    _lu: spla.SuperLU

    def solve(self, rhs_vel: np.ndarray, rhs_pre: np.ndarray | None = None):
        """Solve for (velocity, pressure); the multiplier is discarded."""
        if rhs_vel.shape != (self.n_vel,):
            raise ConfigurationError(
                f"velocity rhs length {rhs_vel.shape} != {self.n_vel}")
        rhs = np.zeros(self.n_vel + self.n_pre + 1)
        rhs[:self.n_vel] = rhs_vel
        if rhs_pre is not None:
            if rhs_pre.shape != (self.n_pre,):
                raise ConfigurationError("pressure rhs length mismatch")
            rhs[self.n_vel:self.n_vel + self.n_pre] = rhs_pre
        x = self._lu.solve(rhs)
        return x[:self.n_vel], x[self.n_vel:self.n_vel + self.n_pre]


def factorize(system: SaddleSystem) -> Factorization:
    m = system.bordered()
    try:
        lu = spla.splu(m, permc_spec="COLAMD",
                       options={"SymmetricMode": False})
    except RuntimeError as exc:  # exactly singular
        raise SolverFailure(f"sparse factorization failed: {exc}") from exc
    udiag = np.abs(lu.U.diagonal())
    if udiag.min() <= 1e-14 * udiag.max():
        raise SolverFailure(
            f"numerically singular system: min |U_ii| = {udiag.min():.3e}, "
            f"max |U_ii| = {udiag.max():.3e}")
    return Factorization(system.n_vel, system.n_pre, lu)


def factorize_matrix(m: sp.spmatrix) -> spla.SuperLU:
    """Factorize a plain sparse matrix with the same failure policy."""
    try:
        lu = spla.splu(m.tocsc(), permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SolverFailure(f"sparse factorization failed: {exc}") from exc
    udiag = np.abs(lu.U.diagonal())
    if udiag.min() <= 1e-14 * udiag.max():
        raise SolverFailure("numerically singular system")
    return lu
