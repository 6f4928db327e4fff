import numpy as np
import pytest
import scipy.sparse as sp

from minipost.assembly import (assemble_divergence, assemble_stiffness,
                               pressure_mean_vector)
from minipost.sparse_linalg import (ConfigurationError, SaddleSystem,
                                    SolverFailure, factorize,
                                    factorize_matrix)


@pytest.fixture(scope="module")
def stokes_system(space4):
    return SaddleSystem(a_block=assemble_stiffness(space4, 1.0),
                        div_block=assemble_divergence(space4),
                        mean_vector=pressure_mean_vector(space4))


def test_sparse_matches_dense_oracle(stokes_system, rng):
    fact = factorize(stokes_system)
    dense = stokes_system.bordered().toarray()
    for _ in range(3):
        rhs_u = rng.standard_normal(stokes_system.n_vel)
        u, p = fact.solve(rhs_u)
        full = np.zeros(dense.shape[0])
        full[:stokes_system.n_vel] = rhs_u
        ref = np.linalg.solve(dense, full)
        scale = max(1.0, np.abs(ref).max())
        assert np.abs(u - ref[:stokes_system.n_vel]).max() <= 1e-9 * scale
        assert np.abs(p - ref[stokes_system.n_vel:-1]).max() <= 1e-9 * scale


def test_zero_rhs_gives_zero(stokes_system):
    fact = factorize(stokes_system)
    u, p = fact.solve(np.zeros(stokes_system.n_vel))
    assert np.abs(u).max() == 0.0
    assert np.abs(p).max() == 0.0


def test_constructed_consistency(stokes_system, rng):
    # rhs = M x for a random x with zero-mean pressure part recovers x
    m = stokes_system.bordered()
    n = m.shape[0]
    nv, npre = stokes_system.n_vel, stokes_system.n_pre
    x = rng.standard_normal(n)
    c = stokes_system.mean_vector
    x[nv:nv + npre] -= c @ x[nv:nv + npre] / c.sum()   # zero-mean pressure
    x[-1] = 0.0                                        # multiplier inactive
    rhs = m @ x
    fact = factorize(stokes_system)
    u, p = fact.solve(rhs[:nv], rhs[nv:nv + npre])
    assert np.abs(u - x[:nv]).max() <= 1e-9 * np.abs(x).max()
    assert np.abs(p - x[nv:nv + npre]).max() <= 1e-9 * np.abs(x).max()


def test_solution_pressure_mean_zero(stokes_system, rng):
    fact = factorize(stokes_system)
    _, p = fact.solve(rng.standard_normal(stokes_system.n_vel))
    assert abs(stokes_system.mean_vector @ p) <= 1e-10


def test_missing_constraint_row_is_singular(stokes_system):
    # without the border the constant-pressure nullspace makes the saddle
    # matrix exactly singular
    m = sp.bmat([[stokes_system.a_block, -stokes_system.div_block.T],
                 [stokes_system.div_block, None]], format="csc")
    with pytest.raises(SolverFailure):
        factorize_matrix(m)


def test_factorization_reuse_is_deterministic(stokes_system, rng):
    fact = factorize(stokes_system)
    rhs = rng.standard_normal(stokes_system.n_vel)
    u1, p1 = fact.solve(rhs)
    u2, p2 = fact.solve(rhs.copy())
    np.testing.assert_array_equal(u1, u2)
    np.testing.assert_array_equal(p1, p2)


def test_shape_mismatch_raises(stokes_system):
    fact = factorize(stokes_system)
    with pytest.raises(ConfigurationError):
        fact.solve(np.zeros(stokes_system.n_vel + 1))
    broken = SaddleSystem(a_block=stokes_system.a_block,
                          div_block=stokes_system.div_block,
                          mean_vector=stokes_system.mean_vector[:-1])
    with pytest.raises(ConfigurationError):
        broken.bordered()


def test_symmetry_of_assembled_blocks(stokes_system):
    a = stokes_system.a_block
    assert abs(a - a.T).max() <= 1e-12


def test_mean_vector_sums_to_domain_area(stokes_system):
    assert abs(stokes_system.mean_vector.sum() - 1.0) <= 1e-13
