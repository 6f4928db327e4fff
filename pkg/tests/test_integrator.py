import numpy as np
import pytest
import scipy.sparse.linalg as spla

from minipost import build_mini_space, build_structured_mesh
from minipost.assembly import (assemble_convection, assemble_divergence,
                               assemble_mass, assemble_stiffness,
                               pressure_mean_vector)
from minipost.fe_space import velocity_at, zero_state
from minipost.integrator import (SchemeConfig, discrete_time_derivative,
                                 initial_state, integrate, step)
from minipost.manufactured import ManufacturedCase
from minipost.mesh import locate_points
from minipost.sparse_linalg import ConfigurationError
from minipost.stokes import stokes_projection


def _zero_f(pts, t):
    return np.zeros(pts.shape)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SchemeConfig("rk4", k=0.1, t_end=1.0, nu=0.05)
    with pytest.raises(ConfigurationError):
        SchemeConfig("euler", k=-0.1, t_end=1.0, nu=0.05)
    with pytest.raises(ConfigurationError):
        SchemeConfig("euler", k=0.3, t_end=1.0, nu=0.05)   # 10/3 steps
    assert SchemeConfig("bdf2", k=0.1, t_end=0.5, nu=0.05).n_steps == 5


def test_zero_data_zero_trajectory(space4):
    config = SchemeConfig("euler", k=0.1, t_end=0.3, nu=0.05)
    traj = integrate(space4, config, lambda pts: np.zeros(pts.shape), _zero_f)
    for state in traj.states:
        assert np.abs(state.velocity).max() <= 1e-12
        assert np.abs(state.pressure).max() <= 1e-12


def test_initial_state_is_leray_projection(space6):
    case = ManufacturedCase("linear")
    state = initial_state(space6, lambda pts: case.velocity(pts, 1.0))
    div = assemble_divergence(space6)
    assert np.abs(div @ state.velocity).max() <= 1e-10


def test_initial_state_idempotent_on_divfree_states(space6):
    # a discrete Stokes velocity is already discretely divergence-free:
    # projecting it again must reproduce it
    case = ManufacturedCase("linear", nu=0.05)
    ref = stokes_projection(space6, case, t=1.0, nu=case.nu)

    def u0(pts):
        cells, bary = locate_points(space6.mesh, pts.reshape(-1, 2))
        vals = velocity_at(space6, ref.velocity, cells, bary)
        return vals.reshape(pts.shape)

    state = initial_state(space6, u0)
    scale = np.abs(ref.velocity).max()
    assert np.abs(state.velocity - ref.velocity).max() <= 1e-8 * scale


def test_initial_state_linear_phi_is_zero(space4):
    case = ManufacturedCase("linear")
    state = initial_state(space4, lambda pts: case.velocity(pts, 0.0))
    assert np.abs(state.velocity).max() <= 1e-12


def test_steady_fixed_point(space4):
    """With f manufactured so a discrete state is steady, one step returns
    that state unchanged (to Newton tolerance)."""
    case = ManufacturedCase("linear", nu=0.05)
    s = stokes_projection(space4, case, t=1.0, nu=case.nu)
    stiff = assemble_stiffness(space4, case.nu)
    div = assemble_divergence(space4)
    conv = assemble_convection(space4, s.velocity)
    load = stiff @ s.velocity + conv.vector - div.T @ s.pressure
    # represent the load as an FE velocity field g with (g, phi) = load
    mass = assemble_mass(space4)
    g_coeffs = spla.spsolve(mass.tocsc(), load)

    def f(pts, t):
        cells, bary = locate_points(space4.mesh, pts.reshape(-1, 2))
        vals = velocity_at(space4, g_coeffs, cells, bary)
        return vals.reshape(pts.shape)

    config = SchemeConfig("euler", k=0.05, t_end=0.05, nu=case.nu)
    new = step(space4, config, [s], f)
    scale = max(1.0, np.abs(s.velocity).max())
    assert np.abs(new.velocity - s.velocity).max() <= 1e-8 * scale


def test_discrete_time_derivative_formulas(space4, rng):
    config = SchemeConfig("bdf2", k=0.1, t_end=0.5, nu=0.05)
    states = [zero_state(space4, t) for t in (0.0, 0.1, 0.2)]
    for s in states:
        s.velocity = rng.standard_normal(space4.n_vel)
    d_euler = discrete_time_derivative(config, states[-2:], scheme="euler")
    np.testing.assert_allclose(
        d_euler, (states[-1].velocity - states[-2].velocity) / 0.1)
    d_bdf2 = discrete_time_derivative(config, states)
    np.testing.assert_allclose(
        d_bdf2, (3 * states[2].velocity - 4 * states[1].velocity
                 + states[0].velocity) / 0.2)
    # constant history
    for s in states:
        s.velocity = states[0].velocity
    assert np.abs(discrete_time_derivative(config, states)).max() <= 1e-14


def test_discrete_time_derivative_needs_history(space4):
    config = SchemeConfig("bdf2", k=0.1, t_end=0.5, nu=0.05)
    with pytest.raises(ConfigurationError):
        discrete_time_derivative(config, [zero_state(space4)])


@pytest.fixture(scope="module")
def temporal_sweep():
    """Final velocity coefficients for both schemes over a k-halving sweep,
    plus a tiny-k reference, on a small mesh (sine profile so the temporal
    error dominates the comparison against the reference)."""
    space = build_mini_space(build_structured_mesh(6))
    case = ManufacturedCase("sine", nu=0.05)
    t_end = 0.5
    ks = [1 / 20, 1 / 40, 1 / 80, 1 / 160]

    def u0(pts):
        return case.velocity(pts, 0.0)

    ref = integrate(space, SchemeConfig("bdf2", k=1 / 2560, t_end=t_end,
                                        nu=case.nu),
                    u0, case.forcing, keep="tail").final.velocity
    out = {}
    for scheme in ("euler", "bdf2"):
        finals = []
        for k in ks:
            traj = integrate(space, SchemeConfig(scheme, k=k, t_end=t_end,
                                                 nu=case.nu),
                             u0, case.forcing, keep="tail")
            finals.append(traj.final.velocity)
        out[scheme] = finals
    return space, ks, ref, out


def _slope(ks, errs):
    return np.polyfit(np.log(ks), np.log(errs), 1)[0]


def test_euler_first_order(temporal_sweep):
    space, ks, ref, out = temporal_sweep
    mass = assemble_mass(space)
    errs = [np.sqrt((v - ref) @ (mass @ (v - ref))) for v in out["euler"]]
    assert _slope(ks, errs) == pytest.approx(1.0, abs=0.15)


def test_bdf2_second_order(temporal_sweep):
    space, ks, ref, out = temporal_sweep
    mass = assemble_mass(space)
    errs = [np.sqrt((v - ref) @ (mass @ (v - ref))) for v in out["bdf2"]]
    assert _slope(ks, errs) == pytest.approx(2.0, abs=0.2)


def test_trajectory_invariants(space4):
    case = ManufacturedCase("linear", nu=0.05)
    config = SchemeConfig("bdf2", k=0.05, t_end=0.25, nu=case.nu)
    traj = integrate(space4, config, lambda pts: case.velocity(pts, 0.0),
                     case.forcing)
    div = assemble_divergence(space4)
    mean = pressure_mean_vector(space4)
    times = [s.time for s in traj.states]
    assert times == sorted(times)
    for state in traj.states:
        assert np.abs(div @ state.velocity).max() <= 1e-10
        assert abs(mean @ state.pressure) <= 1e-10
    assert all(it <= config.newton_max_iter for it in traj.newton_iters)


def test_determinism(space4):
    case = ManufacturedCase("sine", nu=0.05)
    config = SchemeConfig("euler", k=0.05, t_end=0.2, nu=case.nu)
    t1 = integrate(space4, config, lambda pts: case.velocity(pts, 0.0),
                   case.forcing)
    t2 = integrate(space4, config, lambda pts: case.velocity(pts, 0.0),
                   case.forcing)
    for a, b in zip(t1.states, t2.states):
        np.testing.assert_array_equal(a.velocity, b.velocity)
        np.testing.assert_array_equal(a.pressure, b.pressure)


def test_keep_tail(space4):
    case = ManufacturedCase("linear", nu=0.05)
    config = SchemeConfig("bdf2", k=0.05, t_end=0.25, nu=case.nu)
    traj = integrate(space4, config, lambda pts: case.velocity(pts, 0.0),
                     case.forcing, keep="tail")
    assert len(traj.states) == 3
    full = integrate(space4, config, lambda pts: case.velocity(pts, 0.0),
                     case.forcing)
    np.testing.assert_array_equal(traj.final.velocity,
                                  full.final.velocity)
