import numpy as np
import pytest

from minipost import build_mini_space, build_structured_mesh
from minipost.estimator import (EstimatorReport, difference_norms, estimate,
                                postprocess, residual_stokes_estimator,
                                temporal_separation_audit)
from minipost.fe_space import zero_state
from minipost.integrator import (SchemeConfig, discrete_time_derivative,
                                 integrate)
from minipost.manufactured import ManufacturedCase, error_norms


@pytest.fixture(scope="module")
def short_run():
    """Small Navier-Stokes run used by several estimator tests."""
    case = ManufacturedCase("linear", nu=0.05)
    space = build_mini_space(build_structured_mesh(6))
    config = SchemeConfig("bdf2", k=0.01, t_end=0.5, nu=case.nu)
    traj = integrate(space, config, lambda pts: case.velocity(pts, 0.0),
                     case.forcing, keep="tail")
    dstar = discrete_time_derivative(config, traj.states)
    return case, space, config, traj, dstar


def test_self_consistency_same_space(short_run):
    """Postprocessing onto the coarse space itself (keeping the bubbles in
    the data) reproduces the Galerkin state: it solves its own discrete
    Stokes problem."""
    case, space, config, traj, dstar = short_run
    state = traj.final
    post = postprocess(space, space, state, dstar, case.nu, case.forcing,
                       state.time, linear_part=False)
    vscale = max(1.0, np.abs(state.velocity).max())
    pscale = max(1.0, np.abs(state.pressure).max())
    assert np.abs(post.velocity - state.velocity).max() <= 1e-9 * vscale
    assert np.abs(post.pressure - state.pressure).max() <= 1e-9 * pscale


def test_estimator_norms_zero_for_identical_states(short_run):
    case, space, config, traj, dstar = short_run
    state = traj.final
    norms = difference_norms(state, state, linear_fine=True,
                             linear_coarse=True)
    for value in norms.values():
        assert value <= 1e-12


def test_postprocessing_improves_velocity_error(short_run):
    case, space, config, traj, dstar = short_run
    fine = build_mini_space(build_structured_mesh(14))
    state = traj.final
    post = postprocess(space, fine, state, dstar, case.nu, case.forcing,
                       state.time)
    galerkin = error_norms(space, state, case, state.time)
    better = error_norms(fine, post, case, state.time)
    assert better.vel_H1 < galerkin.vel_H1
    assert better.vel_L2 < galerkin.vel_L2


def test_estimate_report_fields(short_run):
    case, space, config, traj, dstar = short_run
    fine = build_mini_space(build_structured_mesh(14))
    state = traj.final
    post = postprocess(space, fine, state, dstar, case.nu, case.forcing,
                       state.time)
    rep = estimate(state, post, case, state.time, k=config.k, scheme="bdf2")
    assert rep.h == pytest.approx(1 / 6)
    assert rep.h_fine == pytest.approx(1 / 14)
    for name in ("est_vel_L2", "est_vel_H1", "est_pre_L2R",
                 "true_vel_L2", "true_vel_H1", "true_pre_L2R",
                 "theta_vel_L2", "theta_vel_H1", "theta_pre"):
        assert np.isfinite(getattr(rep, name))
        assert getattr(rep, name) >= 0
    d = rep.to_dict()
    assert d["theta_vel_H1"] == rep.theta_vel_H1


def test_estimator_norm_homogeneity(short_run, rng):
    """The underlying difference fields form a normed space: scaling the
    difference scales every reported norm by the same factor."""
    case, space, config, traj, dstar = short_run
    base = traj.final
    other = base.copy()
    other.velocity += 0.1 * rng.standard_normal(space.n_vel)
    other.pressure += 0.1 * rng.standard_normal(space.n_pre)
    n1 = difference_norms(other, base)
    scaled = base.copy()
    scaled.velocity = base.velocity + 3.0 * (other.velocity - base.velocity)
    scaled.pressure = base.pressure + 3.0 * (other.pressure - base.pressure)
    n3 = difference_norms(scaled, base)
    for key in n1:
        assert n3[key] == pytest.approx(3.0 * n1[key], rel=1e-12)


def test_residual_estimator_zero_problem(space6):
    state = zero_state(space6)
    res = residual_stokes_estimator(space6, state,
                                    lambda pts, t: np.zeros(pts.shape),
                                    np.zeros(space6.n_vel), 0.05, 0.0)
    assert res.eta_vel_H1 == 0.0


def test_residual_estimator_efficiency_and_monotonicity():
    """eta / true H1 error stays in a narrow band across an h-sweep and eta
    decreases monotonically under refinement."""
    case = ManufacturedCase("linear", nu=0.05)
    ratios, etas = [], []
    for n in (6, 8, 10):
        space = build_mini_space(build_structured_mesh(n))
        config = SchemeConfig("bdf2", k=0.01, t_end=0.5, nu=case.nu)
        traj = integrate(space, config, lambda pts: case.velocity(pts, 0.0),
                         case.forcing, keep="tail")
        dstar = discrete_time_derivative(config, traj.states)
        res = residual_stokes_estimator(space, traj.final, case.forcing,
                                        dstar, case.nu, traj.final.time)
        err = error_norms(space, traj.final, case, traj.final.time)
        ratios.append(res.eta_vel_H1 / err.vel_H1_all)
        etas.append(res.eta_vel_H1)
    assert max(ratios) / min(ratios) <= 4.0
    assert etas[0] > etas[1] > etas[2]


def _fake_report(h, est, true):
    return EstimatorReport(h=h, h_fine=h / 2, k=0.1, scheme="euler",
                           t_star=0.5, est_vel_L2=est, est_vel_H1=est,
                           est_pre_L2R=est, true_vel_L2=true,
                           true_vel_H1=true, true_pre_L2R=true)


def test_separation_audit_arithmetic():
    reports = [_fake_report(0.1, 1.00, 4.0),
               _fake_report(0.1, 1.05, 2.0),
               _fake_report(0.1, 0.95, 1.0)]
    audit = temporal_separation_audit(reports)
    assert audit.n_reports == 3
    assert audit.max_est_spread == pytest.approx(0.1, rel=1e-12)
    assert audit.true_total_ratio == pytest.approx(4.0, rel=1e-12)


def test_separation_audit_preconditions():
    with pytest.raises(ValueError):
        temporal_separation_audit([_fake_report(0.1, 1, 1)])
    mixed = [_fake_report(0.1, 1, 1), _fake_report(0.2, 1, 1),
             _fake_report(0.1, 1, 1)]
    with pytest.raises(ValueError):
        temporal_separation_audit(mixed)
