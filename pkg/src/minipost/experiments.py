"""Experiment sweeps: Galerkin runs, postprocessing, reports.

Three canned experiments mirror the numerical studies this package
reproduces:

  semidiscrete   -- phi(t)=t, BDF2 with small fixed k, sweep over paired
                    (h, h') meshes; efficiency-index table at t*.
  fullydiscrete  -- phi(t)=sin((2pi+pi/2)t), fixed h and h', sweep over k
                    for one scheme; shows the spatial/temporal separation.
  convergence    -- Galerkin error norms over an h-sweep (optionally with
                    postprocessing when fine meshes are paired).

Each sweep cell is independent; failures are recorded per cell and do not
abort the sweep.  Reports are written as JSON (full records + provenance)
and CSV (one row per cell, directly plottable).
"""

import csv
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .estimator import estimate, postprocess, residual_stokes_estimator
from .fe_space import build_mini_space
from .integrator import SchemeConfig, discrete_time_derivative, integrate
from .manufactured import ManufacturedCase, error_norms
from .mesh import build_structured_mesh

CSV_HEADER = ["h", "hfine", "k", "scheme",
              "err_vel_L2", "err_vel_H1", "err_pre",
              "est_vel_L2", "est_vel_H1", "est_pre",
              "theta_L2", "theta_H1", "theta_pre"]

SCHEMA_VERSION = 1

# mesh pairs used by the canned semidiscrete experiment
DEFAULT_H = ["1/10", "1/12", "1/14", "1/16", "1/18"]
DEFAULT_HFINE = ["1/24", "1/30", "1/34", "1/38", "1/40"]


class ConfigError(ValueError):
    pass


def parse_fraction(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {text!r} as a fraction") from exc


def parse_k_spec(spec) -> list:
    """Either a comma list of fractions or "start:stop:halve"."""
    if isinstance(spec, (list, tuple)):
        return [parse_fraction(s) for s in spec]
    text = str(spec)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or parts[2] != "halve":
            raise ConfigError(f"bad k sweep {text!r}; expected start:stop:halve")
        start, stop = parse_fraction(parts[0]), parse_fraction(parts[1])
        if start <= stop:
            out = []
            k = start
            while k <= stop + Fraction(1, 10 ** 12):
                out.append(k)
                k *= 2
            return out
        out = []
        k = start
        while k >= stop - Fraction(1, 10 ** 12):
            out.append(k)
            k /= 2
        return out
    return [parse_fraction(s) for s in text.split(",")]


def _mesh_n(h: Fraction) -> int:
    if h.numerator != 1:
        raise ConfigError(f"mesh size {h} is not the reciprocal of an integer")
    return h.denominator


@dataclass
class RunConfig:
    experiment: str                      # semidiscrete|fullydiscrete|convergence|custom
    phi: str = "linear"
    nu: float = 0.05
    t_star: float = 0.5
    h_list: list = field(default_factory=list)          # Fractions
    hfine_list: list = field(default_factory=list)      # Fractions, paired
    scheme: str = "bdf2"
    k_list: list = field(default_factory=list)          # Fractions
    out_dir: Path | None = None
    seed: int = 0
    with_residual_estimator: bool = False
    keep_linear_part: bool = True

    def validate(self):
        if self.experiment not in ("semidiscrete", "fullydiscrete",
                                   "convergence", "custom"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.h_list:
            raise ConfigError("mesh list (h values) is empty")
        if not self.k_list:
            raise ConfigError("time-step list is empty")
        if self.hfine_list:
            if len(self.hfine_list) != len(self.h_list):
                raise ConfigError("h and hfine lists must pair up")
            for h, hf in zip(self.h_list, self.hfine_list):
                if not hf < h:
                    raise ConfigError(
                        f"fine mesh h'={hf} must be strictly finer than h={h}")
        for h in list(self.h_list) + list(self.hfine_list):
            _mesh_n(h)
        if self.scheme not in ("euler", "bdf2"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")


def default_config(experiment: str, **overrides) -> RunConfig:
    """Canned experiment parameters (nu=0.05, t*=0.5, mini-element)."""
    if experiment == "semidiscrete":
        cfg = RunConfig(experiment=experiment, phi="linear",
                        h_list=[parse_fraction(h) for h in DEFAULT_H],
                        hfine_list=[parse_fraction(h) for h in DEFAULT_HFINE],
                        scheme="bdf2", k_list=[Fraction(1, 1000)])
    elif experiment == "fullydiscrete":
        cfg = RunConfig(experiment=experiment, phi="sine",
                        h_list=[Fraction(1, 18)], hfine_list=[Fraction(1, 40)],
                        scheme="euler", k_list=parse_k_spec("1/10:1/160:halve"))
    elif experiment == "convergence":
        cfg = RunConfig(experiment=experiment, phi="linear",
                        h_list=[Fraction(1, n) for n in (8, 12, 16, 24, 32)],
                        scheme="bdf2", k_list=[Fraction(1, 200)])
    else:
        cfg = RunConfig(experiment="custom")
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def _run_cell(config: RunConfig, h: Fraction, hfine, k: Fraction):
    """One sweep cell: integrate, postprocess (if a fine mesh is paired),
    estimate.  Returns the row dict."""
    case = ManufacturedCase(config.phi, config.nu)
    space = build_mini_space(build_structured_mesh(_mesh_n(h)))
    scheme_cfg = SchemeConfig(config.scheme, k=float(k),
                              t_end=config.t_star, nu=config.nu)
    traj = integrate(space, scheme_cfg,
                     lambda pts: case.velocity(pts, 0.0), case.forcing,
                     keep="tail")
    t = config.t_star
    row = {"h": float(h), "hfine": float(hfine) if hfine else np.nan,
           "k": float(k), "scheme": config.scheme}
    if hfine is None:
        err = error_norms(space, traj.final, case, t,
                          use_linear_part=config.keep_linear_part)
        row.update(err_vel_L2=err.vel_L2, err_vel_H1=err.vel_H1,
                   err_pre=err.pre_L2R,
                   est_vel_L2=np.nan, est_vel_H1=np.nan, est_pre=np.nan,
                   theta_L2=np.nan, theta_H1=np.nan, theta_pre=np.nan)
        return row, None
    fine = build_mini_space(build_structured_mesh(_mesh_n(hfine)))
    dstar = discrete_time_derivative(scheme_cfg, traj.states)
    post = postprocess(space, fine, traj.final, dstar, config.nu,
                       case.forcing, t, linear_part=config.keep_linear_part)
    rep = estimate(traj.final, post, case, t, k=float(k),
                   scheme=config.scheme)
    row.update(err_vel_L2=rep.true_vel_L2, err_vel_H1=rep.true_vel_H1,
               err_pre=rep.true_pre_L2R,
               est_vel_L2=rep.est_vel_L2, est_vel_H1=rep.est_vel_H1,
               est_pre=rep.est_pre_L2R,
               theta_L2=rep.theta_vel_L2, theta_H1=rep.theta_vel_H1,
               theta_pre=rep.theta_pre)
    extra = {"post_vel_L2": rep.post_vel_L2, "post_vel_H1": rep.post_vel_H1,
             "post_pre_L2R": rep.post_pre_L2R}
    if config.with_residual_estimator:
        res = residual_stokes_estimator(space, traj.final, case.forcing,
                                        dstar, config.nu, t)
        extra["residual_eta_H1"] = res.eta_vel_H1
        extra["residual_eta_pre"] = res.eta_pre_L2R
    return row, extra


def _cells(config: RunConfig):
    if config.experiment == "fullydiscrete":
        h = config.h_list[0]
        hf = config.hfine_list[0] if config.hfine_list else None
        return [(h, hf, k) for k in config.k_list]
    k = config.k_list[0]
    if config.hfine_list:
        return [(h, hf, k) for h, hf in zip(config.h_list, config.hfine_list)]
    return [(h, None, k) for h in config.h_list]


def _forcing_audit(config: RunConfig):
    """Seeded random-point audit that the closed-form forcing satisfies the
    momentum equation (derivatives by central differences)."""
    case = ManufacturedCase(config.phi, config.nu)
    rng = np.random.default_rng(config.seed)
    pts = rng.uniform(0.05, 0.95, size=(200, 2))
    ts = rng.uniform(0.05, 1.0, size=200)
    eps = 1e-5
    worst = 0.0
    for t in np.unique(ts)[:20]:
        u_t = (case.velocity(pts, t + eps) - case.velocity(pts, t - eps)) / (2 * eps)
        lap = np.zeros((len(pts), 2))
        for d in range(2):
            e = np.zeros(2)
            e[d] = eps
            lap += (case.velocity(pts + e, t) - 2 * case.velocity(pts, t)
                    + case.velocity(pts - e, t)) / eps ** 2
        du = case.velocity_gradient(pts, t)
        conv = np.einsum("nj,nij->ni", case.velocity(pts, t), du)
        resid = (u_t - config.nu * lap + conv + case.pressure_gradient(pts, t)
                 - case.forcing(pts, t))
        worst = max(worst, float(np.abs(resid).max()))
    return worst


def run(config: RunConfig) -> int:
    """Execute the sweep and write report.json + table.csv.

    Returns the process exit code: 0 on full success, 2 if any cell failed.
    """
    config.validate()
    if config.out_dir is None:
        raise ConfigError("output directory not set")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows, extras, failures, timings = [], [], [], []
    for h, hf, k in _cells(config):
        t0 = time.perf_counter()
        try:
            row, extra = _run_cell(config, h, hf, k)
            rows.append(row)
            extras.append(extra)
        except Exception as exc:  # record, keep sweeping
            failures.append({"h": float(h),
                             "hfine": float(hf) if hf else None,
                             "k": float(k), "error": repr(exc)})
        timings.append({"h": str(h), "k": str(k),
                        "seconds": time.perf_counter() - t0})

    report = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": {
            "experiment": config.experiment, "phi": config.phi,
            "nu": config.nu, "t_star": config.t_star,
            "h": [str(h) for h in config.h_list],
            "hfine": [str(h) for h in config.hfine_list],
            "scheme": config.scheme, "k": [str(k) for k in config.k_list],
            "seed": config.seed,
            "residual_estimator": config.with_residual_estimator,
        },
        "results": [dict(row, **(extra or {}))
                    for row, extra in zip(rows, extras)],
        "failures": failures,
        "forcing_audit_max_residual": _forcing_audit(config),
        "timings": timings,  # informational; excluded from reproducibility
    }
    (out / "report.json").write_text(json.dumps(report, indent=2,
                                                allow_nan=True))
    with (out / "table.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER,
                                extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return 2 if failures else 0
