"""Experiment front end: data generation, references, timing and CSV logs.

An ExperimentConfig fully determines a run: the data (phantom + seeded
noise), the reference solution (computed once and cached by config hash),
the algorithm, and the logging outputs. Runs are deterministic up to the
elapsed-time column.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import imageio
from .errors import ReferenceRejectedError
from .operators import RadonGeometry, blur_map, gaussian_kernel, identity_map, radon_map
from .phantoms import add_noise, gen_disc_phantom, gen_shapes_phantom
from .problems import (
    build_dual_rof,
    build_tv_recon,
    build_tv_saddle_implicit,
    objective_tv,
    primal_from_dual,
)
from .skip import SkipConfig, run_pdhgskip1, run_pdhgskip2, run_proxskip
from .solvers import (
    IterationLog,
    run_aprojgd,
    run_fista,
    run_gd,
    run_pdhg,
    run_pdhg_preconditioned,
    run_pgd,
)
from .tensor import norm2, rel_error

EXPERIMENTS = ("denoise-dual", "denoise-huber", "deblur", "tomo")
ALGORITHMS = (
    "gd", "pgd", "fista", "projgd", "aprojgd",
    "proxskip", "pdhg", "pdhgskip1", "pdhgskip2",
)

SELF_CONSISTENCY_TOL = 1e-6

_DEFAULTS = {
    "denoise-dual": dict(alpha=0.5, huber_eps=0.0, noise_sigma=0.05,
                         outer_iters=20000, inner_iters=1, tol=1e-9, ref_iters=100000),
    "denoise-huber": dict(alpha=0.55, huber_eps=0.1, noise_sigma=0.05,
                          outer_iters=5000, inner_iters=1, tol=1e-9, ref_iters=30000),
    "deblur": dict(alpha=0.02, huber_eps=0.0, noise_sigma=0.01,
                   outer_iters=3000, inner_iters=100, tol=1e-5, ref_iters=60000),
    "tomo": dict(alpha=0.1, huber_eps=0.0, noise_sigma=0.5,
                 outer_iters=3000, inner_iters=50, tol=1e-5, ref_iters=40000),
}

_INT_KEYS = {"height", "width", "outer_iters", "inner_iters", "seed", "timing_repeats",
             "kernel_size", "n_angles", "n_bins", "ref_iters"}
_FLOAT_KEYS = {"alpha", "huber_eps", "p", "gamma", "sigma", "tau", "omega", "tol",
               "noise_sigma", "kernel_sigma"}


@dataclass
class ExperimentConfig:
    experiment: str
    algo: str = "pgd"
    height: int = 64
    width: int = 64
    alpha: float = None
    huber_eps: float = None
    p: float = 1.0
    gamma: Optional[float] = None
    sigma: Optional[float] = None
    tau: Optional[float] = None
    omega: Optional[float] = None
    outer_iters: int = None
    inner_iters: int = None
    tol: float = None
    seed: int = 0
    noise_sigma: float = None
    timing_repeats: int = 1
    reference: str = "auto"
    ref_iters: int = None
    out: Optional[str] = None
    dump_image: Optional[str] = None
    plot: Optional[str] = None
    cache_dir: Optional[str] = None
    splitting: Optional[str] = None
    kernel_size: int = 11
    kernel_sigma: float = 3.0
    n_angles: int = 45
    n_bins: int = 95

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        defaults = _DEFAULTS[self.experiment]
        for key, value in defaults.items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0, 1], got {self.p}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.timing_repeats < 1:
            raise ValueError("timing_repeats must be >= 1")
        if self.experiment == "tomo" and self.height != self.width:
            raise ValueError("tomography needs a square image")


def parse_config_file(path):
    """Flat ``key = value`` lines with # comments; keys mirror CLI flags."""
    mapping = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            mapping[key.strip().replace("-", "_")] = value.strip()
    return mapping


_KEY_ALIASES = {"iters": "outer_iters", "repeats": "timing_repeats",
                "ref": "reference", "angles": "n_angles", "bins": "n_bins"}


def config_from_mapping(experiment, mapping):
    """Build a config from string key/value pairs (config file or CLI)."""
    kwargs = {}
    for key, value in mapping.items():
        if value is None:
            continue
        key = _KEY_ALIASES.get(key, key)
        if key == "size":
            h, _, w = str(value).lower().partition("x")
            kwargs["height"], kwargs["width"] = int(h), int(w)
        elif key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        else:
            kwargs[key] = value
    return ExperimentConfig(experiment=experiment, **kwargs)


@dataclass
class ExperimentData:
    u_true: np.ndarray
    b: np.ndarray
    A: object = None
    nonneg: bool = False


def build_data(cfg):
    """Phantom, forward operator and seeded noisy data for one config."""
    if cfg.experiment in ("denoise-dual", "denoise-huber"):
        u = gen_shapes_phantom(cfg.height, cfg.width)
        return ExperimentData(u_true=u, b=add_noise(u, cfg.noise_sigma, cfg.seed))
    if cfg.experiment == "deblur":
        u = gen_shapes_phantom(cfg.height, cfg.width)
        A = blur_map(gaussian_kernel(cfg.kernel_size, cfg.kernel_sigma), u.shape)
        return ExperimentData(u_true=u, b=add_noise(A.forward(u), cfg.noise_sigma, cfg.seed), A=A)
    # tomo
    u = gen_disc_phantom(cfg.height)
    geom = RadonGeometry(image_side=cfg.height, n_angles=cfg.n_angles, n_bins=cfg.n_bins)
    A = radon_map(geom)
    return ExperimentData(u_true=u, b=add_noise(A.forward(u), cfg.noise_sigma, cfg.seed),
                          A=A, nonneg=True)


# -- reference solutions ------------------------------------------------------

@dataclass
class ReferenceSolution:
    u_star: np.ndarray
    provenance: dict
    config_hash: str


def _problem_key(cfg):
    """Fields that define the problem instance (not the algorithm under test)."""
    key = dict(
        experiment=cfg.experiment, height=cfg.height, width=cfg.width,
        alpha=cfg.alpha, huber_eps=cfg.huber_eps, noise_sigma=cfg.noise_sigma,
        seed=cfg.seed, ref_iters=cfg.ref_iters,
    )
    if cfg.experiment == "deblur":
        key.update(kernel_size=cfg.kernel_size, kernel_sigma=cfg.kernel_sigma)
    if cfg.experiment == "tomo":
        key.update(n_angles=cfg.n_angles, n_bins=cfg.n_bins)
    return key


def config_hash(cfg):
    blob = json.dumps(_problem_key(cfg), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _cache_dir(cfg):
    return cfg.cache_dir or os.environ.get("IMGSKIP_CACHE", ".imgskip-cache")


def compute_reference(cfg, data=None):
    """Long-run reference solution, cached on disk keyed by the config hash.

    Denoising references come from accelerated projected gradient on the
    dual; deblurring and tomography from diagonally preconditioned PDHG on
    the explicit splitting. The half-budget iterate must agree with the
    full-budget one to 1e-6 relative, else the reference is rejected.
    """
    if data is None:
        data = build_data(cfg)
    h = config_hash(cfg)
    cache = _cache_dir(cfg)
    path = os.path.join(cache, f"ref-{h}.npz")
    if os.path.exists(path):
        payload = np.load(path, allow_pickle=False)
        return ReferenceSolution(
            u_star=payload["u_star"],
            provenance=json.loads(str(payload["provenance"])),
            config_hash=h,
        )

    iters = cfg.ref_iters
    snapshot = {}

    def grab_half(record, x):
        if record.iteration == iters // 2:
            snapshot["x"] = x.copy()

    log = IterationLog(callback=grab_half)
    if cfg.experiment in ("denoise-dual", "denoise-huber"):
        prob = build_dual_rof(data.b, cfg.alpha, cfg.huber_eps)
        q, _ = run_aprojgd(prob.smooth, prob.projector, prob.zero_dual(),
                           1.0 / prob.smooth.lipschitz, iters, log)
        u_full = primal_from_dual(q, data.b)
        u_half = primal_from_dual(snapshot["x"], data.b)
        method = "aprojgd-dual"
    else:
        recon = build_tv_recon(data.A, data.b, cfg.alpha, nonneg=data.nonneg,
                               splitting="explicit")
        x, _ = run_pdhg_preconditioned(recon.saddle_problem, iters, log)
        u_full = x
        u_half = snapshot["x"]
        method = "pdhg-preconditioned-explicit"

    sc = rel_error(u_half, u_full)
    if sc > SELF_CONSISTENCY_TOL:
        raise ReferenceRejectedError(sc, SELF_CONSISTENCY_TOL)

    provenance = dict(method=method, iterations=iters, self_consistency_error=sc)
    os.makedirs(cache, exist_ok=True)
    np.savez(path, u_star=u_full, provenance=json.dumps(provenance))
    return ReferenceSolution(u_star=u_full, provenance=provenance, config_hash=h)


def load_reference(path):
    if path.endswith(".npz"):
        payload = np.load(path, allow_pickle=False)
        prov = json.loads(str(payload["provenance"])) if "provenance" in payload else {}
        return ReferenceSolution(u_star=payload["u_star"], provenance=prov,
                                 config_hash="external")
    return ReferenceSolution(u_star=imageio.read_pfm(path),
                             provenance={"method": "file"}, config_hash="external")


def get_reference(cfg, data=None):
    if cfg.reference in ("auto", "compute"):
        return compute_reference(cfg, data)
    return load_reference(cfg.reference)


# -- experiment execution -----------------------------------------------------

def _make_run_once(cfg, data, ref):
    """Build a closure running the configured algorithm from fresh state.

    Every invocation rebuilds the problem objects (including the TV prox
    warm-start state) so repeated runs produce identical trajectories.
    """
    experiment, algo = cfg.experiment, cfg.algo
    b = data.b

    if experiment in ("denoise-dual", "denoise-huber") and algo in (
            "gd", "pgd", "projgd", "fista", "aprojgd", "proxskip"):
        def run_once(iters, with_metrics, tol):
            prob = build_dual_rof(b, cfg.alpha, cfg.huber_eps)
            gamma = cfg.gamma if cfg.gamma is not None else 1.0 / prob.smooth.lipschitz
            transform = lambda q: primal_from_dual(q, b)
            log = IterationLog(
                reference=ref.u_star if with_metrics else None,
                objective_fn=prob.smooth.objective if with_metrics else None,
                transform=transform, tol=tol,
            )
            q0 = prob.zero_dual()
            if algo == "gd":
                x, log = run_gd(prob.smooth, q0, gamma, iters, log)
            elif algo in ("pgd", "projgd"):
                x, log = run_pgd(prob.prox_problem(), q0, gamma, iters, log)
            elif algo in ("fista", "aprojgd"):
                x, log = run_aprojgd(prob.smooth, prob.projector, q0, gamma, iters, log)
            else:
                x, log = run_proxskip(prob.prox_problem(), q0, None, gamma,
                                      SkipConfig(cfg.p, cfg.seed), iters, log)
            return transform(x), log
        return run_once

    if experiment in ("denoise-dual", "denoise-huber"):
        if cfg.huber_eps != 0.0:
            raise ValueError(f"{algo} on the Huber denoising problem is not supported")
        A = identity_map(b.shape)
        nonneg = False
    else:
        A = data.A
        nonneg = data.nonneg

    if algo in ("projgd", "aprojgd") and experiment in ("deblur", "tomo"):
        raise ValueError(f"{algo} applies to the dual denoising problems only")

    if algo == "gd":
        def run_once(iters, with_metrics, tol):
            recon = build_tv_recon(A, b, cfg.alpha, nonneg=nonneg,
                                   splitting="implicit", inner_budget=cfg.inner_iters)
            smooth = recon.prox_problem.smooth
            gamma = cfg.gamma if cfg.gamma is not None else 1.0 / smooth.lipschitz
            log = IterationLog(
                reference=ref.u_star if with_metrics else None,
                objective_fn=(lambda u: objective_tv(u, recon)) if with_metrics else None,
                tol=tol,
            )
            x, log = run_gd(smooth, np.zeros(A.domain_shape), gamma, iters, log)
            return x, log
        return run_once

    if algo in ("pgd", "fista", "proxskip"):
        def run_once(iters, with_metrics, tol):
            recon = build_tv_recon(A, b, cfg.alpha, nonneg=nonneg,
                                   splitting="implicit", inner_budget=cfg.inner_iters)
            pp = recon.prox_problem
            gamma = cfg.gamma if cfg.gamma is not None else 1.0 / pp.smooth.lipschitz
            log = IterationLog(
                reference=ref.u_star if with_metrics else None,
                objective_fn=(lambda u: objective_tv(u, recon)) if with_metrics else None,
                inner_counter=lambda: recon.tv_state.total_inner_iterations,
                tol=tol,
            )
            x0 = np.zeros(A.domain_shape)
            if algo == "pgd":
                x, log = run_pgd(pp, x0, gamma, iters, log)
            elif algo == "fista":
                x, log = run_fista(pp, x0, gamma, iters, log)
            else:
                x, log = run_proxskip(pp, x0, None, gamma,
                                      SkipConfig(cfg.p, cfg.seed), iters, log)
            return x, log
        return run_once

    # Primal-dual family. Default splitting: explicit for plain PDHG, the
    # implicit (inexact TV prox) form for the skip variants.
    splitting = cfg.splitting or ("explicit" if algo == "pdhg" else "implicit")

    def run_once(iters, with_metrics, tol):
        if splitting == "explicit":
            recon = build_tv_recon(A, b, cfg.alpha, nonneg=nonneg, splitting="explicit")
            inner_counter = None
        else:
            recon = build_tv_saddle_implicit(A, b, cfg.alpha, nonneg=nonneg,
                                             inner_budget=cfg.inner_iters)
            inner_counter = lambda: recon.tv_state.total_inner_iterations
        sp = recon.saddle_problem
        default_step = 1.0 / np.sqrt(sp.norm_K_sq)
        sigma = cfg.sigma if cfg.sigma is not None else default_step
        tau = cfg.tau if cfg.tau is not None else default_step
        log = IterationLog(
            reference=ref.u_star if with_metrics else None,
            objective_fn=(lambda u: objective_tv(u, recon)) if with_metrics else None,
            inner_counter=inner_counter, tol=tol,
        )
        x0 = np.zeros(sp.K.domain_shape)
        y0 = np.zeros(sp.K.range_shape)
        if algo == "pdhg":
            x, log = run_pdhg(sp, x0, y0, sigma, tau, iters, log)
        elif algo == "pdhgskip1":
            omega = cfg.omega if cfg.omega is not None else 1.0 / cfg.p - 1.0
            x, log = run_pdhgskip1(sp, x0, y0, sigma, tau, omega,
                                   SkipConfig(cfg.p, cfg.seed), iters, log)
        else:
            x, log = run_pdhgskip2(sp, x0, y0, None, sigma, tau,
                                   SkipConfig(cfg.p, cfg.seed), iters, log)
        return x, log

    return run_once


def run_experiment(cfg):
    """Execute one configured run: logged pass, timing repeats, CSV emission.

    Returns (final image, IterationLog, summary dict). Timed repeats rerun
    the exact iteration count of the logged pass with metric logging
    disabled, so timing never alters the algorithm path.
    """
    data = build_data(cfg)
    ref = get_reference(cfg, data)

    run_once = _make_run_once(cfg, data, ref)
    u, log = run_once(cfg.outer_iters, with_metrics=True, tol=cfg.tol)
    executed = len(log.records)

    times = []
    for _ in range(cfg.timing_repeats):
        _, tlog = run_once(executed, with_metrics=False, tol=None)
        times.append(tlog.records[-1].elapsed_s)
    times = np.asarray(times)

    last = log.records[-1]
    summary = dict(
        experiment=cfg.experiment,
        algo=cfg.algo,
        iterations=executed,
        prox_count=last.prox_count,
        inner_iter_count=last.inner_iter_count,
        final_rel_error=last.l2_rel_error,
        final_objective=last.objective,
        time_mean_s=float(times.mean()),
        time_std_s=float(times.std(ddof=1)) if len(times) > 1 else 0.0,
        timing_repeats=cfg.timing_repeats,
        reference_hash=ref.config_hash,
    )

    if cfg.out:
        emit_csv(log.records, cfg.out)
    if cfg.dump_image:
        imageio.write_pfm(cfg.dump_image, u)
    if cfg.plot:
        from .report import plot_convergence
        plot_convergence({cfg.algo: log.records}, cfg.plot)
    return u, log, summary


CSV_HEADER = "iter,elapsed_s,prox_count,inner_iters,rel_error,objective,prox_applied"


def _fmt(value):
    return "" if value is None else f"{value:.17g}"


def emit_csv(records, path):
    """One row per logged iteration; reals carry 17 significant digits."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(CSV_HEADER + "\n")
            for r in records:
                f.write(
                    f"{r.iteration},{_fmt(r.elapsed_s)},{r.prox_count},"
                    f"{r.inner_iter_count},{_fmt(r.l2_rel_error)},{_fmt(r.objective)},"
                    f"{'true' if r.prox_applied else 'false'}\n"
                )
    except OSError as exc:
        raise OSError(f"emit_csv: cannot write {path}: {exc}") from exc
