"""Experiment drivers behind the CLI verbs. Each returns a result object and,
when given an output directory, writes CSV files plus a manifest."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import flops, io
from .config import ExperimentConfig
from .coprime import lag_structure
from .covariance import coarray_steer, direct_coarray_covariance, lift
from .hermitian import HermitianCov
from .rank import clutter_rank, empirical_rank
from .rejection import (
    build_projector,
    default_ranks,
    post_rejection_sinr,
    pre_rejection_sinr,
    ranks_for_tail,
    region_residue,
    reject,
)
from .scene import (
    CCubeConfig,
    analytic_covariance,
    reference_config,
    sample_covariance,
    scene_sources,
    simulate_snapshots,
    uniform_ring_scene,
)
from .slepian import estimate_Dc, fast_inverse, slepian_clutter_basis
from .stap import (
    Method,
    clutter_plane_spectrum,
    estimate_noise_power,
    mvdr_spectrum,
    notch_mask,
    ridge_count,
    sinr_curve,
)


@dataclass
class RunResult:
    verb: str
    summary: dict
    outputs: list = field(default_factory=list)


def _finish(exp: ExperimentConfig, verb: str, summary: dict, tables: dict, out_dir) -> RunResult:
    outputs = []
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, (header, rows) in tables.items():
            outputs.append(io.write_csv(out / f"{name}.csv", header, rows))
        outputs.append(io.write_json(out / f"{verb}_summary.json", summary))
        outputs.append(io.write_manifest(out, verb, exp.as_dict(), exp.seed, outputs))
    return RunResult(verb, summary, outputs)


# --- spectrum -------------------------------------------------------------


def _method_covariances(exp: ExperimentConfig, cfg: CCubeConfig, scene, mode: str):
    """Covariances (or inverse handles) for the physical, coarray and DPSS spectra."""
    uni = cfg.uniform_counterpart()
    ls, lt = lag_structure(cfg.sensor_set), lag_structure(cfg.pulse_set)
    n, seed = exp.run.n_samples, exp.seed
    if mode == "exact":
        R_phys = analytic_covariance(uni, scene)
        R_v = direct_coarray_covariance(scene_sources(cfg, scene), cfg.L_s, cfg.L_t, scene.noise_power)
        noise = scene.noise_power
    else:
        R_phys = sample_covariance(simulate_snapshots(uni, scene, n, seed, exp.run.threads))
        snaps = simulate_snapshots(cfg, scene, n, seed, exp.run.threads)
        R_v = lift(sample_covariance(snaps), ls, lt)
        noise = estimate_noise_power(cfg.physical_size, n, scene.noise_power, seed)
    basis = slepian_clutter_basis(cfg, N_p=scene.n_ambiguities, bandlimit=exp.sinr.bandlimit)
    core = estimate_Dc(basis, R_v, noise, allow_rank_deficient=True)
    return {"physical": R_phys, "coarray": R_v, "dpss": fast_inverse(basis, core, noise)}


def run_spectrum(exp: ExperimentConfig, out_dir=None) -> RunResult:
    cfg = exp.ccube()
    scene = exp.clutter_scene(cfg)
    sp = exp.spectrum
    f_T = np.arange(sp.n_f_T) / sp.n_f_T
    f_R = np.linspace(-0.5, 0.5, sp.n_f_R)
    f_d = np.linspace(-0.5, 0.5, sp.n_f_d)
    beta = float(cfg.beta)
    uni = cfg.uniform_counterpart()
    covs = _method_covariances(exp, cfg, scene, sp.covariance)
    plane_rows, dr_rows, ridges = [], [], {}
    for name, cov in covs.items():
        plane = clutter_plane_spectrum(cov, f_T, f_R, beta, cfg=uni)
        ridges[name] = ridge_count(plane, sp.drop_db)
        db = 10 * np.log10(plane / plane.max())
        for i, t in enumerate(f_T):
            for j, r in enumerate(f_R):
                plane_rows.append((name, t, r, db[i, j]))
        # Doppler/receive view: strongest response over transmit frequency
        cube = mvdr_spectrum(cov, f_T, f_d, f_R, cfg=uni)
        dr = cube.max(axis=0)
        dr = 10 * np.log10(dr / dr.max())
        for i, d in enumerate(f_d):
            for j, r in enumerate(f_R):
                dr_rows.append((name, d, r, dr[i, j]))
    summary = {
        "n_ambiguities": scene.n_ambiguities,
        "covariance": sp.covariance,
        "ridge_count": ridges,
        "max_resolvable": {"physical": cfg.P_s - 1, "coarray": cfg.L_s},
    }
    tables = {
        "spectrum_transmit_receive": (["method", "f_T", "f_R", "power_db"], plane_rows),
        "spectrum_doppler_receive": (["method", "f_d", "f_R", "power_db"], dr_rows),
    }
    return _finish(exp, "spectrum", summary, tables, out_dir)


# --- rank table -----------------------------------------------------------


def rank_row(beta: float, N_p: int, threshold: float = 1e-6, base: ExperimentConfig | None = None) -> dict:
    """Predicted and measured clutter rank for one (beta, N_p) cell on a
    noise-free analytic scene."""
    a = base.array if base is not None else None
    if a is None:
        cfg = reference_config(beta)
    else:
        cfg = reference_config(beta, a.m_s, a.n_s, a.m_t, a.n_t, f_b=a.f_b, pri=a.pri,
                               pulse_width=a.pulse_width, height=a.height)
    n_patches = base.scene.n_patches if base is not None else 181
    scene = uniform_ring_scene(N_p, n_patches, cnr_db=None, noise_power=0.0)
    ls, lt = lag_structure(cfg.sensor_set), lag_structure(cfg.pulse_set)
    R_v = lift(analytic_covariance(cfg, scene), ls, lt)
    num, den = cfg.beta_pair
    basis = slepian_clutter_basis(cfg, N_p=N_p)
    core = estimate_Dc(basis, R_v, 0.0, allow_rank_deficient=True)
    basis_mat = basis.V_c
    R_dpss = HermitianCov(basis_mat @ core @ basis_mat.conj().T, R_v.domain, R_v.dims)
    return {
        "beta": beta,
        "N_p": N_p,
        "predicted": clutter_rank(cfg.L_s, cfg.L_t, num, den, N_p),
        "empirical_coarray": empirical_rank(R_v, threshold=threshold),
        "empirical_dpss": empirical_rank(R_dpss, threshold=threshold),
    }


def run_rank_table(exp: ExperimentConfig, out_dir=None) -> RunResult:
    rt = exp.rank_table
    rows = [rank_row(float(b), int(n), rt.threshold, exp) for b in rt.betas for n in rt.n_ambiguities]
    header = ["beta", "N_p", "predicted", "empirical_coarray", "empirical_dpss"]
    summary = {
        "all_match": all(r["predicted"] == r["empirical_coarray"] == r["empirical_dpss"] for r in rows),
        "rows": rows,
    }
    return _finish(exp, "rank-table", summary, {"rank_table": (header, [[r[h] for h in header] for r in rows])},
                   out_dir)


# --- SINR -----------------------------------------------------------------


def run_sinr(exp: ExperimentConfig, out_dir=None) -> RunResult:
    cfg = exp.ccube()
    scene = exp.clutter_scene(cfg)
    si = exp.sinr
    doppler = np.linspace(-0.5, 0.5, si.doppler_points)
    trip = scene.target.frequencies(cfg, scene.n_ambiguities)
    notch = float(cfg.beta) * trip.f_R
    keep = notch_mask(doppler, notch, si.notch_half_width)
    rows, means = [], {}
    for method in Method:
        per_trial = []
        for t in range(si.trials):
            c = sinr_curve(cfg, scene, method, doppler, exp.run.n_samples, seed=exp.seed + t,
                           threads=exp.run.threads, bandlimit=si.bandlimit)
            per_trial.append(c.sinr_db[keep].mean())
            rows += [(method.value, "sample", t, f, s) for f, s in zip(doppler, c.sinr_db)]
        means[method.value] = float(np.mean(per_trial))
        if si.clairvoyant:
            c = sinr_curve(cfg, scene, method, doppler, None, bandlimit=si.bandlimit)
            means[method.value + "/exact"] = float(c.sinr_db[keep].mean())
            rows += [(method.value, "exact", -1, f, s) for f, s in zip(doppler, c.sinr_db)]
    summary = {
        "notch_doppler": notch,
        "mean_sinr_db": means,
        "gap_coarray_minus_physical": means["coarray-fd"] - means["physical-fd"],
        "gap_coarray_minus_dpss": means["coarray-fd"] - means["coarray-dpss"],
    }
    if si.clairvoyant:
        summary["exact_gap_coarray_minus_physical"] = means["coarray-fd/exact"] - means["physical-fd/exact"]
        summary["exact_gap_coarray_minus_dpss"] = means["coarray-fd/exact"] - means["coarray-dpss/exact"]
    header = ["method", "training", "trial", "f_d", "sinr_db"]
    return _finish(exp, "sinr", summary, {"sinr": (header, rows)}, out_dir)


# --- rejection ------------------------------------------------------------


def resolve_ranks(exp: ExperimentConfig, L_s: int, L_t: int, region) -> tuple[int, int, int]:
    r = exp.reject.ranks
    if r == "time-bandwidth":
        return default_ranks(L_s, L_t, region)
    if r == "tail":
        return ranks_for_tail(L_s, L_t, region, 10 ** (-exp.interference.inr_db / 10))
    return tuple(int(x) for x in r)


@dataclass
class RejectionOutcome:
    energy_drop_db: float
    doppler: np.ndarray
    sinr_pre: np.ndarray
    sinr_post: np.ndarray
    ranks: tuple
    residue: float
    tail_bound: float


def rejection_demo(exp: ExperimentConfig) -> tuple[RejectionOutcome, dict]:
    cfg = exp.ccube()
    scene = exp.clutter_scene(cfg)
    L_s, L_t = cfg.L_s, cfg.L_t
    region = exp.region(L_s, L_t)
    rj = exp.reject
    if rj.covariance == "exact":
        cov = direct_coarray_covariance(scene_sources(cfg, scene), L_s, L_t, scene.noise_power)
    else:
        ls, lt = lag_structure(cfg.sensor_set), lag_structure(cfg.pulse_set)
        snaps = simulate_snapshots(cfg, scene, exp.run.n_samples, exp.seed, exp.run.threads)
        cov = lift(sample_covariance(snaps), ls, lt)
    ranks = resolve_ranks(exp, L_s, L_t, region)
    proj = build_projector(L_s, L_t, region, ranks)
    R_post = reject(cov, proj)
    # in-region energy of the MVDR spectrum; the projected matrix is loaded
    # with the noise power to keep it invertible
    g = [np.linspace(c - w / 2, c + w / 2, rj.grid_points + 2)[1:-1]
         for c, w in zip(region.center, region.widths)]
    pre = mvdr_spectrum(cov, *g)
    post = mvdr_spectrum(R_post, *g, loading=scene.noise_power)
    drop = float(10 * np.log10(pre.sum() / post.sum()))
    # Doppler sweep through the band, target at the region's transmit/receive cell
    c, w = region.center, region.widths
    doppler = np.linspace(c[1] - w[1] / 2, c[1] + w[1] / 2, rj.doppler_points + 2)[1:-1]
    steer_mat = coarray_steer(L_s, L_t, np.full(doppler.size, c[0]), doppler, np.full(doppler.size, c[2]))
    if rj.reweight:
        loaded = R_post.matrix + scene.noise_power * proj.Pi
        inv_steer = np.linalg.solve(loaded, steer_mat)
    else:
        inv_steer = np.linalg.solve(cov.matrix, steer_mat)
    weights = inv_steer / np.sum(steer_mat.conj() * inv_steer, axis=0)
    s_pre = pre_rejection_sinr(weights, cov, steer_mat)
    s_post = post_rejection_sinr(weights, cov, proj, steer_mat)
    outcome = RejectionOutcome(drop, doppler, s_pre, s_post, ranks,
                               region_residue(proj, rj.n_residue_draws, exp.seed), proj.tail_bound())
    # Doppler/receive plane through the region's transmit frequency, before and after
    f_d = np.linspace(-0.5, 0.5, 65)
    f_R = np.linspace(-0.5, 0.5, 65)
    planes = {
        "pre": mvdr_spectrum(cov, [c[0]], f_d, f_R)[0],
        "post": mvdr_spectrum(R_post, [c[0]], f_d, f_R, loading=scene.noise_power)[0],
    }
    return outcome, {"f_d": f_d, "f_R": f_R, "planes": planes}


def run_reject(exp: ExperimentConfig, out_dir=None) -> RunResult:
    out, view = rejection_demo(exp)
    spec_rows = []
    for stage, plane in view["planes"].items():
        db = 10 * np.log10(plane)
        for i, d in enumerate(view["f_d"]):
            for j, r in enumerate(view["f_R"]):
                spec_rows.append((stage, d, r, db[i, j]))
    sinr_rows = [(f, a, b) for f, a, b in zip(out.doppler, out.sinr_pre, out.sinr_post)]
    summary = {
        "ranks": list(out.ranks),
        "energy_drop_db": out.energy_drop_db,
        "residue_mc": out.residue,
        "residue_tail_bound": out.tail_bound,
        "min_sinr_gain_db": float(np.min(out.sinr_post - out.sinr_pre)),
        "mean_sinr_gain_db": float(np.mean(out.sinr_post - out.sinr_pre)),
    }
    tables = {
        "reject_spectrum": (["stage", "f_d", "f_R", "power_db"], spec_rows),
        "reject_sinr": (["f_d", "sinr_pre_db", "sinr_post_db"], sinr_rows),
    }
    return _finish(exp, "reject", summary, tables, out_dir)


# --- bench ----------------------------------------------------------------


def _timed(fn, repeats: int):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_point(m_s: int, n_s: int, exp: ExperimentConfig) -> dict:
    """Flops and wall time of the filter computation for one sensor geometry.

    The coarray paths share the lifting step; it is counted separately so the
    inversion stages can be compared on their own.
    """
    a = exp.array
    cfg = reference_config(a.beta, m_s, n_s, a.m_t, a.n_t)
    scene = uniform_ring_scene(exp.scene.n_ambiguities, exp.scene.n_patches, exp.scene.cnr_db)
    uni = cfg.uniform_counterpart()
    n_s_ = exp.bench.n_samples
    reps = exp.bench.repeats
    ls, lt = lag_structure(cfg.sensor_set), lag_structure(cfg.pulse_set)

    c_phys = flops.FlopCounter()
    Yp = simulate_snapshots(uni, scene, n_s_, exp.seed)
    R_phys = sample_covariance(Yp, counter=c_phys)
    v_p = np.ones(R_phys.size, complex)
    flops.inversion(c_phys, "inverse", R_phys.size)
    t_phys, _ = _timed(lambda: np.linalg.inv(R_phys.matrix) @ v_p, reps)

    c_lift = flops.FlopCounter()
    snaps = simulate_snapshots(cfg, scene, n_s_, exp.seed)
    R_v = lift(sample_covariance(snaps, counter=c_lift), ls, lt, counter=c_lift)
    n = R_v.size
    v = np.ones(n, complex)

    c_direct = flops.FlopCounter()
    flops.inversion(c_direct, "inverse", n)
    t_direct, _ = _timed(lambda: np.linalg.inv(R_v.matrix) @ v, reps)

    noise = exp.scene.noise_power
    basis = slepian_clutter_basis(cfg, N_p=scene.n_ambiguities)

    def dpss_path(counter=None):
        core = estimate_Dc(basis, R_v, noise, allow_rank_deficient=True, counter=counter)
        return fast_inverse(basis, core, noise, counter=counter).apply(v)

    c_dpss = flops.FlopCounter()
    dpss_path(c_dpss)
    t_dpss, _ = _timed(dpss_path, reps)
    return {
        "P_s": cfg.P_s,
        "n_coarray": n,
        "r_b": basis.r_b,
        "flops_physical_direct": c_phys.total,
        "flops_lift": c_lift.total,
        "flops_coarray_direct": c_direct.total,
        "flops_coarray_dpss": c_dpss.total,
        "seconds_physical_direct": t_phys,
        "seconds_coarray_direct": t_direct,
        "seconds_coarray_dpss": t_dpss,
    }


def run_bench(exp: ExperimentConfig, out_dir=None) -> RunResult:
    rows = [bench_point(int(m), int(n), exp) for m, n in exp.bench.sensor_pairs]
    n = np.array([r["n_coarray"] for r in rows], float)
    f = np.array([r["flops_coarray_direct"] for r in rows], float)
    slope = float(np.polyfit(np.log(n), np.log(f), 1)[0]) if len(rows) > 1 else float("nan")
    summary = {
        "dpss_below_direct": all(r["flops_coarray_dpss"] < r["flops_coarray_direct"] for r in rows),
        "coarray_direct_log_slope": slope,
        "points": rows,
    }
    header = list(rows[0].keys())
    # wall times vary run to run; they live in the summary only, keeping the
    # CSV byte-stable
    csv_header = [h for h in header if not h.startswith("seconds_")]
    return _finish(exp, "bench", summary, {"bench": (csv_header, [[r[h] for h in csv_header] for r in rows])},
                   out_dir)


VERBS = {
    "spectrum": run_spectrum,
    "rank-table": run_rank_table,
    "sinr": run_sinr,
    "reject": run_reject,
    "bench": run_bench,
}
