"""Experiment runners: each one turns an :class:`ExperimentConfig` into data files."""

import csv
import dataclasses
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import measurement as meas
from . import metrics, optics, particles, teleport, tomography
from .tomography import dumps_matrix, matrix_to_json

EXPERIMENTS = (
    "entangle-sweep", "chsh-sweep", "bell-states", "occupancy",
    "distinguishable", "hom", "teleport", "process-tomo",
)
# keys that do not influence any emitted number
_HASH_EXCLUDE = ("out", "workers")


@dataclass
class ExperimentConfig:
    experiment: str = "entangle-sweep"
    alpha: float = math.pi / 4
    beta_start: float = 0.0
    beta_stop: float = math.pi
    beta_num: int = 21
    counts: float = 5000.0
    seed: int = 2020
    visibility: float = 1.0
    exact: bool = False
    estimator: str = "mle"
    n_resamples: int = 100
    out: str = "out"
    workers: int = 1
    bell_betas: list = field(default_factory=lambda: [0.776, 2.352])
    distinguishable_beta: float = math.pi / 4
    hom_a: float = 1000.0
    hom_b: float = 0.5
    hom_c: float = 0.0
    hom_d: float = 0.977
    hom_sign: str = "dip"
    hom_points: int = 41
    hom_halfwidth: float = 5.0
    hom_duration: float = 5.0
    hom_unit: str = "um"
    teleport_target: float = 0.851
    resource_visibility: float | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        if self.counts <= 0:
            raise ValueError("counts must be positive")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path, **overrides):
        data = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def betas(self):
        return np.linspace(self.beta_start, self.beta_stop, self.beta_num)

    def digest(self):
        d = {k: v for k, v in dataclasses.asdict(self).items() if k not in _HASH_EXCLUDE}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows, cfg):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_sha256={cfg.digest()} experiment={cfg.experiment} seed={cfg.seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_json(path, text):
    Path(path).write_text(text + "\n", encoding="utf-8")


def _map(fn, items, workers):
    """Order-preserving map, optionally over a process pool."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _seeds(cfg, n):
    return np.random.SeedSequence(cfg.seed).spawn(n)


def _safe_indist(amps):
    try:
        return particles.indistinguishability(amps).i_value
    except particles.UndefinedMeasureError:
        return float("nan")


def conditional_state(alpha, beta, visibility=1.0):
    """Conditional two-qubit state at angles ``(alpha, beta)`` and its sLOCC probability."""
    out = particles.slocc_outcome(particles.SpatialAmplitudes.from_angles(alpha, beta))
    return meas.coherent_mix(out, visibility), out.prob


def _reconstruct(cfg, dim):
    def estimate(records, target=None):
        return tomography.state_tomography(records, dim, target=target, method=cfg.estimator)
    return estimate


def _tomo_with_error(cfg, rho, functional, rng, dim=4):
    """Simulate tomography of ``rho``; return the functional's estimate and bootstrap error."""
    settings = tomography.pauli_settings(int(math.log2(dim)))
    records = meas.simulate_records(rho, settings, cfg.counts, rng=rng, exact=cfg.exact)
    estimate = _reconstruct(cfg, dim)
    rho_hat = estimate(records).rho
    err, _ = tomography.error_bars(records, lambda rs: functional(estimate(rs).rho),
                                   max(cfg.n_resamples, 100), rng=rng)
    return rho_hat, functional(rho_hat), err


def _entangle_point(args):
    cfg, beta, seed = args
    rng = np.random.default_rng(seed)
    amps = particles.SpatialAmplitudes.from_angles(cfg.alpha, beta)
    rho, _ = conditional_state(cfg.alpha, beta, cfg.visibility)
    c_theory = metrics.concurrence(particles.slocc_outcome(amps).density())
    _, c_tomo, c_err = _tomo_with_error(cfg, rho, metrics.concurrence, rng)
    return [beta, _safe_indist(amps), c_theory, c_tomo, c_err]


def run_entangle_sweep(cfg, out):
    betas = cfg.betas()
    rows = _map(_entangle_point, [(cfg, b, s) for b, s in zip(betas, _seeds(cfg, len(betas)))], cfg.workers)
    path = out / "entangle_sweep.csv"
    write_csv(path, ["beta", "I", "C_theory", "C_tomo", "C_err"], rows, cfg)
    return [path]


def _chsh_point(args):
    cfg, beta, seed = args
    rng = np.random.default_rng(seed)
    amps = particles.SpatialAmplitudes.from_angles(cfg.alpha, beta)
    rho, _ = conditional_state(cfg.alpha, beta, cfg.visibility)
    c = metrics.concurrence(particles.slocc_outcome(amps).density())
    s_theory = 2.0 * math.sqrt(1.0 + c * c)
    settings = meas.chsh_settings(metrics.chsh_max(rho))
    records = meas.simulate_records(rho, settings, cfg.counts, rng=rng, exact=cfg.exact)
    s_sim = meas.chsh_from_records(records)
    s_err, _ = tomography.error_bars(records, meas.chsh_from_records, max(cfg.n_resamples, 100), rng=rng)
    return [beta, _safe_indist(amps), s_theory, s_sim, s_err]


def run_chsh_sweep(cfg, out):
    betas = cfg.betas()
    rows = _map(_chsh_point, [(cfg, b, s) for b, s in zip(betas, _seeds(cfg, len(betas)))], cfg.workers)
    path = out / "chsh_sweep.csv"
    write_csv(path, ["beta", "I", "S_theory", "S_sim", "S_err"], rows, cfg)
    return [path]


def bell_target(beta):
    name = "Psi+" if beta <= math.pi / 2 else "Psi-"
    return name, teleport.BELL_STATES[name]


def run_bell_states(cfg, out):
    paths, rows = [], []
    for beta, seed in zip(cfg.bell_betas, _seeds(cfg, len(cfg.bell_betas))):
        rng = np.random.default_rng(seed)
        rho, prob = conditional_state(cfg.alpha, beta, cfg.visibility)
        name, target = bell_target(beta)
        rho_hat, f, f_err = _tomo_with_error(cfg, rho, lambda r: metrics.fidelity(r, target), rng)
        c = metrics.concurrence(rho_hat)
        p = out / f"bell_state_beta_{beta:.4f}.json"
        write_json(p, dumps_matrix(rho_hat, beta=float(beta), alpha=float(cfg.alpha), target=name,
                                   fidelity=f, fidelity_err=f_err, concurrence=c,
                                   slocc_probability=prob, config_sha256=cfg.digest()))
        paths.append(p)
        rows.append([beta, name, f, f_err, c, prob])
    path = out / "bell_states.csv"
    write_csv(path, ["beta", "target", "fidelity", "fidelity_err", "concurrence", "P_LR"], rows, cfg)
    return [path, *paths]


def occupancy_rows(cfg):
    rows = []
    for beta, seed in zip(cfg.betas(), _seeds(cfg, cfg.beta_num)):
        p = optics.occupancy_L(optics.SetupConfig(cfg.alpha, float(np.clip(beta, 0.0, math.pi))))
        sigma = math.sqrt(p * (1.0 - p) / cfg.counts)
        if cfg.exact:
            n_l, n_r = cfg.counts * p, cfg.counts * (1.0 - p)
        else:
            n_l, n_r = meas.sample_counts([p, 1.0 - p], cfg.counts, np.random.default_rng(seed)).counts
        total = n_l + n_r
        freq = n_l / total if total > 0 else float("nan")
        rows.append([beta, p, freq, sigma, n_l, n_r])
    return rows


def run_occupancy(cfg, out):
    path = out / "occupancy.csv"
    write_csv(path, ["beta", "sin2_beta", "frequency", "sigma", "counts_L", "counts_R"], occupancy_rows(cfg), cfg)
    return [path]


def run_distinguishable(cfg, out):
    rng = np.random.default_rng(_seeds(cfg, 1)[0])
    out_state = particles.slocc_outcome(particles.SpatialAmplitudes.from_angles(cfg.alpha, cfg.distinguishable_beta))
    rho_mix = meas.distinguishable_mix(out_state)
    rho_hat, c_tomo, c_err = _tomo_with_error(cfg, rho_mix, metrics.concurrence, rng)
    rows = [
        ["concurrence_exact", metrics.concurrence(rho_mix)],
        ["concurrence_tomo", c_tomo],
        ["concurrence_err", c_err],
        ["concurrence_coherent", metrics.concurrence(out_state.density())],
        ["fidelity_vs_mix", metrics.fidelity(rho_hat, rho_mix)],
    ]
    path = out / "distinguishable.csv"
    write_csv(path, ["quantity", "value"], rows, cfg)
    jpath = out / "distinguishable_rho.json"
    write_json(jpath, dumps_matrix(rho_hat, exact=matrix_to_json(rho_mix), config_sha256=cfg.digest()))
    return [path, jpath]


def run_hom(cfg, out):
    params = optics.GaussianFit(cfg.hom_a, cfg.hom_b, cfg.hom_c, cfg.hom_d, cfg.hom_sign)
    delays = np.linspace(cfg.hom_c - cfg.hom_halfwidth, cfg.hom_c + cfg.hom_halfwidth, cfg.hom_points)
    if cfg.exact:
        data = optics.HomDataset(delays, optics.hom_expected(delays, params), cfg.hom_duration, cfg.hom_unit)
    else:
        data = optics.simulate_hom(delays, params, np.random.default_rng(_seeds(cfg, 1)[0]),
                                   cfg.hom_duration, cfg.hom_unit)
    fit = optics.fit_gaussian(data, cfg.hom_sign)
    path = out / "hom_scan.csv"
    optics.write_hom_csv(data, path, comment=f"config_sha256={cfg.digest()} experiment=hom unit={cfg.hom_unit}")
    jpath = out / "hom_fit.json"
    write_json(jpath, json.dumps({**dataclasses.asdict(fit), "visibility": fit.visibility,
                                  "true_visibility": cfg.hom_d, "unit": cfg.hom_unit,
                                  "config_sha256": cfg.digest()}, indent=2, sort_keys=True))
    return [path, jpath]


def teleport_resource(cfg):
    """Depolarized Psi+ resource at alpha = beta = pi/4, calibrated unless fixed in the config.

    Returns ``(rho, v, P_LR)``.
    """
    rho_pure, prob = conditional_state(math.pi / 4, math.pi / 4, 1.0)
    v = cfg.resource_visibility
    if v is None:
        v = teleport.calibrate_depolarization(cfg.teleport_target)
    return v * rho_pure + (1.0 - v) * np.eye(4) / 4.0, v, prob


def _teleport_outputs(cfg, resource, prob, rng):
    runs, estimates = [], []
    for q in teleport.SIX_INPUTS:
        run = teleport.teleport(q, resource, slocc_prob=prob)
        rho_hat, f, f_err = _tomo_with_error(cfg, run.output, lambda r, q=q: metrics.fidelity(r, q.vector), rng, dim=2)
        runs.append(run)
        estimates.append((rho_hat, f, f_err))
    return runs, estimates


def run_teleport(cfg, out):
    resource, v, prob = teleport_resource(cfg)
    rng = np.random.default_rng(_seeds(cfg, 1)[0])
    runs, estimates = _teleport_outputs(cfg, resource, prob, rng)
    rows = []
    for run, (_, f, f_err) in zip(runs, estimates):
        rows.append([run.input.label, run.fidelity, f, f_err, f > teleport.CLASSICAL_LIMIT,
                     run.outcome_prob, run.success_prob])
    mean_exact = float(np.mean([r.fidelity for r in runs]))
    mean_sim = float(np.mean([e[1] for e in estimates]))
    rows.append(["average", mean_exact, mean_sim, "", mean_sim > teleport.CLASSICAL_LIMIT, "", ""])
    path = out / "teleport.csv"
    write_csv(path, ["state", "fidelity_exact", "fidelity", "fidelity_err", "above_classical",
                     "branch_prob", "success_prob"], rows, cfg)
    jpath = out / "teleport_runs.json"
    write_json(jpath, json.dumps({
        "depolarization_v": v, "slocc_probability": prob, "config_sha256": cfg.digest(),
        "runs": [json.loads(r.to_json()) for r in runs],
    }, indent=2, sort_keys=True))
    return [path, jpath]


def run_process_tomo(cfg, out):
    resource, v, prob = teleport_resource(cfg)
    rng = np.random.default_rng(_seeds(cfg, 1)[0])
    runs, estimates = _teleport_outputs(cfg, resource, prob, rng)
    pairs = [(np.outer(r.input.vector, r.input.vector.conj()), e[0]) for r, e in zip(runs, estimates)]
    chi = tomography.process_tomography(pairs)
    path = out / "process_chi.json"
    write_json(path, dumps_matrix(chi.chi, process_fidelity=chi.process_fidelity, depolarization_v=v,
                                  basis=["I", "X", "Y", "Z"], config_sha256=cfg.digest()))
    return [path]


RUNNERS = {
    "entangle-sweep": run_entangle_sweep,
    "chsh-sweep": run_chsh_sweep,
    "bell-states": run_bell_states,
    "occupancy": run_occupancy,
    "distinguishable": run_distinguishable,
    "hom": run_hom,
    "teleport": run_teleport,
    "process-tomo": run_process_tomo,
}


def run(cfg):
    """Run one experiment and return the paths written."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.experiment](cfg, out)
