"""Command-line experiment runner.

``wobblesim <job> --config cfg.yaml [--seed S] [--out DIR] [--quick]``

Every job writes its curves as CSV files with JSON sidecars, plus a
``summary.json`` holding the resolved configuration and the results.  Exit
status: 0 success, 1 a Monte Carlo validation failed, 2 bad configuration,
3 a coherence time was inconclusive.
"""

from __future__ import annotations

import argparse
import copy
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acf_analytic import AcfCurve, analytic_curve, acf, mus_acf_matrix
from .acf_montecarlo import estimate_acf, estimate_acf_matrix
from .coherence import (
    InconclusiveCoherence,
    coherence_time,
    coherence_time_nonstationary,
    coherence_time_wiener_los,
    default_tau_grid,
    scan_coherence_time,
)
from .config import JOBS, ConfigError, ExperimentConfig, load_config
from .curve_io import fmt, write_curve, write_json, write_table
from .wobble import PitchProcessSpec, ProcessKind

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3
OUTPUT_ENV = "WOBBLESIM_OUTPUT_DIR"

FIGURE3_CARRIERS_HZ = (2.4e9, 6.0e9, 30.0e9)
FIGURE4_PITCH_DEG = (5.0, 7.0, 10.0)
FIGURE_CARRIER_HZ = {"figure2": 6.0e9, "figure4": 2.4e9}
FIGURE_PITCH_DEG = 5.0
Z_LIMIT = 3.0
MIN_PASS_FRACTION = 0.99


def validation_taus(spec, proc: PitchProcessSpec, n: int, tau_max: float | None = None) -> np.ndarray:
    """Linear lag grid for Monte Carlo checks.

    Without an explicit ``tau_max`` the window is 8 closed-form LoS coherence
    times for Wiener pitch (the LoS factor falls to 1/256) and 0.1 s otherwise,
    which spans a half period of the slowest 5 Hz wobble.
    """
    if tau_max is None:
        if proc.kind is ProcessKind.WIENER:
            tau_max = 8.0 * coherence_time_wiener_los(spec, proc.wiener_rate_b, 0.5)
        else:
            tau_max = 0.1
    return np.linspace(0.0, tau_max, n)


def z_scores(diff: np.ndarray, se: np.ndarray) -> np.ndarray:
    """``diff / se`` with ``0/0 -> 0`` (exact zero-variance agreement)."""
    out = np.zeros_like(diff, dtype=float)
    pos = se > 0
    out[pos] = diff[pos] / se[pos]
    out[~pos & (diff != 0)] = np.inf
    return out


class _Run:
    """Shared state of one job: output directory, artifacts and verdict flags."""

    def __init__(self, job: str, cfg: ExperimentConfig):
        self.job = job
        self.cfg = cfg
        self.out = Path(cfg["output_dir"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.results: dict = {}
        self.inconclusive: list[str] = []
        self.failed: list[str] = []

    def curve_config(self, **fields) -> dict:
        """Resolved config with the swept fields of one curve substituted."""
        r = copy.deepcopy(self.cfg.resolved)
        r["job"] = self.job
        for dotted, value in fields.items():
            section, key = dotted.split("__")
            r[section][key] = value
        return r

    def emit(self, name: str, curve: AcfCurve, config: dict):
        write_curve(self.out / f"{name}.csv", curve, config)
        self.files += [f"{name}.csv", f"{name}.meta.json"]

    def coherence(self, label: str, fn):
        try:
            res = fn()
        except InconclusiveCoherence as exc:
            self.inconclusive.append(label)
            return {"kind": "inconclusive", "reason": str(exc)}
        return res.as_dict()

    def finish(self) -> int:
        status = EXIT_OK
        if self.inconclusive:
            status = EXIT_INCONCLUSIVE
        if self.failed:
            status = EXIT_VALIDATION
        summary = {
            "job": self.job,
            "version": __version__,
            "exit_status": status,
            "failed_validations": self.failed,
            "inconclusive": self.inconclusive,
            "results": self.results,
            "files": sorted(self.files),
            "normalization": "per anchor time: each R(t, .) is divided by its own maximum",
            "config": self.curve_config(),
        }
        write_json(self.out / "summary.json", summary)
        return status


def _tau_grid(cfg: ExperimentConfig) -> np.ndarray:
    g = cfg["grid"]
    return default_tau_grid(g["tau_max"], g["num_taus"])


def _label_hz(hz: float) -> str:
    return f"{hz / 1e9:g}GHz"


def _job_acf(run: _Run):
    cfg = run.cfg
    spec, proc = cfg.channel(), cfg.process()
    t = cfg["grid"]["anchor_t"]
    curve = analytic_curve(spec, proc, _tau_grid(cfg), t=t)
    run.emit("acf_analytic", curve, run.curve_config())
    run.results["coherence"] = run.coherence("acf", lambda: coherence_time(curve, cfg.gamma))


def _job_coherence(run: _Run):
    cfg = run.cfg
    spec, proc = cfg.channel(), cfg.process()
    taus = _tau_grid(cfg)
    g = cfg["grid"]
    if proc.kind is ProcessKind.SINUSOID:
        t_grid = np.linspace(0.0, g["t_grid_max"], g["t_grid_points"])
        try:
            ns = coherence_time_nonstationary(lambda t, x: acf(spec, proc, t, x), cfg.gamma, t_grid, taus)
        except InconclusiveCoherence as exc:
            run.inconclusive.append("coherence")
            run.results["coherence"] = {"kind": "inconclusive", "reason": str(exc)}
            return
        run.results["coherence"] = ns.result.as_dict()
        run.results["minimizing_t"] = ns.minimizing_t
        run.results["per_anchor"] = [r.as_dict() for r in ns.table]
        return
    t = g["anchor_t"]
    run.results["coherence"] = run.coherence(
        "coherence", lambda: scan_coherence_time(lambda x: acf(spec, proc, t, x), cfg.gamma, taus, anchor_t=t)
    )
    if proc.kind is ProcessKind.WIENER and cfg.gamma < 1.0:
        run.results["los_closed_form_seconds"] = coherence_time_wiener_los(spec, proc.wiener_rate_b, cfg.gamma)


def _job_figure2(run: _Run):
    cfg = run.cfg
    fc = FIGURE_CARRIER_HZ["figure2"]
    spec = cfg.channel(carrier_hz=fc)
    taus = _tau_grid(cfg)
    wiener = cfg.process("wiener")
    curve = analytic_curve(spec, wiener, taus)
    run.emit("figure2_wiener", curve, run.curve_config(channel__carrier_hz=fc, process__kind="wiener"))
    results = {"wiener": run.coherence("figure2 wiener", lambda: coherence_time(curve, cfg.gamma))}
    sinus = cfg.process("sinusoid", max_pitch_deg=FIGURE_PITCH_DEG)
    per_t = {}
    for t in cfg["grid"]["t_values"]:
        c = analytic_curve(spec, sinus, taus, t=t)
        conf = run.curve_config(channel__carrier_hz=fc, process__kind="sinusoid", process__max_pitch_deg=FIGURE_PITCH_DEG, grid__anchor_t=t)
        run.emit(f"figure2_sinusoid_t{fmt(t)}", c, conf)
        per_t[fmt(t)] = run.coherence(f"figure2 sinusoid t={fmt(t)}", lambda c=c: coherence_time(c, cfg.gamma))
    results["sinusoid_by_anchor_t"] = per_t
    finite = {k: v for k, v in per_t.items() if v["kind"] == "finite"}
    results["sinusoid_min_over_t"] = min(finite.values(), key=lambda v: v["t_c_seconds"]) if finite else None
    run.results["coherence"] = results


def _job_figure3(run: _Run):
    cfg = run.cfg
    taus = _tau_grid(cfg)
    proc = cfg.process("sinusoid", max_pitch_deg=FIGURE_PITCH_DEG)
    out = {}
    for fc in FIGURE3_CARRIERS_HZ:
        spec = cfg.channel(carrier_hz=fc)
        curve = analytic_curve(spec, proc, taus)
        name = f"figure3_{_label_hz(fc)}"
        conf = run.curve_config(channel__carrier_hz=fc, channel__num_mpc=spec.num_mpc, process__kind="sinusoid", process__max_pitch_deg=FIGURE_PITCH_DEG, grid__anchor_t=0.0)
        run.emit(name, curve, conf)
        out[_label_hz(fc)] = run.coherence(name, lambda c=curve: coherence_time(c, cfg.gamma))
    run.results["coherence"] = out


def _job_figure4(run: _Run):
    cfg = run.cfg
    fc = FIGURE_CARRIER_HZ["figure4"]
    spec = cfg.channel(carrier_hz=fc)
    taus = _tau_grid(cfg)
    out = {}
    for deg in FIGURE4_PITCH_DEG:
        proc = cfg.process("sinusoid", max_pitch_deg=deg)
        curve = analytic_curve(spec, proc, taus)
        name = f"figure4_{deg:g}deg"
        conf = run.curve_config(channel__carrier_hz=fc, channel__num_mpc=spec.num_mpc, process__kind="sinusoid", process__max_pitch_deg=deg, grid__anchor_t=0.0)
        run.emit(name, curve, conf)
        out[f"{deg:g}deg"] = run.coherence(name, lambda c=curve: coherence_time(c, cfg.gamma))
    run.results["coherence"] = out


def _job_mc_validate(run: _Run):
    cfg = run.cfg
    spec, proc = cfg.channel(), cfg.process()
    g, e = cfg["grid"], cfg["ensemble"]
    t = g["anchor_t"]
    taus = validation_taus(spec, proc, g["mc_num_taus"], g["mc_tau_max"])
    ana = analytic_curve(spec, proc, taus, t=t)
    mc = estimate_acf(
        cfg.ensemble(), spec, proc, t, taus,
        exact_geometry=e["exact_geometry"], ue_azimuth=float(np.deg2rad(e["ue_azimuth_deg"])),
    )
    conf = run.curve_config()
    run.emit("mc_analytic", ana, conf)
    run.emit("mc_estimate", mc, conf)
    z_re = z_scores(mc.values.real - ana.values.real, mc.stderr)
    z_im = z_scores(mc.values.imag, mc.stderr_imag)
    rows = [
        (taus[j], ana.values.real[j], mc.values.real[j], mc.values.imag[j], mc.stderr[j], mc.stderr_imag[j], z_re[j], z_im[j])
        for j in range(taus.size)
    ]
    write_table(run.out / "mc_validate.csv", ("tau_s", "analytic", "mc_real", "mc_imag", "stderr", "stderr_imag", "z_real", "z_imag"), rows)
    run.files.append("mc_validate.csv")
    frac = float(np.mean(np.abs(z_re) <= Z_LIMIT))
    imag_ok = bool(np.all(np.abs(z_im) <= Z_LIMIT))
    passed = frac >= MIN_PASS_FRACTION and imag_ok
    run.results["validation"] = {
        "passed": passed,
        "fraction_within_3se": frac,
        "required_fraction": MIN_PASS_FRACTION,
        "imag_within_3se_everywhere": imag_ok,
        "max_abs_z_real": float(np.max(np.abs(z_re))),
        "num_realizations": e["num_realizations"],
    }
    if not passed:
        run.failed.append("mc-validate")


def _job_mus(run: _Run):
    cfg = run.cfg
    e, g = cfg["ensemble"], cfg["grid"]
    specs = [cfg.channel(los_aod_deg=a) for a in e["los_aods_deg"]]
    proc = cfg.process()
    t = g["anchor_t"]
    taus = validation_taus(specs[0], proc, g["mc_num_taus"], g["mc_tau_max"])
    mats = estimate_acf_matrix(cfg.ensemble(), specs, proc, t, taus, shared_scatterers=e["shared_scatterers"])
    rows = []
    off_ok = diag_ok = analytic_diagonal = True
    max_off_z = 0.0
    for tau, m in zip(taus, mats):
        ref = mus_acf_matrix(specs, proc, t, float(tau))
        analytic_diagonal &= bool(np.all(ref.entries[~np.eye(ref.dim, dtype=bool)] == 0))
        se = m.stderr
        for i in range(m.dim):
            for k in range(m.dim):
                v = m.entries[i, k]
                if i == k:
                    z = float(z_scores(np.array([v.real - ref.entries[i, i].real]), m.stderr_real[i, i : i + 1])[0])
                    diag_ok &= abs(z) <= Z_LIMIT
                else:
                    z = float(z_scores(np.array([abs(v)]), se[i, k : k + 1])[0])
                    off_ok &= z <= Z_LIMIT
                    max_off_z = max(max_off_z, z)
                rows.append((tau, i, k, v.real, v.imag, m.stderr_real[i, k], m.stderr_imag[i, k], z, ref.entries[i, k].real))
    write_table(run.out / "mus_matrix.csv", ("tau_s", "i", "k", "real", "imag", "stderr_real", "stderr_imag", "z", "analytic_real"), rows)
    run.files.append("mus_matrix.csv")
    passed = off_ok and diag_ok and analytic_diagonal
    run.results["validation"] = {
        "passed": passed,
        "off_diagonal_within_3se": off_ok,
        "max_off_diagonal_z": max_off_z,
        "diagonal_matches_analytic": diag_ok,
        "analytic_matrix_diagonal": analytic_diagonal,
        "shared_scatterers": e["shared_scatterers"],
        "num_realizations": e["num_realizations"],
    }
    if not passed:
        run.failed.append("mus")


HANDLERS = {
    "acf": _job_acf,
    "coherence": _job_coherence,
    "figure2": _job_figure2,
    "figure3": _job_figure3,
    "figure4": _job_figure4,
    "mc-validate": _job_mc_validate,
    "mus": _job_mus,
}


def run(job: str, cfg: ExperimentConfig) -> int:
    """Execute one job with a resolved config; returns the exit status."""
    if cfg["job"] is not None and cfg["job"] != job:
        raise ConfigError(f"{cfg.line_of('job')}: config is for job {cfg['job']!r}, not {job!r}")
    r = _Run(job, cfg)
    HANDLERS[job](r)
    return r.finish()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wobblesim", description="UAV wobbling channel ACF and coherence-time experiments")
    p.add_argument("job", choices=JOBS)
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--out", help=f"output directory (overrides {OUTPUT_ENV} and output_dir)")
    p.add_argument("--quick", action="store_true", help="10^4 realizations and a coarse anchor grid")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = args.out or os.environ.get(OUTPUT_ENV) or None
        cfg = cfg.with_overrides(seed=args.seed, output_dir=out, quick=args.quick)
        status = run(args.job, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    labels = {EXIT_OK: "ok", EXIT_VALIDATION: "validation failed", EXIT_INCONCLUSIVE: "inconclusive coherence time"}
    print(f"{args.job}: {labels[status]} -> {Path(cfg['output_dir']) / 'summary.json'}")
    return status


if __name__ == "__main__":
    sys.exit(main())
