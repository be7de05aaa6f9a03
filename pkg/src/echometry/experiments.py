"""Scenario runner: deterministic CSV sweeps over the protocol's figures.

Each scenario evaluates a fixed grid and writes one CSV plus a key=value
summary file.  Grids default to the parameter ranges behind the reference
curves (trace scans, information versus ancilla angle / step time / probe
size, the readout map, XZ scaling, control deviations, and dephasing) and
are fully overridable.  Runs are pure and reseeded, so identical configs
produce byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .circuit import (
    ModelParams,
    Schedule,
    conjugate_schedule,
    normalized_trace,
    optimal_generator,
    optimal_settings,
    period_schedule,
    reversal_period,
)
from .fisher import (
    DeviationSpec,
    cfi,
    output_state_derivative,
    qfi_dephased,
    qfi_deviation,
    qfi_general,
    qfi_sld_oracle,
    qfi_thermal,
)
from .spin import ContractViolation, EnsembleDim
from .states import SpectralProbe, ancilla_state, polarized_probe, thermal_probe

__all__ = [
    "SweepConfig",
    "FitResult",
    "SCENARIOS",
    "fit_quadratic",
    "run_scenario",
    "run_validation",
]


@dataclass
class SweepConfig:
    """One scenario run: name, model parameters, grids, and output directory."""

    scenario: str
    params: ModelParams
    out_dir: str = "results"
    mode: str = "exact_conjugate"
    grids: dict = field(default_factory=dict)

    def grid(self, key: str, default):
        return self.grids.get(key, default)


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of F = a N^2 + b N (no constant term)."""

    a: float
    b: float
    residual_rms: float


def fit_quadratic(points) -> FitResult:
    """Fit F = a N^2 + b N to (N, F) pairs by least squares."""
    pts = [(float(n), float(f)) for n, f in points]
    ns = np.array([p[0] for p in pts])
    fs = np.array([p[1] for p in pts])
    if np.unique(ns).size < 3:
        raise ContractViolation("quadratic fit needs at least three distinct sizes")
    design = np.stack([ns * ns, ns], axis=1)
    coef, _, rank, _ = np.linalg.lstsq(design, fs, rcond=None)
    if rank < 2:
        raise ContractViolation("quadratic fit design matrix is rank deficient")
    resid = fs - design @ coef
    return FitResult(a=float(coef[0]), b=float(coef[1]), residual_rms=float(np.sqrt(np.mean(resid**2))))


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_summary(path: Path, entries: dict) -> None:
    lines = [f"{key}={_fmt(value)}" for key, value in entries.items()]
    path.write_text("\n".join(lines) + "\n")


@lru_cache(maxsize=None)
def _period_for(params: ModelParams, n_spins: int) -> float:
    window = 64.0 * math.pi / max(params.g, 1e-9)
    return reversal_period(params, EnsembleDim(n_spins), t_max=window).period


def _schedule_for(params: ModelParams, dim: EnsembleDim, t1: float, mode: str) -> Schedule:
    """Reversal schedule at step time t1: by construction or via a found period."""
    if mode == "exact_conjugate":
        return conjugate_schedule(t1, theta=0.0)
    period = _period_for(params, dim.n_spins)
    return period_schedule(t1 % period, theta=0.0, period=period)


def _optimal_probe(params: ModelParams, dim: EnsembleDim) -> SpectralProbe:
    return polarized_probe(dim, optimal_generator(params, dim))


def _qfi_at(params, dim, probe, theta0, t1, mode) -> float:
    sched = _schedule_for(params, dim, t1, mode)
    return qfi_general(probe, ancilla_state(theta0), params, sched).value


# ---------------------------------------------------------------------------
# scenario runners


def _run_trace_scan(cfg: SweepConfig):
    n = int(cfg.grid("n", 4))
    points = int(cfg.grid("points", 2048))
    gt_max = float(cfg.grid("gt_max", 4 * math.pi))
    if points < 1:
        raise ContractViolation("trace scan needs a nonempty grid")
    dim = EnsembleDim(n)
    gts = gt_max * np.arange(1, points + 1) / points
    f = normalized_trace(cfg.params, dim, gts / cfg.params.g)
    rows = list(zip(gts, f))
    unit = gts[f >= 1.0 - 1e-9]
    summary = {
        "scenario": cfg.scenario,
        "n": n,
        "points": points,
        "gt_max": gt_max,
        "max_trace": float(f.max()),
        "unit_trace_gt": ";".join(_fmt(v) for v in unit),
    }
    return ["gT", "F"], rows, summary


def _run_qfi_theta0(cfg: SweepConfig):
    n_values = [int(v) for v in cfg.grid("n_values", range(2, 21))]
    theta0s = np.linspace(0.0, math.pi, int(cfg.grid("theta0_points", 81)))
    rows = []
    for n in n_values:
        dim = EnsembleDim(n)
        t1 = optimal_settings(cfg.params).t1
        probe = _optimal_probe(cfg.params, dim)
        for theta0 in theta0s:
            rows.append((n, theta0, _qfi_at(cfg.params, dim, probe, theta0, t1, cfg.mode)))
    summary = {
        "scenario": cfg.scenario,
        "n_values": ";".join(str(n) for n in n_values),
        "theta0_points": theta0s.size,
        "max_FQ": max(r[2] for r in rows),
    }
    return ["N", "theta0", "FQ"], rows, summary


def _run_qfi_t1(cfg: SweepConfig):
    n_values = [int(v) for v in cfg.grid("n_values", range(2, 21))]
    gt1_max = float(cfg.grid("gt1_max", math.pi))
    gt1s = np.linspace(0.0, gt1_max, int(cfg.grid("gt1_points", 81)))
    rows = []
    for n in n_values:
        dim = EnsembleDim(n)
        probe = _optimal_probe(cfg.params, dim)
        for gt1 in gt1s:
            rows.append(
                (n, gt1, _qfi_at(cfg.params, dim, probe, math.pi / 2, gt1 / cfg.params.g, cfg.mode))
            )
    summary = {
        "scenario": cfg.scenario,
        "n_values": ";".join(str(n) for n in n_values),
        "gt1_points": gt1s.size,
        "max_FQ": max(r[2] for r in rows),
    }
    return ["N", "gt1", "FQ"], rows, summary


def _run_qfi_heatmap(cfg: SweepConfig):
    n = int(cfg.grid("n", 4))
    dim = EnsembleDim(n)
    theta0s = np.linspace(0.0, math.pi, int(cfg.grid("theta0_points", 65)))
    gt1s = np.linspace(0.0, float(cfg.grid("gt1_max", math.pi)), int(cfg.grid("gt1_points", 65)))
    probe = _optimal_probe(cfg.params, dim)
    rows = []
    for theta0 in theta0s:
        for gt1 in gt1s:
            value = _qfi_at(cfg.params, dim, probe, theta0, gt1 / cfg.params.g, cfg.mode)
            rows.append((theta0, gt1, value / n**2))
    best = max(rows, key=lambda r: r[2])
    summary = {
        "scenario": cfg.scenario,
        "n": n,
        "theta0_points": theta0s.size,
        "gt1_points": gt1s.size,
        "max_FQ_over_N2": best[2],
        "argmax_theta0": best[0],
        "argmax_gt1": best[1],
    }
    return ["theta0", "gt1", "FQ_over_N2"], rows, summary


# Named working points of the information-versus-size scaling scenario:
# A is the optimum, B and C detune the step time / ancilla angle, D is the
# thermal probe (numeric, exact sum, and large-N approximation).
_SCALING_POINTS = (
    ("A", math.pi / 2, 0.5),
    ("B", math.pi / 2, 0.75),
    ("C", math.pi / 8, 0.5),
)


def _run_qfi_scaling(cfg: SweepConfig):
    n_values = [int(v) for v in cfg.grid("n_values", range(2, 21))]
    beta = float(cfg.grid("beta", 1.0))
    rows = []
    for n in n_values:
        dim = EnsembleDim(n)
        probe = _optimal_probe(cfg.params, dim)
        gen = optimal_generator(cfg.params, dim)
        for label, theta0, t1_over_period in _SCALING_POINTS:
            t1 = t1_over_period * math.pi / cfg.params.g
            rows.append((n, label, _qfi_at(cfg.params, dim, probe, theta0, t1, cfg.mode)))
        thermal = thermal_probe(dim, gen, beta)
        t1_opt = optimal_settings(cfg.params).t1
        rows.append((n, "D", _qfi_at(cfg.params, dim, thermal, math.pi / 2, t1_opt, cfg.mode)))
        exact, large_n = qfi_thermal(dim, beta)
        rows.append((n, "D_exact", exact.value))
        rows.append((n, "D_largeN", large_n.value))
    point_a = [(n, f) for n, label, f in rows if label == "A"]
    summary = {
        "scenario": cfg.scenario,
        "n_values": ";".join(str(n) for n in n_values),
        "beta": beta,
        "labels": ";".join(["A", "B", "C", "D", "D_exact", "D_largeN"]),
        "max_A_deviation": max(abs(f / n**2 - 1.0) for n, f in point_a),
    }
    return ["N", "point_label", "FQ"], rows, summary


def _run_cfi_map(cfg: SweepConfig):
    n = int(cfg.grid("n", 5))
    dim = EnsembleDim(n)
    gt_max = float(cfg.grid("gt_max", 2 * math.pi))
    gt1s = np.linspace(0.0, gt_max, int(cfg.grid("gt1_points", 65)))
    gt2s = np.linspace(0.0, gt_max, int(cfg.grid("gt2_points", 65)))
    theta_eval = float(cfg.grid("theta_eval", 0.2))
    gen = optimal_generator(cfg.params, dim)
    probe = polarized_probe(dim, gen)
    anc = ancilla_state(math.pi / 2)
    rows = []
    for gt1 in gt1s:
        for gt2 in gt2s:
            sched = Schedule(t1=gt1 / cfg.params.g, t2=gt2 / cfg.params.g, theta=0.0, mode="period")
            value = cfi(probe, anc, cfg.params, sched, generator=gen, theta_eval=theta_eval).value
            rows.append((gt1, gt2, value / n**2))
    best = max(rows, key=lambda r: r[2])
    summary = {
        "scenario": cfg.scenario,
        "n": n,
        "gt1_points": gt1s.size,
        "gt2_points": gt2s.size,
        "theta_eval": theta_eval,
        "max_Fc_over_N2": best[2],
        "argmax_gt1": best[0],
        "argmax_gt2": best[1],
    }
    return ["gt1", "gt2", "Fc_over_N2"], rows, summary


def _run_xz_scaling(cfg: SweepConfig):
    n_values = [int(v) for v in cfg.grid("n_values", range(2, 101))]
    ratios = [float(r) for r in cfg.grid("ratios", (1.0, 0.3, 0.1))]
    anc = ancilla_state(math.pi / 2)
    rows = []
    fits = {}
    for ratio in ratios:
        params = ModelParams(omega_p=1.0 / ratio, omega_a=1.0 / ratio, g=1.0, kind="xz")
        settings = optimal_settings(params)
        gt1 = settings.t1 * params.g
        for n in n_values:
            dim = EnsembleDim(n)
            probe = polarized_probe(dim, optimal_generator(params, dim))
            sched = conjugate_schedule(settings.t1, theta=0.0)
            rows.append((n, ratio, gt1, qfi_general(probe, anc, params, sched).value))
        fit_pts = [(n, f) for n, r, _, f in rows if r == ratio and n >= 10]
        if len({n for n, _ in fit_pts}) >= 3:
            fits[ratio] = fit_quadratic(fit_pts)
    summary = {
        "scenario": cfg.scenario,
        "n_values": ";".join(str(n) for n in n_values),
        "ratios": ";".join(_fmt(r) for r in ratios),
    }
    for ratio, fit in fits.items():
        key = _fmt(ratio)
        summary[f"fit_a_{key}"] = fit.a
        summary[f"fit_b_{key}"] = fit.b
        summary[f"fit_residual_rms_{key}"] = fit.residual_rms
    return ["N", "g_over_wp", "gt1", "FQ"], rows, summary


# Deviation patterns: coupling only, probe frequency only, and both sharing
# the magnitude; (dg, dwp) in units of the scanned magnitude.
_DEVIATION_PATTERNS = ((1.0, 0.0), (0.0, 1.0), (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)))


def _run_deviation_scan(cfg: SweepConfig):
    n_values = [int(v) for v in cfg.grid("n_values", (4, 20))]
    deltas = [float(v) for v in cfg.grid("deltas", (0.005, 0.01, 0.02))]
    anc = ancilla_state(math.pi / 2)
    rows = []
    worst = 0.0
    for n in n_values:
        dim = EnsembleDim(n)
        settings = optimal_settings(cfg.params)
        probe = _optimal_probe(cfg.params, dim)
        for magnitude in deltas:
            for weight_g, weight_wp in _DEVIATION_PATTERNS:
                dg_t1 = magnitude * weight_g
                dwp_t1 = magnitude * weight_wp
                dg = dg_t1 / settings.t1
                dwp = dwp_t1 / settings.t1
                formula = qfi_deviation(dim, DeviationSpec(dg, dwp), settings.t1).value
                perturbed = ModelParams(
                    omega_p=cfg.params.omega_p + dwp,
                    omega_a=cfg.params.omega_a,
                    g=cfg.params.g + dg,
                    kind=cfg.params.kind,
                )
                numeric = qfi_general(
                    probe, anc, perturbed, conjugate_schedule(settings.t1, 0.0)
                ).value
                worst = max(worst, abs(numeric - formula))
                rows.append((n, dg_t1, dwp_t1, formula, numeric))
    summary = {
        "scenario": cfg.scenario,
        "n_values": ";".join(str(n) for n in n_values),
        "deltas": ";".join(_fmt(d) for d in deltas),
        "patterns": len(_DEVIATION_PATTERNS),
        "max_abs_gap": worst,
    }
    return ["N", "dg_t1", "dwp_t1", "FQ_formula", "FQ_numeric"], rows, summary


def _run_dephasing_scan(cfg: SweepConfig):
    n_values = [int(v) for v in cfg.grid("n_values", (4, 20))]
    x_values = [float(v) for v in cfg.grid("x_values", np.round(np.arange(0.0, 1.01, 0.1), 10))]
    rows = []
    worst = 0.0
    for n in n_values:
        dim = EnsembleDim(n)
        gen = optimal_generator(cfg.params, dim)
        probe = polarized_probe(dim, gen)
        for x in x_values:
            value = qfi_dephased(probe, math.pi / 2, x, gen).value
            worst = max(worst, abs(value - (1.0 - x) ** 2 * n**2))
            rows.append((n, x, value))
    summary = {
        "scenario": cfg.scenario,
        "n_values": ";".join(str(n) for n in n_values),
        "x_values": ";".join(_fmt(x) for x in x_values),
        "max_abs_gap_to_law": worst,
    }
    return ["N", "x", "FQ"], rows, summary


SCENARIOS = {
    "trace_scan": _run_trace_scan,
    "qfi_theta0": _run_qfi_theta0,
    "qfi_t1": _run_qfi_t1,
    "qfi_heatmap": _run_qfi_heatmap,
    "qfi_scaling": _run_qfi_scaling,
    "cfi_map": _run_cfi_map,
    "xz_scaling": _run_xz_scaling,
    "deviation_scan": _run_deviation_scan,
    "dephasing_scan": _run_dephasing_scan,
}


def run_scenario(cfg: SweepConfig) -> dict:
    """Run one scenario, write its CSV and summary, and return the summary."""
    if cfg.scenario not in SCENARIOS:
        raise ContractViolation(f"unknown scenario {cfg.scenario!r}")
    header, rows, summary = SCENARIOS[cfg.scenario](cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.scenario}.csv"
    _write_csv(csv_path, header, rows)
    summary = {
        **summary,
        "rows": len(rows),
        "wp": cfg.params.omega_p,
        "wa": cfg.params.omega_a,
        "g": cfg.params.g,
        "interaction": cfg.params.kind,
        "mode": cfg.mode,
        "csv": csv_path.name,
    }
    _write_summary(out / f"{cfg.scenario}_summary.txt", summary)
    return summary


def run_validation(instances: int = 200, seed: int = 7) -> dict:
    """Randomized cross-validation of the two independent information paths.

    Draws random probes (rank <= 3), ancilla angles, interactions, and step
    times; checks that the two-term evaluation agrees with the SLD oracle at
    two phase points and that the readout information never exceeds the
    quantum bound.
    """
    rng = np.random.default_rng(seed)
    max_rel = 0.0
    crb_violations = 0
    bound_violations = 0
    for _ in range(instances):
        n = int(rng.integers(2, 21))
        dim = EnsembleDim(n)
        kind = "zz" if rng.random() < 0.5 else "xz"
        params = ModelParams(
            omega_p=float(rng.uniform(0.5, 5.0)),
            omega_a=float(rng.uniform(0.5, 5.0)),
            g=1.0,
            kind=kind,
        )
        rank = int(rng.integers(1, 4))
        raw = rng.normal(size=(dim.dim, rank)) + 1j * rng.normal(size=(dim.dim, rank))
        vectors, _ = np.linalg.qr(raw)
        weights = rng.random(rank) + 0.2
        weights /= weights.sum()
        probe = SpectralProbe(dim=dim, weights=weights, vectors=vectors)
        anc = ancilla_state(float(rng.uniform(0.0, math.pi)), float(rng.uniform(0.0, 2 * math.pi)))
        t1 = float(rng.uniform(1e-3, math.pi)) / params.g
        sched = conjugate_schedule(t1, theta=0.0)

        general = qfi_general(probe, anc, params, sched).value
        for theta in (0.2, 1.0):
            rho, drho = output_state_derivative(probe, anc, params, Schedule(t1, t1, theta, "exact_conjugate"))
            oracle = qfi_sld_oracle(rho, drho).value
            rel = abs(general - oracle) / max(abs(general), abs(oracle), 1e-9)
            max_rel = max(max_rel, rel)
        classical = cfi(probe, anc, params, sched, theta_eval=0.2).value
        if classical > oracle + 1e-8:
            crb_violations += 1
        if max(general, classical) > n * n + 1e-6:
            bound_violations += 1
    return {
        "instances": instances,
        "seed": seed,
        "max_rel_diff": max_rel,
        "crb_violations": crb_violations,
        "bound_violations": bound_violations,
        "passed": max_rel <= 1e-8 and crb_violations == 0 and bound_violations == 0,
    }
