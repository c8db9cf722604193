"""Experiment orchestration: beampattern, power sweep, timing and Monte-Carlo audits."""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .ipm import SdpConvergenceError
from .metrics import beam_gain, beampattern, comm_rate, mi_no_interference, mi_with_interference
from .scenario import ScenarioConfig, make_rng, sample_rayleigh_channel
from .solver_closed_form import InfeasibleError, solve_no_interference
from .solver_sdr import ExtractionError, SdrOptions, solve_with_interference

DEFAULT_ANGLE_GRID = np.arange(-90.0, 90.0 + 1e-9, 0.5)
DEFAULT_P0_GRID = np.arange(20.0, 40.0 + 1e-9, 2.0)
DEFAULT_TRIALS = 50
FEAS_TOL = 1e-6

SOLVER_ERRORS = (InfeasibleError, SdpConvergenceError, ExtractionError, np.linalg.LinAlgError)


def reason_code(exc: Exception) -> str:
    if isinstance(exc, InfeasibleError):
        return "infeasible"
    if isinstance(exc, SdpConvergenceError):
        return "sdp_not_converged"
    if isinstance(exc, ExtractionError):
        return "extraction_failed"
    return "numerical_error"


@dataclass
class ExperimentResult:
    kind: str
    columns: dict
    metadata: dict = field(default_factory=dict)
    # excluded from the CSV so identical inputs give identical files
    runtime: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths: {lengths}")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()), []))

    def column(self, name) -> np.ndarray:
        return np.asarray(self.columns[name])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}: {self.metadata[key]}\n")
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(names)
        for i in range(self.n_rows):
            writer.writerow([_fmt(self.columns[n][i]) for n in names])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> str:
        lines = [f"{self.kind}: {self.n_rows} rows"]
        for name, vals in self.columns.items():
            arr = np.asarray(vals)
            if arr.dtype.kind not in "fiu" or arr.size == 0:
                continue
            arr = arr[np.isfinite(arr.astype(float))]
            if arr.size == 0:
                lines.append(f"  {name:>18s}: all missing")
                continue
            q = np.quantile(arr, [0.0, 0.05, 0.5, 0.95, 1.0])
            lines.append(f"  {name:>18s}: min {q[0]:.6g}  q05 {q[1]:.6g}  median {q[2]:.6g}"
                         f"  q95 {q[3]:.6g}  max {q[4]:.6g}")
        for k, v in self.runtime.items():
            lines.append(f"  {k}: {v}")
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


def _metadata(cfg: ScenarioConfig, opts: SdrOptions | None, **extra) -> dict:
    md = {
        "artifact_version": __version__,
        "scenario": " ".join(f"{k}={v}" for k, v in cfg.to_dict().items()),
        "scenario_hash": cfg.digest(),
        "seed": cfg.channel_seed,
    }
    if opts is not None:
        md["solver_options"] = " ".join(f"{k}={v}" for k, v in dataclasses.asdict(opts).items())
    md.update(extra)
    return md


def run_beampattern(cfg: ScenarioConfig, grid_deg=None, opts: SdrOptions | None = None,
                    floor_db: float = -80.0) -> ExperimentResult:
    """Both designs on one channel draw, transmit beampatterns over the grid."""
    opts = opts or SdrOptions()
    grid = DEFAULT_ANGLE_GRID if grid_deg is None else np.sort(np.atleast_1d(np.asarray(grid_deg, float)))
    h = sample_rayleigh_channel(cfg)
    errors = {}
    cols = {"angle_deg": list(grid)}
    t0 = time.perf_counter()
    designs = {}
    try:
        designs["wo_inter"] = solve_no_interference(h, cfg)[0]
    except SOLVER_ERRORS as exc:
        errors["wo_inter"] = reason_code(exc)
    try:
        designs["w_inter"] = solve_with_interference(h, cfg, opts)[0]
    except SOLVER_ERRORS as exc:
        errors["w_inter"] = reason_code(exc)
    for name in ("wo_inter", "w_inter"):
        if name in designs:
            cols[f"gain_db_{name}"] = list(beampattern(designs[name], grid, cfg, floor_db))
        else:
            cols[f"gain_db_{name}"] = [float("nan")] * grid.size
    # Un-normalized gains (dB re 1 W) let the two designs be compared at one angle.
    for name in ("wo_inter", "w_inter"):
        if name in designs:
            g = np.array([beam_gain(designs[name], th, cfg) for th in grid])
            cols[f"abs_gain_db_{name}"] = list(10 * np.log10(np.maximum(g, 1e-300)))
        else:
            cols[f"abs_gain_db_{name}"] = [float("nan")] * grid.size
    md = _metadata(cfg, opts, floor_db=floor_db)
    for name, bf in designs.items():
        md[f"mi_wo_nats_{name}"] = repr(mi_no_interference(bf, cfg).nats)
        md[f"mi_w_nats_{name}"] = repr(mi_with_interference(bf, cfg).nats)
        md[f"rate_bps_{name}"] = repr(comm_rate(bf, h, cfg.sigma_n_sq))
    for name, code in errors.items():
        md[f"error_{name}"] = code
    return ExperimentResult("beampattern", cols, md,
                            runtime={"wall_clock_s": time.perf_counter() - t0, "errors": errors})


def _sweep_cell(cfg, h, opts):
    """MI of both designs for one channel; None entries mark missing cells."""
    try:
        w_wo = solve_no_interference(h, cfg)[0]
    except SOLVER_ERRORS as exc:
        return None, None, reason_code(exc)
    mi_wo = mi_no_interference(w_wo, cfg).nats
    try:
        w_w = solve_with_interference(h, cfg, opts)[0]
    except SOLVER_ERRORS as exc:
        return mi_wo, None, reason_code(exc)
    return mi_wo, mi_with_interference(w_w, cfg).nats, ""


def run_power_sweep(cfg: ScenarioConfig, p0_grid_dbm=None, antenna_list=(6, 12),
                    n_trials: int = DEFAULT_TRIALS, opts: SdrOptions | None = None) -> ExperimentResult:
    """Average MI of both designs versus maximum transmit power.

    Trial k uses channel seed cfg.channel_seed + k at every power level, so
    curves share channel draws. Averages run over trials where both designs
    produced a feasible beamformer; infeasible rate demands are excluded and
    counted.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    opts = opts or SdrOptions()
    grid = DEFAULT_P0_GRID if p0_grid_dbm is None else np.atleast_1d(np.asarray(p0_grid_dbm, float))
    t0 = time.perf_counter()
    rows = []
    for n_ant in sorted(set(int(n) for n in antenna_list)):
        base = cfg.replace(n_tx=n_ant, n_rx=n_ant)
        channels = [sample_rayleigh_channel(base, make_rng(cfg.channel_seed + k))
                    for k in range(n_trials)]
        for p0 in sorted(grid):
            c = base.replace(p0_dbm=float(p0))
            wo, w, reasons = [], [], {}
            for h in channels:
                mi_wo, mi_w, why = _sweep_cell(c, h, opts)
                if mi_wo is not None and mi_w is not None:
                    wo.append(mi_wo)
                    w.append(mi_w)
                else:
                    reasons[why] = reasons.get(why, 0) + 1
            rows.append({
                "n_antennas": n_ant,
                "p0_dbm": float(p0),
                "mi_wo_nats": float(np.mean(wo)) if wo else float("nan"),
                "mi_w_nats": float(np.mean(w)) if w else float("nan"),
                "n_valid": len(wo),
                "n_infeasible": reasons.get("infeasible", 0),
                "n_failed": sum(v for k, v in reasons.items() if k != "infeasible"),
            })
    cols = {k: [r[k] for r in rows] for k in rows[0]}
    md = _metadata(cfg, opts, n_trials=n_trials,
                   antenna_list=",".join(str(n) for n in sorted(set(antenna_list))))
    return ExperimentResult("power_sweep", cols, md,
                            runtime={"wall_clock_s": time.perf_counter() - t0})


def run_timing(cfg: ScenarioConfig, n_repeats: int = 30, opts: SdrOptions | None = None,
               n_warmup: int = 3) -> ExperimentResult:
    """Closed form versus the SDR pipeline on the same interference-free instance."""
    if n_repeats < 10:
        raise ValueError("n_repeats must be >= 10")
    opts = opts or SdrOptions()
    c0 = cfg.replace(gamma=0.0)
    h = sample_rayleigh_channel(c0)
    for _ in range(n_warmup):
        solve_no_interference(h, c0)
        solve_with_interference(h, c0, opts)
    cols = {"repeat": [], "t_closed_s": [], "t_sdr_s": [], "mi_closed_nats": [], "mi_sdr_nats": []}
    for k in range(n_repeats):
        t0 = time.perf_counter()
        w_cf = solve_no_interference(h, c0)[0]
        t1 = time.perf_counter()
        w_sdr = solve_with_interference(h, c0, opts)[0]
        t2 = time.perf_counter()
        cols["repeat"].append(k)
        cols["t_closed_s"].append(t1 - t0)
        cols["t_sdr_s"].append(t2 - t1)
        cols["mi_closed_nats"].append(mi_no_interference(w_cf, c0).nats)
        cols["mi_sdr_nats"].append(mi_no_interference(w_sdr, c0).nats)
    med_cf = float(np.median(cols["t_closed_s"]))
    med_sdr = float(np.median(cols["t_sdr_s"]))
    runtime = {"median_closed_s": med_cf, "median_sdr_s": med_sdr,
               "speedup": med_sdr / med_cf if med_cf > 0 else float("inf")}
    return ExperimentResult("timing", cols, _metadata(c0, opts, n_repeats=n_repeats),
                            runtime=runtime)


def run_monte_carlo(cfg: ScenarioConfig, n_trials: int = DEFAULT_TRIALS,
                    opts: SdrOptions | None = None) -> ExperimentResult:
    """Per-trial audit records for both designs; trial k uses seed cfg.channel_seed + k."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    opts = opts or SdrOptions()
    t_start = time.perf_counter()
    nan = float("nan")
    recs = []
    for k in range(n_trials):
        seed = cfg.channel_seed + k
        h = sample_rayleigh_channel(cfg, make_rng(seed))
        rec = {"trial": k, "seed": seed, "status": "ok", "reason": "",
               "mi_wo_nats": nan, "mi_w_nats": nan, "rate_wo_bps": nan, "rate_w_bps": nan,
               "power_wo_w": nan, "power_w_w": nan, "case": "", "eig_ratio": nan,
               "eig_ratio_center": nan, "iterations": -1, "t_star_nats": nan}
        try:
            w_wo, diag = solve_no_interference(h, cfg)
            rec.update(mi_wo_nats=mi_no_interference(w_wo, cfg).nats,
                       rate_wo_bps=comm_rate(w_wo, h, cfg.sigma_n_sq),
                       power_wo_w=w_wo.power, case=diag.case_taken)
            w_w, sol = solve_with_interference(h, cfg, opts)
            rec.update(mi_w_nats=mi_with_interference(w_w, cfg).nats,
                       rate_w_bps=comm_rate(w_w, h, cfg.sigma_n_sq),
                       power_w_w=w_w.power, eig_ratio=sol.eig_ratio,
                       eig_ratio_center=sol.eig_ratio_center, iterations=sol.iterations,
                       t_star_nats=float(np.log(sol.t_star / cfg.sigma_z_sq)))
        except SOLVER_ERRORS as exc:
            rec.update(status="missing", reason=reason_code(exc))
        # audit: never emit a constraint-violating row unflagged
        if rec["status"] == "ok":
            for rate in (rec["rate_wo_bps"], rec["rate_w_bps"]):
                if rate < cfg.rate_threshold_bps - FEAS_TOL:
                    rec.update(status="missing", reason="rate_violation")
            for pw in (rec["power_wo_w"], rec["power_w_w"]):
                if pw > cfg.p0 * (1 + 1e-8):
                    rec.update(status="missing", reason="power_violation")
        recs.append(rec)
    cols = {key: [r[key] for r in recs] for key in recs[0]}
    return ExperimentResult("monte_carlo", cols, _metadata(cfg, opts, n_trials=n_trials),
                            runtime={"wall_clock_s": time.perf_counter() - t_start})
