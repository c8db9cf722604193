"""Closed-form optimum of max |a^H w|^2 s.t. ||w||^2 <= P0, |h^H w|^2 >= Omega."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import Beamformer, ScenarioConfig, steering_vector

CORR_ONE_TOL = 1e-9
ONE_MINUS_CORR2_FLOOR = 1e-15


class InfeasibleError(ValueError):
    """The rate demand cannot be met with the power budget."""

    def __init__(self, message: str, t_load: float):
        super().__init__(message)
        self.t_load = t_load


@dataclass(frozen=True)
class ClosedFormDiagnostics:
    case_taken: str  # mrt_radar | mrt_comm | blend | infeasible
    t_load: float
    corr: float
    z1: complex = 0j
    z2: float = 0.0
    u2: float = 0.0


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    t: float


def feasibility(h, cfg: ScenarioConfig) -> Feasibility:
    """Rate load t = Omega / (P0 ||h||^2); the problem is feasible iff t <= 1."""
    omega = cfg.omega
    if omega == 0:
        return Feasibility(True, 0.0)
    hn2 = float(np.vdot(h, h).real)
    if hn2 == 0:
        return Feasibility(False, float("inf"))
    t = omega / (cfg.p0 * hn2)
    return Feasibility(t <= 1.0, t)


def solve_no_interference(h, cfg: ScenarioConfig) -> tuple[Beamformer, ClosedFormDiagnostics]:
    h = np.asarray(h, dtype=complex)
    feas = feasibility(h, cfg)
    if not feas.feasible:
        raise InfeasibleError(f"rate demand infeasible (t = {feas.t:.4g} > 1)", feas.t)
    p0, omega = cfg.p0, cfg.omega
    a = steering_vector(cfg.target_angle_deg, cfg.n_tx, cfg.spacing_tx)
    a_hat = a / np.linalg.norm(a)
    h_norm = np.linalg.norm(h)
    t = feas.t

    ah = np.vdot(a, h)  # a^H h
    if omega == 0 or abs(ah) ** 2 >= omega * np.vdot(a, a).real / p0:
        w = np.sqrt(p0) * a_hat
        corr = abs(ah) / (np.linalg.norm(a) * h_norm) if h_norm > 0 else 0.0
        diag = ClosedFormDiagnostics("mrt_radar", t, float(min(corr, 1.0)))
        return Beamformer.from_vector(w, h, cfg.sigma_n_sq), diag

    h_hat = h / h_norm
    corr = float(min(abs(ah) / (np.linalg.norm(a) * h_norm), 1.0))
    if abs(corr - 1.0) < CORR_ONE_TOL:
        w = np.sqrt(p0) * h_hat
        diag = ClosedFormDiagnostics("mrt_comm", t, corr)
        return Beamformer.from_vector(w, h, cfg.sigma_n_sq), diag

    one_minus = max(1.0 - corr**2, ONE_MINUS_CORR2_FLOOR)
    u2 = np.sqrt(max(1.0 - t, 0.0) / one_minus)
    # a^T h^* / |a^H h| is the unit phase of h^H a; any phase works when a is orthogonal to h
    phase = np.conj(ah) / abs(ah) if abs(ah) > 0 else 1.0
    z1 = np.sqrt(p0) * (np.sqrt(t) - u2 * corr) * phase
    z2 = np.sqrt(p0) * u2
    w = z1 * h_hat + z2 * a_hat
    # Exact full power; the construction is unit-norm only up to rounding.
    w *= np.sqrt(p0) / np.linalg.norm(w)
    diag = ClosedFormDiagnostics("blend", t, corr, complex(z1), float(z2), float(u2))
    return Beamformer.from_vector(w, h, cfg.sigma_n_sq), diag
