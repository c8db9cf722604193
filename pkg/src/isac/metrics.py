"""Performance evaluators: radar mutual information, rate, SDR objective, beampattern.

All mutual-information values are normalized so that zero echo energy gives
zero information; logs are natural unless a ``bits`` field is requested.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .scenario import (
    Beamformer,
    ScenarioConfig,
    interferer_model,
    steering_vector,
    target_model,
)

ORACLE_MAX_DIM = 512


class ScaleError(ValueError):
    pass


@dataclass(frozen=True)
class MiValue:
    nats: float

    @property
    def bits(self) -> float:
        return self.nats / np.log(2.0)

    def __float__(self):
        return self.nats


def _as_vec(w) -> np.ndarray:
    if isinstance(w, Beamformer):
        return w.w
    return np.asarray(w, dtype=complex)


def _mi(x: float) -> MiValue:
    # Rounding can push an exactly-zero information value a hair negative.
    return MiValue(max(float(x), 0.0))


def _radar_snr(cfg: ScenarioConfig, target_gain: float) -> float:
    # L beta^2 N_R |a^H w|^2 / sigma_z^2, with zeta = ||b||^2 = N_R
    return cfg.frame_len * cfg.beta**2 * (cfg.n_rx * target_gain) / cfg.sigma_z_sq


def mi_no_interference(w, cfg: ScenarioConfig) -> MiValue:
    """log(1 + L beta^2 N_R |a^H(theta) w|^2 / sigma_z^2)."""
    a = steering_vector(cfg.target_angle_deg, cfg.n_tx, cfg.spacing_tx)
    gain = abs(np.vdot(a, _as_vec(w))) ** 2
    return _mi(np.log1p(_radar_snr(cfg, gain)))


def mi_with_interference(w, cfg: ScenarioConfig) -> MiValue:
    """Radar MI with a point interferer, from the 2x2 determinant reduction.

    Uses log(A) - log(B) - log(sigma_z^2) rewritten as a single log1p so that
    the Gram-determinant cross term never suffers cancellation.
    """
    w = _as_vec(w)
    tgt, itf = target_model(cfg), interferer_model(cfg)
    ga = np.vdot(tgt.a, w)
    gq = np.vdot(itf.a, w)
    nr = cfg.n_rx
    rx_corr = abs(np.vdot(itf.b, tgt.b)) ** 2
    gram = abs(ga) ** 2 * abs(gq) ** 2 * max(nr * nr - rx_corr, 0.0)
    L, s2 = cfg.frame_len, cfg.sigma_z_sq
    b_term = L * cfg.gamma**2 * nr * abs(gq) ** 2 + s2
    if cfg.gamma == 0:
        return _mi(np.log1p(_radar_snr(cfg, abs(ga) ** 2)))
    num = L * cfg.beta**2 * (nr * abs(ga) ** 2 + L * cfg.gamma**2 * gram / s2)
    return _mi(np.log1p(num / b_term))


def mi_full_oracle(w, s, cfg: ScenarioConfig) -> MiValue:
    """Exact MI over the full L*N_R echo dimension with explicit Kronecker lifts.

    ``s`` is rescaled so s^H s == L. Intended as a test oracle only.
    """
    w = _as_vec(w)
    s = np.asarray(s, dtype=complex).reshape(-1)
    L = s.size
    if L * cfg.n_rx > ORACLE_MAX_DIM:
        raise ScaleError(f"oracle dimension {L * cfg.n_rx} exceeds {ORACLE_MAX_DIM}")
    s = s * np.sqrt(L / np.vdot(s, s).real)
    eye_r = np.eye(cfg.n_rx)
    s_tilde = numerics.kron(eye_r, s[:, None])
    w_tilde = numerics.kron(eye_r, w.conj()[None, :])
    x = s_tilde @ w_tilde
    r_r = target_model(cfg).covariance()
    r_c = interferer_model(cfg).covariance()
    noise = cfg.sigma_z_sq * np.eye(x.shape[0])
    full = numerics.logdet_hpd(x @ (r_r + r_c) @ x.conj().T + noise)
    interf = numerics.logdet_hpd(x @ r_c @ x.conj().T + noise)
    return _mi(full - interf)


def comm_rate(w, h, sigma_n_sq: float) -> float:
    """Achievable rate log2(1 + |h^H w|^2 / sigma_n^2) in bits/s/Hz."""
    return float(np.log2(1.0 + abs(np.vdot(h, _as_vec(w))) ** 2 / sigma_n_sq))


def sdr_objective(W, cfg: ScenarioConfig, psd_tol: float = 1e-8) -> float:
    """Fractional objective of the lifted problem for a PSD matrix W."""
    W = numerics.hermitian_part(W)
    lam_min = numerics.herm_eig(W).eigenvalues[-1]
    if lam_min < -psd_tol * max(1.0, np.abs(W).max()):
        raise numerics.DomainError("W is not positive semidefinite", min_eig=lam_min)
    P = target_model(cfg).matrix
    Q = interferer_model(cfg).matrix
    L, b2, g2, s2 = cfg.frame_len, cfg.beta**2, cfg.gamma**2, cfg.sigma_z_sq
    t_qq = np.trace(Q @ Q.conj().T @ W).real
    t_pp = np.trace(P @ P.conj().T @ W).real
    t_qp = np.trace(Q @ P.conj().T @ W)
    t_pq = np.trace(P @ Q.conj().T @ W)
    denom = L * g2 * t_qq + s2
    numer = denom * (L * b2 * t_pp + s2) - (L**2 * b2 * g2 * t_qp * t_pq).real
    return float(numer / denom)


def beampattern(w, angle_grid_deg, cfg: ScenarioConfig, floor_db: float = -80.0) -> np.ndarray:
    """Peak-normalized transmit beampattern 10 log10 |a^H(theta) w|^2, clipped at floor_db."""
    grid = np.atleast_1d(np.asarray(angle_grid_deg, dtype=float))
    if grid.size == 0:
        raise ValueError("angle grid is empty")
    w = _as_vec(w)
    gains = np.array(
        [abs(np.vdot(steering_vector(th, cfg.n_tx, cfg.spacing_tx), w)) ** 2 for th in grid]
    )
    out = np.full(grid.shape, floor_db)
    peak = gains.max()
    if peak <= 0:
        return out
    pos = gains > 0
    out[pos] = np.maximum(10.0 * np.log10(gains[pos] / peak), floor_db)
    return out


def beam_gain(w, angle_deg: float, cfg: ScenarioConfig) -> float:
    """Un-normalized transmit gain |a^H(theta) w|^2."""
    a = steering_vector(angle_deg, cfg.n_tx, cfg.spacing_tx)
    return float(abs(np.vdot(a, _as_vec(w))) ** 2)
