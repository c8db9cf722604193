"""Problem instances: configuration, ULA steering vectors, echo covariance models."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """One problem instance. Powers are stored in dBm, angles in degrees.

    Defaults reproduce the numerical setup of the reference system: a 6x6
    half-wavelength ULA, target at broadside, interferer at +30 degrees.
    """

    n_tx: int = 6
    n_rx: int = 6
    frame_len: int = 30
    spacing_tx: float = 0.5
    spacing_rx: float = 0.5
    target_angle_deg: float = 0.0
    interferer_angle_deg: float = 30.0
    beta: float = 1.0
    gamma: float = 100.0
    p0_dbm: float = 40.0
    sigma_n_dbm: float = 20.0
    sigma_z_dbm: float = 30.0
    rate_threshold_bps: float = 6.0
    channel_seed: int = 0

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "frame_len"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.spacing_tx <= 0 or self.spacing_rx <= 0:
            raise ConfigError("antenna spacings must be positive")
        for name in ("target_angle_deg", "interferer_angle_deg"):
            if not -90.0 <= getattr(self, name) <= 90.0:
                raise ConfigError(f"{name} must lie in [-90, 90] degrees")
        if self.beta < 0 or self.gamma < 0:
            raise ConfigError("echo amplitudes beta, gamma must be non-negative")
        if self.rate_threshold_bps < 0:
            raise ConfigError("rate_threshold_bps must be non-negative")
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not np.isfinite(v):
                raise ConfigError(f"{f.name} must be finite")

    @property
    def p0(self) -> float:
        return dbm_to_watts(self.p0_dbm)

    @property
    def sigma_n_sq(self) -> float:
        return dbm_to_watts(self.sigma_n_dbm)

    @property
    def sigma_z_sq(self) -> float:
        return dbm_to_watts(self.sigma_z_dbm)

    @property
    def omega(self) -> float:
        return rate_threshold_omega(self.rate_threshold_bps, self.sigma_n_sq)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_FIELDS = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}
_INT_FIELDS = {"n_tx", "n_rx", "frame_len", "channel_seed"}


def config_from_dict(d: dict) -> ScenarioConfig:
    unknown = set(d) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    kw = {}
    for k, v in d.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{k} must be numeric, got {v!r}")
        if k in _INT_FIELDS:
            if int(v) != v:
                raise ConfigError(f"{k} must be an integer, got {v!r}")
            v = int(v)
        else:
            v = float(v)
        kw[k] = v
    return ScenarioConfig(**kw)


def load_scenario(path) -> ScenarioConfig:
    """Read a flat YAML mapping of ScenarioConfig fields (missing keys take defaults)."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("scenario file must be a key/value mapping")
    return config_from_dict(data)


def dump_scenario(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def steering_vector(angle_deg: float, n: int, spacing_wl: float) -> np.ndarray:
    """ULA response, entry k = exp(-i 2 pi k d sin(theta)), broadside at 0 degrees."""
    k = np.arange(n)
    phase = 2.0 * np.pi * spacing_wl * np.sin(np.deg2rad(angle_deg))
    return np.exp(-1j * phase * k)


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * np.log10(p_w) + 30.0


def rate_threshold_omega(rate_bps: float, sigma_n_sq: float) -> float:
    """Received-power floor equivalent to log2(1 + |h^H w|^2 / sigma_n^2) >= rate."""
    return (2.0 ** rate_bps - 1.0) * sigma_n_sq


@dataclass(frozen=True)
class CovModel:
    """Rank-one echo covariance strength * vec_p vec_p^H, vec_p = vec(a b^H)."""

    vec_p: np.ndarray
    strength: float
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        """The N_T x N_R response matrix a b^H."""
        return np.outer(self.a, self.b.conj())

    def covariance(self) -> np.ndarray:
        return self.strength * np.outer(self.vec_p, self.vec_p.conj())


def make_cov_model(angle_deg: float, strength_amp: float, cfg: ScenarioConfig) -> CovModel:
    a = steering_vector(angle_deg, cfg.n_tx, cfg.spacing_tx)
    b = steering_vector(angle_deg, cfg.n_rx, cfg.spacing_rx)
    vec_p = np.outer(a, b.conj()).reshape(-1, order="F")
    return CovModel(vec_p=vec_p, strength=float(strength_amp) ** 2, a=a, b=b)


def target_model(cfg: ScenarioConfig) -> CovModel:
    return make_cov_model(cfg.target_angle_deg, cfg.beta, cfg)


def interferer_model(cfg: ScenarioConfig) -> CovModel:
    return make_cov_model(cfg.interferer_angle_deg, cfg.gamma, cfg)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_rayleigh_channel(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw h ~ CN(0, I_{N_T}); uses cfg.channel_seed when no generator is passed."""
    if rng is None:
        rng = make_rng(cfg.channel_seed)
    re = rng.standard_normal(cfg.n_tx)
    im = rng.standard_normal(cfg.n_tx)
    return (re + 1j * im) / np.sqrt(2.0)


@dataclass(frozen=True)
class Beamformer:
    w: np.ndarray
    power: float
    achieved_rate: float = float("nan")

    @classmethod
    def from_vector(cls, w, h=None, sigma_n_sq: float | None = None) -> "Beamformer":
        """Wrap w; with a channel, rotate so h^H w is real non-negative and record the rate."""
        w = np.asarray(w, dtype=complex).copy()
        rate = float("nan")
        if h is not None:
            g = np.vdot(h, w)
            if abs(g) > 0:
                w *= np.conj(g) / abs(g)
            if sigma_n_sq is not None:
                rate = float(np.log2(1.0 + abs(np.vdot(h, w)) ** 2 / sigma_n_sq))
        return cls(w=w, power=float(np.vdot(w, w).real), achieved_rate=rate)
