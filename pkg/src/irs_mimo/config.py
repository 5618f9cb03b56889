"""Scenario configuration: static system parameters and config-file parsing.

Configs are flat TOML or JSON files whose keys match the dataclass field
names. Power-ratio fields may instead be given in dB with a ``_db`` suffix
(``beta0_db``) or in dBm with a ``_dbm`` suffix (``sigma2_dbm``,
``e_k_dbm``); conversion to linear watts happens once at parse time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

try:
    import tomllib  # type: ignore[import-not-found]
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


COVARIANCE_MODELS = ("model1", "model2", "identity")


@dataclass
class ScenarioConfig:
    K: int = 4
    M: int = 20
    N: int = 100
    T: int = 1000
    # per-user scaled energy E_k (watts * M * N); data power is p_k = E_k / (M N)
    e_k: list[float] = field(default_factory=lambda: [1e-3, 1e-3, 1e-3, 1e-3])
    p_t: float | None = None  # pilot power (watts); default E_1/(MN)
    sigma2: float = 1e-14  # noise power (watts); -170 dBm/Hz over 1 MHz
    # path-loss geometry
    d_bi: float = 100.0
    d_iu: list[float] | None = None  # explicit per-user IRS distances (m)
    user_disk_center_d: float = 10.0  # IRS->disk-center distance when d_iu drawn
    user_disk_radius: float = 5.0
    d0: float = 1.0
    beta0: float = 0.01  # -20 dB at reference distance
    alpha1: float = 2.1  # user->IRS exponent
    alpha2: float = 2.2  # IRS->BS exponent
    beta_bu: list[float] | None = None  # direct-link gains; default all zero (blocked)
    # covariance model
    covariance_model: str = "model1"
    c_bs: complex = 0.4 * np.exp(1j * np.pi / 6)  # exponential coefficient, BS side
    c_irs: complex = 0.6  # exponential coefficient, IRS side (model1)
    spacing_over_wavelength: float = 0.25  # IRS element spacing / lambda (model2)
    irs_grid: tuple[int, int] | None = None  # (rows, cols); default near-square
    seed: int = 0

    def __post_init__(self) -> None:
        if self.K < 1 or self.M < 1 or self.N < 1:
            raise ConfigError("K, M, N must all be >= 1")
        if self.T <= self.K:
            raise ConfigError(f"need T > K, got T={self.T}, K={self.K}")
        if self.sigma2 <= 0:
            raise ConfigError("sigma2 must be positive")
        if len(self.e_k) != self.K:
            raise ConfigError(f"e_k must have K={self.K} entries, got {len(self.e_k)}")
        if self.covariance_model not in COVARIANCE_MODELS:
            raise ConfigError(
                f"unknown covariance_model {self.covariance_model!r}; "
                f"expected one of {COVARIANCE_MODELS}"
            )
        for name in ("c_bs", "c_irs"):
            if abs(getattr(self, name)) >= 1.0:
                raise ConfigError(f"|{name}| must be < 1")
        if self.d_iu is not None and len(self.d_iu) != self.K:
            raise ConfigError("d_iu must have one distance per user")
        if self.beta_bu is not None and len(self.beta_bu) != self.K:
            raise ConfigError("beta_bu must have one gain per user")

    @property
    def q(self) -> float:
        return self.N / self.M

    def pilot_power(self) -> float:
        if self.p_t is not None:
            return self.p_t
        return self.e_k[0] / (self.M * self.N)

    def data_powers(self) -> np.ndarray:
        """Per-user transmit powers p_k = E_k / (M N)."""
        return np.asarray(self.e_k) / (self.M * self.N)

    def user_distances(self, rng: np.random.Generator | None = None) -> np.ndarray:
        """IRS-to-user distances; drawn uniformly in a disk unless given explicitly.

        Placement is deterministic per config seed so a whole experiment sees
        one fixed drop.
        """
        if self.d_iu is not None:
            return np.asarray(self.d_iu, dtype=float)
        if rng is None:
            rng = np.random.default_rng(self.seed)
        r = self.user_disk_radius * np.sqrt(rng.uniform(size=self.K))
        theta = rng.uniform(0.0, 2.0 * np.pi, size=self.K)
        x = self.user_disk_center_d + r * np.cos(theta)
        y = r * np.sin(theta)
        return np.hypot(x, y)

    def echo(self) -> dict:
        """Full resolved parameter set, JSON-serializable, for report files."""
        d = asdict(self)
        d["c_bs"] = [self.c_bs.real, float(np.imag(self.c_bs))]
        d["c_irs"] = [complex(self.c_irs).real, float(np.imag(self.c_irs))]
        d["p_t"] = self.pilot_power()
        d["d_iu"] = self.user_distances().tolist()
        if d["beta_bu"] is None:
            d["beta_bu"] = [0.0] * self.K
        return d


def _coerce_complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    return complex(v)


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a flat mapping, resolving dB/dBm keys."""
    data = dict(raw)
    if "beta0_db" in data:
        data["beta0"] = db_to_linear(data.pop("beta0_db"))
    if "sigma2_dbm" in data:
        data["sigma2"] = dbm_to_watts(data.pop("sigma2_dbm"))
    if "e_k_dbm" in data:
        data["e_k"] = [dbm_to_watts(x) for x in data.pop("e_k_dbm")]
    if "p_t_dbm" in data:
        data["p_t"] = dbm_to_watts(data.pop("p_t_dbm"))
    for key in ("c_bs", "c_irs"):
        if key in data:
            data[key] = _coerce_complex(data[key])
    if "irs_grid" in data and data["irs_grid"] is not None:
        data["irs_grid"] = tuple(data["irs_grid"])
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ScenarioConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _load_raw(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".toml":
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    else:
        with open(path) as f:
            raw = json.load(f)
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table/object")
    return raw


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse a TOML (by suffix) or JSON scenario file."""
    raw = _load_raw(path)
    raw.pop("experiment", None)
    return config_from_dict(raw)


def load_config_with_experiment(path: str | Path) -> tuple[ScenarioConfig, dict]:
    """Parse a scenario file that may carry an extra 'experiment' table.

    The experiment table holds runner knobs (ladders, block counts, targets)
    that are not part of the physical scenario; it is returned verbatim.
    """
    raw = _load_raw(path)
    experiment = raw.pop("experiment", {})
    if not isinstance(experiment, dict):
        raise ConfigError("'experiment' must be a table/object")
    return config_from_dict(raw), experiment


def path_loss(d: float, d0: float, beta0: float, alpha: float) -> float:
    """Distance-power law beta0 * (d / d0)^(-alpha), all quantities linear."""
    if d <= 0 or d0 <= 0:
        raise ValueError("distances must be positive")
    return beta0 * math.pow(d / d0, -alpha)
