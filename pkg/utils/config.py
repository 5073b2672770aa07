"""
Run configuration - CLI parameters, defaults and environment overrides
"""

import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from utils.errors import ConfigError

COMMANDS = ("capacity", "mi", "power-control", "rates", "simulate")
FORMATS = ("csv", "json")

DEFAULT_RATES_LAMBDAS = (0.0, 0.5, 0.999, 1.0)
DEFAULT_POLICY_LAMBDAS = (0.0, 0.25, 0.5, 0.75, 0.999, 1.0)
DEFAULT_SEED = 2024
MIN_GRID_NODES = 8


def worker_count() -> int:
    """ONEBIT_ISAC_THREADS caps the sweep worker pool"""
    default = min(4, os.cpu_count() or 1)
    raw = os.getenv("ONEBIT_ISAC_THREADS")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"ONEBIT_ISAC_THREADS must be an integer, got {raw!r}") from e
    if value < 1:
        raise ConfigError(f"ONEBIT_ISAC_THREADS must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class RunConfig:
    command: str
    snr_min: float = -10.0
    snr_max: float = 40.0
    snr_step: float = 2.0
    power: float = 1.0
    sigma_c_sq: float = 1.0
    sigma_s_sq: float = 1.0
    lambdas: Tuple[float, ...] = DEFAULT_RATES_LAMBDAS
    n_gamma: int = 64
    n_theta: int = 64
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    fmt: str = "csv"
    constellation: Optional[str] = None
    include_zero_power: bool = False
    gamma_max: float = 10.0
    gamma_step: float = 0.05
    samples: int = 1_000_000
    alpha: float = 1e-3
    z_max: float = 4.0
    verbose: bool = False
    threads: int = field(default_factory=worker_count)

    @classmethod
    def from_args(cls, args: Any) -> "RunConfig":
        command = args.command
        lambdas = getattr(args, "lambdas", None)
        if not lambdas:
            lambdas = DEFAULT_POLICY_LAMBDAS if command == "power-control" else DEFAULT_RATES_LAMBDAS

        values: Dict[str, Any] = {"command": command, "lambdas": tuple(float(v) for v in lambdas)}
        for name in (
            "snr_min", "snr_max", "snr_step", "power", "sigma_c_sq", "sigma_s_sq",
            "n_gamma", "n_theta", "seed", "out", "fmt", "constellation", "include_zero_power",
            "gamma_max", "gamma_step", "samples", "alpha", "z_max", "verbose",
        ):
            value = getattr(args, name, None)
            if value is not None:
                values[name] = value

        config = cls(**values)
        config.validate()
        return config

    def validate(self) -> None:
        errors: List[str] = []

        if self.command not in COMMANDS:
            errors.append(f"unknown command {self.command!r}")
        if self.fmt not in FORMATS:
            errors.append(f"format must be one of {FORMATS}, got {self.fmt!r}")
        for name in ("snr_min", "snr_max", "snr_step", "power", "sigma_c_sq", "sigma_s_sq", "gamma_max", "gamma_step"):
            if not math.isfinite(getattr(self, name)):
                errors.append(f"{name} must be finite")
        if self.snr_min > self.snr_max:
            errors.append(f"snr_min ({self.snr_min}) exceeds snr_max ({self.snr_max})")
        if self.snr_step <= 0:
            errors.append("snr_step must be positive")
        if self.sigma_c_sq <= 0 or self.sigma_s_sq <= 0:
            errors.append("noise powers must be positive")
        if self.power < 0:
            errors.append("power must be non-negative")
        if self.command == "power-control" and self.power <= 0:
            errors.append("power-control needs a positive --power")
        if any(not (0.0 <= lam <= 1.0) for lam in self.lambdas):
            errors.append(f"lambda values must lie in [0, 1], got {list(self.lambdas)}")
        if self.n_gamma < MIN_GRID_NODES or self.n_theta < MIN_GRID_NODES:
            errors.append(f"grid sizes must be at least {MIN_GRID_NODES}")
        if self.gamma_max <= 0 or self.gamma_step <= 0:
            errors.append("gamma_max and gamma_step must be positive")
        if self.samples < 1:
            errors.append("samples must be at least 1")
        if not (0.0 < self.alpha < 1.0):
            errors.append("alpha must lie in (0, 1)")
        if self.z_max <= 0:
            errors.append("z_max must be positive")
        if self.command == "mi" and not self.constellation:
            errors.append("mi needs --constellation")
        if self.threads < 1:
            errors.append("threads must be at least 1")

        if errors:
            raise ConfigError("Invalid configuration: " + "; ".join(errors))

    def snr_values(self) -> List[float]:
        """The dB sweep, inclusive of snr_max when the step lands on it"""
        count = int(math.floor((self.snr_max - self.snr_min) / self.snr_step + 1e-9)) + 1
        return [round(self.snr_min + i * self.snr_step, 10) for i in range(count)]

    def gamma_values(self) -> List[float]:
        """Uniform gamma_c reporting grid on [0, gamma_max]"""
        count = int(math.floor(self.gamma_max / self.gamma_step + 1e-9)) + 1
        return [round(i * self.gamma_step, 10) for i in range(count)]

    def power_for_snr(self, snr_db: float) -> float:
        """SNR is referenced to the communication noise power"""
        return self.sigma_c_sq * 10.0 ** (snr_db / 10.0)

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["lambdas"] = list(self.lambdas)
        values.pop("threads")
        values.pop("verbose")
        return values
