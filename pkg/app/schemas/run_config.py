from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from typing import Dict, List, Literal, Optional, Tuple
from pathlib import Path
import json

from app.config import settings
from app.exceptions import ConfigError
from app.schemas.optimizer import OptimizerConfig
from app.schemas.scenario import LinkBudget


class CorrelationBlock(BaseModel):
    """Exponential correlation per matrix, or explicit "re im" side files"""
    model_config = ConfigDict(extra="forbid")

    mu_R1: float = Field(0.0, ge=0, lt=1)
    mu_T1: float = Field(0.0, ge=0, lt=1)
    mu_R2: float = Field(0.0, ge=0, lt=1)
    mu_T2: float = Field(0.0, ge=0, lt=1)
    R1_file: Optional[str] = None
    T1_file: Optional[str] = None
    R2_file: Optional[str] = None
    T2_file: Optional[str] = None

    def files(self) -> Dict[str, str]:
        names = ("R1", "T1", "R2", "T2")
        return {name: getattr(self, f"{name}_file") for name in names if getattr(self, f"{name}_file")}


class ScenarioBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    M: int = Field(..., ge=1)
    N: int = Field(..., ge=1)
    L: int = Field(..., ge=1)
    correlation: CorrelationBlock = CorrelationBlock()
    theta_init: Literal["zeros", "ramp", "file", "explicit"] = "zeros"
    theta_file: Optional[str] = None
    theta: Optional[List[float]] = None
    budget: LinkBudget = LinkBudget()
    # Direct SNR in dB; overrides the link budget when set
    snr_db: Optional[float] = None
    rate_bits: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def check_theta_source(self):
        if self.theta_init == "file" and not self.theta_file:
            raise ValueError("theta_init 'file' needs theta_file")
        if self.theta_init == "explicit":
            if self.theta is None or len(self.theta) != self.L:
                raise ValueError(f"theta_init 'explicit' needs a theta list of length L = {self.L}")
        return self


class SweepBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    snr_db: List[float] = []
    power_dbm: List[float] = []
    L: List[int] = []
    eta: List[float] = []
    rate_bits: List[float] = []
    p_out: List[float] = []
    m: List[float] = []
    mu_transceiver: List[float] = []

    @field_validator("L")
    @classmethod
    def check_sizes(cls, value):
        if any(L < 1 for L in value):
            raise ValueError("IRS sizes must be positive")
        return value

    @field_validator("eta", "p_out")
    @classmethod
    def check_fractions(cls, value):
        if any(not 0 < x < 1 for x in value):
            raise ValueError("values must lie in (0, 1)")
        return value

    @field_validator("mu_transceiver")
    @classmethod
    def check_mu(cls, value):
        if any(not 0 <= mu < 1 for mu in value):
            raise ValueError("correlation coefficients must lie in [0, 1)")
        return value

    @model_validator(mode="after")
    def check_snr_axis(self):
        if self.snr_db and self.power_dbm:
            raise ValueError("give either snr_db or power_dbm, not both")
        return self


class McBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(settings.DEFAULT_SEED, ge=0, lt=2**64)
    samples: int = Field(settings.MC_DEFAULT_SAMPLES, ge=1)
    streams: int = Field(settings.MC_DEFAULT_STREAMS, ge=1)
    # Pass/fail tolerances for mc-validate
    mean_rel_tol: float = Field(0.02, gt=0)
    var_rel_tol: float = Field(0.10, gt=0)
    ks_max: float = Field(0.02, gt=0)


class OutputBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "out"
    units: Literal["nats", "bits"] = settings.DEFAULT_UNITS
    gnuplot: bool = False


# Blocks each subcommand cannot run without
REQUIRED_BLOCKS: Dict[str, Tuple[str, ...]] = {
    "emi": ("scenario",),
    "outage": ("scenario",),
    "optimize": ("scenario", "optimizer"),
    "dmt": ("scenario",),
    "size": ("scenario",),
    "mc-validate": ("scenario", "mc"),
}


class RunConfig(BaseModel):
    """One JSON run description"""
    model_config = ConfigDict(extra="forbid")

    scenario: Optional[ScenarioBlock] = None
    sweep: SweepBlock = SweepBlock()
    mc: Optional[McBlock] = None
    optimizer: Optional[OptimizerConfig] = None
    output: OutputBlock = OutputBlock()
    # Directory the config was read from; side files resolve against it
    base_dir: Path = Field(default=Path("."), exclude=True)

    def require(self, command: str) -> None:
        if command not in REQUIRED_BLOCKS:
            raise ConfigError(f"unknown command {command!r}")
        missing = [block for block in REQUIRED_BLOCKS[command] if getattr(self, block) is None]
        if missing:
            raise ConfigError(f"command '{command}' needs config block(s): {', '.join(missing)}")

    def resolve(self, relative: str) -> Path:
        path = Path(relative)
        return path if path.is_absolute() else self.base_dir / path


def format_validation_error(error: ValidationError) -> str:
    """One 'field.path: message' line per failing field"""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "\n".join(lines)


def parse_run_config(document: dict, base_dir: Path = Path(".")) -> RunConfig:
    try:
        return RunConfig.model_validate({**document, "base_dir": base_dir})
    except ValidationError as e:
        raise ConfigError(f"invalid configuration:\n{format_validation_error(e)}") from e


def load_run_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_run_config(document, path.parent)
