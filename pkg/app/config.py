from pydantic_settings import BaseSettings
from typing import Optional


class Settings(BaseSettings):
    # Application
    APP_NAME: str = "IRS-MIMO Outage Analyzer"
    LOG_LEVEL: str = "INFO"

    # Canonical-equation solver
    SOLVER_EPS: float = 1e-12
    SOLVER_MAX_OUTER: int = 1000
    SOLVER_MAX_INNER: int = 1000

    # Monte-Carlo oracle
    MC_DEFAULT_SAMPLES: int = 100_000
    MC_DEFAULT_STREAMS: int = 4
    MC_BATCH_SIZE: int = 2048

    # Command line defaults
    DEFAULT_SEED: int = 20220101
    DEFAULT_THREADS: Optional[int] = None
    DEFAULT_UNITS: str = "bits"

    # Regime guards
    HIGH_SNR_WARN_RHO: float = 100.0
    SIZING_MAX_L: int = 1_000_000

    class Config:
        env_file = ".env"
        case_sensitive = True
        env_prefix = "IRS_"


settings = Settings()
