import math

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Global settings configuration using environment variables"""

    ORACLE_CAP: int = Field(
        default=8,
        description="Largest number of TLSs accepted by the uncoupled-basis (2^N) constructors"
    )

    OUTPUT_DIR: str = Field(
        default="output",
        description="Directory where scenario tables and metadata are written"
    )

    RTOL: float = Field(
        default=1e-8,
        description="Relative tolerance of the adaptive Runge-Kutta integrator"
    )

    ATOL: float = Field(
        default=1e-10,
        description="Absolute tolerance of the adaptive Runge-Kutta integrator"
    )

    MAX_STEP: float = Field(
        default=math.inf,
        description="Largest step the integrator may take"
    )

    PRUNE_TOL: float = Field(
        default=1e-15,
        description="Assembled matrix entries with smaller magnitude are dropped"
    )

    HERMITIAN_TOL: float = Field(
        default=1e-10,
        description="Relative tolerance for Hermiticity and for the [H, J^2] = 0 check"
    )

    TRUNCATION_WARN: float = Field(
        default=1e-6,
        description="Population of the top Fock level above which a cutoff warning is logged"
    )

    DEGENERACY_TOL: float = Field(
        default=1e-9,
        description="Relative energy gap (in units of the largest |E|) below which dressed levels are degenerate"
    )

    POSITIVITY_TOL: float = Field(
        default=1e-6,
        description="Negative eigenvalue depth of a sampled state that triggers a re-run with tighter tolerances"
    )

    JOBS: int = Field(
        default=1,
        description="Default number of concurrent sweep points"
    )

    model_config = SettingsConfigDict(
        env_prefix="DICKESIM_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
