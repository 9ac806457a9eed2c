"""
Application configuration using pydantic-settings.
"""
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    # Application
    app_name: str = "subfins"
    app_version: str = "1.0.0"
    debug: bool = False

    # Numerical linear algebra
    rank_tol: float = 1e-10  # relative singular-value cutoff

    # Integration
    default_dt: float = 1e-3
    adaptive_rtol: float = 1e-9
    adaptive_atol: float = 1e-12
    conservation_tol: float = 1e-8
    invariance_dt: float = 1e-3

    # Shooting
    shooting_restarts: int = 32
    shooting_max_iters: int = 100
    shooting_endpoint_tol: float = 1e-9
    shooting_batch_size: int = 8
    shooting_min_converged: int = 4
    threads: int = 0  # 0 means machine parallelism

    # Sampling
    sampling_half_width: float = 1.0
    validation_samples: int = 1000

    # Run ledger
    database_url: str = "sqlite+aiosqlite:///./data/subfins.db"
    record_runs: bool = False

    model_config = SettingsConfigDict(
        env_prefix="SUBFINS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


# Global settings instance
settings = Settings()
