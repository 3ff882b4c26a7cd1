from pydantic_settings import BaseSettings
from typing import Literal
from functools import lru_cache


class Settings(BaseSettings):
    """Solver and harness defaults loaded from environment variables."""

    # Application
    APP_NAME: str = "NUM Bench"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["text", "json"] = "text"

    # Dual oracle clamps: prices below the floor are lifted to it,
    # best responses are capped at RATE_CAP_FACTOR * max_j b_j
    PRICE_FLOOR: float = 1e-12
    RATE_CAP_FACTOR: float = 10.0

    # Ellipsoid method
    EM_RADIUS_FACTOR: float = 10.0  # R = factor * m
    EM_LAMBDA0: float = 1e-20
    EM_BUDGET_CONSTANT: float = 128.0  # 32 * 4
    EM_CHECKPOINTS: int = 1024

    # Mirror descent
    MD_CAP_FACTOR: int = 4
    MD_VIOLATED_POLICY: Literal["first", "most_violated"] = "first"

    # KKT reference oracle guard
    ORACLE_MAX_USERS: int = 6
    ORACLE_MAX_LINKS: int = 4

    # Instance generator / sweep
    GENERATOR_MAX_REDRAWS: int = 1000
    BENCH_PARALLEL: int = 1

    class Config:
        env_file = ".env"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
