"""Library configuration using pydantic-settings."""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Library settings loaded from environment variables.

    Settings only bound the amount of work; they never change a result.
    """

    REGISTRY_PATH: str = "./delannoy_registry.json"
    SCALAR_FIELD: str = "QQ"
    REGISTRY_DEPTH: int = 4
    MAX_PRODUCT_ARMS: int = 8
    MAX_RELATION_ARMS: int = 5
    RELATION_MAX_TRIPLES: int = 1_000_000
    RANDOM_SEED: int = 20240607
    MIN_POLY_TRIALS: int = 12
    SNAKE_MAX_ORBITS: int = 2_400_000
    AMALGAM_ORDER_VERSION: int = 1
    THREADS: int = 1

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8"}


settings = Settings()
