import os
from dotenv import load_dotenv

from hybridgs.core.errors import ConfigError

# Load environment variables from .env file
load_dotenv()


class Settings:
    """
    Centralized configuration management for the HybridGS codec.

    This class loads and validates the environment variables that change codec
    defaults. Every variable is optional; command-line options override them
    per invocation.
    """

    def __init__(self):
        # Application Environment
        self.ENV: str = os.getenv("HGS_ENV", "development")
        self.LOG_LEVEL: str = os.getenv("HGS_LOG_LEVEL", "INFO").upper()

        # Parallel substream coding
        self.WORKERS: int = self._parse_int("HGS_WORKERS", "1")

        # Codec defaults
        self.BIT_DEPTH: int = self._parse_int("HGS_BIT_DEPTH", "16")
        self.LOSSLESS_RATIO: float = self._parse_float("HGS_LOSSLESS_RATIO", "1.3")
        self.LATENT_EPOCHS: int = self._parse_int("HGS_LATENT_EPOCHS", "2000")
        self.SEED: int = self._parse_int("HGS_SEED", "0")

        self._validate_environment()

    @staticmethod
    def _parse_int(key: str, default: str) -> int:
        """
        Read an integer environment variable.

        Args:
            key: The environment variable name
            default: Value used when the variable is unset

        Returns:
            Parsed integer

        Raises:
            ConfigError: If the value is not an integer
        """
        value = os.getenv(key, default)
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"Invalid {key}: {value!r} is not an integer")

    @staticmethod
    def _parse_float(key: str, default: str) -> float:
        """
        Read a real-valued environment variable.

        Args:
            key: The environment variable name
            default: Value used when the variable is unset

        Returns:
            Parsed float

        Raises:
            ConfigError: If the value is not a number
        """
        value = os.getenv(key, default)
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"Invalid {key}: {value!r} is not a number")

    def _validate_environment(self) -> None:
        """
        Validate the configuration values.

        Raises:
            ConfigError: If any value is outside its allowed set or range
        """
        valid_environments = {"development", "production"}
        if self.ENV not in valid_environments:
            raise ConfigError(
                f"Invalid HGS_ENV: {self.ENV}. "
                f"Must be one of: {', '.join(sorted(valid_environments))}"
            )

        valid_levels = {"DEBUG", "INFO", "WARNING", "ERROR"}
        if self.LOG_LEVEL not in valid_levels:
            raise ConfigError(
                f"Invalid HGS_LOG_LEVEL: {self.LOG_LEVEL}. "
                f"Must be one of: {', '.join(sorted(valid_levels))}"
            )

        if self.WORKERS < 1:
            raise ConfigError("Invalid HGS_WORKERS: must be at least 1")
        if not 2 <= self.BIT_DEPTH <= 18:
            raise ConfigError("Invalid HGS_BIT_DEPTH: must be in [2, 18]")
        if self.LOSSLESS_RATIO <= 0:
            raise ConfigError("Invalid HGS_LOSSLESS_RATIO: must be positive")
        if self.LATENT_EPOCHS < 0:
            raise ConfigError("Invalid HGS_LATENT_EPOCHS: must be non-negative")

    def is_production(self) -> bool:
        """Check if the codec is running in production mode."""
        return self.ENV == "production"


# Singleton instance - import this in other modules
settings = Settings()
