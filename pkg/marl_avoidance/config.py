# marl_avoidance/config.py
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class MarlSettings(BaseSettings):
    """Process-level settings read from MARL_AVOIDANCE_* environment variables."""

    log_level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    verbose: bool = False
    runs_root: str = "runs"
    model_config = SettingsConfigDict(env_prefix="MARL_AVOIDANCE_")


def get_settings() -> MarlSettings:
    return MarlSettings()
