from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    # ── App ──────────────────────────────────────────────────────────────────
    app_name: str = "qeck"
    app_version: str = "0.1.0"
    log_level: str = Field(default="WARNING", alias="QECK_LOG_LEVEL")

    # ── Scheduler ────────────────────────────────────────────────────────────
    node_budget: int = Field(default=2_000_000, gt=0, alias="QECK_NODE_BUDGET")
    default_mode: Literal["sequential", "concurrent"] = Field(
        default="concurrent", alias="QECK_DEFAULT_MODE"
    )
    keep_tree: bool = Field(default=False, alias="QECK_KEEP_TREE")

    # Tableau commutation/rank assertions after every fired step (slow)
    check_invariants: bool = Field(default=False, alias="QECK_CHECK_INVARIANTS")

    # ── Equivalence engine ───────────────────────────────────────────────────
    workers: int = Field(default=1, ge=1, alias="QECK_WORKERS")
    report_timings: bool = Field(default=True, alias="QECK_REPORT_TIMINGS")

    # ── Dense oracle ─────────────────────────────────────────────────────────
    oracle_qubit_cap: int = Field(default=10, ge=1, alias="QECK_ORACLE_QUBIT_CAP")
    oracle_tolerance: float = Field(default=1e-9, gt=0, alias="QECK_ORACLE_TOLERANCE")


@lru_cache
def get_settings() -> Settings:
    return Settings()
