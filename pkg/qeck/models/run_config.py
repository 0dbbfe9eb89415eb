"""
Pydantic schema for one CLI invocation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator

Mode = Literal["sequential", "concurrent"]
ReportFormat = Literal["text", "structured"]


class RunConfig(BaseModel):
    impl: Path
    spec: Path | None = None                           # None: take Specification from the impl file
    mode: Mode = "concurrent"
    budget: int = Field(default=2_000_000, gt=0)       # scheduler node budget
    format: ReportFormat = "text"
    refine_mixture: bool = False
    verbosity: int = Field(default=0, ge=0)            # 0 settings level | 1 INFO | 2 DEBUG
    force_outcomes: tuple[int, ...] | None = None      # simulate only
    input: str | None = None                           # simulate only, e.g. "+,1"

    @field_validator("impl", "spec")
    @classmethod
    def _must_exist(cls, value: Path | None) -> Path | None:
        if value is not None and not value.is_file():
            raise ValueError(f"no such protocol file: {value}")
        return value

    @field_validator("force_outcomes")
    @classmethod
    def _bits_only(cls, value: tuple[int, ...] | None) -> tuple[int, ...] | None:
        if value is not None and any(v not in (0, 1) for v in value):
            raise ValueError("forced outcomes must be 0 or 1")
        return value
