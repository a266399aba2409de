"""Sweep configuration: a pydantic model loaded from an INI file.

Example::

    [experiment]
    name = grid_sweep
    seed = 7

    [target]
    spec = wendland

    [sweep]
    degrees = 2, 4, 8, 16
    noise = 0, 0.01
    trials = 5

See ``configs/README.md`` for every key.
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..data import NoiseModel, TargetFunction, parse_target
from ..errors import ConfigError, ContractViolation

# model field -> (section, key) in the INI file
FIELD_KEYS: Dict[str, Tuple[str, str]] = {
    "name": ("experiment", "name"),
    "seed": ("experiment", "seed"),
    "output": ("experiment", "output"),
    "threads": ("experiment", "threads"),
    "target": ("target", "spec"),
    "degrees": ("sweep", "degrees"),
    "noise_levels": ("sweep", "noise"),
    "noise_kind": ("sweep", "noise_kind"),
    "trials": ("sweep", "trials"),
    "servers": ("sweep", "servers"),
    "sampling": ("sweep", "sampling"),
    "samples_per_shard": ("sweep", "samples_per_shard"),
    "solve_degree": ("sweep", "solve_degree"),
    "resolution": ("sweep", "resolution"),
    "strict": ("sweep", "strict"),
}
LIST_FIELDS = ("degrees", "noise_levels")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = "sweep"
    target: str = "wendland"
    degrees: List[int]
    noise_levels: List[float] = Field(default_factory=lambda: [0.0])
    noise_kind: Literal["gaussian", "bounded_uniform"] = "gaussian"
    servers: int = Field(default=1, ge=1)
    sampling: Literal["grid", "random"] = "grid"
    samples_per_shard: Optional[int] = Field(default=None, ge=1)
    solve_degree: Literal["n", "3n-1"] = "n"
    resolution: Optional[int] = Field(default=None, ge=1)
    trials: int = Field(default=5, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    output: Optional[Path] = None
    threads: Optional[int] = Field(default=None, ge=1)
    strict: bool = False

    @field_validator("target")
    @classmethod
    def _target_parses(cls, v: str) -> str:
        try:
            parse_target(v)
        except ContractViolation as exc:
            raise ValueError(str(exc)) from exc
        return v

    @field_validator("degrees")
    @classmethod
    def _degrees_increasing(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("degree list is empty")
        if v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("degrees must be >= 1 and strictly increasing")
        return v

    @field_validator("noise_levels")
    @classmethod
    def _noise_nonnegative(cls, v: List[float]) -> List[float]:
        if not v or any(s < 0 for s in v):
            raise ValueError("noise levels must be a non-empty list of values >= 0")
        return v

    @model_validator(mode="after")
    def _cross_checks(self) -> "ExperimentConfig":
        if self.resolution is not None and self.resolution < 4 * max(self.degrees):
            raise ValueError(f"resolution must be >= 4 * max degree = {4 * max(self.degrees)}")
        if self.needs_seed and self.seed is None:
            raise ValueError("seed is required for noisy or randomly sampled sweeps")
        return self

    @property
    def needs_seed(self) -> bool:
        return self.sampling == "random" or any(s > 0 for s in self.noise_levels)

    @property
    def grid_resolution(self) -> int:
        return self.resolution or 8 * max(self.degrees)

    def target_function(self) -> TargetFunction:
        return parse_target(self.target)

    def noise_model(self, level: float, seed: Optional[int]) -> NoiseModel:
        if level == 0:
            return NoiseModel.none()
        return NoiseModel(kind=self.noise_kind, level=level, seed=seed)

    def trials_for(self, level: float) -> int:
        return self.trials if (level > 0 or self.sampling == "random") else 1

    def echo(self) -> List[str]:
        """``key = value`` lines describing the resolved configuration."""
        data = self.model_dump()
        data["resolution"] = self.grid_resolution
        return [f"{k} = {data[k]}" for k in sorted(data)]


def _locate(text: str, section: str, key: str) -> Tuple[int, int]:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        header = re.match(r"\s*\[([^\]]+)\]", line)
        if header:
            current = header.group(1).strip()
            continue
        match = re.match(rf"\s*{re.escape(key)}\s*[=:]\s*", line)
        if current == section and match:
            return lineno, match.end() + 1
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() == f"[{section}]":
            return lineno, 1
    return 1, 1


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("missing section header", exc.lineno, 1) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else 0
        raise ConfigError(f"cannot parse {exc.errors[0][1] if exc.errors else source}", lineno, 1) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", 0) or 0, 1) from exc

    known = {(s, k): f for f, (s, k) in FIELD_KEYS.items()}
    raw: Dict[str, object] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            field = known.get((section, key))
            if field is None:
                line, col = _locate(text, section, key)
                raise ConfigError(f"unknown key '{key}' in [{section}]", line, col)
            if field in LIST_FIELDS:
                raw[field] = [v.strip() for v in value.split(",") if v.strip()]
            elif value.strip():
                raw[field] = value.strip()
    try:
        return ExperimentConfig(**raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        field = str(err["loc"][0]) if err["loc"] else ""
        if not field:
            # model-level checks name their field in the message
            field = next((f for f in FIELD_KEYS if re.search(rf"\b{f}\b", err["msg"])), "")
        line, col = _locate(text, *FIELD_KEYS[field]) if field in FIELD_KEYS else (1, 1)
        raise ConfigError(f"{field or 'config'}: {err['msg']}", line, col) from exc


def load_config(path: Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, source=str(path))
