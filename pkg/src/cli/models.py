"""
CLI configuration file model.
"""
import json
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, Field, PrivateAttr, ValidationError, model_validator

from ..dynamics.models import FlowOptions
from ..errors import ConfigError, ConfigSyntaxError
from ..solve.models import DirectOptions, ShootingOptions
from ..systems import System, SystemSpec, build_system, make_system


class Command(str, Enum):
    """Subcommands of the ``subfins`` entry point."""
    VALIDATE = "validate"
    BRACKETS = "brackets"
    FLOW = "flow"
    SHOOT = "shoot"
    DISTANCE = "distance"
    VARIATION = "variation"
    CLASSIFY = "classify"
    VAKONOMIC = "vakonomic"
    LAPLACIAN = "laplacian"
    INVARIANCE = "invariance"
    SYSTEMS = "systems"
    HISTORY = "history"


class OutputPaths(BaseModel):
    """Where commands write their artifacts; stdout when unset."""

    trajectory: Optional[Path] = Field(None, description="Trajectory CSV")
    certificate: Optional[Path] = Field(None, description="Annihilator certificate CSV")
    plot: Optional[Path] = Field(None, description="gnuplot script for the trajectory")


class Config(BaseModel):
    """
    Run configuration: which system plus solver options and output paths.

    The system is either a catalog name (with ``dim``, ``metric`` and
    ``alpha`` selecting the variant) or an inline description. Every
    expression is parsed while validating, so a config that loads can run.
    """

    system: Union[str, SystemSpec] = Field("heisenberg", description="Catalog name or inline system")
    dim: int = Field(3, ge=1, description="Dimension of the euclidean catalog system")
    metric: str = Field("quadratic", description="Metric variant of a catalog system")
    alpha: float = Field(3.0, ge=1.0, description="Curvature weight for curvature_weighted")
    flow: FlowOptions = Field(default_factory=FlowOptions)
    shooting: ShootingOptions = Field(default_factory=ShootingOptions)
    direct: DirectOptions = Field(default_factory=DirectOptions)
    output: OutputPaths = Field(default_factory=OutputPaths)

    _system: Optional[System] = PrivateAttr(None)

    @model_validator(mode="after")
    def _build(self) -> "Config":
        # Parse errors surface as ExpressionSyntaxError / UnknownVariable, not as ValueError
        if isinstance(self.system, SystemSpec):
            self._system = build_system(self.system)
        else:
            self._system = make_system(self.system, dim=self.dim, metric=self.metric, alpha=self.alpha)
        return self

    @property
    def system_name(self) -> str:
        return self.system if isinstance(self.system, str) else self.system.name

    def build(self) -> System:
        return self._system


def load_config(path: Union[str, Path], **overrides) -> Config:
    """
    Read and validate a JSON configuration file.

    Args:
        path: JSON file
        overrides: top-level keys taking precedence over the file (command-line flags)

    Raises:
        ConfigSyntaxError: for malformed JSON
        ConfigError: for schema violations or unreadable files
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigSyntaxError(f"Malformed JSON in {path}: {e.msg}", e.pos, "JSON value") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must hold a JSON object")
    data.update({key: value for key, value in overrides.items() if value is not None})
    return config_from_dict(data)


def config_from_dict(data: dict) -> Config:
    try:
        return Config.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config: {e}") from e
