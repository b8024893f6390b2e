# gems_select/utils/experiment.py
"""Experiment configuration: a JSON file overridden by command-line flags."""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

from gems_select.config.defaults import (
    DEFAULT_DELTA,
    DEFAULT_MAX_ELL,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_ZETA,
    R_D_FORMULA,
)
from gems_select.config.settings import WORKERS
from gems_select.core.exceptions import ConfigError, InstanceError
from gems_select.core.generators import build_instance
from gems_select.core.models import Instance
from gems_select.orchestration.environment import NoiseSpec
from gems_select.services.algorithms.models import AlgorithmParams

logger = logging.getLogger(__name__)

PARAM_KEYS = frozenset({"n", "B", "T", "N", "d", "max_ell"})
R_D_FORMULAS = ("pukelsheim", "allen")
# fields that do not change results and stay out of the provenance hash
_UNHASHED = ("out", "workers", "trace")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings shared by all subcommands"""

    instance: Dict[str, Any] = field(default_factory=dict)
    algorithm: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    zeta: float = DEFAULT_ZETA
    delta: float = DEFAULT_DELTA
    eps: Optional[float] = None
    noise: str = "gaussian_unit"
    workers: int = WORKERS
    out: str = "results"
    trace: bool = False
    dedup_candidates: bool = False
    r_d_formula: str = R_D_FORMULA

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.zeta <= 0:
            raise ConfigError(f"zeta must be positive, got {self.zeta}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.eps is not None and self.eps < 0:
            raise ConfigError(f"eps must be >= 0, got {self.eps}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.r_d_formula not in R_D_FORMULAS:
            raise ConfigError(f"r_d_formula must be one of {R_D_FORMULAS}")
        unknown = set(self.params) - PARAM_KEYS
        if unknown:
            raise ConfigError(f"Unknown algorithm parameter(s): {', '.join(sorted(unknown))}")
        try:
            NoiseSpec.parse(self.noise)
        except Exception as e:
            raise ConfigError(str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown config key(s): {', '.join(sorted(unknown))}")
        try:
            return ExperimentConfig(**data)
        except TypeError as e:
            raise ConfigError(f"Invalid config: {e}") from e

    def merged(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """Return a copy with every non-None override applied; ``params`` merge key by key."""
        updates = {k: v for k, v in overrides.items() if v is not None and k != "params"}
        params = dict(self.params)
        params.update({k: v for k, v in overrides.get("params", {}).items() if v is not None})
        return ExperimentConfig.from_dict({**self.to_dict(), **updates, "params": params})

    @property
    def config_hash(self) -> str:
        data = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec.parse(self.noise)

    def build_instance(self) -> Instance:
        if not self.instance:
            raise ConfigError("No instance given; use --instance, --instance-file or the config")
        try:
            return build_instance(self.instance)
        except InstanceError as e:
            raise ConfigError(f"Invalid instance: {e}") from e

    def algorithm_params(self) -> AlgorithmParams:
        params = dict(self.params)
        params.setdefault("max_ell", DEFAULT_MAX_ELL)
        return AlgorithmParams(
            delta=self.delta,
            zeta=self.zeta,
            eps=self.eps,
            dedup_candidates=self.dedup_candidates,
            r_d_formula=self.r_d_formula,
            **params,
        )


def load_config(path: Optional[Path]) -> ExperimentConfig:
    """Read a JSON config file; no path gives the defaults.

    Raises:
        ConfigError: Unreadable file, invalid JSON or unknown keys.
    """
    if path is None:
        return ExperimentConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must hold a JSON object")
    logger.debug(f"Loaded config from {path}")
    return ExperimentConfig.from_dict(data)


def parse_instance_params(pairs: Any) -> Dict[str, Any]:
    """``key=value`` pairs with JSON-decoded values (bare strings kept as-is)."""
    params: Dict[str, Any] = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"Instance parameter {pair!r} is not key=value")
        key, raw = pair.split("=", 1)
        try:
            params[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            params[key.strip()] = raw
    return params


def instance_spec(
    name: Optional[str], params: Dict[str, Any], path: Optional[Path]
) -> Optional[Dict[str, Any]]:
    """Instance spec from --instance/--instance-param or --instance-file; None if neither."""
    if name and path:
        raise ConfigError("Use either --instance or --instance-file, not both")
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read instance file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Instance file {path} must hold a JSON object")
        return data
    if name:
        return {"generator": name, "params": params}
    if params:
        raise ConfigError("--instance-param needs --instance")
    return None
