from __future__ import annotations

import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SECTIONS = ("instance", "quadrature", "tolerances", "mode", "output")


@dataclass
class InstanceConfig:
    """Parameters of a generated test instance."""
    n: int = 24
    segments: List[Tuple[float, float]] = field(default_factory=lambda: [
        (-6.0, -5.0), (-2.5, -1.5), (1.0, 2.0), (4.5, 5.5),
    ])
    cluster_sizes: List[int] = field(default_factory=lambda: [6, 6, 6, 6])
    b_ratio: float = 0.8
    seed: int = 0
    perturbation_style: str = 'dense_random'


@dataclass
class QuadratureConfig:
    """Contour construction and quadrature parameters."""
    order: int = 32
    max_order: int = 512
    stadium_points: int = 16
    contour_style: str = 'rectangle'
    panel_ratio: float = 4.0


@dataclass
class ToleranceConfig:
    """Acceptance thresholds used by the projections and the certification pipeline."""
    projection: float = 1e-9
    oracle: float = 1e-8
    identity: float = 1e-8
    block_spectrum: float = 1e-7
    report_slack: float = 1e-8
    resolvent_samples: int = 1000
    vector_samples: int = 100


@dataclass
class ModeConfig:
    """Execution mode switches."""
    force: bool = False
    force_max_order: int = 64
    parallel: int = 1
    exhaustive_limit: int = 20
    sign_samples: int = 10000


@dataclass
class OutputConfig:
    """Configuration for report and matrix output."""
    out_dir: str = '.'
    report_filename: str = 'report.json'
    eigenvalue_filename: str = 'eigenvalues.csv'
    plot_filename: str = 'plane.svg'
    write_plot: bool = True
    env_var_out_dir: str = 'RIESZCERT_OUT_DIR'


@dataclass
class CertConfig:
    """Main configuration for rieszcert."""
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    mode: ModeConfig = field(default_factory=ModeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_env(cls) -> CertConfig:
        """Load configuration from environment variables."""
        config = cls()

        if out_dir := os.getenv(config.output.env_var_out_dir):
            config.output.out_dir = out_dir

        if parallel := os.getenv('RIESZCERT_PARALLEL'):
            try:
                config.mode.parallel = int(parallel)
            except ValueError:
                pass

        if order := os.getenv('RIESZCERT_QUAD_ORDER'):
            try:
                config.quadrature.order = int(order)
            except ValueError:
                pass

        if tol := os.getenv('RIESZCERT_TOL'):
            try:
                config.tolerances.projection = float(tol)
            except ValueError:
                pass

        return config

    @classmethod
    def from_toml(cls, path: Path | str, base: CertConfig | None = None) -> CertConfig:
        """Load a TOML file with ``[instance]``, ``[quadrature]``, ``[tolerances]``, ``[mode]``."""
        try:
            with open(path, 'rb') as handle:
                data = tomllib.load(handle)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

        overrides: Dict[str, Any] = {}
        for section, values in data.items():
            if not isinstance(values, dict):
                raise ConfigError(f"top-level key {section!r} must be a table")
            for key, value in values.items():
                overrides[f"{section}.{key}"] = value
        config = base if base is not None else cls.from_env()
        return config.with_overrides(overrides)

    def with_overrides(self, overrides: Mapping[str, Any]) -> CertConfig:
        """Return a copy with dotted ``section.key`` values replaced."""
        config = dataclasses.replace(
            self, **{name: dataclasses.replace(getattr(self, name)) for name in SECTIONS}
        )
        for dotted, value in overrides.items():
            section_name, _, key = dotted.partition('.')
            if section_name not in SECTIONS or not key:
                raise ConfigError(f"unknown config key {dotted!r}")
            section = getattr(config, section_name)
            if key not in {f.name for f in dataclasses.fields(section)}:
                raise ConfigError(f"unknown config key {dotted!r}")
            setattr(section, key, _coerce(getattr(section, key), value, dotted))
        return config

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        """Plain nested mapping, suitable for report echoes."""
        return {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}


def _coerce(current: Any, value: Any, key: str) -> Any:
    try:
        if isinstance(current, bool):
            if isinstance(value, str):
                return value.strip().lower() in ('1', 'true', 'yes', 'on')
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
        if key == 'instance.segments':
            if isinstance(value, str):
                value = json.loads(value)
            return [(float(a), float(b)) for a, b in value]
        if key == 'instance.cluster_sizes':
            if isinstance(value, str):
                value = [v for v in value.replace('[', '').replace(']', '').split(',') if v.strip()]
            return [int(v) for v in value]
        if isinstance(current, str):
            return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def get_config() -> CertConfig:
    """Get the global configuration instance."""
    return CertConfig.from_env()
