"""CertificationReport and its JSON, CSV and SVG renderings."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping

from matplotlib.figure import Figure
from matplotlib.patches import FancyBboxPatch, Polygon

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EIGENVALUE_COLUMNS = ('re', 'im', 'assigned_cluster', 'dist_to_segment')
NON_FINITE = {'NaN': math.nan, 'Infinity': math.inf, '-Infinity': -math.inf}


@dataclass
class StageError:
    stage: str
    error_type: str
    message: str
    hard: bool
    numerical: bool


@dataclass
class CertificationReport:
    """Everything one certification run established, stage by stage."""
    instance: Dict[str, Any] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    hypothesis: Dict[str, Any] = field(default_factory=dict)
    enclosure: Dict[str, Any] = field(default_factory=dict)
    projections: Dict[str, Any] = field(default_factory=dict)
    partial_sums: List[Dict[str, Any]] = field(default_factory=list)
    basis: Dict[str, Any] = field(default_factory=dict)
    bounds: List[Dict[str, Any]] = field(default_factory=list)
    eigenvalues: List[Dict[str, Any]] = field(default_factory=list)
    geometry: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    errors: List[StageError] = field(default_factory=list)
    timing: Dict[str, float] = field(default_factory=dict)
    force: bool = False
    passed: bool = False
    exit_code: int = 1
    schema: int = SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> CertificationReport:
        known = {f.name for f in dataclasses.fields(cls)}
        values = {k: v for k, v in data.items() if k in known}
        values['errors'] = [StageError(**e) for e in data.get('errors', [])]
        return cls(**values)

    def to_json(self) -> str:
        """Strict JSON; NaN and infinities are written as the strings in NON_FINITE."""
        return json.dumps(json_safe(self.to_dict()), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> CertificationReport:
        return cls.from_dict(_decode(json.loads(text)))

    def without_timing(self) -> Dict[str, Any]:
        data = self.to_dict()
        data.pop('timing')
        return data

    @property
    def failed_checks(self) -> List[str]:
        return [name for name, ok in self.checks.items() if not ok]

    def bound_names(self) -> List[str]:
        return [b['name'] for b in self.bounds]


def json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return 'NaN' if math.isnan(value) else ('Infinity' if value > 0 else '-Infinity')
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def _decode(value: Any) -> Any:
    if isinstance(value, str):
        return NON_FINITE.get(value, value)
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def write_json(report: CertificationReport, path: Path | str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(report.to_json() + "\n", encoding='utf-8')
    return target


def read_json(path: Path | str) -> CertificationReport:
    return CertificationReport.from_json(Path(path).read_text(encoding='utf-8'))


def write_eigenvalue_csv(report: CertificationReport, path: Path | str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=EIGENVALUE_COLUMNS)
        writer.writeheader()
        for row in report.eigenvalues:
            writer.writerow({key: row[key] for key in EIGENVALUE_COLUMNS})
    return target


def write_plot(report: CertificationReport, path: Path | str) -> Path:
    """Segments, their b-neighborhoods, the projection contours and σ(A) in the plane."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    geometry = report.geometry
    b = float(geometry.get('b', 0.0))

    fig = Figure(figsize=(8, 4))
    ax = fig.add_subplot()
    for alpha, beta in geometry.get('segments', []):
        ax.plot([alpha, beta], [0, 0], color='black', linewidth=2.5, solid_capstyle='butt')
        if b > 0:
            ax.add_patch(FancyBboxPatch((alpha, -b), beta - alpha, 2 * b,
                                        boxstyle=f"round,pad=0,rounding_size={b}",
                                        facecolor='tab:blue', alpha=0.15, edgecolor='tab:blue'))
    for contour in geometry.get('contours', []):
        xy = [(re, im) for re, im in contour]
        ax.add_patch(Polygon(xy, closed=True, fill=False, edgecolor='tab:orange', linewidth=0.8))
    if report.eigenvalues:
        colors = [row['assigned_cluster'] for row in report.eigenvalues]
        ax.scatter([row['re'] for row in report.eigenvalues],
                   [row['im'] for row in report.eigenvalues],
                   c=colors, cmap='viridis', s=12, zorder=3)
    ax.set_xlabel('Re λ')
    ax.set_ylabel('Im λ')
    ax.set_aspect('equal', adjustable='datalim')
    status = 'pass' if report.passed else 'FAIL'
    d = geometry.get('d', math.nan)
    ax.set_title(f"σ(A), b = {b:.4g}, d = {d:.4g}: {status}")
    fig.savefig(target, format='svg', bbox_inches='tight')
    return target


def render(report: CertificationReport, out_dir: Path | str, report_name: str = 'report.json',
           csv_name: str = 'eigenvalues.csv', plot_name: str | None = 'plane.svg'
           ) -> Dict[str, Path]:
    """Write the report with its CSV and (optionally) the SVG plot into ``out_dir``."""
    target = Path(out_dir)
    paths = {
        'report': write_json(report, target / report_name),
        'eigenvalues': write_eigenvalue_csv(report, target / csv_name),
    }
    if plot_name:
        paths['plot'] = write_plot(report, target / plot_name)
    for path in paths.values():
        logger.info("written → %s", path)
    return paths
