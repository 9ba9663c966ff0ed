"""Matrix Market exchange for T, B and projection sets."""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
import numpy.typing as npt
import scipy.io
import scipy.sparse

from ..errors import DimensionMismatch, InvalidSpec, ParseError
from ..spectral_model import (
    ComplexMatrix,
    PerturbedPair,
    ProjectionMethod,
    ProjectionSet,
    SegmentFamily,
    build_segment_family,
)
from .instance import InstanceSpec

logger = logging.getLogger(__name__)

FORMATS = ('array', 'coordinate')
FIELDS = ('real', 'complex', 'integer', 'pattern')
SYMMETRIES = ('general', 'symmetric', 'hermitian', 'skew-symmetric')
ENTRY_VALUES = {'real': 1, 'integer': 1, 'complex': 2, 'pattern': 0}
_SCIPY_LINE = re.compile(r'line (\d+)', re.IGNORECASE)
INSTANCE_FILE = 'instance.json'
PROJECTION_FILE = 'projections.json'


def save_matrix(matrix: npt.ArrayLike, path: Path | str, comment: str = '') -> Path:
    """Dense complex array form, 17 significant digits so doubles round-trip exactly."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    data = np.asarray(matrix, dtype=np.complex128)
    scipy.io.mmwrite(str(target), data, comment=comment, field='complex', precision=17)
    return target


def _check_header(lines: List[str], path: Path) -> Tuple[str, str, int]:
    """Validate banner and size line; return (format, field, size line number)."""
    if not lines:
        raise ParseError("empty file", str(path), 1, 1)
    tokens = lines[0].split()
    if not tokens or tokens[0].lower() != '%%matrixmarket':
        raise ParseError("missing %%MatrixMarket banner", str(path), 1, 1)
    expected = [('object', ('matrix',)), ('format', FORMATS), ('field', FIELDS),
                ('symmetry', SYMMETRIES)]
    for position, (what, allowed) in enumerate(expected, start=1):
        if position >= len(tokens):
            raise ParseError(f"banner is missing the {what}", str(path), 1, len(lines[0]) + 1)
        if tokens[position].lower() not in allowed:
            column = lines[0].find(tokens[position]) + 1
            raise ParseError(f"unsupported {what} {tokens[position]!r}", str(path), 1, column)
    fmt, fld = tokens[2].lower(), tokens[3].lower()

    for number, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith('%'):
            continue
        sizes = stripped.split()
        for token in sizes:
            try:
                int(token)
            except ValueError:
                raise ParseError(f"size line has non-integer {token!r}", str(path), number,
                                 line.find(token) + 1) from None
        return fmt, fld, number
    raise ParseError("missing size line", str(path), len(lines), 1)


def _check_body(lines: List[str], path: Path, fmt: str, fld: str, size_line: int) -> None:
    """Every entry line carries the right number of numeric tokens."""
    per_entry = ENTRY_VALUES[fld] + (2 if fmt == 'coordinate' else 0)
    for number, line in enumerate(lines[size_line:], start=size_line + 1):
        stripped = line.strip()
        if not stripped or stripped.startswith('%'):
            continue
        tokens = list(re.finditer(r'\S+', line))
        if len(tokens) != per_entry:
            raise ParseError(f"expected {per_entry} value(s), found {len(tokens)}", str(path),
                             number, 1)
        for position, token in enumerate(tokens):
            parse = int if fmt == 'coordinate' and position < 2 else float
            try:
                parse(token.group())
            except ValueError:
                raise ParseError(f"invalid number {token.group()!r}", str(path), number,
                                 token.start() + 1) from None


def header_comments(path: Path | str) -> List[str]:
    """Comment lines after the banner, without their leading '%'."""
    out = []
    with open(path, encoding='utf-8') as handle:
        next(handle, None)
        for line in handle:
            if not line.startswith('%'):
                break
            out.append(line[1:].strip())
    return out


def load_matrix(path: Path | str, shape: Tuple[int, int] | None = None) -> ComplexMatrix:
    """Square complex matrix from a Matrix Market file (array or coordinate form)."""
    source = Path(path)
    try:
        lines = source.read_text(encoding='utf-8').splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read: {exc}", str(source)) from exc
    fmt, fld, size_line = _check_header(lines, source)
    _check_body(lines, source, fmt, fld, size_line)
    try:
        raw: Any = scipy.io.mmread(str(source))
    except (ValueError, IndexError, TypeError) as exc:
        found = _SCIPY_LINE.search(str(exc))
        line = int(found.group(1)) if found else len(lines)
        raise ParseError(f"malformed body: {exc}", str(source), line, 1) from exc
    if scipy.sparse.issparse(raw):
        raw = raw.toarray()
    matrix = np.asarray(raw, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"{source}: expected a square matrix, got shape {matrix.shape}")
    if shape is not None and matrix.shape != tuple(shape):
        raise DimensionMismatch(f"{source}: expected shape {tuple(shape)}, got {matrix.shape}")
    return matrix


def save_instance(pair: PerturbedPair, family: SegmentFamily, out_dir: Path | str,
                  spec: InstanceSpec | None = None) -> Dict[str, Path]:
    """T.mtx, B.mtx and instance.json (segments, labels, spec echo)."""
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    echo = json.dumps(spec.to_dict(), sort_keys=True) if spec is not None else ''
    comment = f"rieszcert seed={spec.seed} spec={echo}" if spec is not None else 'rieszcert'
    paths = {
        'T': save_matrix(pair.t.matrix, target / 'T.mtx', comment),
        'B': save_matrix(pair.b_matrix, target / 'B.mtx', comment),
    }
    meta = {
        'segments': [[seg.alpha, seg.beta] for _, seg in family],
        'first_index': family.first_index,
        'gap': family.gap,
        'b': pair.b_norm,
        'spec': spec.to_dict() if spec is not None else None,
    }
    paths['instance'] = target / INSTANCE_FILE
    paths['instance'].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                 encoding='utf-8')
    return paths


def load_instance(in_dir: Path | str) -> Tuple[PerturbedPair, SegmentFamily, InstanceSpec | None]:
    source = Path(in_dir)
    try:
        meta = json.loads((source / INSTANCE_FILE).read_text(encoding='utf-8'))
    except OSError as exc:
        raise ParseError(f"cannot read: {exc}", str(source / INSTANCE_FILE)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, str(source / INSTANCE_FILE), exc.lineno, exc.colno) from exc
    try:
        family = build_segment_family(meta['segments'], meta.get('first_index'))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"malformed instance metadata: {exc}") from exc
    t = load_matrix(source / 'T.mtx')
    b = load_matrix(source / 'B.mtx', t.shape)
    spec = InstanceSpec.from_dict(meta['spec']) if meta.get('spec') else None
    return PerturbedPair.from_matrices(t, b), family, spec


def save_projections(projections: ProjectionSet, out_dir: Path | str) -> Dict[int, Path]:
    """Q_<j>.mtx per index plus projections.json with residuals."""
    target = Path(out_dir)
    paths = {j: save_matrix(projections[j], target / f"Q_{j}.mtx",
                            f"rieszcert projection j={j} method={projections.method.value}")
             for j in projections}
    summary = {
        'indices': list(projections.index_range),
        'method': projections.method.value,
        'tolerance': projections.tolerance,
        'idempotency_residuals': {str(j): r for j, r in projections.idempotency_residuals.items()},
        'minimality': projections.minimality_residual(),
        'completeness': projections.completeness_residual(),
        'ranks': {str(j): r for j, r in projections.ranks().items()},
        'flags': list(projections.flags),
    }
    (target / PROJECTION_FILE).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                          encoding='utf-8')
    return paths


def load_projections(in_dir: Path | str) -> ProjectionSet:
    source = Path(in_dir)
    try:
        summary = json.loads((source / PROJECTION_FILE).read_text(encoding='utf-8'))
    except OSError as exc:
        raise ParseError(f"cannot read: {exc}", str(source / PROJECTION_FILE)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, str(source / PROJECTION_FILE), exc.lineno, exc.colno) from exc
    indices = [int(j) for j in summary['indices']]
    index_range = range(indices[0], indices[-1] + 1)
    matrices = {j: load_matrix(source / f"Q_{j}.mtx") for j in index_range}
    return ProjectionSet.from_matrices(index_range, matrices,
                                       ProjectionMethod(summary['method']),
                                       float(summary['tolerance']), summary.get('flags', ()))
