"""Unperturbed operator, segment family, perturbation and the hypothesis b < d/2.

Everything here is immutable after construction. Matrices are stored as read-only
``complex128`` arrays; the eigendecomposition of T is computed once and every
T-resolvent quantity is derived from it.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .errors import (
    DimensionMismatch,
    EmptyFamily,
    InvalidSegment,
    LambdaOnSpectrum,
    NotHermitian,
    OverlappingSegments,
    SpectrumOutsideSegments,
)

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]
SegmentLike = Union["Segment", Tuple[float, float], Sequence[float]]

HERMITIAN_TOL = 1e-13
EIGEN_RESIDUAL_TOL = 1e-10
ENDPOINT_TOL = 1e-10
SPECTRUM_GUARD = 1e-14


def _frozen(array: npt.ArrayLike, dtype: type = np.complex128) -> npt.NDArray[np.generic]:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def relative_frobenius(residual: npt.ArrayLike, reference: npt.ArrayLike) -> float:
    """‖residual‖_F / max(‖reference‖_F, 1)."""
    scale = max(float(np.linalg.norm(reference)), 1.0)
    return float(np.linalg.norm(residual)) / scale


@dataclass(frozen=True)
class Segment:
    """Closed real interval [alpha, beta]."""
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise InvalidSegment(f"segment endpoints must be finite: [{self.alpha}, {self.beta}]")
        if self.alpha > self.beta:
            raise InvalidSegment(f"alpha > beta in [{self.alpha}, {self.beta}]")

    @property
    def length(self) -> float:
        return self.beta - self.alpha

    @property
    def center(self) -> float:
        return 0.5 * (self.alpha + self.beta)

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return self.alpha - tol <= t <= self.beta + tol

    def distance(self, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Exact distance in ℂ from ``z`` to the segment (vectorized)."""
        z = np.asarray(z, dtype=np.complex128)
        dx = np.maximum(np.maximum(self.alpha - z.real, z.real - self.beta), 0.0)
        return np.hypot(dx, z.imag)

    def gap_to(self, other: Segment) -> float:
        """Distance between two real segments (0 if they meet)."""
        return max(other.alpha - self.beta, self.alpha - other.beta, 0.0)


@dataclass(frozen=True)
class SegmentFamily:
    """Ordered segments Δⱼ labelled by the contiguous range ``first_index ..``."""
    segments: Tuple[Segment, ...]
    gap: float
    first_index: int = 0

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Tuple[int, Segment]]:
        return zip(self.indices, self.segments)

    def __getitem__(self, j: int) -> Segment:
        if j not in self.indices:
            raise IndexError(f"segment index {j} outside {self.indices}")
        return self.segments[j - self.first_index]

    @property
    def indices(self) -> range:
        return range(self.first_index, self.first_index + len(self.segments))

    @property
    def last_index(self) -> int:
        return self.first_index + len(self.segments) - 1

    @property
    def span(self) -> float:
        return self.segments[-1].beta - self.segments[0].alpha

    @property
    def effective_gap(self) -> float:
        """The gap d, or max(span, 1) for a single segment where d = +∞."""
        if math.isfinite(self.gap):
            return self.gap
        return max(self.span, 1.0)

    def distances(self, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Array of shape ``z.shape + (len(self),)`` with dist(z, Δⱼ)."""
        z = np.asarray(z, dtype=np.complex128)
        return np.stack([seg.distance(z) for seg in self.segments], axis=-1)

    def distance(self, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """dist(z, Δ) for Δ the union of all segments."""
        return np.min(self.distances(z), axis=-1)

    def locate(self, t: float, tol: float = 0.0) -> int | None:
        """Index of the segment containing the real point ``t``."""
        for j, seg in self:
            if seg.contains(t, tol):
                return j
        return None

    def nearest(self, z: complex) -> int:
        return self.first_index + int(np.argmin(self.distances(z)))


def _as_segment(item: SegmentLike) -> Segment:
    if isinstance(item, Segment):
        return item
    alpha, beta = item
    return Segment(float(alpha), float(beta))


def build_segment_family(segments: Iterable[SegmentLike],
                         first_index: int | None = None) -> SegmentFamily:
    """Sort, validate and label segments; compute d = min(α_{j+1} − βⱼ).

    Without ``first_index`` the segment nearest the origin gets index 0, so the
    labels run over a two-sided range of integers.
    """
    ordered = sorted((_as_segment(s) for s in segments), key=lambda s: (s.alpha, s.beta))
    if not ordered:
        raise EmptyFamily("segment family must not be empty")

    gaps = []
    for left, right in zip(ordered, ordered[1:]):
        if right.alpha <= left.beta:
            raise OverlappingSegments(
                f"[{left.alpha}, {left.beta}] and [{right.alpha}, {right.beta}] "
                "are not strictly separated"
            )
        gaps.append(right.alpha - left.beta)
    gap = min(gaps) if gaps else math.inf

    if first_index is None:
        central = int(np.argmin([float(seg.distance(0.0)) for seg in ordered]))
        first_index = -central
    return SegmentFamily(tuple(ordered), gap, first_index)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix T with its cached eigendecomposition."""
    matrix: ComplexMatrix
    eigenvalues: RealArray
    eigenvectors: ComplexMatrix

    @classmethod
    def from_matrix(cls, matrix: npt.ArrayLike) -> HermitianOperator:
        t = np.asarray(matrix, dtype=np.complex128)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DimensionMismatch(f"T must be square, got shape {t.shape}")
        asym = relative_frobenius(t - t.conj().T, t)
        if asym > HERMITIAN_TOL:
            raise NotHermitian(f"relative Frobenius asymmetry {asym:.3e} exceeds {HERMITIAN_TOL}")
        eigenvalues, eigenvectors = scipy.linalg.eigh(t)
        residual = relative_frobenius(t @ eigenvectors - eigenvectors * eigenvalues, t)
        if residual > EIGEN_RESIDUAL_TOL:
            raise NotHermitian(f"eigendecomposition residual {residual:.3e} too large")
        return cls(_frozen(t), _frozen(eigenvalues, np.float64), _frozen(eigenvectors))

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def scale(self) -> float:
        """Spectral-radius scale max(1, max|tᵢ|)."""
        return max(1.0, float(np.max(np.abs(self.eigenvalues))))

    def spectral_distance(self, lam: complex) -> float:
        return float(np.min(np.abs(self.eigenvalues - lam)))

    def _check_off_spectrum(self, lam: complex) -> None:
        if self.spectral_distance(lam) < SPECTRUM_GUARD * self.scale:
            raise LambdaOnSpectrum(f"λ = {lam} lies on the spectrum of T")

    def coefficients(self, x: npt.ArrayLike) -> ComplexVector:
        """Coordinates (vᵢ, x) of ``x`` in the eigenbasis."""
        return np.asarray(self.eigenvectors.conj().T @ np.asarray(x, dtype=np.complex128))

    def resolvent(self, lam: complex) -> ComplexMatrix:
        """(T − λ)^{-1} assembled from the eigendecomposition."""
        self._check_off_spectrum(lam)
        v = self.eigenvectors
        return np.asarray((v / (self.eigenvalues - lam)) @ v.conj().T)

    def apply_resolvent(self, lam: complex, x: npt.ArrayLike) -> ComplexVector:
        self._check_off_spectrum(lam)
        return np.asarray(self.eigenvectors @ (self.coefficients(x) / (self.eigenvalues - lam)))


@dataclass(frozen=True, eq=False)
class PerturbedPair:
    """T, the perturbation B with b = ‖B‖₂, and A = T + B."""
    t: HermitianOperator
    b_matrix: ComplexMatrix
    b_norm: float
    a_matrix: ComplexMatrix

    @classmethod
    def from_matrices(cls, t: HermitianOperator | npt.ArrayLike,
                      b_matrix: npt.ArrayLike) -> PerturbedPair:
        op = t if isinstance(t, HermitianOperator) else HermitianOperator.from_matrix(t)
        b = np.asarray(b_matrix, dtype=np.complex128)
        if b.shape != op.matrix.shape:
            raise DimensionMismatch(f"B has shape {b.shape}, T has shape {op.matrix.shape}")
        b_norm = float(scipy.linalg.svdvals(b)[0]) if b.size else 0.0
        return cls(op, _frozen(b), b_norm, _frozen(op.matrix + b))

    @property
    def n(self) -> int:
        return self.t.n


@dataclass(frozen=True)
class HypothesisReport:
    holds: bool
    b: float
    d: float
    margin: float


def _assert_spectrum_inside(t: HermitianOperator, family: SegmentFamily) -> list[int]:
    tol = ENDPOINT_TOL * t.scale
    labels = []
    for value in t.eigenvalues:
        j = family.locate(float(value), tol)
        if j is None:
            raise SpectrumOutsideSegments(f"eigenvalue {value:.15g} of T lies outside every Δⱼ")
        labels.append(j)
    return labels


def check_hypothesis(pair: PerturbedPair, family: SegmentFamily) -> HypothesisReport:
    """Report whether ‖B‖ = b < d/2; never raises on violation."""
    _assert_spectrum_inside(pair.t, family)
    b, d = pair.b_norm, family.gap
    report = HypothesisReport(holds=b < d / 2, b=b, d=d, margin=d / 2 - b)
    logger.debug("hypothesis b=%.6g d=%.6g holds=%s", b, d, report.holds)
    return report


def resolvent_norm_t(t: HermitianOperator, lam: complex) -> float:
    """‖(T − λ)^{-1}‖₂ = 1 / minᵢ |tᵢ − λ|."""
    t._check_off_spectrum(lam)
    return 1.0 / t.spectral_distance(lam)


def random_unit_vectors(n: int, count: int, seed: int = 0) -> npt.NDArray[np.complex128]:
    """``count`` complex unit vectors of length ``n`` as rows, from a seeded Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    raw = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return np.asarray(raw / np.where(norms == 0, 1.0, norms), dtype=np.complex128)


class ProjectionMethod(str, enum.Enum):
    CONTOUR_QUADRATURE = 'contour_quadrature'
    EIGEN_ORACLE = 'eigen_oracle'
    SPECTRAL_OF_T = 'spectral_of_T'


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    """Indexed projections Qⱼ, j ∈ J, with idempotency residuals."""
    index_range: range
    matrices: Mapping[int, ComplexMatrix]
    idempotency_residuals: Mapping[int, float]
    method: ProjectionMethod
    tolerance: float
    flags: Tuple[str, ...] = field(default=())

    @classmethod
    def from_matrices(cls, index_range: range, matrices: Mapping[int, npt.ArrayLike],
                      method: ProjectionMethod, tolerance: float,
                      flags: Iterable[str] = ()) -> ProjectionSet:
        frozen = {j: _frozen(matrices[j]) for j in index_range}
        residuals = {j: float(np.linalg.norm(q @ q - q)) for j, q in frozen.items()}
        return cls(index_range, MappingProxyType(frozen), MappingProxyType(residuals),
                   ProjectionMethod(method), tolerance, tuple(flags))

    def __getitem__(self, j: int) -> ComplexMatrix:
        return self.matrices[j]

    def __iter__(self) -> Iterator[int]:
        return iter(self.index_range)

    def __len__(self) -> int:
        return len(self.index_range)

    @property
    def dimension(self) -> int:
        return int(next(iter(self.matrices.values())).shape[0])

    def total(self, indices: Iterable[int] | None = None) -> ComplexMatrix:
        chosen = self.index_range if indices is None else indices
        out = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        for j in chosen:
            out += self.matrices[j]
        return out

    def minimality_residual(self) -> float:
        """max over j ≠ k of ‖QⱼQₖ‖_F."""
        worst = 0.0
        for j in self.index_range:
            for k in self.index_range:
                if j != k:
                    worst = max(worst, float(np.linalg.norm(self.matrices[j] @ self.matrices[k])))
        return worst

    def completeness_residual(self) -> float:
        return float(np.linalg.norm(self.total() - np.eye(self.dimension)))

    def max_idempotency_residual(self) -> float:
        return max(self.idempotency_residuals.values())

    def ranks(self, threshold: float = 1e-6) -> dict[int, int]:
        """Numerical rank of each Qⱼ (singular values above ``threshold``)."""
        return {
            j: int(np.sum(scipy.linalg.svdvals(q) > threshold))
            for j, q in self.matrices.items()
        }

    def satisfies_invariants(self) -> bool:
        return (self.max_idempotency_residual() < self.tolerance
                and self.minimality_residual() < self.tolerance
                and self.completeness_residual() < self.tolerance)


def cluster_labels(t: HermitianOperator, family: SegmentFamily) -> list[int]:
    """Segment index of every eigenvalue of T (ascending order)."""
    return _assert_spectrum_inside(t, family)


def unperturbed_projections(t: HermitianOperator, family: SegmentFamily) -> ProjectionSet:
    """Spectral projections Pⱼ = Σ_{tᵢ ∈ Δⱼ} vᵢvᵢ* of T."""
    labels = np.asarray(cluster_labels(t, family))
    v = t.eigenvectors
    matrices = {}
    for j in family.indices:
        cols = v[:, labels == j]
        matrices[j] = cols @ cols.conj().T
    return ProjectionSet.from_matrices(family.indices, matrices,
                                       ProjectionMethod.SPECTRAL_OF_T, tolerance=1e-10)
