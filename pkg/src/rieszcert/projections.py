"""Riesz projections by contour quadrature, the eigendecomposition oracle, and the
partial-sum identity Σ Qⱼ = Σ Pⱼ + I_n over ∂R_n."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import CertConfig, get_config
from .contour import (
    DEFAULT_ORDER,
    HORIZONTAL,
    Contour,
    attach_quadrature,
    default_b_prime,
    included_indices,
    partial_sum_rectangle,
    segment_contour,
)
from .errors import (
    ContourHitsSpectrum,
    DefectiveMatrix,
    IdentityViolation,
    IncompleteSystem,
    NearDefective,
    QuadratureStalled,
    SingularShift,
    SpectrumOutsideSegments,
    UnassignedEigenvalue,
)
from .resolvent import ShiftedSolver, check_enclosure, parallel_map
from .spectral_model import (
    ComplexMatrix,
    ComplexVector,
    PerturbedPair,
    ProjectionMethod,
    ProjectionSet,
    SegmentFamily,
    cluster_labels,
    unperturbed_projections,
)

logger = logging.getLogger(__name__)

TWO_PI_I = 2j * math.pi
NEAR_DEFECTIVE_CONDITION = 1e10
EXPANSION_COMPLETENESS = 1e-6
NODE_CHUNK = 64

__all__ = [
    'CorrectionIntegral',
    'ProjectionEngine',
    'ProjectionSet',
    'RieszProjection',
    'VerificationReport',
    'compare_projection_sets',
    'contour_projections',
    'eigen_oracle_projections',
    'expand_vector',
    'partial_sum_check',
    'riesz_projection',
    'verify_projection_set',
]


@dataclass(frozen=True, eq=False)
class RieszProjection:
    """Q = −(1/2πi) ∮ (A−λ)^{-1} dλ with the quadrature order that produced it."""
    matrix: ComplexMatrix
    idempotency_residual: float
    order: int

    def __array__(self, dtype: npt.DTypeLike = None, copy: bool | None = None) -> ComplexMatrix:
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class CorrectionIntegral:
    """I_n = (1/2πi) ∮_{∂R_n} G(λ) dλ split into horizontal (I_n¹) and vertical (I_n²) sides."""
    n: int
    matrix: ComplexMatrix
    norm: float
    horizontal_norm: float
    vertical_norm: float
    contour_residual: float
    identity_residual: float
    order: int
    indices: Tuple[int, ...]


@dataclass(frozen=True)
class VerificationReport:
    minimality: float
    completeness: float
    enclosure: bool
    commutation: float
    idempotency: float
    rank_match: bool
    ranks: Dict[int, int]


def _chunks(size: int, step: int) -> List[range]:
    return [range(start, min(start + step, size)) for start in range(0, size, step)]


class ProjectionEngine:
    """Contour-quadrature projections driven by the quadrature and tolerance config."""

    def __init__(self, config: CertConfig | None = None) -> None:
        self.config = config or get_config()

    @property
    def workers(self) -> int:
        return max(1, self.config.mode.parallel)

    @property
    def max_order(self) -> int:
        if self.config.mode.force:
            return min(self.config.quadrature.max_order, self.config.mode.force_max_order)
        return self.config.quadrature.max_order

    def panel_length(self, clearance: float, family: SegmentFamily) -> float:
        """Panels a few clearances long keep every node's Bernstein ellipse clear of σ(A)."""
        floor = family.effective_gap / 64
        return self.config.quadrature.panel_ratio * max(clearance, floor)

    def resolvent_integral(self, pair: PerturbedPair, contour: Contour) -> ComplexMatrix:
        """Σ wₘ (A − λₘ)^{-1}, summed in node order."""
        eye = np.eye(pair.n, dtype=np.complex128)

        def term(k: int) -> ComplexMatrix:
            lam = complex(contour.points[k])
            try:
                solver = ShiftedSolver(pair.a_matrix, lam)
            except SingularShift as exc:
                raise ContourHitsSpectrum(str(exc)) from exc
            return contour.weights[k] * solver.solve(eye)

        total = np.zeros((pair.n, pair.n), dtype=np.complex128)
        for chunk in _chunks(len(contour.points), NODE_CHUNK):
            for piece in parallel_map(term, chunk, self.workers):
                total += piece
        return total

    def riesz_projection(self, pair: PerturbedPair, contour: Contour,
                         tol: float | None = None) -> RieszProjection:
        """Double the per-panel order until ‖Q² − Q‖_F < tol or the cap is reached."""
        tol = self.config.tolerances.projection if tol is None else tol
        order = contour.order or DEFAULT_ORDER
        if contour.order != order:
            contour = attach_quadrature(contour, order, contour.panel_length)
        while True:
            q = -self.resolvent_integral(pair, contour) / TWO_PI_I
            residual = float(np.linalg.norm(q @ q - q))
            logger.debug("%s order %d: idempotency residual %.3e",
                         contour.kind.value, order, residual)
            if residual < tol:
                return RieszProjection(q, residual, order)
            if order * 2 > self.max_order:
                raise QuadratureStalled(
                    f"idempotency residual {residual:.3e} ≥ {tol:.1e} at order {order}",
                    residual=residual, order=order, matrix=q,
                )
            order *= 2
            contour = attach_quadrature(contour, order, contour.panel_length)

    def segment_contours(self, pair: PerturbedPair, family: SegmentFamily,
                         b: float | None = None, style: str | None = None) -> Dict[int, Contour]:
        b = pair.b_norm if b is None else b
        style = style or self.config.quadrature.contour_style
        b_prime = default_b_prime(b, family)
        panel = self.panel_length(b_prime - b, family)
        return {
            j: segment_contour(seg, b_prime, style, order=self.config.quadrature.order,
                               panel_length=panel,
                               cap_points=self.config.quadrature.stadium_points)
            for j, seg in family
        }

    def contour_projections(self, pair: PerturbedPair, family: SegmentFamily,
                            b: float | None = None, style: str | None = None,
                            tol: float | None = None,
                            allow_stall: bool = False) -> ProjectionSet:
        """Qⱼ for every segment, each from its own contour Γⱼ = ∂U_{b′}(Δⱼ)."""
        matrices: Dict[int, ComplexMatrix] = {}
        flags: List[str] = []
        for j, contour in self.segment_contours(pair, family, b, style).items():
            try:
                result = self.riesz_projection(pair, contour, tol)
            except QuadratureStalled as exc:
                if not allow_stall or exc.matrix is None:
                    raise
                logger.warning("Q_%d stalled at order %d (residual %.3e)",
                               j, exc.order, exc.residual)
                flags.append(f"stalled:{j}")
                matrices[j] = exc.matrix
                continue
            logger.debug("Q_%d converged at order %d", j, result.order)
            matrices[j] = result.matrix
        return ProjectionSet.from_matrices(family.indices, matrices,
                                           ProjectionMethod.CONTOUR_QUADRATURE,
                                           self.config.tolerances.identity, flags)

    def _partial_sum_terms(self, pair: PerturbedPair,
                           contour: Contour) -> Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
        eye = np.eye(pair.n, dtype=np.complex128)
        horizontal = contour.edge_mask(HORIZONTAL)

        def term(k: int) -> Tuple[ComplexMatrix, ComplexMatrix]:
            lam = complex(contour.points[k])
            try:
                ra = ShiftedSolver(pair.a_matrix, lam).solve(eye)
            except SingularShift as exc:
                raise ContourHitsSpectrum(str(exc)) from exc
            g = ra @ pair.b_matrix @ pair.t.resolvent(lam)
            w = contour.weights[k]
            return w * ra, w * g

        s_a = np.zeros((pair.n, pair.n), dtype=np.complex128)
        g_h = np.zeros_like(s_a)
        g_v = np.zeros_like(s_a)
        for chunk in _chunks(len(contour.points), NODE_CHUNK):
            for k, (ra_w, g_w) in zip(chunk, parallel_map(term, chunk, self.workers)):
                s_a += ra_w
                if horizontal[k]:
                    g_h += g_w
                else:
                    g_v += g_w
        return s_a, g_h, g_v

    def partial_sum_check(self, pair: PerturbedPair, family: SegmentFamily, n: int,
                          tol: float | None = None, projections: ProjectionSet | None = None,
                          unperturbed: ProjectionSet | None = None,
                          strict: bool = True) -> CorrectionIntegral:
        """Check −(1/2πi)∮_{∂R_n}(A−λ)^{-1}dλ = Σ_{|j|≤n} Qⱼ = Σ_{|j|≤n} Pⱼ + I_n."""
        tol = self.config.tolerances.identity if tol is None else tol
        if projections is None:
            projections = self.contour_projections(pair, family)
        if unperturbed is None:
            unperturbed = unperturbed_projections(pair.t, family)
        indices = tuple(included_indices(family, n))
        sum_q = projections.total(indices)
        sum_p = unperturbed.total(indices)

        b = pair.b_norm
        contour = partial_sum_rectangle(family, n, b, order=self.config.quadrature.order)
        panel = self.panel_length(contour.clearance(family) - b, family)
        order = self.config.quadrature.order
        while True:
            contour = attach_quadrature(contour, order, panel)
            s_a, g_h, g_v = self._partial_sum_terms(pair, contour)
            big = -s_a / TWO_PI_I
            i_h = g_h / TWO_PI_I
            i_v = g_v / TWO_PI_I
            i_n = i_h + i_v
            contour_residual = float(np.linalg.norm(big - sum_q))
            identity_residual = float(np.linalg.norm(sum_q - sum_p - i_n))
            logger.debug("∂R_%d order %d: contour residual %.3e, identity residual %.3e",
                         n, order, contour_residual, identity_residual)
            converged = contour_residual < tol and identity_residual < tol
            if converged or order * 2 > self.max_order:
                break
            order *= 2

        result = CorrectionIntegral(
            n=n,
            matrix=i_n,
            norm=float(scipy.linalg.svdvals(i_n)[0]),
            horizontal_norm=float(scipy.linalg.svdvals(i_h)[0]),
            vertical_norm=float(scipy.linalg.svdvals(i_v)[0]),
            contour_residual=contour_residual,
            identity_residual=identity_residual,
            order=order,
            indices=indices,
        )
        if strict and not converged:
            raise IdentityViolation(
                f"partial-sum identity at n={n}: contour residual {contour_residual:.3e}, "
                f"identity residual {identity_residual:.3e} (tol {tol:.1e})"
            )
        return result


def riesz_projection(pair: PerturbedPair, contour: Contour, tol: float = 1e-9,
                     config: CertConfig | None = None) -> RieszProjection:
    """Q = −(1/2πi) Σₘ wₘ (A − λₘ)^{-1}, refined by order doubling."""
    return ProjectionEngine(config).riesz_projection(pair, contour, tol)


def contour_projections(pair: PerturbedPair, family: SegmentFamily, b: float | None = None,
                        style: str | None = None, tol: float | None = None,
                        config: CertConfig | None = None) -> ProjectionSet:
    return ProjectionEngine(config).contour_projections(pair, family, b, style, tol)


def partial_sum_check(pair: PerturbedPair, family: SegmentFamily, n: int,
                      tol: float | None = None, projections: ProjectionSet | None = None,
                      config: CertConfig | None = None, strict: bool = True) -> CorrectionIntegral:
    return ProjectionEngine(config).partial_sum_check(pair, family, n, tol, projections,
                                                      strict=strict)


def eigen_oracle_projections(pair: PerturbedPair, family: SegmentFamily,
                             b: float | None = None, strict: bool = True) -> ProjectionSet:
    """Qⱼ = V·diag(1_{group j})·V^{-1} from a dense eigendecomposition A = VΛV^{-1}.

    Eigenvalues are grouped by the segment whose b-neighborhood holds them; with
    ``strict`` off, strays and ties go to the nearest segment and are flagged.
    """
    b = pair.b_norm if b is None else b
    values, vectors = scipy.linalg.eig(pair.a_matrix)
    flags: List[str] = []
    condition = float(np.linalg.cond(vectors))
    if not math.isfinite(condition):
        raise DefectiveMatrix("eigenvector matrix of A is singular")
    if condition > NEAR_DEFECTIVE_CONDITION:
        warnings.warn(NearDefective(f"eigenvector condition number {condition:.3e}"),
                      stacklevel=2)
        flags.append('near_defective')
    try:
        inverse = scipy.linalg.inv(vectors)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DefectiveMatrix(f"eigenvector matrix of A cannot be inverted: {exc}") from exc

    scale = max(1.0, float(np.max(np.abs(values))))
    dist = family.distances(values)
    labels = np.empty(len(values), dtype=np.int64)
    for i, row in enumerate(dist):
        inside = np.flatnonzero(row <= b + 1e-10 * scale)
        nearest = int(np.argmin(row))
        if len(inside) == 1:
            labels[i] = inside[0]
            continue
        if len(inside) == 0:
            if strict:
                raise UnassignedEigenvalue(
                    f"eigenvalue {values[i]:.6g} lies in no U_b(Δⱼ) (distance {row[nearest]:.6g})"
                )
            flags.append(f"unassigned:{family.first_index + nearest}")
        else:
            flags.append(f"tie:{family.first_index + nearest}")
        labels[i] = nearest

    matrices = {}
    for j in family.indices:
        mask = labels == (j - family.first_index)
        matrices[j] = vectors[:, mask] @ inverse[mask, :]
    return ProjectionSet.from_matrices(family.indices, matrices, ProjectionMethod.EIGEN_ORACLE,
                                       tolerance=1e-8, flags=flags)


def compare_projection_sets(first: ProjectionSet, second: ProjectionSet) -> Dict[int, float]:
    """Per-index Frobenius distance between two sets over the same index range."""
    return {j: float(np.linalg.norm(first[j] - second[j])) for j in first}


def _expected_ranks(pair: PerturbedPair, family: SegmentFamily,
                    nearest: Sequence[int]) -> Tuple[Dict[int, int], Dict[int, int]]:
    a_counts = {j: 0 for j in family.indices}
    for j in nearest:
        a_counts[j] += 1
    t_counts = {j: 0 for j in family.indices}
    for j in cluster_labels(pair.t, family):
        t_counts[j] += 1
    return a_counts, t_counts


def verify_projection_set(projections: ProjectionSet, pair: PerturbedPair,
                          family: SegmentFamily, b: float | None = None) -> VerificationReport:
    """Minimality, completeness, enclosure, commutation and rank preservation; never raises."""
    enclosure = check_enclosure(pair, family)
    a = pair.a_matrix
    commutation = max(float(np.linalg.norm(a @ projections[j] - projections[j] @ a))
                      for j in projections)
    ranks = projections.ranks()
    try:
        a_counts, t_counts = _expected_ranks(pair, family, enclosure.nearest)
        rank_match = enclosure.holds and all(
            ranks[j] == a_counts[j] == t_counts[j] for j in family.indices
        )
    except SpectrumOutsideSegments:
        rank_match = False
    return VerificationReport(
        minimality=projections.minimality_residual(),
        completeness=projections.completeness_residual(),
        enclosure=enclosure.holds,
        commutation=commutation,
        idempotency=projections.max_idempotency_residual(),
        rank_match=rank_match,
        ranks=ranks,
    )


def expand_vector(projections: ProjectionSet, x: npt.ArrayLike) -> List[ComplexVector]:
    """x = Σ xₖ with xₖ = Qₖx ∈ Lₖ."""
    residual = projections.completeness_residual()
    if residual > EXPANSION_COMPLETENESS:
        raise IncompleteSystem(f"completeness residual {residual:.3e} exceeds "
                               f"{EXPANSION_COMPLETENESS:.0e}")
    vec = np.asarray(x, dtype=np.complex128)
    return [np.asarray(projections[k] @ vec) for k in projections]
