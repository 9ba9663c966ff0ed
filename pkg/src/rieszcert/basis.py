"""Equivalent inner product, similarity to orthogonal projections, the unconditional
constant, the sum bound Σ|(Qⱼx, x)| and block diagonalization of A."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .config import CertConfig, get_config
from .errors import IncompleteSystem, IndefiniteGram, RankDeficientBlock
from .resolvent import parallel_map, sorted_eigenvalues
from .spectral_model import (
    ComplexMatrix,
    PerturbedPair,
    ProjectionSet,
    SegmentFamily,
    random_unit_vectors,
)

logger = logging.getLogger(__name__)

C2 = 4.0 + math.pi ** 2 / 6
GRAM_PRECONDITION = 1e-6
GRAM_HERMITIAN_TOL = 1e-12
SIGN_BATCH = 1024
RANK_THRESHOLD = 1e-6


def gram_operator(projections: ProjectionSet) -> ComplexMatrix:
    """G = Σⱼ Qⱼ*Qⱼ, positive definite for a complete minimal system."""
    minimality = projections.minimality_residual()
    completeness = projections.completeness_residual()
    if max(minimality, completeness) > GRAM_PRECONDITION:
        raise IncompleteSystem(
            f"projection set not complete and minimal: minimality {minimality:.3e}, "
            f"completeness {completeness:.3e}"
        )
    gram = np.zeros((projections.dimension, projections.dimension), dtype=np.complex128)
    for j in projections:
        q = projections[j]
        gram += q.conj().T @ q
    gram = 0.5 * (gram + gram.conj().T)
    smallest = float(scipy.linalg.eigvalsh(gram)[0])
    if smallest <= 0.0:
        raise IndefiniteGram(f"smallest Gram eigenvalue {smallest:.3e} is not positive")
    return gram


def gram_cross_orthogonality(projections: ProjectionSet, gram: ComplexMatrix,
                             samples: int = 100, seed: int = 0) -> float:
    """max over j ≠ k and sampled x, y of |(G Qⱼx, Qₖy)| / (‖Qⱼx‖‖Qₖy‖‖G‖)."""
    n = projections.dimension
    xs = random_unit_vectors(n, samples, seed)
    ys = random_unit_vectors(n, samples, seed + 1)
    g_norm = float(scipy.linalg.svdvals(gram)[0])
    images_x = {j: xs @ projections[j].T for j in projections}
    images_y = {j: ys @ projections[j].T for j in projections}
    worst = 0.0
    for j, k in itertools.permutations(projections, 2):
        u, v = images_x[j], images_y[k]
        inner = np.abs(np.einsum('si,ij,sj->s', v.conj(), gram, u))
        scale = np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1) * g_norm
        mask = scale > 0
        if np.any(mask):
            worst = max(worst, float(np.max(inner[mask] / scale[mask])))
    return worst


@dataclass(frozen=True, eq=False)
class SimilarityTransform:
    """K = G^{1/2} with P̂ⱼ = KQⱼK^{-1} orthogonal."""
    k_matrix: ComplexMatrix
    k_inverse: ComplexMatrix
    orthogonal_projections: Dict[int, ComplexMatrix]
    m: float
    big_m: float
    condition: float
    square_residual: float
    hermitian_residual: float
    idempotency_residual: float
    reconstruction_residual: float


def similarity_transform(projections: ProjectionSet, gram: ComplexMatrix) -> SimilarityTransform:
    """K from the Hermitian eigendecomposition of G; cond(K) = √(M/m)."""
    values, vectors = scipy.linalg.eigh(gram)
    if values[0] <= 0.0:
        raise IndefiniteGram(f"smallest Gram eigenvalue {values[0]:.3e} is not positive")
    root = np.sqrt(values)
    k = (vectors * root) @ vectors.conj().T
    k_inv = (vectors / root) @ vectors.conj().T
    p_hat = {j: k @ projections[j] @ k_inv for j in projections}

    ref = max(float(np.linalg.norm(gram)), 1.0)
    return SimilarityTransform(
        k_matrix=k,
        k_inverse=k_inv,
        orthogonal_projections=p_hat,
        m=float(values[0]),
        big_m=float(values[-1]),
        condition=math.sqrt(float(values[-1] / values[0])),
        square_residual=float(np.linalg.norm(k @ k - gram)) / ref,
        hermitian_residual=max(float(np.linalg.norm(p - p.conj().T)) for p in p_hat.values()),
        idempotency_residual=max(float(np.linalg.norm(p @ p - p)) for p in p_hat.values()),
        reconstruction_residual=max(
            float(np.linalg.norm(k_inv @ p_hat[j] @ k - projections[j])) for j in projections
        ),
    )


@dataclass(frozen=True)
class UnconditionalConstant:
    value: float
    mode: str
    sign_vectors: int


def _signed_norms(stack: npt.NDArray[np.complex128],
                  signs: npt.NDArray[np.float64]) -> float:
    sums = np.einsum('sj,jab->sab', signs, stack)
    return float(np.max(np.linalg.norm(sums, ord=2, axis=(1, 2))))


def unconditional_constant(projections: ProjectionSet, exhaustive_limit: int = 20,
                           samples: int = 10000, seed: int = 0,
                           workers: int = 1) -> UnconditionalConstant:
    """sup over ε ∈ {±1}^J of ‖Σ εⱼQⱼ‖₂.

    ε and −ε give the same norm, so the first sign is pinned to +1. Up to
    ``exhaustive_limit`` indices every sign vector is evaluated; beyond that
    ``samples`` random vectors are drawn and the mode is reported as sampled.
    """
    stack = np.stack([projections[j] for j in projections])
    size = len(projections)
    if size <= exhaustive_limit:
        mode = 'exhaustive'
        total = 2 ** (size - 1)
        bits = np.arange(total, dtype=np.int64)[:, None] >> np.arange(size - 1, dtype=np.int64)
        rest = 1.0 - 2.0 * (bits & 1)
        signs = np.hstack([np.ones((total, 1)), rest])
    else:
        mode = 'sampled'
        rng = np.random.Generator(np.random.Philox(seed))
        signs = rng.choice([-1.0, 1.0], size=(samples, size))
        signs[:, 0] = 1.0
        total = samples
    batches = [signs[start:start + SIGN_BATCH] for start in range(0, total, SIGN_BATCH)]
    value = max(parallel_map(lambda batch: _signed_norms(stack, batch), batches, workers))
    logger.debug("unconditional constant %.6g over %d sign vectors (%s)", value, total, mode)
    return UnconditionalConstant(value, mode, int(total))


def sum_bound_constant(gap: float, c1: float) -> float:
    """Factor κ with Σⱼ|(Qⱼx, x)| ≤ κ‖x‖² from the contour chain over Γ̃ⱼ."""
    return 1.0 + c1 * (2 * math.pi / gap + 8 * C2 / gap) / (2 * math.pi)


@dataclass(frozen=True)
class SumBoundSample:
    sample: int
    value: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.value <= self.bound + 1e-8 * max(1.0, abs(self.bound))


def sum_bound_check(projections: ProjectionSet, xs: Sequence[npt.ArrayLike],
                    gap: float, c1: float) -> List[SumBoundSample]:
    """Σⱼ|(Qⱼx, x)| for every x next to κ‖x‖²."""
    kappa = sum_bound_constant(gap, c1)
    out = []
    for i, x in enumerate(xs):
        vec = np.asarray(x, dtype=np.complex128)
        value = sum(abs(complex(np.vdot(vec, projections[j] @ vec))) for j in projections)
        out.append(SumBoundSample(i, float(value), kappa * float(np.vdot(vec, vec).real)))
    return out


@dataclass(frozen=True, eq=False)
class BlockDiagonalization:
    """A in a ⟨·,·⟩-orthonormal basis adapted to ⊕Lⱼ."""
    blocks: Dict[int, ComplexMatrix]
    basis: ComplexMatrix
    off_block_residual: float
    spectrum_residual: float
    cluster_match: bool


def _range_basis(p_hat: ComplexMatrix, expected: int, j: int) -> ComplexMatrix:
    values, vectors = scipy.linalg.eigh(0.5 * (p_hat + p_hat.conj().T))
    keep = values > 0.5
    if int(np.sum(keep)) != expected:
        raise RankDeficientBlock(
            f"range of Q_{j} has {int(np.sum(keep))} orthonormal directions, rank is {expected}"
        )
    return np.asarray(vectors[:, keep])


def _block_eigenvalues(block: ComplexMatrix) -> npt.NDArray[np.complex128]:
    if not block.size:
        return np.zeros(0, dtype=np.complex128)
    return np.asarray(scipy.linalg.eigvals(block), dtype=np.complex128)


def _match_spectra(found: npt.NDArray[np.complex128],
                   reference: npt.NDArray[np.complex128]) -> float:
    if len(found) != len(reference):
        return math.inf
    if not len(found):
        return 0.0
    cost = np.abs(found[:, None] - reference[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def block_diagonalize(pair: PerturbedPair, projections: ProjectionSet,
                      k_matrix: ComplexMatrix, family: SegmentFamily | None = None,
                      tolerance: float = 1e-7) -> BlockDiagonalization:
    """Aⱼ = Wⱼ* G A Wⱼ with Wⱼ = K^{-1}Uⱼ, Uⱼ an orthonormal basis of range(KQⱼK^{-1})."""
    k_inv = scipy.linalg.inv(k_matrix)
    gram = k_matrix @ k_matrix
    ranks = projections.ranks(RANK_THRESHOLD)
    a = pair.a_matrix

    columns = []
    blocks = {}
    for j in projections:
        w = k_inv @ _range_basis(k_matrix @ projections[j] @ k_inv, ranks[j], j)
        blocks[j] = np.asarray(w.conj().T @ gram @ a @ w)
        columns.append(w)
    basis = np.hstack(columns)

    off_block = max(
        (float(np.linalg.norm(projections[k] @ a @ projections[j]))
         for j, k in itertools.permutations(projections, 2)),
        default=0.0,
    )
    spectrum = sorted_eigenvalues(a)
    union = np.concatenate([_block_eigenvalues(blocks[j]) for j in projections])
    spectrum_residual = _match_spectra(union, spectrum)

    cluster_match = spectrum_residual <= tolerance
    if family is not None:
        nearest = family.distances(spectrum).argmin(axis=1) + family.first_index
        for j in projections:
            own = _block_eigenvalues(blocks[j])
            if _match_spectra(own, spectrum[nearest == j]) > tolerance:
                cluster_match = False
    return BlockDiagonalization(blocks, basis, off_block, spectrum_residual, cluster_match)


@dataclass(frozen=True, eq=False)
class BasisCertificate:
    """Everything needed to claim {Lⱼ} is an unconditional basis of subspaces."""
    gram: ComplexMatrix
    equivalence_constants: Tuple[float, float]
    k_matrix: ComplexMatrix
    k_condition: float
    unconditional_constant: float
    sign_mode: str
    sign_vectors: int
    cross_orthogonality: float
    similarity: SimilarityTransform
    c1: float
    sum_bound_samples: List[SumBoundSample] = field(default_factory=list)
    block_residual: float = math.nan
    block_spectrum_residual: float = math.nan
    block_cluster_match: bool = False

    @property
    def sum_bound_holds(self) -> bool:
        return all(s.passed for s in self.sum_bound_samples)

    @property
    def constant_within_condition(self) -> bool:
        return self.unconditional_constant <= self.k_condition + 1e-6

    def summary(self) -> Dict[str, object]:
        return {
            'm': self.equivalence_constants[0],
            'M': self.equivalence_constants[1],
            'cond_K': self.k_condition,
            'unconditional_constant': self.unconditional_constant,
            'sign_mode': self.sign_mode,
            'sign_vectors': self.sign_vectors,
            'cross_orthogonality': self.cross_orthogonality,
            'k_square_residual': self.similarity.square_residual,
            'p_hat_hermitian_residual': self.similarity.hermitian_residual,
            'p_hat_idempotency_residual': self.similarity.idempotency_residual,
            'similarity_reconstruction_residual': self.similarity.reconstruction_residual,
            'c1': self.c1,
            'sum_bound_max_ratio': max(
                (s.value / s.bound for s in self.sum_bound_samples if s.bound > 0), default=0.0
            ),
            'sum_bound_holds': self.sum_bound_holds,
            'block_residual': self.block_residual,
            'block_spectrum_residual': self.block_spectrum_residual,
            'block_cluster_match': self.block_cluster_match,
        }


class BasisAnalyzer:
    """Builds a BasisCertificate from a verified projection set."""

    def __init__(self, config: CertConfig | None = None) -> None:
        self.config = config or get_config()

    def certify(self, pair: PerturbedPair, family: SegmentFamily,
                projections: ProjectionSet, c1: float) -> BasisCertificate:
        tolerances, mode = self.config.tolerances, self.config.mode
        seed = self.config.instance.seed
        gram = gram_operator(projections)
        similarity = similarity_transform(projections, gram)
        logger.debug("Gram equivalence constants m=%.6g M=%.6g", similarity.m, similarity.big_m)

        constant = unconditional_constant(projections, mode.exhaustive_limit,
                                          mode.sign_samples, seed, mode.parallel)
        xs = random_unit_vectors(pair.n, tolerances.vector_samples, seed)
        samples = sum_bound_check(projections, xs, family.effective_gap, c1)
        blocks = block_diagonalize(pair, projections, similarity.k_matrix, family,
                                   tolerances.block_spectrum)
        return BasisCertificate(
            gram=gram,
            equivalence_constants=(similarity.m, similarity.big_m),
            k_matrix=similarity.k_matrix,
            k_condition=similarity.condition,
            unconditional_constant=constant.value,
            sign_mode=constant.mode,
            sign_vectors=constant.sign_vectors,
            cross_orthogonality=gram_cross_orthogonality(projections, gram,
                                                         tolerances.vector_samples, seed),
            similarity=similarity,
            c1=c1,
            sum_bound_samples=samples,
            block_residual=blocks.off_block_residual,
            block_spectrum_residual=blocks.spectrum_residual,
            block_cluster_match=blocks.cluster_match,
        )


def certify_basis(pair: PerturbedPair, family: SegmentFamily, projections: ProjectionSet,
                  c1: float, config: CertConfig | None = None) -> BasisCertificate:
    return BasisAnalyzer(config).certify(pair, family, projections, c1)
