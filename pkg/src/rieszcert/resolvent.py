"""Shifted solves with A and T, the splitting (A−λ)^{-1} = (T−λ)^{-1} − G(λ), and norm bounds."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, TypeVar

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.linalg.lapack import get_lapack_funcs

from .errors import IllConditionedShift, InsideNeighborhood, SingularShift
from .spectral_model import ComplexMatrix, PerturbedPair, SegmentFamily

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
BOUND_SLACK = 1e-8
ENCLOSURE_TOL = 1e-10

_T = TypeVar('_T')
_R = TypeVar('_R')


def parallel_map(func: Callable[[_T], _R], items: Iterable[_T], workers: int = 1) -> List[_R]:
    """Map in input order; threads only when ``workers`` > 1 (LAPACK releases the GIL)."""
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


class ShiftedSolver:
    """LU factorization of A − λI, reusable across right-hand sides."""

    def __init__(self, a_matrix: npt.ArrayLike, lam: complex,
                 condition_limit: float = CONDITION_LIMIT) -> None:
        a = np.asarray(a_matrix, dtype=np.complex128)
        self.lam = complex(lam)
        shifted = a - self.lam * np.eye(a.shape[0])
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
            self._lu, self._piv = scipy.linalg.lu_factor(shifted, check_finite=False)
        pivots = np.abs(np.diag(self._lu))
        if not np.all(np.isfinite(pivots)) or np.any(pivots == 0.0):
            raise SingularShift(f"A − λI is singular at λ = {self.lam}")

        gecon, = get_lapack_funcs(('gecon',), (self._lu,))
        rcond, _ = gecon(self._lu, np.linalg.norm(shifted, 1), norm='1')
        if rcond <= 0.0:
            raise SingularShift(f"A − λI is numerically singular at λ = {self.lam}")
        self.condition = float(1.0 / rcond)
        self.ill_conditioned = self.condition > condition_limit
        if self.ill_conditioned:
            warnings.warn(
                IllConditionedShift(
                    f"condition estimate {self.condition:.3e} of A − λI at λ = {self.lam}"
                ),
                stacklevel=2,
            )

    def solve(self, rhs: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        b = np.asarray(rhs, dtype=np.complex128)
        return np.asarray(scipy.linalg.lu_solve((self._lu, self._piv), b, check_finite=False))


def solve_resolvent(a_matrix: npt.ArrayLike, lam: complex,
                    rhs: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """X with (A − λI)X = rhs."""
    return ShiftedSolver(a_matrix, lam).solve(rhs)


def a_resolvent(pair: PerturbedPair, lam: complex) -> ComplexMatrix:
    return solve_resolvent(pair.a_matrix, lam, np.eye(pair.n, dtype=np.complex128))


def neumann_factor(pair: PerturbedPair, lam: complex) -> ComplexMatrix:
    """M(λ) = (I + B(T−λ)^{-1})^{-1}."""
    eye = np.eye(pair.n, dtype=np.complex128)
    return np.asarray(scipy.linalg.solve(eye + pair.b_matrix @ pair.t.resolvent(lam), eye))


def splitting_term(pair: PerturbedPair, lam: complex) -> ComplexMatrix:
    """G(λ) = (A−λ)^{-1} B (T−λ)^{-1}."""
    return solve_resolvent(pair.a_matrix, lam, pair.b_matrix @ pair.t.resolvent(lam))


def spectral_norm(matrix: npt.ArrayLike) -> float:
    m = np.asarray(matrix)
    if not m.size:
        return 0.0
    return float(scipy.linalg.svdvals(m)[0])


@dataclass(frozen=True)
class ResolventSample:
    """Norms at one λ next to their a-priori bounds."""
    lam: complex
    a_resolvent_norm: float
    t_resolvent_norm: float
    delta: float
    bound: float
    m_norm: float
    m_bound: float
    g_norm: float
    g_bound: float
    splitting_residual: float
    factored_residual: float

    @property
    def resolvent_ok(self) -> bool:
        return self.a_resolvent_norm <= self.bound + BOUND_SLACK

    @property
    def neumann_ok(self) -> bool:
        return self.m_norm <= self.m_bound + BOUND_SLACK

    @property
    def g_ok(self) -> bool:
        return self.g_norm <= self.g_bound * (1 + BOUND_SLACK) + BOUND_SLACK

    @property
    def passes(self) -> bool:
        return self.resolvent_ok and self.neumann_ok and self.g_ok


def neumann_bound_check(pair: PerturbedPair, lam: complex,
                        family: SegmentFamily) -> ResolventSample:
    """Exact ‖M(λ)‖₂, ‖(A−λ)^{-1}‖₂, ‖G(λ)‖₂ against 1/(1−b/δ), 1/(δ−b), b/(δ(δ−b))."""
    lam = complex(lam)
    delta = float(family.distance(lam))
    b = pair.b_norm
    if delta <= b:
        raise InsideNeighborhood(f"δ(λ) = {delta:.6g} ≤ b = {b:.6g} at λ = {lam}")

    eye = np.eye(pair.n, dtype=np.complex128)
    rt = pair.t.resolvent(lam)
    sv = scipy.linalg.svdvals(pair.a_matrix - lam * eye)
    if sv[-1] == 0.0:
        raise SingularShift(f"A − λI is singular at λ = {lam}")
    m = np.asarray(scipy.linalg.solve(eye + pair.b_matrix @ rt, eye))
    ra = a_resolvent(pair, lam)
    g = ra @ pair.b_matrix @ rt
    scale = max(float(np.linalg.norm(rt)), np.finfo(float).tiny)

    return ResolventSample(
        lam=lam,
        a_resolvent_norm=float(1.0 / sv[-1]),
        t_resolvent_norm=1.0 / pair.t.spectral_distance(lam),
        delta=delta,
        bound=1.0 / (delta - b),
        m_norm=spectral_norm(m),
        m_bound=1.0 / (1.0 - b / delta),
        g_norm=spectral_norm(g),
        g_bound=b / (delta * (delta - b)),
        splitting_residual=float(np.linalg.norm(ra - rt + g)) / scale,
        factored_residual=float(np.linalg.norm(g - rt @ m @ pair.b_matrix @ rt)) / scale,
    )


def sample_outside_neighborhood(family: SegmentFamily, b: float, count: int,
                                seed: int = 0) -> List[complex]:
    """``count`` deterministic λ with dist(λ, Δ) > b in a box around the segments."""
    d = family.effective_gap
    reach = 2.0 * d + 2.0 * b
    lo = family.segments[0].alpha - reach
    hi = family.segments[-1].beta + reach
    rng = np.random.Generator(np.random.Philox(seed))
    margin = 1e-6 * d
    out: List[complex] = []
    while len(out) < count:
        re = lo + (hi - lo) * rng.random(4 * count)
        batch = re + 1j * reach * (2 * rng.random(4 * count) - 1)
        keep = batch[family.distance(batch) > b + margin]
        out.extend(complex(z) for z in keep[: count - len(out)])
    return out


def sample_resolvent_bounds(pair: PerturbedPair, family: SegmentFamily, count: int = 1000,
                            seed: int = 0, workers: int = 1) -> List[ResolventSample]:
    lambdas = sample_outside_neighborhood(family, pair.b_norm, count, seed)
    return parallel_map(lambda lam: neumann_bound_check(pair, lam, family), lambdas, workers)


@dataclass(frozen=True)
class EnclosureReport:
    """Where the eigenvalues of A sit relative to ∪ U_b(Δⱼ)."""
    eigenvalues: Sequence[complex]
    distances: Sequence[float]
    nearest: Sequence[int]
    b: float
    tolerance: float
    max_excess: float
    holds: bool


def sorted_eigenvalues(matrix: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    values = scipy.linalg.eigvals(np.asarray(matrix, dtype=np.complex128))
    order = np.lexsort((values.imag, values.real))
    return np.asarray(values[order], dtype=np.complex128)


def check_enclosure(pair: PerturbedPair, family: SegmentFamily) -> EnclosureReport:
    """Dense eigensolve of A; every eigenvalue must satisfy minⱼ dist(λ, Δⱼ) ≤ b + tol."""
    values = sorted_eigenvalues(pair.a_matrix)
    dist = family.distances(values)
    nearest = [family.first_index + int(k) for k in np.argmin(dist, axis=1)]
    best = np.min(dist, axis=1)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    tol = ENCLOSURE_TOL * scale
    excess = float(np.max(best - pair.b_norm)) if values.size else -math.inf
    holds = bool(excess <= tol)
    if not holds:
        logger.info("enclosure fails: an eigenvalue of A sits %.3g beyond U_b(Δ)", excess)
    return EnclosureReport(
        eigenvalues=[complex(v) for v in values],
        distances=[float(x) for x in best],
        nearest=nearest,
        b=pair.b_norm,
        tolerance=tol,
        max_excess=excess,
        holds=holds,
    )
