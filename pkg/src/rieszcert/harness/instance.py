"""Seeded generation of (T, B) pairs satisfying the clustered-spectrum hypotheses."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from ..config import InstanceConfig
from ..errors import InvalidSpec
from ..spectral_model import PerturbedPair, SegmentFamily, build_segment_family

logger = logging.getLogger(__name__)

PERTURBATION_STYLES = ('dense_random', 'cluster_coupling', 'hermitian', 'cluster_preserving')


@dataclass(frozen=True)
class InstanceSpec:
    """Dimension, segments with eigenvalue counts, perturbation size and style."""
    n: int
    segments: Tuple[Tuple[float, float], ...]
    cluster_sizes: Tuple[int, ...]
    b_ratio: float
    seed: int = 0
    perturbation_style: str = 'dense_random'

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpec(f"dimension must be positive, got {self.n}")
        if len(self.segments) != len(self.cluster_sizes):
            raise InvalidSpec(
                f"{len(self.segments)} segments but {len(self.cluster_sizes)} cluster sizes"
            )
        if any(size < 0 for size in self.cluster_sizes):
            raise InvalidSpec(f"cluster sizes must be non-negative: {list(self.cluster_sizes)}")
        if sum(self.cluster_sizes) != self.n:
            raise InvalidSpec(f"cluster sizes sum to {sum(self.cluster_sizes)}, n is {self.n}")
        if not (math.isfinite(self.b_ratio) and self.b_ratio >= 0):
            raise InvalidSpec(f"b_ratio must be finite and non-negative, got {self.b_ratio}")
        if self.perturbation_style not in PERTURBATION_STYLES:
            raise InvalidSpec(f"unknown perturbation style {self.perturbation_style!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidSpec(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def from_config(cls, config: InstanceConfig) -> InstanceSpec:
        return cls(
            n=config.n,
            segments=tuple((float(a), float(b)) for a, b in config.segments),
            cluster_sizes=tuple(int(s) for s in config.cluster_sizes),
            b_ratio=config.b_ratio,
            seed=config.seed,
            perturbation_style=config.perturbation_style,
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> InstanceSpec:
        try:
            return cls(
                n=int(data['n']),
                segments=tuple((float(a), float(b)) for a, b in data['segments']),
                cluster_sizes=tuple(int(s) for s in data['cluster_sizes']),
                b_ratio=float(data['b_ratio']),
                seed=int(data.get('seed', 0)),
                perturbation_style=str(data.get('perturbation_style', 'dense_random')),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed instance spec: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['segments'] = [list(seg) for seg in self.segments]
        data['cluster_sizes'] = list(self.cluster_sizes)
        return data


def _random_unitary(rng: np.random.Generator, n: int) -> npt.NDArray[np.complex128]:
    """Haar unitary: QR of a complex Gaussian with the phases of diag(R) divided out."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = scipy.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return np.asarray(q * phases)


def _cluster_mask(sizes: List[int], same: bool) -> npt.NDArray[np.bool_]:
    labels = np.repeat(np.arange(len(sizes)), sizes)
    mask = labels[:, None] == labels[None, :]
    return mask if same else ~mask


def _raw_perturbation(rng: np.random.Generator, style: str, unitary: npt.NDArray[np.complex128],
                      sizes: List[int]) -> npt.NDArray[np.complex128]:
    n = unitary.shape[0]
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if style == 'dense_random':
        return x
    if style == 'hermitian':
        return x + x.conj().T
    # the remaining styles are shaped in T's eigenbasis
    keep = _cluster_mask(sizes, same=style == 'cluster_preserving')
    return np.asarray(unitary @ np.where(keep, x, 0.0) @ unitary.conj().T)


def generate_instance(spec: InstanceSpec) -> Tuple[PerturbedPair, SegmentFamily]:
    """T = U·diag(t)·U* with tᵢ uniform in the segments, B = b·R/‖R‖₂ with b = b_ratio·d/2.

    Draws come from one Philox stream keyed by ``spec.seed`` in a fixed order:
    eigenvalues, then U, then R.
    """
    family = build_segment_family(spec.segments)
    counts = dict(zip(spec.segments, spec.cluster_sizes))
    sizes = [counts[(seg.alpha, seg.beta)] for _, seg in family]

    rng = np.random.Generator(np.random.Philox(spec.seed))
    eigs = np.concatenate([
        np.sort(rng.uniform(seg.alpha, seg.beta, size)) for (_, seg), size in zip(family, sizes)
    ])
    u = _random_unitary(rng, spec.n)
    t = (u * eigs) @ u.conj().T
    t = 0.5 * (t + t.conj().T)

    raw = _raw_perturbation(rng, spec.perturbation_style, u, sizes)
    b = spec.b_ratio * family.effective_gap / 2
    if b == 0.0:
        b_matrix = np.zeros_like(t)
    else:
        raw_norm = float(scipy.linalg.svdvals(raw)[0])
        if raw_norm == 0.0:
            raise InvalidSpec(
                f"perturbation style {spec.perturbation_style!r} is identically zero here"
            )
        b_matrix = b * raw / raw_norm

    pair = PerturbedPair.from_matrices(t, b_matrix)
    logger.debug("generated n=%d instance: d=%.6g b=%.6g style=%s seed=%d", spec.n,
                 family.gap, pair.b_norm, spec.perturbation_style, spec.seed)
    return pair, family
