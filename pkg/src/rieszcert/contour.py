"""Closed polygonal integration contours with composite Gauss–Legendre nodes."""

from __future__ import annotations

import dataclasses
import enum
import functools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.special

from .errors import ContourTouchesSpectrumNeighborhood, InvalidInput
from .spectral_model import ComplexVector, Segment, SegmentFamily

DEFAULT_ORDER = 32
MIN_CAP_POINTS = 16

HORIZONTAL = 'horizontal'
VERTICAL = 'vertical'
VERTICAL_CENTRAL = 'vertical_central'
VERTICAL_OUTER = 'vertical_outer'
CAP = 'cap'


class ContourKind(str, enum.Enum):
    SEGMENT_RECTANGLE = 'segment_rectangle'
    STADIUM = 'stadium'
    PARTIAL_SUM_RECTANGLE = 'partial_sum_rectangle'
    STEP2_RECTANGLE = 'step2_rectangle'


@functools.lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Nodes and weights on [-1, 1]."""
    nodes, weights = scipy.special.roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def line_quadrature(z0: complex, z1: complex, order: int,
                    panel_length: float | None = None) -> Tuple[ComplexVector, ComplexVector]:
    """Composite Gauss–Legendre rule for ∫ f(λ) dλ along the straight path z0 → z1.

    The edge is cut into equal panels no longer than ``panel_length``; the weights
    carry the direction factor dλ.
    """
    if order < 2:
        raise InvalidInput(f"quadrature order must be ≥ 2, got {order}")
    length = abs(z1 - z0)
    panels = 1
    if panel_length is not None and panel_length > 0 and length > panel_length:
        panels = int(math.ceil(length / panel_length))
    x, w = gauss_legendre(order)
    ends = z0 + (z1 - z0) * np.linspace(0.0, 1.0, panels + 1)
    mids = 0.5 * (ends[:-1] + ends[1:])
    halves = 0.5 * (ends[1:] - ends[:-1])
    points = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
    weights = (halves[:, None] * w[None, :]).ravel()
    return points.astype(np.complex128), weights.astype(np.complex128)


def _point_edge_distance(z: complex, z0: complex, z1: complex) -> float:
    d = z1 - z0
    if d == 0:
        return abs(z - z0)
    s = ((z - z0) * d.conjugate()).real / abs(d) ** 2
    s = min(max(s, 0.0), 1.0)
    return abs(z - (z0 + s * d))


def _cross(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


def _edges_intersect(p0: complex, p1: complex, q0: complex, q1: complex) -> bool:
    d1 = _cross(p1 - p0, q0 - p0)
    d2 = _cross(p1 - p0, q1 - p0)
    d3 = _cross(q1 - q0, p0 - q0)
    d4 = _cross(q1 - q0, p1 - q0)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def edge_segment_distance(z0: complex, z1: complex, segment: Segment) -> float:
    """Distance between the edge z0 → z1 and a real segment."""
    q0, q1 = complex(segment.alpha), complex(segment.beta)
    if _edges_intersect(z0, z1, q0, q1):
        return 0.0
    return min(
        _point_edge_distance(z0, q0, q1),
        _point_edge_distance(z1, q0, q1),
        _point_edge_distance(q0, z0, z1),
        _point_edge_distance(q1, z0, z1),
    )


@dataclass(frozen=True)
class RectangleSpec:
    """Axis-aligned rectangle [left, right] × [−half_height, half_height]."""
    left: float
    right: float
    half_height: float

    def __post_init__(self) -> None:
        if not self.left < self.right:
            raise InvalidInput(f"rectangle needs left < right, got {self.left}, {self.right}")
        if not self.half_height > 0:
            raise InvalidInput(f"rectangle needs half_height > 0, got {self.half_height}")

    def outline(self, split: float | None = None,
                vertical_tag: str = VERTICAL) -> Tuple[List[complex], List[str]]:
        """Counterclockwise corners from the lower-left, optionally splitting the
        vertical sides at ±``split`` into outer and central pieces."""
        lo, hi, h = self.left, self.right, self.half_height
        if split is None or not 0 < split < h:
            return (
                [complex(lo, -h), complex(hi, -h), complex(hi, h), complex(lo, h)],
                [HORIZONTAL, vertical_tag, HORIZONTAL, vertical_tag],
            )
        s = split
        vertices = [
            complex(lo, -h), complex(hi, -h), complex(hi, -s), complex(hi, s),
            complex(hi, h), complex(lo, h), complex(lo, s), complex(lo, -s),
        ]
        tags = [
            HORIZONTAL, VERTICAL_OUTER, VERTICAL_CENTRAL, VERTICAL_OUTER,
            HORIZONTAL, VERTICAL_OUTER, VERTICAL_CENTRAL, VERTICAL_OUTER,
        ]
        return vertices, tags


@dataclass(frozen=True, eq=False)
class Contour:
    """Closed counterclockwise polyline with quadrature nodes for ∮ f(λ) dλ."""
    vertices: ComplexVector
    kind: ContourKind
    edge_tags: Tuple[str, ...]
    order: int = 0
    panel_length: float | None = None
    points: ComplexVector = dataclasses.field(
        default_factory=lambda: np.zeros(0, dtype=np.complex128))
    weights: ComplexVector = dataclasses.field(
        default_factory=lambda: np.zeros(0, dtype=np.complex128))
    node_edges: npt.NDArray[np.int64] = dataclasses.field(
        default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def edges(self) -> List[Tuple[complex, complex]]:
        v = [complex(z) for z in self.vertices]
        return list(zip(v, v[1:] + v[:1]))

    @property
    def nodes(self) -> List[Tuple[complex, complex]]:
        return [(complex(p), complex(w)) for p, w in zip(self.points, self.weights)]

    @property
    def length(self) -> float:
        return float(sum(abs(z1 - z0) for z0, z1 in self.edges))

    @property
    def signed_area(self) -> float:
        return 0.5 * float(sum(_cross(z0, z1) for z0, z1 in self.edges))

    @property
    def centroid(self) -> complex:
        area = self.signed_area
        cx = cy = 0.0
        for z0, z1 in self.edges:
            c = _cross(z0, z1)
            cx += (z0.real + z1.real) * c
            cy += (z0.imag + z1.imag) * c
        return complex(cx / (6 * area), cy / (6 * area))

    def integrate(self, values: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Σ wₘ f(λₘ) for values stacked along the first axis, in node order."""
        vals = np.asarray(values, dtype=np.complex128)
        return np.asarray(np.tensordot(self.weights, vals, axes=(0, 0)))

    def edge_mask(self, *tags: str) -> npt.NDArray[np.bool_]:
        """Nodes lying on edges carrying one of ``tags``."""
        wanted = np.array([tag in tags for tag in self.edge_tags], dtype=bool)
        return wanted[self.node_edges]

    def winding_number(self, z: complex) -> float:
        """Argument-sum winding number of the polyline around ``z``."""
        total = 0.0
        for z0, z1 in self.edges:
            total += float(np.angle((z1 - z) / (z0 - z)))
        return total / (2 * math.pi)

    def encloses(self, z: complex) -> bool:
        return round(self.winding_number(z)) == 1

    def clearance(self, family: SegmentFamily) -> float:
        """Minimum distance from the polyline to ∪Δⱼ."""
        return min(edge_segment_distance(z0, z1, seg)
                   for z0, z1 in self.edges for _, seg in family)


def attach_quadrature(contour: Contour, order_per_edge: int,
                      panel_length: float | None = None) -> Contour:
    """Composite Gauss–Legendre nodes and dλ-weights along every edge."""
    points, weights, owners = [], [], []
    for index, (z0, z1) in enumerate(contour.edges):
        if z0 == z1:
            continue
        p, w = line_quadrature(z0, z1, order_per_edge, panel_length)
        points.append(p)
        weights.append(w)
        owners.append(np.full(p.shape, index, dtype=np.int64))
    pts = np.concatenate(points)
    wts = np.concatenate(weights)
    own = np.concatenate(owners)
    for arr in (pts, wts, own):
        arr.setflags(write=False)
    return dataclasses.replace(contour, order=order_per_edge, panel_length=panel_length,
                               points=pts, weights=wts, node_edges=own)


def _make(vertices: Sequence[complex], tags: Sequence[str], kind: ContourKind,
          order: int, panel_length: float | None) -> Contour:
    verts = np.array(vertices, dtype=np.complex128)
    verts.setflags(write=False)
    return attach_quadrature(Contour(verts, kind, tuple(tags)), order, panel_length)


def gap_midpoints(family: SegmentFamily) -> List[float]:
    """Midpoints cⱼ = (βⱼ + α_{j+1})/2 framed by the sentinels α_first − d/2, β_last + d/2.

    Entry ``j − first_index`` is the left midpoint of Δⱼ, the next entry its right one.
    """
    d = family.effective_gap
    segs = family.segments
    interior = [0.5 * (left.beta + right.alpha) for left, right in zip(segs, segs[1:])]
    return [segs[0].alpha - d / 2, *interior, segs[-1].beta + d / 2]


def segment_bounds(family: SegmentFamily, j: int) -> Tuple[float, float]:
    """(c_{j−1}, cⱼ): the midpoints on either side of Δⱼ."""
    if j not in family.indices:
        raise InvalidInput(f"segment index {j} outside {family.indices}")
    mids = gap_midpoints(family)
    k = j - family.first_index
    return mids[k], mids[k + 1]


def default_b_prime(b: float, family: SegmentFamily) -> float:
    """Midpoint (b + d/2)/2 of the admissible interval (b, d/2).

    When b ≥ d/2 there is no admissible value; 3d/8 keeps the contours disjoint.
    """
    d = family.effective_gap
    if not math.isfinite(family.gap):
        return b + d / 4
    if b < d / 2:
        return 0.5 * (b + d / 2)
    return 3 * d / 8


def segment_contour(segment: Segment, b_prime: float, style: str = 'stadium',
                    order: int = DEFAULT_ORDER, panel_length: float | None = None,
                    cap_points: int = MIN_CAP_POINTS) -> Contour:
    """Γⱼ = ∂U_{b′}(Δⱼ) as a stadium polygon, or the bounding rectangle of U_{b′}(Δⱼ)."""
    if not b_prime > 0:
        raise InvalidInput(f"b' must be positive, got {b_prime}")
    if style == 'rectangle':
        spec = RectangleSpec(segment.alpha - b_prime, segment.beta + b_prime, b_prime)
        vertices, tags = spec.outline()
        return _make(vertices, tags, ContourKind.SEGMENT_RECTANGLE, order, panel_length)
    if style != 'stadium':
        raise InvalidInput(f"unknown contour style {style!r}")

    m = max(cap_points, MIN_CAP_POINTS)
    # circumscribed caps: every edge is tangent to the circle of radius b'
    radius = b_prime / math.cos(math.pi / (2 * m))
    offsets = (np.arange(m) + 0.5) * math.pi / m
    right = segment.beta + radius * np.exp(1j * (-math.pi / 2 + offsets))
    left = segment.alpha + radius * np.exp(1j * (math.pi / 2 + offsets))
    vertices = [*right, *left]
    tags = [CAP] * (m - 1) + [HORIZONTAL] + [CAP] * (m - 1) + [HORIZONTAL]
    return _make(vertices, tags, ContourKind.STADIUM, order, panel_length)


def included_indices(family: SegmentFamily, n: int) -> range:
    """Indices j with |j| ≤ n present in the family."""
    return range(max(-n, family.first_index), min(n, family.last_index) + 1)


def partial_sum_rectangle(family: SegmentFamily, n: int, b: float | None = None,
                          order: int = DEFAULT_ORDER,
                          panel_length: float | None = None) -> Contour:
    """∂R_n: vertical sides through c_{−n}, c_n, half-height γ_n = max{|c_{−n}|, |c_n|, d}.

    Vertical sides are split at ±d into the central piece ω_n and the outer pieces ω±_n.
    With ``b`` given, every side must stay (d/2 − b)/4 away from U_b(Δ).
    """
    if n < 0 or not included_indices(family, n):
        raise InvalidInput(f"no segment index in [-{n}, {n}] for family {family.indices}")
    mids = gap_midpoints(family)
    first = family.first_index
    left = mids[max(-n - first, 0)]
    right = mids[min(n - first + 1, len(family))]
    d = family.effective_gap
    gamma = max(abs(left), abs(right), d)
    vertices, tags = RectangleSpec(left, right, gamma).outline(split=d,
                                                               vertical_tag=VERTICAL_CENTRAL)
    contour = _make(vertices, tags, ContourKind.PARTIAL_SUM_RECTANGLE, order, panel_length)
    if b is not None:
        guard = b + (d / 2 - b) / 4
        clearance = contour.clearance(family)
        if clearance < guard:
            raise ContourTouchesSpectrumNeighborhood(
                f"∂R_{n} passes within {clearance - b:.3g} of U_b(Δ); "
                f"need {(d / 2 - b) / 4:.3g}"
            )
    return contour


def rectangle_half_height(contour: Contour) -> float:
    return float(np.max(contour.vertices.imag))


def step2_rectangle(family: SegmentFamily, j: int, order: int = DEFAULT_ORDER,
                    panel_length: float | None = None) -> Contour:
    """Γ̃ⱼ = ∂([c_{j−1}, cⱼ] × [−d, d])."""
    left, right = segment_bounds(family, j)
    vertices, tags = RectangleSpec(left, right, family.effective_gap).outline()
    return _make(vertices, tags, ContourKind.STEP2_RECTANGLE, order, panel_length)
