"""Riesz projections of A = T + B for Hermitian T with a clustered spectrum,
with numerical certificates that the projections form an unconditional basis."""

from .config import CertConfig, get_config
from .errors import InvalidInput, NumericalError, RieszCertError
from .projections import (
    ProjectionEngine,
    contour_projections,
    eigen_oracle_projections,
    expand_vector,
    partial_sum_check,
    riesz_projection,
    verify_projection_set,
)
from .spectral_model import (
    HermitianOperator,
    PerturbedPair,
    ProjectionSet,
    Segment,
    SegmentFamily,
    build_segment_family,
    check_hypothesis,
)

__version__ = '0.1.0'

__all__ = [
    'CertConfig',
    'HermitianOperator',
    'InvalidInput',
    'NumericalError',
    'PerturbedPair',
    'ProjectionEngine',
    'ProjectionSet',
    'RieszCertError',
    'Segment',
    'SegmentFamily',
    'build_segment_family',
    'check_hypothesis',
    'contour_projections',
    'eigen_oracle_projections',
    'expand_vector',
    'get_config',
    'partial_sum_check',
    'riesz_projection',
    'verify_projection_set',
]
