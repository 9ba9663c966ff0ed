"""Instance generation, Matrix Market I/O, the certification pipeline and the CLI."""

from .instance import InstanceSpec, generate_instance
from .matrix_io import load_matrix, save_matrix
from .pipeline import run_certification
from .report import CertificationReport

__all__ = [
    'CertificationReport',
    'InstanceSpec',
    'generate_instance',
    'load_matrix',
    'run_certification',
    'save_matrix',
]
