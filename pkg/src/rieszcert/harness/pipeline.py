"""End-to-end certification: hypothesis, enclosure, projections, basis, bounds."""

from __future__ import annotations

import logging
import math
import time
import warnings
from collections import Counter
from typing import Any, Callable, Dict, List, Optional, TypeVar

import numpy as np

from ..basis import BasisAnalyzer, BasisCertificate
from ..bounds import BoundChecker, admissible_n
from ..config import CertConfig, get_config
from ..contour import default_b_prime
from ..errors import InvalidInput, RieszCertError
from ..projections import (
    CorrectionIntegral,
    ProjectionEngine,
    compare_projection_sets,
    eigen_oracle_projections,
    verify_projection_set,
)
from ..resolvent import EnclosureReport, check_enclosure, spectral_norm
from ..spectral_model import (
    PerturbedPair,
    ProjectionSet,
    SegmentFamily,
    check_hypothesis,
    random_unit_vectors,
    unperturbed_projections,
)
from .instance import InstanceSpec
from .report import CertificationReport, StageError

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_R = TypeVar('_R')


class _StageFailed(Exception):
    pass


class CertificationPipeline:
    """Runs every certification stage in order and collects a CertificationReport."""

    def __init__(self, config: CertConfig | None = None) -> None:
        self.config = config or get_config()
        self.engine = ProjectionEngine(self.config)
        self.checker = BoundChecker(self.config)
        self.analyzer = BasisAnalyzer(self.config)

    @property
    def force(self) -> bool:
        return self.config.mode.force

    def _stage(self, report: CertificationReport, name: str, func: Callable[[], _R],
               hard: bool = False) -> _R:
        """Run one timed stage; errors are recorded and re-raised as _StageFailed."""
        logger.info("stage %s…", name)
        start = time.perf_counter()
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter('always')
                result = func()
        except RieszCertError as exc:
            numerical = not isinstance(exc, InvalidInput)
            report.errors.append(StageError(name, type(exc).__name__, str(exc), hard, numerical))
            logger.warning("stage %s failed: %s: %s", name, type(exc).__name__, exc)
            raise _StageFailed(name) from exc
        finally:
            report.timing[name] = time.perf_counter() - start
        counts = Counter(w.category.__name__ for w in caught)
        for category, count in sorted(counts.items()):
            report.warnings.append(f"{name}: {category} x{count}")
            logger.warning("stage %s: %d %s warning(s)", name, count, category)
        logger.info("stage %s done in %.2fs", name, report.timing[name])
        return result

    def run(self, pair: PerturbedPair, family: SegmentFamily,
            spec: InstanceSpec | None = None) -> CertificationReport:
        report = CertificationReport(
            instance=self._instance_echo(pair, family, spec),
            config=self.config.to_dict(),
            force=self.force,
        )
        try:
            self._run_stages(report, pair, family)
        except _StageFailed:
            logger.warning("certification stopped early")
        report.passed = bool(report.checks) and all(report.checks.values()) and not report.errors
        report.exit_code = exit_code_for(report)
        logger.info("certification %s (exit code %d)", 'passed' if report.passed else 'FAILED',
                    report.exit_code)
        return report

    def _instance_echo(self, pair: PerturbedPair, family: SegmentFamily,
                       spec: InstanceSpec | None) -> Dict[str, Any]:
        return {
            'n': pair.n,
            'segments': [[seg.alpha, seg.beta] for _, seg in family],
            'indices': [family.first_index, family.last_index],
            'b': pair.b_norm,
            'd': family.gap,
            'spec': spec.to_dict() if spec is not None else None,
        }

    def _run_stages(self, report: CertificationReport, pair: PerturbedPair,
                    family: SegmentFamily) -> None:
        scale = max(1.0, spectral_norm(pair.a_matrix))
        d = family.effective_gap

        hypothesis = self._stage(report, 'hypothesis', lambda: check_hypothesis(pair, family),
                                 hard=True)
        report.hypothesis = {'holds': hypothesis.holds, 'b': hypothesis.b, 'd': hypothesis.d,
                             'margin': hypothesis.margin}
        report.checks['hypothesis'] = hypothesis.holds
        if not hypothesis.holds and not self.force:
            logger.warning("b = %.6g ≥ d/2 = %.6g; rerun with --force to continue",
                           hypothesis.b, hypothesis.d / 2)
            return

        enclosure = self._stage(report, 'enclosure', lambda: check_enclosure(pair, family),
                                hard=True)
        report.enclosure = {'holds': enclosure.holds, 'max_excess': enclosure.max_excess,
                            'tolerance': enclosure.tolerance}
        report.checks['enclosure'] = enclosure.holds
        self._fill_geometry(report, pair, family, enclosure)

        projections = self._stage(
            report, 'contour_projections',
            lambda: self.engine.contour_projections(pair, family, allow_stall=self.force),
            hard=True,
        )
        unperturbed = unperturbed_projections(pair.t, family)
        self._projection_checks(report, pair, family, projections, scale)

        integrals = self._optional(lambda: self._stage(
            report, 'partial_sums', lambda: self._partial_sums(report, pair, family,
                                                               projections, unperturbed)))

        c1 = self._optional(lambda: self._stage(report, 'c1',
                                                lambda: self.checker.measure_c1(pair, family)))
        certificate = self._optional(lambda: self._stage(
            report, 'basis',
            lambda: self.analyzer.certify(pair, family, projections,
                                          c1 if c1 is not None else math.nan)))
        if certificate is not None:
            self._basis_checks(report, certificate, scale)
        else:
            report.checks['basis'] = False

        bounds, _ = self._stage(report, 'bounds', lambda: self.checker.run_suite(
            pair, family, projections, unperturbed, integrals, c1))
        report.bounds = [b.to_dict() for b in bounds]
        report.checks['bounds'] = all(b.passed for b in bounds)
        logger.info("bounds: %d/%d pass (d = %.6g)", sum(b.passed for b in bounds),
                    len(bounds), d)

    @staticmethod
    def _optional(run: Callable[[], _R]) -> Optional[_R]:
        try:
            return run()
        except _StageFailed:
            return None

    def _fill_geometry(self, report: CertificationReport, pair: PerturbedPair,
                       family: SegmentFamily, enclosure: EnclosureReport) -> None:
        b_prime = default_b_prime(pair.b_norm, family)
        contours = self.engine.segment_contours(pair, family)
        report.geometry = {
            'segments': [[seg.alpha, seg.beta] for _, seg in family],
            'b': pair.b_norm,
            'd': family.gap,
            'b_prime': b_prime,
            'contours': [[[float(z.real), float(z.imag)] for z in c.vertices]
                         for c in contours.values()],
        }
        report.eigenvalues = [
            {'re': lam.real, 'im': lam.imag, 'assigned_cluster': j, 'dist_to_segment': dist}
            for lam, j, dist in zip(enclosure.eigenvalues, enclosure.nearest, enclosure.distances)
        ]

    def _projection_checks(self, report: CertificationReport, pair: PerturbedPair,
                           family: SegmentFamily, projections: ProjectionSet,
                           scale: float) -> None:
        tol = self.config.tolerances
        verification = verify_projection_set(projections, pair, family)
        report.projections = {
            'method': projections.method.value,
            'flags': list(projections.flags),
            'idempotency': verification.idempotency,
            'minimality': verification.minimality,
            'completeness': verification.completeness,
            'commutation': verification.commutation,
            'rank_match': verification.rank_match,
            'ranks': {str(j): r for j, r in verification.ranks.items()},
        }
        report.checks['minimality'] = verification.minimality < tol.oracle
        report.checks['completeness'] = verification.completeness < tol.oracle
        report.checks['commutation'] = verification.commutation < tol.oracle * scale
        report.checks['rank_match'] = verification.rank_match

        oracle = self._optional(lambda: self._stage(
            report, 'oracle_projections',
            lambda: eigen_oracle_projections(pair, family, strict=not self.force)))
        if oracle is None:
            report.checks['oracle_match'] = False
            return
        distances = compare_projection_sets(projections, oracle)
        report.projections['oracle_flags'] = list(oracle.flags)
        report.projections['oracle_distance'] = {str(j): v for j, v in distances.items()}
        report.checks['oracle_match'] = max(distances.values()) < tol.oracle

    def _partial_sums(self, report: CertificationReport, pair: PerturbedPair,
                      family: SegmentFamily, projections: ProjectionSet,
                      unperturbed: ProjectionSet) -> Dict[int, CorrectionIntegral]:
        tol = self.config.tolerances
        x = random_unit_vectors(pair.n, 1, self.config.instance.seed)[0]
        integrals: Dict[int, CorrectionIntegral] = {}
        failures: List[str] = []
        for n in admissible_n(family):
            try:
                integral = self.engine.partial_sum_check(pair, family, n,
                                                         projections=projections,
                                                         unperturbed=unperturbed,
                                                         strict=False)
            except RieszCertError as exc:
                failures.append(f"n={n}: {type(exc).__name__}: {exc}")
                report.errors.append(StageError(f"partial_sums[n={n}]", type(exc).__name__,
                                                str(exc), False,
                                                not isinstance(exc, InvalidInput)))
                continue
            integrals[n] = integral
            report.partial_sums.append({
                'n': n,
                'norm': integral.norm,
                'horizontal_norm': integral.horizontal_norm,
                'vertical_norm': integral.vertical_norm,
                'applied_norm': float(np.linalg.norm(integral.matrix @ x)),
                'contour_residual': integral.contour_residual,
                'identity_residual': integral.identity_residual,
                'order': integral.order,
            })
        rows = report.partial_sums
        report.checks['partial_sums'] = not failures and all(
            r['contour_residual'] < tol.identity and r['identity_residual'] < tol.identity
            for r in rows
        )
        if rows:
            report.checks['correction_vanishes'] = rows[-1]['norm'] < tol.identity
        return integrals

    def _basis_checks(self, report: CertificationReport, certificate: BasisCertificate,
                      scale: float) -> None:
        tol = self.config.tolerances
        similarity = certificate.similarity
        report.basis = certificate.summary()
        report.checks['gram_orthogonality'] = certificate.cross_orthogonality < tol.oracle
        report.checks['similarity'] = max(similarity.hermitian_residual,
                                          similarity.idempotency_residual,
                                          similarity.reconstruction_residual) < tol.oracle
        report.checks['unconditional_constant'] = certificate.constant_within_condition
        report.checks['sum_bound'] = certificate.sum_bound_holds
        report.checks['block_off_diagonal'] = certificate.block_residual < tol.oracle * scale
        report.checks['block_spectrum'] = certificate.block_cluster_match


def exit_code_for(report: CertificationReport) -> int:
    """0 pass; 2 input error; 3 numerical hard error outside force mode; 1 otherwise."""
    if report.passed:
        return EXIT_PASS
    if any(not e.numerical for e in report.errors if e.hard):
        return EXIT_USAGE
    if not report.force and any(e.hard and e.numerical for e in report.errors):
        return EXIT_NUMERICAL
    return EXIT_FAILURE


def run_certification(pair: PerturbedPair, family: SegmentFamily,
                      config: CertConfig | None = None,
                      spec: InstanceSpec | None = None) -> CertificationReport:
    """Run every stage and return the aggregated report; never raises on a failing check."""
    return CertificationPipeline(config).run(pair, family, spec)
