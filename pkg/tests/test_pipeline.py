"""End-to-end certification runs and exit codes."""

import pytest

EXPECTED_CHECKS = {
    'hypothesis', 'enclosure', 'minimality', 'completeness', 'commutation', 'rank_match',
    'oracle_match', 'partial_sums', 'correction_vanishes', 'gram_orthogonality', 'similarity',
    'unconditional_constant', 'sum_bound', 'block_off_diagonal', 'block_spectrum', 'bounds',
}


def test_perturbed_instance_passes(instance, config):
    from rieszcert.harness.pipeline import EXIT_PASS, run_certification

    pair, family, spec = instance
    report = run_certification(pair, family, config, spec)
    assert set(report.checks) == EXPECTED_CHECKS
    assert report.failed_checks == []
    assert report.errors == []
    assert report.passed
    assert report.exit_code == EXIT_PASS

    assert report.instance['spec'] == spec.to_dict()
    assert report.instance['indices'] == [-1, 1]
    assert report.projections['ranks'] == {'-1': 3, '0': 2, '1': 3}
    assert [row['n'] for row in report.partial_sums] == [0, 1]
    assert len(report.eigenvalues) == pair.n
    assert len(report.geometry['contours']) == len(family)
    assert report.basis['unconditional_constant'] <= report.basis['cond_K'] + 1e-6
    assert 'horizontal_bound' in report.bound_names()
    assert set(report.timing) >= {'hypothesis', 'enclosure', 'contour_projections', 'basis',
                                  'bounds'}


def test_unperturbed_instance_has_unit_constants(unperturbed_instance, config):
    from rieszcert.harness.pipeline import run_certification

    pair, family, spec = unperturbed_instance
    report = run_certification(pair, family, config, spec)
    assert report.passed, report.failed_checks
    assert report.basis['cond_K'] == pytest.approx(1.0)
    assert report.basis['unconditional_constant'] == pytest.approx(1.0)
    assert all(row['norm'] < 1e-6 for row in report.partial_sums)


def test_hypothesis_failure_stops_without_force(config):
    from conftest import make_instance
    from rieszcert.harness.pipeline import EXIT_FAILURE, run_certification

    pair, family, spec = make_instance(b_ratio=1.2)
    report = run_certification(pair, family, config, spec)
    assert report.checks == {'hypothesis': False}
    assert not report.hypothesis['holds']
    assert report.projections == {}
    assert report.exit_code == EXIT_FAILURE


def test_force_mode_runs_through_and_fails():
    from conftest import make_instance, small_config
    from rieszcert.harness.pipeline import EXIT_FAILURE, run_certification

    pair, family, spec = make_instance(b_ratio=1.2)
    report = run_certification(pair, family, small_config(**{'mode.force': True}), spec)
    assert report.force
    assert not report.passed
    assert report.checks['hypothesis'] is False
    assert 'enclosure' in report.checks
    assert report.exit_code == EXIT_FAILURE


class TestExitCodes:

    def _report(self, **kwargs):
        from rieszcert.harness.report import CertificationReport
        return CertificationReport(**kwargs)

    def test_pass(self):
        from rieszcert.harness.pipeline import exit_code_for

        assert exit_code_for(self._report(passed=True)) == 0

    def test_numerical_hard_error(self):
        from rieszcert.harness.pipeline import exit_code_for
        from rieszcert.harness.report import StageError

        error = StageError('contour_projections', 'QuadratureStalled', 'stalled', True, True)
        assert exit_code_for(self._report(errors=[error])) == 3
        assert exit_code_for(self._report(errors=[error], force=True)) == 1

    def test_input_error(self):
        from rieszcert.harness.pipeline import exit_code_for
        from rieszcert.harness.report import StageError

        error = StageError('hypothesis', 'SpectrumOutsideSegments', 'outside', True, False)
        assert exit_code_for(self._report(errors=[error])) == 2

    def test_soft_error_is_a_failure(self):
        from rieszcert.harness.pipeline import exit_code_for
        from rieszcert.harness.report import StageError

        error = StageError('basis', 'IndefiniteGram', 'indefinite', False, True)
        assert exit_code_for(self._report(errors=[error], checks={'basis': False})) == 1


def test_spectrum_outside_segments_is_an_input_error():
    import numpy as np

    from conftest import small_config
    from rieszcert.harness.pipeline import EXIT_USAGE, run_certification
    from rieszcert.spectral_model import PerturbedPair, build_segment_family

    pair = PerturbedPair.from_matrices(np.diag([0.5, 2.0]), np.zeros((2, 2)))
    family = build_segment_family([(0.0, 1.0), (3.0, 4.0)])
    report = run_certification(pair, family, small_config())
    assert report.errors[0].error_type == 'SpectrumOutsideSegments'
    assert report.exit_code == EXIT_USAGE


def test_segment_without_eigenvalues_passes(config):
    from conftest import make_instance
    from rieszcert.harness.pipeline import EXIT_PASS, run_certification

    pair, family, spec = make_instance(cluster_sizes=(3, 0, 3))
    report = run_certification(pair, family, config, spec)
    assert report.errors == []
    assert report.failed_checks == []
    assert report.projections['ranks'] == {'-1': 3, '0': 0, '1': 3}
    assert report.exit_code == EXIT_PASS
