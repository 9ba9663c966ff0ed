"""Closed-form constants and the numerical certificates of every estimate."""

import math

import numpy as np
import pytest


class TestBoundReport:

    def test_compare_with_slack(self):
        from rieszcert.bounds import BoundReport

        report = BoundReport.compare('x', 1.0 + 1e-10, 1.0)
        assert report.passed
        assert report.slack == pytest.approx(-1e-10)
        assert not BoundReport.compare('x', 1.1, 1.0).passed

    def test_strict(self):
        from rieszcert.bounds import BoundReport

        assert not BoundReport.compare('x', 1.0, 1.0, strict=True).passed
        assert BoundReport.compare('x', 0.5, 1.0, strict=True).passed

    def test_failed_precondition(self):
        from rieszcert.bounds import BoundReport

        report = BoundReport.compare('x', 0.0, 1.0, 'n=1', precondition=False)
        assert not report.passed
        assert report.context == 'n=1; precondition b < d/2 fails'

    def test_failure_and_worst(self):
        from rieszcert.bounds import BoundReport, worst
        from rieszcert.errors import SingularShift

        failed = BoundReport.failure('y', SingularShift('at λ = 1'))
        assert not failed.passed and math.isnan(failed.lhs)
        assert failed.context == 'error: SingularShift: at λ = 1'
        tight = BoundReport.compare('y', 0.99, 1.0)
        loose = BoundReport.compare('y', 0.1, 1.0)
        assert worst([loose, tight]) is tight
        assert worst([loose, failed, tight]) is failed
        assert worst([]) is None

    def test_regraded_follows_slack(self):
        from rieszcert.bounds import BoundReport

        report = BoundReport.compare('x', 1.0 + 1e-10, 1.0)
        assert report.passed
        assert not report.regraded(0.0).passed
        assert report.regraded(0.0).regraded(1e-8).passed
        strict = BoundReport.compare('x', 0.5, 1.0, strict=True)
        assert strict.regraded(-1.0) is strict
        blocked = BoundReport.compare('x', 0.0, 1.0, precondition=False)
        assert not blocked.regraded(1.0).passed
        assert set(report.to_dict()) == {'name', 'lhs', 'rhs', 'passed', 'slack', 'context'}


def test_vertical_constants():
    from rieszcert.bounds import check_vertical_constant_below_one, vertical_bound_constants

    central, outer = vertical_bound_constants(0.4, 1.0)
    assert central == pytest.approx(16.0)
    assert outer == pytest.approx(2.0 / 3.0)
    assert check_vertical_constant_below_one(0.4, 1.0).passed
    assert not check_vertical_constant_below_one(0.6, 1.0).passed
    assert vertical_bound_constants(0.5, 1.0)[0] == math.inf


def test_uniform_constant():
    from rieszcert.bounds import uniform_In_constant

    expected = (2 * 16.0 + 4 * 2.0 / 3.0 + 4 * 0.4 / 0.6) / (2 * math.pi)
    assert uniform_In_constant(0.4, 1.0) == pytest.approx(expected)
    assert uniform_In_constant(0.5, 1.0) == math.inf


def test_c1_closed_form():
    from rieszcert.bounds import c1_closed_form

    assert c1_closed_form(0.4, 1.0) == pytest.approx(2.0)
    assert c1_closed_form(0.0, 1.0) == 0.0
    assert c1_closed_form(0.6, 1.0) == math.inf


def test_horizontal_bound_value():
    # b = 0.4 at half-height γ = 10
    b, gamma = 0.4, 10.0
    assert b / ((gamma - b) * gamma) == pytest.approx(0.0041667, abs=1e-7)


def test_scalar_spectral_function_integral():
    from rieszcert.bounds import spectral_function_integral
    from rieszcert.spectral_model import HermitianOperator

    t = HermitianOperator.from_matrix([[0.0]])
    assert spectral_function_integral(t, [1.0], 1j) == pytest.approx(1.0)
    assert spectral_function_integral(t, [2.0], 3.0 + 4j) == pytest.approx(4.0 / 25.0)


def test_gap_sum_closed_form_matches_quadrature(instance):
    from rieszcert.bounds import gap_sum
    from rieszcert.contour import gap_midpoints, line_quadrature

    pair, family, _ = instance
    x = np.linspace(1.0, 2.0, pair.n) + 0.5j
    d = family.gap
    numeric = 0.0
    for c in gap_midpoints(family):
        points, weights = line_quadrature(complex(c, -d), complex(c, d), 32, d / 4)
        values = [np.linalg.norm(pair.t.apply_resolvent(lam, x)) ** 2 for lam in points]
        numeric += float(np.sum(np.abs(weights) * values))
    assert gap_sum(pair.t, family, x) == pytest.approx(numeric, rel=1e-10)


class TestInstanceChecks:

    @pytest.fixture(autouse=True)
    def _setup(self, instance, config):
        from rieszcert.spectral_model import random_unit_vectors

        self.pair, self.family, _ = instance
        self.config = config
        self.x = random_unit_vectors(self.pair.n, 1, 11)[0]

    def test_horizontal_bound(self):
        from rieszcert.bounds import check_horizontal_bound

        report = check_horizontal_bound(self.pair, self.family, 1)
        assert report.passed
        assert report.rhs == pytest.approx(0.8 / ((5.0 - 0.8) * 5.0))
        assert report.context.startswith('n=1')

    def test_vertical_bounds(self):
        from rieszcert.bounds import check_vertical_bounds

        central, outer = check_vertical_bounds(self.pair, self.family, 1, self.config)
        assert central.passed and outer.passed
        assert central.rhs == pytest.approx(16.0)
        assert outer.rhs == pytest.approx(2.0 / 3.0)

    def test_uniform_correction_bound(self):
        from rieszcert.bounds import check_In_uniform_bound

        reports = check_In_uniform_bound(self.pair, self.family, self.config)
        assert [r.name for r in reports] == ['In_uniform[n=0]', 'In_uniform[n=1]']
        assert all(r.passed for r in reports)
        assert len({r.rhs for r in reports}) == 1

    def test_spectral_measure_and_decay(self):
        from rieszcert.bounds import check_resolvent_decay, check_spectral_measure

        assert check_spectral_measure(self.pair.t, self.family, self.x).passed
        assert check_resolvent_decay(self.pair.t, self.x).passed

    def test_line_integral_identity(self):
        from rieszcert.bounds import check_line_integral_identity

        report = check_line_integral_identity(self.pair.t, self.family, self.x)
        assert report.passed, report.context
        assert report.lhs < 1e-6

    def test_gap_sum_and_kernel(self):
        from rieszcert.bounds import C2, check_gap_kernel_bound, check_gap_sum_bound

        gap_report = check_gap_sum_bound(self.pair.t, self.family, self.x)
        assert gap_report.passed
        assert gap_report.rhs == pytest.approx(4 * C2 / 2.0)
        kernel = check_gap_kernel_bound(self.pair.t, self.family)
        assert kernel.passed
        assert kernel.rhs == pytest.approx(2 * C2 / 4.0)

    def test_neighborhood_separation(self):
        from rieszcert.bounds import check_neighborhood_separation

        report = check_neighborhood_separation(self.family, 0.8)
        assert report.passed
        assert report.lhs == pytest.approx(0.4)
        assert not check_neighborhood_separation(self.family, 1.2).passed

    def test_c1_and_aggregate(self):
        from rieszcert.bounds import c1_closed_form, check_step2_aggregate, measure_c1

        c1 = measure_c1(self.pair, self.family, self.config)
        assert 0.0 < c1 <= c1_closed_form(0.8, 2.0) + 1e-9
        report = check_step2_aggregate(self.pair, self.family, self.x, c1, self.config)
        assert report.passed

    def test_full_suite(self):
        from rieszcert.bounds import run_bound_suite
        from rieszcert.projections import contour_projections

        projections = contour_projections(self.pair, self.family, config=self.config)
        reports, c1 = run_bound_suite(self.pair, self.family, projections, self.config)
        names = [r.name for r in reports]
        assert names == [
            'neighborhood_separation',
            'a_resolvent_bound', 'neumann_bound', 'g_norm_bound', 'splitting_identity',
            'horizontal_bound',
            'vertical_central', 'vertical_outer',
            'vertical_constant_below_one',
            'In_uniform[n=0]', 'In_uniform[n=1]',
            'spectral_measure_identity',
            'resolvent_decay',
            'line_integral_identity',
            'gap_sum_bound',
            'gap_kernel_bound',
            'c1_closed_form',
            'step2_projection_identity', 'step2_aggregate',
        ]
        failed = [(r.name, r.context) for r in reports if not r.passed]
        assert not failed
        assert c1 > 0

    def test_suite_without_projections_reports_the_identity_failed(self):
        from rieszcert.bounds import BoundChecker

        reports, _ = BoundChecker(self.config).run_suite(self.pair, self.family)
        by_name = {r.name: r for r in reports}
        assert not by_name['step2_projection_identity'].passed
        assert not by_name['step2_aggregate'].passed
        assert by_name['In_uniform[n=1]'].passed


def test_suite_on_unperturbed_pair(unperturbed_instance, config):
    from rieszcert.bounds import run_bound_suite
    from rieszcert.spectral_model import unperturbed_projections

    pair, family, _ = unperturbed_instance
    reports, c1 = run_bound_suite(pair, family, unperturbed_projections(pair.t, family), config)
    assert c1 == 0.0
    assert all(r.passed for r in reports), [r.name for r in reports if not r.passed]


def test_precondition_failure_is_reported():
    from conftest import make_instance, small_config
    from rieszcert.bounds import BoundChecker

    pair, family, _ = make_instance(b_ratio=1.2)
    checker = BoundChecker(small_config())
    central, outer = checker.check_vertical_bounds(pair, family, 1)
    assert not central.passed and not outer.passed
    assert 'precondition' in central.context


def test_suite_grades_with_configured_slack(instance):
    from conftest import small_config
    from rieszcert.bounds import BoundChecker

    pair, family, _ = instance
    reports, _ = BoundChecker(small_config(**{'tolerances.report_slack': -1.0})).run_suite(
        pair, family)
    by_name = {r.name: r for r in reports}
    assert not by_name['horizontal_bound'].passed
    assert not by_name['gap_kernel_bound'].passed
    assert by_name['vertical_constant_below_one'].passed
