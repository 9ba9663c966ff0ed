"""CertificationReport serialization and its CSV and SVG renderings."""

import csv
import json
import math

import pytest


def _report():
    from rieszcert.harness.report import CertificationReport, StageError

    return CertificationReport(
        instance={'n': 2, 'segments': [[0.0, 1.0], [3.0, 4.0]]},
        hypothesis={'holds': True, 'b': 0.5, 'd': 2.0, 'margin': 0.5},
        bounds=[{'name': 'horizontal_bound', 'lhs': 0.01, 'rhs': 0.02, 'passed': True,
                 'slack': 0.01, 'context': 'n=1'},
                {'name': 'c1_closed_form', 'lhs': math.nan, 'rhs': math.nan, 'passed': False,
                 'slack': math.nan, 'context': 'error: SingularShift: boom'}],
        eigenvalues=[{'re': 0.4, 'im': 0.1, 'assigned_cluster': 0, 'dist_to_segment': 0.1},
                     {'re': 3.5, 'im': -0.2, 'assigned_cluster': 1, 'dist_to_segment': 0.2}],
        geometry={'segments': [[0.0, 1.0], [3.0, 4.0]], 'b': 0.5, 'd': 2.0, 'b_prime': 0.75,
                  'contours': [[[-0.75, -0.75], [1.75, -0.75], [1.75, 0.75], [-0.75, 0.75]]]},
        checks={'hypothesis': True, 'bounds': False},
        errors=[StageError('bounds', 'SingularShift', 'boom', False, True)],
        timing={'bounds': 0.25},
    )


def test_json_round_trip_is_stable():
    from rieszcert.harness.report import CertificationReport

    report = _report()
    text = report.to_json()
    again = CertificationReport.from_json(text)
    assert again.to_json() == text
    assert again.errors[0].error_type == 'SingularShift'
    assert again.failed_checks == ['bounds']
    assert again.bound_names() == ['horizontal_bound', 'c1_closed_form']


def test_non_finite_values_survive_strict_json():
    from rieszcert.harness.report import CertificationReport

    report = _report()
    report.bounds.append({'name': 'horizontal_bound', 'lhs': math.inf, 'rhs': -math.inf,
                          'passed': False, 'slack': -math.inf, 'context': 'n=1'})
    text = report.to_json()

    def reject(token):
        raise ValueError(token)

    json.loads(text, parse_constant=reject)
    again = CertificationReport.from_json(text)
    failed, unbounded = again.bounds[1], again.bounds[2]
    assert all(math.isnan(failed[key]) for key in ('lhs', 'rhs', 'slack'))
    assert unbounded['lhs'] == math.inf and unbounded['rhs'] == -math.inf
    assert again.bounds[0] == report.bounds[0]
    assert again.hypothesis == report.hypothesis
    assert again.geometry == report.geometry


def test_without_timing():
    data = _report().without_timing()
    assert 'timing' not in data
    assert data['schema'] == 1


def test_unknown_keys_are_ignored():
    from rieszcert.harness.report import CertificationReport

    report = CertificationReport.from_dict({'checks': {'x': True}, 'extra': 1})
    assert report.checks == {'x': True}


def test_render_writes_all_outputs(tmp_path):
    from rieszcert.harness.report import EIGENVALUE_COLUMNS, read_json, render

    report = _report()
    paths = render(report, tmp_path / 'out')
    assert set(paths) == {'report', 'eigenvalues', 'plot'}
    assert read_json(paths['report']).to_json() == report.to_json()

    with open(paths['eigenvalues'], newline='') as handle:
        rows = list(csv.DictReader(handle))
    assert tuple(rows[0]) == EIGENVALUE_COLUMNS
    assert [row['assigned_cluster'] for row in rows] == ['0', '1']
    assert float(rows[1]['im']) == pytest.approx(-0.2)

    svg = paths['plot'].read_text()
    assert '<svg' in svg


def test_render_without_plot(tmp_path):
    from rieszcert.harness.report import render

    paths = render(_report(), tmp_path, 'r.json', 'e.csv', None)
    assert set(paths) == {'report', 'eigenvalues'}
    assert (tmp_path / 'r.json').exists()
    assert not (tmp_path / 'plane.svg').exists()


def test_plot_handles_unperturbed_geometry(tmp_path):
    from rieszcert.harness.report import CertificationReport, write_plot

    report = CertificationReport(geometry={'segments': [[0.0, 1.0]], 'b': 0.0,
                                           'd': math.inf, 'contours': []})
    path = write_plot(report, tmp_path / 'p.svg')
    assert path.stat().st_size > 0
