"""Command-line subcommands and their exit codes."""

import json

import pytest

INSTANCE_ARGS = [
    '--instance.n', '8',
    '--instance.segments', '[[-3, -2], [0, 1], [3, 4]]',
    '--instance.cluster_sizes', '3,2,3',
    '--seed', '7',
    '--tolerances.resolvent_samples', '100',
    '--tolerances.vector_samples', '10',
    '--mode.sign_samples', '200',
    '-q',
]


def _run(command, out, *extra):
    from rieszcert.harness.cli import main
    return main([command, '--out', str(out), *INSTANCE_ARGS, *extra])


def test_generate_writes_instance(tmp_path):
    assert _run('generate', tmp_path) == 0
    assert {p.name for p in tmp_path.iterdir()} >= {'T.mtx', 'B.mtx', 'instance.json'}
    meta = json.loads((tmp_path / 'instance.json').read_text())
    assert meta['segments'] == [[-3.0, -2.0], [0.0, 1.0], [3.0, 4.0]]


def test_verify_passes_and_renders(tmp_path):
    from rieszcert.harness.report import read_json

    assert _run('verify', tmp_path) == 0
    for name in ('report.json', 'eigenvalues.csv', 'plane.svg'):
        assert (tmp_path / name).exists(), name
    report = read_json(tmp_path / 'report.json')
    assert report.passed
    assert report.exit_code == 0


def test_verify_from_stored_instance(tmp_path):
    instance_dir = tmp_path / 'instance'
    assert _run('generate', instance_dir) == 0
    assert _run('verify', tmp_path / 'out', '--input', str(instance_dir)) == 0


def test_project_writes_projections(tmp_path):
    assert _run('project', tmp_path) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert names >= {'Q_-1.mtx', 'Q_0.mtx', 'Q_1.mtx', 'projections.json'}


def test_bounds_writes_json(tmp_path):
    assert _run('bounds', tmp_path) == 0
    payload = json.loads((tmp_path / 'bounds.json').read_text())
    assert payload['c1'] > 0
    assert all(entry['passed'] for entry in payload['bounds'])


def test_report_rerenders(tmp_path):
    assert _run('verify', tmp_path / 'first') == 0
    from rieszcert.harness.cli import main

    again = tmp_path / 'second'
    assert main(['report', str(tmp_path / 'first' / 'report.json'), '--out', str(again),
                 '-q']) == 0
    assert (again / 'eigenvalues.csv').exists()
    assert (again / 'plane.svg').exists()


def test_report_of_missing_file_is_usage_error(tmp_path):
    from rieszcert.harness.cli import main

    assert main(['report', str(tmp_path / 'absent.json'), '--out', str(tmp_path), '-q']) == 2


@pytest.mark.parametrize("command", ['verify', 'project', 'bounds'])
def test_hypothesis_violation_fails(tmp_path, command):
    assert _run(command, tmp_path, '--b-ratio', '1.2') == 1


@pytest.mark.parametrize("extra", [
    ('--instance.n', 'abc'),
    ('--instance.cluster_sizes', '1,1'),
])
def test_bad_values_are_usage_errors(tmp_path, extra):
    assert _run('generate', tmp_path, *extra) == 2


def test_missing_config_file_is_usage_error(tmp_path):
    assert _run('generate', tmp_path, '--config', str(tmp_path / 'absent.toml')) == 2


def test_config_file_is_read(tmp_path):
    config = tmp_path / 'cert.toml'
    config.write_text('[instance]\nb_ratio = 0.25\n')
    out = tmp_path / 'out'
    assert _run('generate', out, '--config', str(config)) == 0
    meta = json.loads((out / 'instance.json').read_text())
    assert meta['spec']['b_ratio'] == 0.25


def test_unknown_command_exits_through_argparse():
    from rieszcert.harness.cli import main

    with pytest.raises(SystemExit) as caught:
        main(['frobnicate'])
    assert caught.value.code == 2
