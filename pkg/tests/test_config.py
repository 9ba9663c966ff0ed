"""Configuration layering: defaults, environment, TOML and dotted overrides."""

import pytest


def test_defaults():
    from rieszcert.config import CertConfig

    config = CertConfig()
    assert config.quadrature.order == 32
    assert config.quadrature.max_order == 512
    assert config.tolerances.projection == 1e-9
    assert config.tolerances.oracle == 1e-8
    assert config.mode.force is False
    assert config.mode.exhaustive_limit == 20
    assert config.output.report_filename == 'report.json'
    assert sum(config.instance.cluster_sizes) == config.instance.n


def test_environment_overrides(monkeypatch, tmp_path):
    from rieszcert.config import get_config

    monkeypatch.setenv('RIESZCERT_OUT_DIR', str(tmp_path))
    monkeypatch.setenv('RIESZCERT_QUAD_ORDER', '48')
    monkeypatch.setenv('RIESZCERT_TOL', '1e-10')
    monkeypatch.setenv('RIESZCERT_PARALLEL', 'not-a-number')

    config = get_config()
    assert config.output.out_dir == str(tmp_path)
    assert config.quadrature.order == 48
    assert config.tolerances.projection == 1e-10
    assert config.mode.parallel == 1


def test_toml_file(tmp_path):
    from rieszcert.config import CertConfig

    path = tmp_path / 'cert.toml'
    path.write_text(
        "[instance]\n"
        "n = 4\n"
        "segments = [[0.0, 1.0], [3.0, 4.0]]\n"
        "cluster_sizes = [2, 2]\n"
        "[mode]\n"
        "force = true\n"
        "[quadrature]\n"
        "contour_style = 'stadium'\n"
    )
    config = CertConfig.from_toml(path, base=CertConfig())
    assert config.instance.n == 4
    assert config.instance.segments == [(0.0, 1.0), (3.0, 4.0)]
    assert config.instance.cluster_sizes == [2, 2]
    assert config.mode.force is True
    assert config.quadrature.contour_style == 'stadium'


def test_toml_errors(tmp_path):
    from rieszcert.config import CertConfig
    from rieszcert.errors import ConfigError, InvalidInput

    with pytest.raises(ConfigError):
        CertConfig.from_toml(tmp_path / 'missing.toml')

    broken = tmp_path / 'broken.toml'
    broken.write_text("[instance\n")
    with pytest.raises(ConfigError):
        CertConfig.from_toml(broken)

    flat = tmp_path / 'flat.toml'
    flat.write_text("seed = 3\n")
    with pytest.raises(InvalidInput):
        CertConfig.from_toml(flat)


class TestOverrides:

    def setup_method(self):
        from rieszcert.config import CertConfig
        self.base = CertConfig()

    def test_returns_copy(self):
        changed = self.base.with_overrides({'instance.seed': 11})
        assert changed.instance.seed == 11
        assert self.base.instance.seed == 0

    @pytest.mark.parametrize("key,value,expected", [
        ('mode.force', 'yes', True),
        ('mode.force', 'off', False),
        ('quadrature.order', '64', 64),
        ('instance.b_ratio', '0.25', 0.25),
        ('instance.segments', '[[0, 1], [2, 3]]', [(0.0, 1.0), (2.0, 3.0)]),
        ('instance.cluster_sizes', '4,5', [4, 5]),
        ('output.out_dir', 'results', 'results'),
    ])
    def test_string_values_are_coerced(self, key, value, expected):
        section, name = key.split('.')
        config = self.base.with_overrides({key: value})
        assert getattr(getattr(config, section), name) == expected

    @pytest.mark.parametrize("overrides", [
        {'nosuch.key': 1},
        {'mode.nosuch': 1},
        {'mode': 1},
        {'quadrature.order': 'many'},
    ])
    def test_rejected(self, overrides):
        from rieszcert.errors import ConfigError

        with pytest.raises(ConfigError):
            self.base.with_overrides(overrides)


def test_to_dict_has_every_section():
    from rieszcert.config import SECTIONS, CertConfig

    data = CertConfig().to_dict()
    assert tuple(data) == SECTIONS
    assert data['quadrature']['order'] == 32
