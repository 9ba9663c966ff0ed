"""Small instances shared by the test modules."""

import pytest

SEGMENTS = ((-3.0, -2.0), (0.0, 1.0), (3.0, 4.0))
CLUSTER_SIZES = (3, 2, 3)


def make_instance(b_ratio=0.8, seed=7, style='dense_random', cluster_sizes=CLUSTER_SIZES):
    from rieszcert.harness.instance import InstanceSpec, generate_instance

    spec = InstanceSpec(n=sum(cluster_sizes), segments=SEGMENTS, cluster_sizes=cluster_sizes,
                        b_ratio=b_ratio, seed=seed, perturbation_style=style)
    pair, family = generate_instance(spec)
    return pair, family, spec


def small_config(**overrides):
    """Defaults with fewer samples so suites stay quick on n = 8."""
    from rieszcert.config import CertConfig

    values = {
        'instance.n': sum(CLUSTER_SIZES),
        'instance.segments': [list(s) for s in SEGMENTS],
        'instance.cluster_sizes': list(CLUSTER_SIZES),
        'instance.seed': 7,
        'tolerances.resolvent_samples': 100,
        'tolerances.vector_samples': 10,
        'mode.sign_samples': 200,
    }
    values.update(overrides)
    return CertConfig().with_overrides(values)


@pytest.fixture
def instance():
    """n = 8, three unit segments with d = 2, b = 0.8."""
    return make_instance()


@pytest.fixture
def unperturbed_instance():
    """Same T with B = 0."""
    return make_instance(b_ratio=0.0)


@pytest.fixture
def config():
    return small_config()
