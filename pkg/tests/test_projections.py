"""Contour-quadrature projections, the eigendecomposition oracle and the partial-sum identity."""

import math

import numpy as np
import pytest


def test_scalar_riesz_projection_is_one():
    from rieszcert.contour import segment_contour
    from rieszcert.projections import riesz_projection
    from rieszcert.spectral_model import PerturbedPair, Segment

    pair = PerturbedPair.from_matrices([[0.5]], [[0.0]])
    result = riesz_projection(pair, segment_contour(Segment(0.0, 1.0), 0.5, 'rectangle'))
    assert complex(result.matrix[0, 0]) == pytest.approx(1.0, abs=1e-12)
    assert result.idempotency_residual < 1e-9
    assert result.order == 32


@pytest.mark.parametrize("style", ['rectangle', 'stadium'])
def test_unperturbed_contour_projections_are_spectral(unperturbed_instance, config, style):
    from rieszcert.projections import ProjectionEngine, compare_projection_sets
    from rieszcert.spectral_model import ProjectionMethod, unperturbed_projections

    pair, family, _ = unperturbed_instance
    projections = ProjectionEngine(config).contour_projections(pair, family, style=style)
    assert projections.method is ProjectionMethod.CONTOUR_QUADRATURE
    distances = compare_projection_sets(projections, unperturbed_projections(pair.t, family))
    assert max(distances.values()) < 1e-10


class TestPerturbedProjections:

    @pytest.fixture(autouse=True)
    def _projections(self, instance, config):
        from rieszcert.projections import ProjectionEngine

        self.pair, self.family, _ = instance
        self.engine = ProjectionEngine(config)
        self.projections = self.engine.contour_projections(self.pair, self.family)

    def test_complete_minimal_idempotent(self):
        assert self.projections.satisfies_invariants()
        assert self.projections.completeness_residual() < 1e-8
        assert self.projections.minimality_residual() < 1e-8
        assert not self.projections.flags

    def test_agrees_with_eigen_oracle(self):
        from rieszcert.projections import compare_projection_sets, eigen_oracle_projections
        from rieszcert.spectral_model import ProjectionMethod

        oracle = eigen_oracle_projections(self.pair, self.family)
        assert oracle.method is ProjectionMethod.EIGEN_ORACLE
        assert not oracle.flags
        assert max(compare_projection_sets(self.projections, oracle).values()) < 1e-8

    def test_verification_report(self):
        from rieszcert.projections import verify_projection_set

        report = verify_projection_set(self.projections, self.pair, self.family)
        assert report.enclosure
        assert report.rank_match
        assert report.ranks == {-1: 3, 0: 2, 1: 3}
        assert report.commutation < 1e-8
        assert report.idempotency < 1e-9

    def test_expand_vector(self):
        from rieszcert.projections import expand_vector

        x = np.arange(1, self.pair.n + 1) * (1 + 0.5j)
        parts = expand_vector(self.projections, x)
        assert len(parts) == len(self.family)
        np.testing.assert_allclose(sum(parts), x, atol=1e-9)
        for part, j in zip(parts, self.projections):
            np.testing.assert_allclose(self.projections[j] @ part, part, atol=1e-9)

    def test_stadium_and_rectangle_agree(self):
        from rieszcert.projections import compare_projection_sets

        stadium = self.engine.contour_projections(self.pair, self.family, style='stadium')
        assert max(compare_projection_sets(stadium, self.projections).values()) < 1e-8

    @pytest.mark.parametrize("b_prime", [0.9, 1.0])
    def test_independent_of_contour_offset(self, b_prime):
        from rieszcert.contour import segment_contour

        # at b = 0.8 both offsets keep 0.1 clear of every U_b(Δₖ)
        panel = self.engine.panel_length(0.1, self.family)
        for j, segment in self.family:
            contour = segment_contour(segment, b_prime, 'rectangle', panel_length=panel)
            q = self.engine.riesz_projection(self.pair, contour).matrix
            assert np.linalg.norm(q - self.projections[j]) < 1e-8

    def test_residue_error_shrinks_with_order(self):
        from rieszcert.contour import attach_quadrature
        from rieszcert.projections import eigen_oracle_projections

        exact = eigen_oracle_projections(self.pair, self.family)[0]
        contour = self.engine.segment_contours(self.pair, self.family)[0]
        errors = []
        for order in (4, 8, 16, 32):
            refined = attach_quadrature(contour, order, contour.panel_length)
            q = self.engine.riesz_projection(self.pair, refined, tol=math.inf).matrix
            errors.append(float(np.linalg.norm(q - exact)))
        for coarse, fine in zip(errors, errors[1:]):
            assert fine <= coarse or fine < 1e-12
        assert errors[-1] < 1e-8

    def test_partial_sum_identity(self):
        from rieszcert.bounds import admissible_n

        integrals = [self.engine.partial_sum_check(self.pair, self.family, n,
                                                   projections=self.projections)
                     for n in admissible_n(self.family)]
        assert [i.n for i in integrals] == [0, 1]
        assert integrals[0].indices == (0,)
        for integral in integrals:
            assert integral.contour_residual < 1e-8
            assert integral.identity_residual < 1e-8
            assert integral.norm <= integral.horizontal_norm + integral.vertical_norm + 1e-12
        # every segment is inside ∂R_1, so I_1 = Σ Qⱼ − Σ Pⱼ = I − I
        assert integrals[-1].norm < 1e-8
        assert integrals[0].norm > 1e-6


def test_quadrature_stalls_at_the_order_cap(instance):
    from conftest import small_config
    from rieszcert.errors import QuadratureStalled
    from rieszcert.projections import ProjectionEngine

    pair, family, _ = instance
    engine = ProjectionEngine(small_config(**{'quadrature.max_order': 64}))
    contour = engine.segment_contours(pair, family)[0]
    with pytest.raises(QuadratureStalled) as caught:
        engine.riesz_projection(pair, contour, tol=0.0)
    assert caught.value.order == 64
    assert caught.value.matrix.shape == (pair.n, pair.n)


def test_stalled_projections_are_flagged_when_allowed(instance):
    from conftest import small_config
    from rieszcert.projections import ProjectionEngine

    pair, family, _ = instance
    engine = ProjectionEngine(small_config(**{'quadrature.max_order': 32}))
    projections = engine.contour_projections(pair, family, tol=0.0, allow_stall=True)
    assert projections.flags == ('stalled:-1', 'stalled:0', 'stalled:1')
    assert projections.completeness_residual() < 1e-8


def test_force_mode_caps_the_order():
    from conftest import small_config
    from rieszcert.projections import ProjectionEngine

    engine = ProjectionEngine(small_config(**{'mode.force': True, 'mode.force_max_order': 64}))
    assert engine.max_order == 64
    assert ProjectionEngine(small_config()).max_order == 512


def test_partial_sum_strict_violation(instance):
    from conftest import small_config
    from rieszcert.errors import IdentityViolation
    from rieszcert.projections import ProjectionEngine
    from rieszcert.spectral_model import unperturbed_projections

    pair, family, _ = instance
    engine = ProjectionEngine(small_config(**{'quadrature.max_order': 32}))
    projections = unperturbed_projections(pair.t, family)
    with pytest.raises(IdentityViolation):
        engine.partial_sum_check(pair, family, 0, tol=0.0, projections=projections)
    lenient = engine.partial_sum_check(pair, family, 0, tol=0.0, projections=projections,
                                       strict=False)
    assert lenient.order == 32
    assert lenient.contour_residual > 1e-6


def test_oracle_strays(instance):
    from rieszcert.errors import UnassignedEigenvalue
    from rieszcert.projections import eigen_oracle_projections

    pair, family, _ = instance
    with pytest.raises(UnassignedEigenvalue):
        eigen_oracle_projections(pair, family, b=1e-9)
    lenient = eigen_oracle_projections(pair, family, b=1e-9, strict=False)
    assert any(flag.startswith('unassigned:') for flag in lenient.flags)
    assert lenient.completeness_residual() < 1e-8


def test_expand_vector_needs_a_complete_system(instance):
    from rieszcert.errors import IncompleteSystem
    from rieszcert.projections import expand_vector
    from rieszcert.spectral_model import ProjectionSet, unperturbed_projections

    pair, family, _ = instance
    full = unperturbed_projections(pair.t, family)
    partial = ProjectionSet.from_matrices(full.index_range,
                                          {j: full[j] if j else 0 * full[j] for j in full},
                                          full.method, full.tolerance)
    with pytest.raises(IncompleteSystem):
        expand_vector(partial, np.ones(pair.n))
