import numpy as np
import pytest

from gapbumps.functional import (
    Nonlinearity,
    a_gradient,
    a_hessian,
    a_hessvec,
    a_value_and_gradient,
    evaluate_J,
    gradient,
    hessian_matrix,
    interaction_defect,
)
from gapbumps.operator import PeriodicPotential
from gapbumps.torus import GridField, translate


class TestHypotheses:
    def test_p_below_three_rejected(self):
        with pytest.raises(ValueError):
            Nonlinearity(p=2.5)

    def test_q_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            Nonlinearity(q=2.0)
        with pytest.raises(ValueError):
            Nonlinearity(p=4.0, q=4.5)

    def test_gamma_must_exceed_two(self):
        with pytest.raises(ValueError):
            Nonlinearity(gamma=2.0)

    def test_negative_weight_rejected(self):
        h = PeriodicPotential(amplitude=3.0)  # dips to -3
        with pytest.raises(ValueError):
            Nonlinearity(weight=h)

    def test_dealias_factor_floor(self):
        with pytest.raises(ValueError):
            Nonlinearity(dealias=True, dealias_factor=0.5)


class TestValueAndSymmetry:
    def test_zero_field_has_zero_energy(self, S4, nl):
        assert evaluate_J(GridField.zeros(S4.domain), S4, nl) == 0.0

    def test_even_nonlinearity_makes_J_even(self, S4, nl, rng):
        u = S4.field_from_a(rng.standard_normal(S4.num_modes))
        minus = GridField(S4.domain, -u.values)
        assert evaluate_J(minus, S4, nl) == pytest.approx(evaluate_J(u, S4, nl), rel=1e-12)

    def test_gradient_is_odd(self, S4, nl, rng):
        a = rng.standard_normal(S4.num_modes)
        assert np.allclose(a_gradient(S4, nl, -a), -a_gradient(S4, nl, a), atol=1e-12)

    def test_small_fields_are_dominated_by_the_quadratic_part(self, S4, nl, rng):
        a = rng.standard_normal(S4.num_modes)
        a /= np.linalg.norm(a)
        quad = 0.5 * float(S4.signs @ (a * a))
        for eps in (1e-3, 1e-4):
            J = a_value_and_gradient(S4, nl, eps * a)[0]
            # remainder is the quartic integral, so the defect scales like eps^4
            assert abs(J - eps**2 * quad) < 10 * eps**4

    def test_energy_is_translation_invariant(self, S8, nl, rng):
        a = rng.standard_normal(S8.num_modes) / (1 + np.abs(S8.eigenvalues))
        u = S8.field_from_a(a)
        for b in ((1,), (5,)):
            assert evaluate_J(translate(u, b), S8, nl) == pytest.approx(
                evaluate_J(u, S8, nl), rel=1e-10, abs=1e-12
            )


class TestDerivatives:
    def _probe(self, S, rng):
        a = rng.standard_normal(S.num_modes) / (1.0 + np.abs(S.eigenvalues)) ** 0.5
        v = rng.standard_normal(S.num_modes)
        return a, v / np.linalg.norm(v)

    @pytest.mark.parametrize("mode", ["collocation", "dealias"])
    def test_gradient_matches_fd(self, S4, rng, mode):
        nl = Nonlinearity() if mode == "collocation" else Nonlinearity(dealias=True)
        a, v = self._probe(S4, rng)
        eps = 1e-5
        Jp = a_value_and_gradient(S4, nl, a + eps * v)[0]
        Jm = a_value_and_gradient(S4, nl, a - eps * v)[0]
        g = a_gradient(S4, nl, a)
        assert (Jp - Jm) / (2 * eps) == pytest.approx(float(g @ v), rel=1e-7, abs=1e-9)

    @pytest.mark.parametrize("mode", ["collocation", "dealias"])
    def test_hessvec_matches_fd(self, S4, rng, mode):
        nl = Nonlinearity() if mode == "collocation" else Nonlinearity(dealias=True)
        a, v = self._probe(S4, rng)
        eps = 1e-5
        fd = (a_gradient(S4, nl, a + eps * v) - a_gradient(S4, nl, a - eps * v)) / (2 * eps)
        hv = a_hessvec(S4, nl, a, v)
        assert np.linalg.norm(fd - hv) < 1e-6 * max(1.0, np.linalg.norm(hv))

    def test_hessian_is_symmetric_and_matches_hessvec(self, S4, nl, rng):
        a, v = self._probe(S4, rng)
        H = a_hessian(S4, nl, a)
        assert np.allclose(H, H.T, atol=1e-12)
        assert np.allclose(H @ v, a_hessvec(S4, nl, a, v), atol=1e-10)

    def test_hessian_at_zero_is_the_sign_matrix(self, S4, nl):
        H = a_hessian(S4, nl, np.zeros(S4.num_modes))
        assert np.allclose(H, np.diag(S4.signs), atol=1e-12)

    def test_field_level_gradient_agrees(self, S4, nl, rng):
        a = rng.standard_normal(S4.num_modes)
        u = S4.field_from_a(a)
        g_field = gradient(u, S4, nl)
        assert np.allclose(S4.a_from_field(g_field), a_gradient(S4, nl, a), atol=1e-9)

    def test_weighted_nonlinearity_fd(self, S4, rng):
        # h(x) = 2 + 0.5 cos(2 pi x), strictly positive
        h = PeriodicPotential(amplitude=0.5, shift=-2.0)
        nl = Nonlinearity(weight=h)
        a, v = self._probe(S4, rng)
        eps = 1e-5
        Jp = a_value_and_gradient(S4, nl, a + eps * v)[0]
        Jm = a_value_and_gradient(S4, nl, a - eps * v)[0]
        g = a_gradient(S4, nl, a)
        assert (Jp - Jm) / (2 * eps) == pytest.approx(float(g @ v), rel=1e-7, abs=1e-9)


class TestDealiasing:
    def test_band_limited_quartic_is_quadrature_exact(self, S4):
        # modes below a quarter of the band keep u^4 inside the grid's
        # trigonometric space, where collocation is already exact
        domain = S4.domain
        x = domain.meshgrid()[0]
        u = GridField(domain, 1.3 * np.cos(2 * np.pi * x / 4) + 0.7 * np.sin(2 * np.pi * x))
        plain = evaluate_J(u, S4, Nonlinearity())
        padded = evaluate_J(u, S4, Nonlinearity(dealias=True, dealias_factor=3.0))
        assert plain == pytest.approx(padded, rel=1e-12)

    def test_hessian_stays_symmetric_under_padding(self, S4, rng):
        nl = Nonlinearity(dealias=True, dealias_factor=1.5)
        a = rng.standard_normal(S4.num_modes)
        H = a_hessian(S4, nl, a)
        assert np.allclose(H, H.T, atol=1e-12)


class TestInteractionDefect:
    def test_single_summand_has_no_defect(self, S8, nl):
        u = S8.eigenfield(S8.j)
        one = GridField.constant(S8.domain, 1.0)
        assert interaction_defect([u], one, one, nl) == 0.0

    def test_empty_list_rejected(self, S8, nl):
        one = GridField.constant(S8.domain, 1.0)
        with pytest.raises(ValueError):
            interaction_defect([], one, one, nl)

    def test_disjoint_supports_have_tiny_defect(self, S8, nl):
        x = S8.domain.meshgrid()[0]
        left = GridField(S8.domain, np.exp(-((x + 2) ** 2) * 8))
        right = GridField(S8.domain, np.exp(-((x - 2) ** 2) * 8))
        one = GridField.constant(S8.domain, 1.0)
        overlapping = interaction_defect([left, GridField(S8.domain, left.values)], one, one, nl)
        apart = interaction_defect([left, right], one, one, nl)
        assert apart < 1e-6 * overlapping
