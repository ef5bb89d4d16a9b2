import numpy as np
import pytest

from gapbumps import presets
from gapbumps.functional import evaluate_J
from gapbumps.operator import energy_norm, project_negative, project_positive
from gapbumps.solver import (
    NoConvergence,
    SolverOptions,
    TrivialCollapse,
    deflated_search,
    find_critical_point,
    initial_ansatz,
    linking_upper_bound,
    orbit_distance,
    same_orbit,
    sphere_level,
    validate_solution,
)
from gapbumps.torus import GridField, l2_norm, translate


class TestOptions:
    def test_defaults_are_valid(self):
        SolverOptions()

    def test_nonpositive_tolerance_rejected(self):
        with pytest.raises(ValueError):
            SolverOptions(newton_tol=0.0)

    def test_backtrack_must_stay_below_one(self):
        with pytest.raises(ValueError):
            SolverOptions(backtrack=1.0)

    def test_frozen(self):
        with pytest.raises(AttributeError):
            SolverOptions().newton_tol = 1e-3


class TestAnsatz:
    def test_lives_in_the_positive_subspace(self, S8):
        u = initial_ansatz((0.0,), 0.5, 6.0, S8.domain, S8)
        assert l2_norm(project_negative(u, S8)) < 1e-12
        assert l2_norm(u) > 0

    def test_centering_wraps(self, S8):
        # centering at the torus edge equals centering at the equivalent
        # point, because distances are minimum-image
        u_edge = initial_ansatz((4.0,), 0.5, 6.0, S8.domain, S8)
        u_wrap = initial_ansatz((-4.0,), 0.5, 6.0, S8.domain, S8)
        assert np.allclose(u_edge.values, u_wrap.values, atol=1e-12)

    def test_bad_width_rejected(self, S8):
        with pytest.raises(ValueError):
            initial_ansatz((0.0,), -0.1, 6.0, S8.domain, S8)

    def test_wrong_center_dim_rejected(self, S8):
        with pytest.raises(ValueError):
            initial_ansatz((0.0, 0.0), 0.5, 6.0, S8.domain, S8)


class TestNewton:
    def test_base_solution_quality(self, base8):
        assert base8.residual <= 1e-10
        assert base8.energy > 0
        assert base8.norm_k > 0
        assert base8.iterations < 50

    def test_convergence_is_eventually_quadratic(self, base8):
        hist = [r for r in base8.residual_history if r > 1e-13]
        assert len(hist) >= 3
        for r0, r1 in list(zip(hist, hist[1:]))[-2:]:
            assert r1 <= 10.0 * r0**1.5

    def test_record_recomputes(self, base8, S8, nl):
        from gapbumps.functional import a_gradient

        g = a_gradient(S8, nl, S8.a_from_field(base8.field))
        assert float(np.linalg.norm(g)) == pytest.approx(base8.residual, rel=1e-6, abs=1e-12)
        assert evaluate_J(base8.field, S8, nl) == pytest.approx(base8.energy, rel=1e-12)

    def test_small_starts_collapse_to_zero(self, S8, nl):
        init = initial_ansatz((0.0,), 0.5, 0.5, S8.domain, S8)
        with pytest.raises(TrivialCollapse):
            find_critical_point(init, S8, nl)

    def test_iteration_cap_enforced(self, S8, nl):
        init = initial_ansatz((0.0,), 0.5, 6.0, S8.domain, S8)
        with pytest.raises(NoConvergence):
            find_critical_point(init, S8, nl, SolverOptions(newton_tol=1e-10, max_iters=2))

    def test_solution_is_localized(self, base8, S8):
        x = S8.domain.axis_coords()
        vals = np.abs(base8.field.values)
        assert vals[np.abs(x) >= 3.0].max() < 1e-2 * vals.max()


class TestValidation:
    def test_base_passes_all_checks(self, base8, S8, nl, rng):
        checks = validate_solution(
            base8, S8, nl, (presets.EPS1_K8, presets.EPS2_K8), rng=rng
        )
        assert set(checks) == {
            "norm_floor",
            "energy_floor",
            "residual",
            "translation_invariance",
        }
        assert all(passed for passed, _ in checks.values())

    def test_absurd_floor_fails(self, base8, S8, nl, rng):
        checks = validate_solution(base8, S8, nl, (1e6, 1e6), rng=rng)
        assert not checks["norm_floor"][0]
        assert not checks["energy_floor"][0]


class TestOrbits:
    def test_translate_stays_on_the_orbit(self, base8, S8):
        shifted = translate(base8.field, (3,))
        dist, shift = orbit_distance(base8.field, shifted, S8)
        assert dist < 1e-9
        assert shift == (5,)  # the inverse shift mod 8 recovers u

    def test_sign_flip_leaves_the_orbit(self, base8, S8):
        minus = GridField(S8.domain, -base8.field.values)
        assert not same_orbit(base8.field, minus, S8, radius=0.5)

    def test_distance_is_an_energy_norm(self, base8, S8):
        zero = GridField.zeros(S8.domain)
        dist, _ = orbit_distance(base8.field, zero, S8)
        assert dist == pytest.approx(energy_norm(base8.field, S8), rel=1e-12)


class TestLinkingGeometry:
    def test_sphere_level_is_positive_and_below_the_solution(self, S8, nl, base8):
        delta = sphere_level(S8, nl, presets.R_STAR, samples=16, rng=np.random.default_rng(0))
        assert 0.0 < delta <= base8.energy

    def test_sphere_level_grows_with_radius_when_small(self, S8, nl):
        lo = sphere_level(S8, nl, 0.3, samples=16, rng=np.random.default_rng(0))
        hi = sphere_level(S8, nl, 1.0, samples=16, rng=np.random.default_rng(0))
        assert 0.0 < lo < hi

    def test_upper_bound_caps_the_solution_level(self, S8, nl, base8):
        za = S8.a_from_field(project_positive(base8.field, S8))
        z = S8.field_from_a(za / np.linalg.norm(za))
        bound = linking_upper_bound(
            S8, nl, z, 2.0 * base8.norm_k, samples=8, rng=np.random.default_rng(0)
        )
        assert bound.value >= base8.energy - 1e-9
        assert bound.boundary_sup <= 1e-6

    def test_non_unit_direction_rejected(self, S8, nl, base8):
        z = base8.field  # norm is ~20, not 1
        with pytest.raises(ValueError):
            linking_upper_bound(S8, nl, z, 10.0, samples=2, rng=np.random.default_rng(0))


class TestDeflation:
    def test_finds_something_new(self, base8, S8, nl):
        found = deflated_search([base8], 8, S8, nl, rng=np.random.default_rng(5))
        assert found, "eight tries found nothing"
        for rec in found:
            assert rec.residual <= 1e-10
            assert rec.norm_k > SolverOptions().collapse_norm
            assert not same_orbit(rec.field, base8.field, S8, radius=0.5)
        for i, a in enumerate(found):
            for b in found[i + 1 :]:
                assert not same_orbit(a.field, b.field, S8, radius=0.5)
