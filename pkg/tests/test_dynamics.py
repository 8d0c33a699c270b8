import numpy as np
import pytest

from reeb_spectra.bodies import ConvexBody
from reeb_spectra.dynamics import (
    find_closed_orbits,
    flow_with_monodromy,
    integrate_reeb,
    integrate_reeb_batch,
    monodromy_and_index,
    numerical_besse_test,
    return_block,
)
from reeb_spectra.ellipsoid import ellipsoid, reeb_flow
from reeb_spectra.symplectic import standard_J, symplectic_defect

E12 = ConvexBody(a=[1.0, 2.0], alpha=1.5, validate=False)
E12_EXACT = ellipsoid([1, 2])


def surface_point(body, raw):
    return body.project_to_surface(np.asarray(raw, dtype=float))


class TestIntegrateReeb:
    def test_zero_time(self):
        z = surface_point(E12, [0.3, -0.2, 0.5, 0.1])
        assert np.array_equal(integrate_reeb(E12, z, 0.0), z)

    @pytest.mark.parametrize("t", [0.7, 3.3, 10.0])
    def test_matches_closed_form(self, t):
        z = surface_point(E12, [0.3, -0.2, 0.5, 0.1])
        zt = integrate_reeb(E12, z, t)
        assert np.abs(zt - reeb_flow(E12_EXACT, z, t)).max() < 1e-9

    def test_time_reversal(self):
        z = surface_point(E12, [0.1, 0.4, -0.3, 0.2])
        back = integrate_reeb(E12, integrate_reeb(E12, z, 1.3), -1.3)
        assert np.abs(back - z).max() < 1e-9

    def test_energy_conservation(self):
        z = surface_point(E12, [0.25, 0.15, 0.35, -0.45])
        zt = integrate_reeb(E12, z, 5.0)
        assert abs(E12.gauge2(zt) - 1.0) < 1e-9

    def test_off_surface_rejected(self):
        with pytest.raises(ValueError):
            integrate_reeb(E12, np.array([1.0, 0.0, 0.0, 0.0]), 1.0)

    def test_batch_matches_single(self):
        Z = np.stack([surface_point(E12, [0.3, -0.2, 0.5, 0.1]),
                      surface_point(E12, [0.1, 0.2, 0.3, 0.4])])
        out = integrate_reeb_batch(E12, Z, 0.8)
        for i in range(2):
            assert np.abs(out[i] - integrate_reeb(E12, Z[i], 0.8)).max() < 1e-9


class TestFindClosedOrbits:
    def test_e12_periods(self):
        orbits = find_closed_orbits(E12, t_max=3.0, n_seeds=6, seed=0)
        periods = sorted({round(o.period, 6) for o in orbits})
        assert periods == [1.0, 2.0]
        short = [o for o in orbits if abs(o.period - 1.0) < 1e-6][0]
        assert short.meta["multiples"] == pytest.approx([1.0, 2.0, 3.0], abs=1e-8)
        assert all(o.residual < 1e-9 for o in orbits)

    def test_ball_continuum_representatives(self):
        r = 0.8
        ball = ConvexBody(a=[np.pi * r**2] * 2, alpha=1.5, validate=False)
        orbits = find_closed_orbits(ball, t_max=2.5, n_seeds=6, seed=1)
        assert orbits
        for o in orbits:
            assert abs(o.period - np.pi * r**2) < 1e-8

    def test_perturbed_periods_near_unperturbed(self):
        eps = 1e-3
        body = ConvexBody(a=[1.0, 2.0], epsilon=eps, quartic=[1.0, 1.0], alpha=1.5)
        orbits = find_closed_orbits(body, t_max=3.0, n_seeds=4, seed=2)
        assert orbits
        from test_clarke import planar_period_oracle

        exact = [planar_period_oracle(a, eps, 1.0) for a in (1.0, 2.0)]
        for o in orbits:
            k = round(o.period)
            best = min(abs(o.period - k * e) for e in exact for k in (1, 2, 3))
            assert best < 1e-8 or min(abs(o.period - v) for v in (1.0, 2.0, 3.0)) < 10 * eps


class TestMonodromy:
    def test_symplecticity(self):
        z = surface_point(E12, [1.0, 0.0, 0.0, 0.0])
        _, M, _ = flow_with_monodromy(E12, z, 1.0, alpha=2.0)
        assert symplectic_defect(M) < 1e-7

    def test_return_block_short_orbit(self):
        # E(1,2) short orbit tau=1: N = rotation by 2 pi / 2 = -I
        z = surface_point(E12, [1.0, 0.0, 0.0, 0.0])
        _, M, _ = flow_with_monodromy(E12, z, 1.0, alpha=2.0)
        N, S, resid = return_block(E12, z, M)
        assert resid < 1e-9
        assert np.abs(N + np.eye(2)).max() < 1e-9
        J2 = standard_J(1)
        assert np.abs(S.T @ standard_J(2) @ S - J2).max() < 1e-10

    def test_round_orbit_block_identity(self):
        ball = ConvexBody(a=[1.0, 1.0], alpha=1.5, validate=False)
        z = surface_point(ball, [1.0, 0.0, 0.0, 0.0])
        _, M, _ = flow_with_monodromy(ball, z, 1.0, alpha=2.0)
        N, _, _ = return_block(ball, z, M)
        assert np.abs(N - np.eye(2)).max() < 1e-9

    @pytest.mark.parametrize(
        "plane,tau,cz,morse,nul",
        [(0, 1.0, 2, 0, 1), (0, 2.0, 4, 2, 3), (1, 2.0, 4, 2, 3)],
    )
    def test_indices_match_exact_engine(self, plane, tau, cz, morse, nul):
        from reeb_spectra.dynamics import ClosedOrbit

        z = np.zeros(4)
        z[2 * plane] = 1.0
        orbit = ClosedOrbit(initial_point=surface_point(E12, z), period=tau, residual=0.0)
        monodromy_and_index(E12, orbit, alpha=1.5)
        assert (orbit.cz_index, orbit.morse_index, orbit.nullity) == (cz, morse, nul)
        assert orbit.meta["block_residual"] < 1e-6

    def test_alpha_independence(self):
        from reeb_spectra.dynamics import ClosedOrbit

        for plane, tau in [(0, 1.0), (1, 2.0)]:
            z = np.zeros(4)
            z[2 * plane] = 1.0
            z = surface_point(E12, z)
            o1 = ClosedOrbit(initial_point=z, period=tau, residual=0.0)
            o2 = ClosedOrbit(initial_point=z, period=tau, residual=0.0)
            monodromy_and_index(E12, o1, alpha=1.3)
            monodromy_and_index(E12, o2, alpha=1.7)
            assert o1.cz_index == o2.cz_index

    def test_nullity_from_shear_block(self):
        # nullity = 1 + dim ker(N - I) on the degree-alpha model
        from reeb_spectra.dynamics import ClosedOrbit

        ball = ConvexBody(a=[1.0, 1.0], alpha=1.5, validate=False)
        z = surface_point(ball, [1.0, 0.0, 0.0, 0.0])
        orbit = ClosedOrbit(initial_point=z, period=1.0, residual=0.0)
        monodromy_and_index(ball, orbit, alpha=1.5)
        assert orbit.nullity == 3  # m = 2 on the round sphere

    def test_indices_on_non_coordinate_ellipsoid(self):
        # E(1, 3/2): common period 3; a generic tau=3 orbit has
        # mu = 2(3 + 2) - 2 = 8, morse 6, nullity 2n - 1 = 3
        from reeb_spectra.dynamics import ClosedOrbit

        body = ConvexBody(a=[1.0, 1.5], alpha=1.5, validate=False)
        z = surface_point(body, [0.4, 0.1, 0.3, -0.2])
        orbit = ClosedOrbit(initial_point=z, period=3.0, residual=0.0)
        monodromy_and_index(body, orbit, alpha=1.5)
        assert (orbit.cz_index, orbit.morse_index, orbit.nullity) == (8, 6, 3)

    def test_perturbed_orbit_indices_match_unperturbed(self):
        # eps = 1e-3 keeps the short orbit non-degenerate away from tau = 1,
        # so its index data survives the perturbation
        from reeb_spectra.dynamics import ClosedOrbit
        from test_clarke import planar_period_oracle

        eps = 1e-3
        body = ConvexBody(a=[1.0, 2.0], epsilon=eps, quartic=[1.0, 1.0], alpha=1.5)
        z = surface_point(body, [1.0, 0.0, 0.0, 0.0])
        tau = planar_period_oracle(1.0, eps, 1.0)
        orbit = ClosedOrbit(initial_point=z, period=tau, residual=0.0)
        monodromy_and_index(body, orbit, alpha=1.5)
        assert (orbit.cz_index, orbit.morse_index, orbit.nullity) == (2, 0, 1)

    def test_orbit_export_schema(self):
        from reeb_spectra.dynamics import ClosedOrbit

        z = surface_point(E12, [1.0, 0.0, 0.0, 0.0])
        orbit = ClosedOrbit(initial_point=z, period=1.0, residual=0.0)
        monodromy_and_index(E12, orbit, alpha=1.5)
        d = orbit.as_dict()
        for key in ("period", "initial_point", "residual", "cz", "morse", "nullity",
                    "monodromy_eigenvalues"):
            assert key in d


class TestBesseTest:
    def test_e12_common_period(self):
        res = numerical_besse_test(E12, 2.0, samples=3000, seed=0)
        assert res.verdict
        assert res.max_displacement < 1e-8

    def test_e12_tau1_witness(self):
        res = numerical_besse_test(E12, 1.0, samples=1000, seed=0)
        assert not res.verdict
        assert res.max_displacement > 0.1
        # the witness lives off the z1 coordinate plane
        assert np.abs(res.worst_point[2:]).max() > 0.01

    def test_irrational_never_closes(self):
        body = ConvexBody(a=[1.0, float(np.sqrt(2))], alpha=1.5, validate=False)
        for tau in (1.0, float(np.sqrt(2)), 5.0, 20.0):
            res = numerical_besse_test(body, tau, samples=200, seed=1)
            assert not res.verdict

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            numerical_besse_test(E12, 0.0)
