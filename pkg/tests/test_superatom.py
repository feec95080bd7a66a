import numpy as np
import pytest

from rydsim import (
    PhysicalParams,
    SpatialConfiguration,
    SuperatomPair,
    TWO_PI,
    TimeSeries,
    distance_sweep,
    enumerate_basis,
    evolve,
    build_hamiltonian,
    evolve_pair,
    fourier_spectrum,
    mean_coupling,
    two_ensemble_scenario,
)
from rydsim.ensemble import derive_seed

OMEGA = TWO_PI * 1.0


class TestMeanCoupling:
    def test_two_single_atoms(self, params):
        d = 8.0
        k = mean_coupling(
            SpatialConfiguration([[0, 0, 0]]),
            SpatialConfiguration([[d, 0, 0]]),
            params,
        )
        assert k == pytest.approx(params.c6 / d**6, rel=1e-14)

    def test_point_cloud_limit(self, params):
        # r << d: the point approximation is good to O((r/d)^2); mirror
        # symmetric clouds cancel the odd sampling term exactly, leaving
        # the quadratic curvature of 1/R^6
        d = 15.0
        deviations = []
        for r in (0.3, 0.6):
            v1 = np.array([r, r / 2, -r / 3])
            v2 = np.array([-r / 2, r, r / 4])
            c1 = SpatialConfiguration([v1, -v1])
            c2 = SpatialConfiguration([[d, 0, 0] + v2, [d, 0, 0] - v2])
            k = mean_coupling(c1, c2, params)
            k0 = params.c6 / d**6
            assert k == pytest.approx(k0, rel=30 * (r / d) ** 2)
            deviations.append(abs(k - k0) / k0)
        # doubling r quadruples the error
        assert deviations[1] / deviations[0] == pytest.approx(4.0, rel=0.2)

    def test_explicit_nine_term_sum(self, params):
        rng = np.random.default_rng(3)
        p1 = rng.normal(0, 1, (3, 3))
        p2 = rng.normal(0, 1, (3, 3)) + [12, 0, 0]
        expected = np.mean(
            [
                params.c6 / np.linalg.norm(a - b) ** 6
                for a in p1
                for b in p2
            ]
        )
        k = mean_coupling(
            SpatialConfiguration(p1), SpatialConfiguration(p2), params
        )
        assert k == pytest.approx(expected, rel=1e-12)

    def test_coincident_atoms_rejected(self, params):
        same = SpatialConfiguration([[1.0, 2.0, 3.0]])
        with pytest.raises(ValueError, match="separated"):
            mean_coupling(same, same, params)

    def test_empty_rejected(self, params):
        with pytest.raises(ValueError):
            mean_coupling(
                SpatialConfiguration(np.zeros((0, 3))),
                SpatialConfiguration([[1, 0, 0]]),
                params,
            )


class TestEvolvePair:
    def test_decoupled_equal_ensembles(self):
        n = 5
        t = np.linspace(0, 10, 201)
        amp = evolve_pair(SuperatomPair(n1=n, n2=n, k12=0.0, rabi=OMEGA), t)
        np.testing.assert_allclose(
            amp.n_ry, 2 * np.sin(np.sqrt(n) * OMEGA * t / 2) ** 2, atol=1e-10
        )

    def test_frozen_pair_is_one_big_superatom(self):
        n = 10
        t = np.linspace(0, 10, 201)
        k = 1e3 * OMEGA * np.sqrt(2 * n)
        amp = evolve_pair(SuperatomPair(n1=n, n2=n, k12=k, rabi=OMEGA), t)
        np.testing.assert_allclose(
            amp.n_ry, np.sin(np.sqrt(2 * n) * OMEGA * t / 2) ** 2, atol=5e-3
        )

    def test_blockaded_plateau_k_continuity(self):
        t = np.linspace(0, 10, 201)
        scale = OMEGA * np.sqrt(16)
        a = evolve_pair(SuperatomPair(8, 8, 1e3 * scale, OMEGA), t)
        b = evolve_pair(SuperatomPair(8, 8, 1e4 * scale, OMEGA), t)
        assert np.max(np.abs(a.n_ry - b.n_ry)) < 1e-3

    def test_swap_symmetry(self):
        t = np.linspace(0, 10, 201)
        k = 12.5
        a = evolve_pair(SuperatomPair(3, 8, k, OMEGA), t)
        b = evolve_pair(SuperatomPair(8, 3, k, OMEGA), t)
        np.testing.assert_allclose(a.n_ry, b.n_ry, atol=1e-10)

    def test_norm_conserved(self):
        t = np.linspace(0, 10, 201)
        amp = evolve_pair(SuperatomPair(4, 9, 55.0, OMEGA), t)
        np.testing.assert_allclose(amp.norm, 1.0, atol=1e-8)

    def test_empty_ensemble_rejected(self):
        with pytest.raises(ValueError):
            evolve_pair(SuperatomPair(0, 3, 0.0, OMEGA), np.linspace(0, 1, 16))

    def test_against_full_four_atom_dynamics(self, params):
        # two 2-atom clusters, r << d: the pair model tracks the full
        # position-resolved propagation within a few percent
        t = np.linspace(0, 10, 201)
        cluster1 = np.array([[0, 0.25, 0], [0, -0.25, 0]])
        cluster2 = np.array([[12.0, 0.25, 0], [12.0, -0.25, 0]])
        k = mean_coupling(
            SpatialConfiguration(cluster1), SpatialConfiguration(cluster2), params
        )
        amp = evolve_pair(SuperatomPair(2, 2, k, OMEGA), t)

        positions = np.vstack([cluster1, cluster2])
        space = enumerate_basis(4, 2)
        h = build_hamiltonian(params, SpatialConfiguration(positions), space)
        hist = evolve(h, space, t)
        n_ry_full = np.arange(3) @ hist.q
        peak = n_ry_full.max()
        assert np.max(np.abs(amp.n_ry - n_ry_full)) < 0.05 * peak


class TestScenario:
    def test_deterministic_and_worker_invariant(self, params):
        t = np.linspace(0, 10, 101)
        kwargs = dict(
            mean_atoms=10.0,
            distance=9.0,
            cloud_sigma=1.0,
            params=params,
            time_grid=t,
            samples=50,
            seed=5,
        )
        a = two_ensemble_scenario(**kwargs)
        b = two_ensemble_scenario(**kwargs)
        c = two_ensemble_scenario(**kwargs, workers=2)
        np.testing.assert_array_equal(a.histogram.q, b.histogram.q)
        np.testing.assert_array_equal(a.histogram.q, c.histogram.q)

    def test_histogram_normalized(self, params):
        t = np.linspace(0, 10, 101)
        result = two_ensemble_scenario(10.0, 9.0, 1.0, params, t, samples=40, seed=6)
        np.testing.assert_allclose(result.histogram.q.sum(axis=0), 1.0, atol=1e-9)
        np.testing.assert_allclose(
            result.n_ry, result.histogram.q[1] + 2 * result.histogram.q[2], atol=1e-12
        )

    def test_empty_draws_reduce_analytically(self, params):
        # mean 0.4 atoms: most draws have an empty trap or two
        t = np.linspace(0, 10, 101)
        result = two_ensemble_scenario(0.4, 10.0, 1.0, params, t, samples=200, seed=7)
        np.testing.assert_allclose(result.histogram.q.sum(axis=0), 1.0, atol=1e-9)
        assert result.histogram.q[0, 0] == pytest.approx(1.0)

    def test_sampled_coupling_close_to_point(self, params):
        t = np.linspace(0, 10, 101)
        point = two_ensemble_scenario(
            5.0, 15.0, 0.3, params, t, samples=80, seed=8, coupling="point"
        )
        sampled = two_ensemble_scenario(
            5.0, 15.0, 0.3, params, t, samples=80, seed=8, coupling="sampled"
        )
        assert np.max(np.abs(point.n_ry - sampled.n_ry)) < 0.05

    def test_input_validation(self, params):
        t = np.linspace(0, 10, 101)
        with pytest.raises(ValueError):
            two_ensemble_scenario(10.0, -1.0, 1.0, params, t)
        with pytest.raises(ValueError):
            two_ensemble_scenario(10.0, 5.0, 1.0, params, t, coupling="guess")


class TestDistanceSweep:
    def test_single_distance_matches_scenario(self, params):
        t = np.linspace(0, 10, 101)
        grid = distance_sweep(10.0, np.array([9.0]), 1.0, params, t, samples=30, seed=4)
        direct = two_ensemble_scenario(
            10.0, 9.0, 1.0, params, t, samples=30, seed=derive_seed(4, 1, 0)
        )
        np.testing.assert_array_equal(grid.values[0], direct.n_ry)

    def test_endpoints_and_peak_shift(self, params):
        t = np.linspace(0, 10, 201)
        distances = np.array([4.0, 9.0, 20.0])
        grid = distance_sweep(10.0, distances, 1.0, params, t, samples=300, seed=11)
        peaks = [
            fourier_spectrum(TimeSeries(t, row), window="rect").peak_frequency
            for row in grid.values
        ]
        # dominant frequency moves from ~sqrt(10) toward ~sqrt(20) MHz
        assert peaks[0] > peaks[-1]
        assert peaks[0] == pytest.approx(np.sqrt(20), abs=0.25)
        assert peaks[-1] == pytest.approx(np.sqrt(10), abs=0.25)

    def test_distance_validation(self, params):
        t = np.linspace(0, 10, 101)
        with pytest.raises(ValueError):
            distance_sweep(10.0, np.array([9.0, 4.0]), 1.0, params, t)
