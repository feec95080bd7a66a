import dataclasses
from math import comb

import numpy as np
import pytest

from rydsim import (
    IntegrationError,
    PhysicalParams,
    SpatialConfiguration,
    TWO_PI,
    blockade_radius,
    build_hamiltonian,
    enumerate_basis,
    evolve,
    excitation_expectations,
    propagate_amplitudes,
    vdw_pair_energy,
)
from rydsim.dynamics import ExcitationHistogram

from conftest import dense_full_hamiltonian, expm_counts

OMEGA = TWO_PI * 1.0


class TestPairEnergy:
    def test_ten_micron_reference(self, params):
        # C6/2pi = 3.2e6 MHz um^6 at R = 10 um -> V/2pi = 3.2 MHz
        assert vdw_pair_energy(params, 10.0) / TWO_PI == pytest.approx(3.2)

    def test_sixth_power_law(self, params):
        assert vdw_pair_energy(params, 5.0) == pytest.approx(
            64 * vdw_pair_energy(params, 10.0)
        )

    def test_two_micron_reference(self, params):
        assert vdw_pair_energy(params, 2.0) / TWO_PI == pytest.approx(50_000.0)

    def test_zero_distance_rejected(self, params):
        with pytest.raises(ValueError):
            vdw_pair_energy(params, 0.0)


class TestBlockadeRadius:
    def test_seven_atom_value(self, params):
        assert blockade_radius(params, 7) == pytest.approx(10.322, abs=1e-3)

    def test_single_atom_reduction(self, params):
        assert blockade_radius(params, 1) == pytest.approx(
            (params.c6 / params.rabi) ** (1 / 6)
        )

    def test_c6_scaling(self, params):
        bigger = PhysicalParams(rabi=params.rabi, c6=64 * params.c6)
        assert blockade_radius(bigger, 7) == pytest.approx(
            2 * blockade_radius(params, 7)
        )


class TestBuildHamiltonian:
    def test_single_atom_matrix(self, params):
        space = enumerate_basis(1, 1)
        h = build_hamiltonian(params, SpatialConfiguration(np.zeros((1, 3))), space)
        expected = np.array([[0.0, params.rabi / 2], [params.rabi / 2, 0.0]])
        np.testing.assert_allclose(h.dense(), expected)

    def test_two_atom_matrix(self, params):
        r = 4.0
        space = enumerate_basis(2, 2)
        config = SpatialConfiguration([[0, 0, 0], [r, 0, 0]])
        h = build_hamiltonian(params, config, space)
        np.testing.assert_allclose(
            h.diagonal, [0.0, 0.0, 0.0, params.c6 / r**6]
        )
        assert len(h.edges) == 4
        assert h.coupling == params.rabi / 2

    def test_matches_dense_oracle_restricted(self, params):
        rng = np.random.default_rng(42)
        positions = rng.normal(0.0, 3.0, (3, 3))
        space = enumerate_basis(3, 2)
        h = build_hamiltonian(
            params, SpatialConfiguration(positions), space, energy_cutoff=np.inf
        )
        full = dense_full_hamiltonian(params, positions)
        masks = [int(s) for s in space.states]
        np.testing.assert_allclose(h.dense(), full[np.ix_(masks, masks)], rtol=1e-12)

    def test_atom_count_mismatch(self, params):
        with pytest.raises(ValueError):
            build_hamiltonian(
                params,
                SpatialConfiguration(np.zeros((2, 3))),
                enumerate_basis(3, 2),
            )

    def test_coincident_atoms_pruned_not_crashed(self, params):
        space = enumerate_basis(2, 2)
        config = SpatialConfiguration(np.zeros((2, 3)))
        h = build_hamiltonian(params, config, space)
        assert h.n_pruned == 1 and h.dimension == 3
        hist = evolve(h, space, np.linspace(0, 10, 51))
        assert np.all(np.abs(hist.q.sum(axis=0) - 1.0) < 1e-12)

    def test_hermitian(self, params):
        rng = np.random.default_rng(0)
        space = enumerate_basis(5, 3)
        config = SpatialConfiguration(rng.normal(0, 2, (5, 3)))
        dense = build_hamiltonian(params, config, space).dense()
        np.testing.assert_array_equal(dense, dense.T)


class TestEvolve:
    def test_single_atom_rabi(self, params, time_grid):
        space = enumerate_basis(1, 1)
        h = build_hamiltonian(params, SpatialConfiguration(np.zeros((1, 3))), space)
        hist = evolve(h, space, time_grid)
        np.testing.assert_allclose(
            hist.q[1], np.sin(OMEGA * time_grid / 2) ** 2, atol=1e-8
        )

    def test_two_atom_collective_oscillation(self, params, time_grid):
        # m = 1 enforces the perfect-blockade limit structurally
        space = enumerate_basis(2, 1)
        config = SpatialConfiguration([[0, 0, 0], [2, 0, 0]])
        h = build_hamiltonian(params, config, space)
        hist = evolve(h, space, time_grid)
        np.testing.assert_allclose(
            hist.q[1], np.sin(np.sqrt(2) * OMEGA * time_grid / 2) ** 2, atol=1e-8
        )

    def test_independent_atoms_product_form(self, params, time_grid):
        # separations so large the pair energies are ~1e-19 of the drive
        n = 3
        config = SpatialConfiguration(
            [[0, 0, 0], [1e4, 0, 0], [0, 1e4, 0]]
        )
        space = enumerate_basis(n, n)
        h = build_hamiltonian(params, config, space)
        hist = evolve(h, space, time_grid)
        s = np.sin(OMEGA * time_grid / 2) ** 2
        c = 1.0 - s
        for k in range(n + 1):
            np.testing.assert_allclose(
                hist.q[k], comb(n, k) * s**k * c ** (n - k), atol=1e-10
            )

    def test_norm_conserved(self, params, time_grid):
        rng = np.random.default_rng(11)
        space = enumerate_basis(6, 2)
        config = SpatialConfiguration(rng.normal(0, 2, (6, 3)))
        h = build_hamiltonian(params, config, space)
        hist = evolve(h, space, time_grid)
        np.testing.assert_allclose(hist.q.sum(axis=0), 1.0, atol=1e-8)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_full_space_expm_oracle(self, params, n):
        rng = np.random.default_rng(n)
        positions = rng.normal(0.0, 4.0, (n, 3))
        t = np.linspace(0, 10, 21)
        space = enumerate_basis(n, n)
        h = build_hamiltonian(
            params, SpatialConfiguration(positions), space, energy_cutoff=np.inf
        )
        hist = evolve(h, space, t)
        reference = expm_counts(params, positions, t)
        np.testing.assert_allclose(hist.q, reference, atol=1e-7)

    def test_time_reversal(self, params):
        rng = np.random.default_rng(5)
        space = enumerate_basis(4, 4)
        config = SpatialConfiguration(rng.normal(0, 3, (4, 3)))
        h = build_hamiltonian(params, config, space)
        grid = np.array([0.0, 7.3])
        psi_t = propagate_amplitudes(h, grid)[:, 1]
        h_neg = dataclasses.replace(h, diagonal=-h.diagonal, coupling=-h.coupling)
        back = propagate_amplitudes(h_neg, grid, psi0=psi_t)[:, 1]
        e0 = np.zeros(h.dimension)
        e0[0] = 1.0
        assert np.max(np.abs(back - e0)) < 1e-6

    def test_truncation_convergence_under_strong_blockade(self, params):
        # all pair distances below half the blockade radius: adding an
        # excitation level must not move the retained rows
        rng = np.random.default_rng(12)
        positions = rng.normal(0.0, 1.5, (5, 3))
        deltas = positions[:, None, :] - positions[None, :, :]
        dists = np.sqrt((deltas**2).sum(-1))[np.triu_indices(5, 1)]
        assert dists.max() < blockade_radius(params, 5) / 2
        t = np.linspace(0, 10, 101)
        qs = {}
        for m in (2, 3):
            space = enumerate_basis(5, m)
            h = build_hamiltonian(params, SpatialConfiguration(positions), space)
            qs[m] = evolve(h, space, t).q
        assert np.max(np.abs(qs[2][:2] - qs[3][:2])) < 1e-4

    def test_cutoff_doubling_inconsequential(self, params):
        # configuration where doubling the cutoff retains one extra state
        positions = np.random.default_rng(1).normal(0, 2.0, (7, 3))
        space = enumerate_basis(7, 2)
        t = np.linspace(0, 10, 101)
        qs = []
        pruned = []
        for factor in (1e4, 2e4):
            h = build_hamiltonian(
                params,
                SpatialConfiguration(positions),
                space,
                energy_cutoff=factor * params.rabi,
            )
            pruned.append(h.n_pruned)
            qs.append(evolve(h, space, t).q)
        assert pruned[0] > pruned[1]  # the doubled cutoff retains more states
        assert np.max(np.abs(qs[0] - qs[1])) < 1e-6

    def test_grid_validation(self, params):
        space = enumerate_basis(1, 1)
        h = build_hamiltonian(params, SpatialConfiguration(np.zeros((1, 3))), space)
        with pytest.raises(ValueError):
            evolve(h, space, np.array([1.0, 2.0]))  # must start at 0
        with pytest.raises(ValueError):
            evolve(h, space, np.array([0.0, 2.0, 1.0]))  # must ascend


class TestExpectations:
    def test_perfect_blockade_identity(self):
        t = np.linspace(0, 1, 16)
        q = np.zeros((3, 16))
        q[1] = 0.3
        q[0] = 0.7
        hist = ExcitationHistogram(time_grid=t, q=q)
        n_ry, p_ry = excitation_expectations(hist)
        np.testing.assert_allclose(n_ry, q[1])
        np.testing.assert_allclose(p_ry, q[1])

    def test_zero_time(self, params, time_grid):
        space = enumerate_basis(2, 2)
        config = SpatialConfiguration([[0, 0, 0], [3, 0, 0]])
        h = build_hamiltonian(params, config, space)
        n_ry, p_ry = excitation_expectations(evolve(h, space, time_grid))
        assert n_ry[0] == pytest.approx(0.0, abs=1e-12)
        assert p_ry[0] == pytest.approx(0.0, abs=1e-12)

    def test_direct_sums(self):
        t = np.linspace(0, 1, 16)
        q = np.tile(np.array([0.25, 0.5, 0.25])[:, None], (1, 16))
        hist = ExcitationHistogram(time_grid=t, q=q)
        n_ry, p_ry = excitation_expectations(hist)
        np.testing.assert_allclose(n_ry, 1.0)
        np.testing.assert_allclose(p_ry, 0.75)


class TestValidation:
    def test_params_domains(self):
        with pytest.raises(ValueError):
            PhysicalParams(rabi=-1.0, c6=1.0)
        with pytest.raises(ValueError):
            PhysicalParams(rabi=1.0, c6=0.0)

    def test_configuration_shape(self):
        with pytest.raises(ValueError):
            SpatialConfiguration(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            SpatialConfiguration([[np.inf, 0, 0]])

    def test_integration_error_carries_worst(self):
        err = IntegrationError("boom", worst_error=1e-3)
        assert err.worst_error == 1e-3
