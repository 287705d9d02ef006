"""Dense exact evolution, fidelity statistics, and the reference PDE solution."""

import numpy as np
import pytest

from oracles import dense_of_terms, random_pauli_sum_terms, taylor_expm_apply
from qnute.errors import CapacityError, DimensionMismatchError
from qnute.evolution import QnuteConfig, terms_for_config
from qnute.exact import (
    exact_step,
    exact_trajectory,
    fidelity_stats,
    reference_pde_solution,
    step_propagator,
)
from qnute.hamiltonian import BSParams, Grid, HamiltonianTerm, build_bs_pauli
from qnute.market import OptionContract, analytic_price, payoff_samples
from qnute.pauli import PauliSum
from qnute.statevector import ScaledState, StateVector, decode_nonnegative, encode_samples

PAPER_PARAMS = BSParams(r=0.04, sigma=0.2)


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(v / np.linalg.norm(v))


class TestExactStep:
    def test_zero_generator(self):
        psi = StateVector.basis(2, 3)
        out, norm = exact_step(psi, PauliSum(), 0.1)
        assert np.allclose(out.amplitudes, psi.amplitudes)
        assert norm == pytest.approx(1.0)

    def test_scalar_generator(self):
        rng = np.random.default_rng(1)
        psi = random_state(rng, 1)
        out, norm = exact_step(psi, PauliSum([(-1.0, "I")]), 0.1)
        assert np.allclose(out.amplitudes, psi.amplitudes)
        assert norm == pytest.approx(np.exp(-0.1))

    def test_matches_taylor_series(self):
        rng = np.random.default_rng(2)
        terms = random_pauli_sum_terms(rng, 2, 5)
        psi = random_state(rng, 2)
        out, norm = exact_step(psi, PauliSum(terms), 0.05)
        want = taylor_expm_apply(dense_of_terms(terms) * 0.05, psi.amplitudes)
        assert np.linalg.norm(out.amplitudes * norm - want) < 1e-12
        assert norm == pytest.approx(np.linalg.norm(want), abs=1e-12)

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            step_propagator(PauliSum([(1.0, "I" * 15)]), 15, 0.1)


class TestExactTrajectory:
    def test_zero_generator_constant(self):
        rng = np.random.default_rng(3)
        psi = ScaledState(random_state(rng, 2), 1.0)
        terms = [HamiltonianTerm(PauliSum(), frozenset({0, 1}))]
        cfg = QnuteConfig(delta_t=0.01, num_steps=4, domain_size=2)
        traj = exact_trajectory(psi, terms, cfg)
        assert len(traj.states) == 5
        for state in traj.states:
            assert state.scale == pytest.approx(1.0)

    def test_anti_hermitian_energy_decreases(self):
        rng = np.random.default_rng(4)
        m = rng.normal(size=(4, 4))
        L = (m + m.T) / 2.0
        from qnute.pauli import decompose_dense

        h = decompose_dense(-L)
        psi = ScaledState(random_state(rng, 2), 1.0)
        cfg = QnuteConfig(delta_t=0.05, num_steps=80, domain_size=2)
        traj = exact_trajectory(psi, terms_for_config(h, 2, cfg), cfg)
        energies = [
            float(np.real(np.vdot(s.state.amplitudes, L @ s.state.amplitudes)))
            for s in traj.states
        ]
        assert all(e_next <= e + 1e-9 for e, e_next in zip(energies, energies[1:]))
        assert energies[-1] == pytest.approx(np.linalg.eigvalsh(L)[0], abs=1e-3)

    def test_black_scholes_norms_stay_finite(self):
        grid = Grid(0.0, 150.0, 3)
        gen = build_bs_pauli(grid, PAPER_PARAMS, "linear")
        cfg = QnuteConfig(delta_t=3.0 / 500, num_steps=500, domain_size=3)
        contract = OptionContract("call", (75.0,))
        initial = encode_samples(payoff_samples(contract, grid))
        traj = exact_trajectory(initial, terms_for_config(gen, 3, cfg), cfg)
        scales = np.array([s.scale for s in traj.states])
        assert np.all(np.isfinite(scales)) and np.all(scales > 0.0)


class TestFidelityStats:
    def test_identical_trajectories(self):
        rng = np.random.default_rng(5)
        psi = ScaledState(random_state(rng, 2), 1.0)
        terms = [HamiltonianTerm(PauliSum([(0.3, "XI")]), frozenset({0, 1}))]
        cfg = QnuteConfig(delta_t=0.01, num_steps=3, domain_size=2)
        traj = exact_trajectory(psi, terms, cfg)
        stats = fidelity_stats(traj, traj)
        assert stats.mean == pytest.approx(1.0)
        assert stats.std == pytest.approx(0.0, abs=1e-15)
        assert stats.per_step.shape == (3,)

    def test_length_mismatch(self):
        rng = np.random.default_rng(6)
        psi = ScaledState(random_state(rng, 2), 1.0)
        terms = [HamiltonianTerm(PauliSum(), frozenset({0, 1}))]
        t1 = exact_trajectory(psi, terms, QnuteConfig(delta_t=0.01, num_steps=2, domain_size=2))
        t2 = exact_trajectory(psi, terms, QnuteConfig(delta_t=0.01, num_steps=3, domain_size=2))
        with pytest.raises(DimensionMismatchError):
            fidelity_stats(t1, t2)

    def test_population_std(self):
        rng = np.random.default_rng(7)
        a = exact_trajectory(
            ScaledState(random_state(rng, 2), 1.0),
            [HamiltonianTerm(PauliSum([(0.5, "YI")]), frozenset({0, 1}))],
            QnuteConfig(delta_t=0.2, num_steps=4, domain_size=2),
        )
        b = exact_trajectory(
            ScaledState(random_state(rng, 2), 1.0),
            [HamiltonianTerm(PauliSum([(0.5, "YI")]), frozenset({0, 1}))],
            QnuteConfig(delta_t=0.2, num_steps=4, domain_size=2),
        )
        stats = fidelity_stats(a, b)
        assert stats.std == pytest.approx(float(np.std(stats.per_step)))


class TestReferencePdeSolution:
    def test_zero_parameters_return_payoff(self):
        grid = Grid(0.0, 150.0, 3)
        contract = OptionContract("call", (75.0,))
        cfg = QnuteConfig(delta_t=0.01, num_steps=100, domain_size=3)
        got = reference_pde_solution(contract, grid, BSParams(0.0, 0.0), cfg)
        assert np.allclose(got, payoff_samples(contract, grid))

    def test_convergence_toward_analytic(self):
        contract = OptionContract("call", (75.0,))
        maturity = 3.0
        max_err = {}
        for n in (4, 5, 6):
            grid = Grid(0.0, 150.0, n)
            cfg = QnuteConfig(delta_t=maturity / 500, num_steps=500, domain_size=n)
            got = reference_pde_solution(contract, grid, PAPER_PARAMS, cfg)
            ana = np.array(
                [analytic_price(contract, float(x), maturity, PAPER_PARAMS) for x in grid.points()]
            )
            mask = ana >= 1.0
            max_err[n] = float(np.max(np.abs(got[mask] - ana[mask]) / ana[mask]))
        assert max_err[6] < max_err[5] < max_err[4]

    def test_linear_data_follows_boundary_ode(self):
        # A put struck above the domain has an exactly linear payoff, which the
        # discrete generator keeps in the span of {x, 1}: u = a x + b e^(-r tau).
        grid = Grid(0.0, 150.0, 4)
        contract = OptionContract("put", (200.0,))
        maturity = 3.0
        cfg = QnuteConfig(delta_t=maturity / 200, num_steps=200, domain_size=4)
        got = reference_pde_solution(contract, grid, PAPER_PARAMS, cfg)
        want = -grid.points() + 200.0 * np.exp(-PAPER_PARAMS.r * maturity)
        assert np.max(np.abs(got - want)) < 1e-6

    def test_round_trip_consistency_at_start(self):
        grid = Grid(0.0, 150.0, 3)
        contract = OptionContract("straddle", (75.0,))
        cfg = QnuteConfig(delta_t=0.01, num_steps=0, domain_size=3)
        u0 = reference_pde_solution(contract, grid, PAPER_PARAMS, cfg)
        assert np.allclose(decode_nonnegative(encode_samples(u0)), u0, atol=1e-10)
