import math

import numpy as np
import pytest

from spsakit.applications import (
    GrapeProblem,
    SgqtProblem,
    VqeProblem,
    entangling_layer,
    grape_final_state,
    grape_infidelity_exact,
    grape_objective,
    initial_point,
    make_oracles,
    materialize,
    param_count,
    sgqt_infidelity_exact,
    sgqt_objective,
    vqe_energy_exact,
    vqe_fidelity,
    vqe_objective,
    vqe_state,
)
from spsakit.estimators import gradient_estimate, interleave_complex, sample_perturbation
from spsakit.quantum import exact_ground_energy, haar_random_state, heisenberg_hamiltonian


class TestEntanglingLayer:
    def test_preserves_all_zeros(self):
        for kind in ("cz_ring", "ccz_ring"):
            diag = entangling_layer(4, kind)
            assert diag[0] == 1.0

    def test_cz_on_two_qubits(self):
        diag = entangling_layer(2, "cz_ring")
        np.testing.assert_array_equal(diag, [1, 1, 1, -1])

    def test_squares_to_identity(self):
        for kind in ("cz_ring", "ccz_ring"):
            for n in (2, 3, 5):
                diag = entangling_layer(n, kind)
                np.testing.assert_array_equal(diag * diag, np.ones(2**n))

    def test_entangles_plus_states(self):
        # applying the layer to |+...+> must leave the product manifold
        n = 3
        for kind in ("cz_ring", "ccz_ring"):
            diag = entangling_layer(n, kind)
            psi = diag * np.full(2**n, 2 ** (-n / 2), dtype=complex)
            rho = psi.reshape(2, 4)
            s = np.linalg.svd(rho, compute_uv=False)
            assert (s > 1e-9).sum() > 1

    def test_single_qubit_rejected(self):
        with pytest.raises(ValueError):
            entangling_layer(1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            entangling_layer(3, "swap_net")


class TestVqe:
    def test_parameter_count(self):
        assert param_count(VqeProblem(n_qubits=10, layers=1)) == 20
        assert param_count(VqeProblem(n_qubits=4, layers=3)) == 16

    def test_zero_parameters_energy(self):
        # W(0) = I and diagonal entangler leave |0...0>; ZZ terms give +1 each
        for periodic, bonds in ((True, 4), (False, 3)):
            prob = VqeProblem(n_qubits=4, layers=1, j=1.0, h=0.3, periodic=periodic,
                              shots=math.inf)
            energy = vqe_objective(prob, np.zeros(8, dtype=complex))
            assert energy == pytest.approx(bonds * 1.0 + 4 * 0.3)

    def test_exact_oracle_matches_shot_oracle_at_infinity(self):
        prob = VqeProblem(n_qubits=3, layers=1, j=1.0, h=0.3, periodic=True,
                          shots=math.inf)
        rng = np.random.default_rng(0)
        z = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert vqe_objective(prob, z) == pytest.approx(vqe_energy_exact(prob, z),
                                                       abs=1e-12)

    def test_energy_bounded_below_by_ground_energy(self):
        prob = VqeProblem(n_qubits=4, layers=2, shots=math.inf)
        ham = heisenberg_hamiltonian(4, 1.0, 0.3, True)
        e0 = exact_ground_energy(ham)
        rng = np.random.default_rng(1)
        for _ in range(20):
            z = rng.standard_normal(12) + 1j * rng.standard_normal(12)
            assert vqe_energy_exact(prob, z) >= e0 - 1e-10

    def test_wrong_parameter_count_rejected(self):
        prob = VqeProblem(n_qubits=4, layers=1)
        with pytest.raises(ValueError):
            vqe_state(prob, np.zeros(7, dtype=complex))

    def test_fidelity_identical_params(self):
        prob = VqeProblem(n_qubits=3, layers=1, shots=math.inf)
        rng = np.random.default_rng(2)
        z = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert vqe_fidelity(prob, z, z) == pytest.approx(1.0)

    def test_fidelity_matches_exact_overlap(self):
        prob = VqeProblem(n_qubits=3, layers=1, shots=math.inf)
        rng = np.random.default_rng(3)
        za = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        zb = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        expected = abs(np.vdot(vqe_state(prob, za), vqe_state(prob, zb))) ** 2
        assert vqe_fidelity(prob, za, zb) == pytest.approx(expected, abs=1e-10)

    def test_shot_noise_scale(self):
        prob = VqeProblem(n_qubits=2, layers=1, j=1.0, h=0.0, periodic=False,
                          shots=2e4)
        rng = np.random.default_rng(4)
        z = 0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
        exact = vqe_energy_exact(prob, z)
        samples = [vqe_objective(prob, z, rng) for _ in range(200)]
        # three terms, each bounded by binomial noise on 2e4 shots
        assert np.mean(samples) == pytest.approx(exact, abs=5e-3)


class TestGrape:
    def test_parameter_count(self):
        assert param_count(GrapeProblem(n_qubits=5, slices=25)) == 75

    def test_zero_controls_identity(self):
        rng = np.random.default_rng(5)
        psi0 = haar_random_state(2, rng)
        prob = GrapeProblem(n_qubits=2, slices=5, shots=math.inf, psi0=psi0)
        controls = np.zeros(15, dtype=complex)
        out = grape_final_state(prob, controls)
        np.testing.assert_allclose(out, psi0, atol=1e-12)
        target = np.zeros(4, dtype=complex)
        target[0] = 1.0
        expected = 1.0 - abs(np.vdot(target, psi0)) ** 2
        assert grape_objective(prob, controls) == pytest.approx(expected, abs=1e-12)

    def test_target_start_zero_infidelity(self):
        target = np.zeros(4, dtype=complex)
        target[0] = 1.0
        prob = GrapeProblem(n_qubits=2, slices=3, shots=math.inf, psi0=target)
        assert grape_objective(prob, np.zeros(9, dtype=complex)) == pytest.approx(0.0)

    def test_real_controls_match_hermitian_evolution(self):
        # with real couplings the generator is hermitian: compare against
        # the generic piecewise evolution
        from spsakit.applications import _bond_operators
        from spsakit.quantum import evolve_piecewise

        rng = np.random.default_rng(6)
        psi0 = haar_random_state(2, rng)
        prob = GrapeProblem(n_qubits=2, slices=4, shots=math.inf, psi0=psi0)
        controls = rng.standard_normal(12).astype(complex)
        out = grape_final_state(prob, controls)
        bonds = _bond_operators(2, False)
        slices = []
        for m in range(4):
            h_m = -0.5 * sum(controls[3 * m + k].real * bonds[k] for k in range(3))
            slices.append((h_m, prob.dt))
        expected = evolve_piecewise(psi0, slices)
        phase = np.vdot(expected, out)
        np.testing.assert_allclose(out, expected * np.sign(phase), atol=1e-10)

    def test_shots_inf_matches_dense_computation(self):
        rng = np.random.default_rng(7)
        psi0 = haar_random_state(2, rng)
        prob = GrapeProblem(n_qubits=2, slices=3, shots=math.inf, psi0=psi0)
        controls = 0.4 * (rng.standard_normal(9) + 1j * rng.standard_normal(9))
        out = grape_final_state(prob, controls)
        target = np.zeros(4, dtype=complex)
        target[0] = 1.0
        expected = 1.0 - abs(np.vdot(target, out)) ** 2
        assert grape_objective(prob, controls) == pytest.approx(expected, abs=1e-12)
        assert grape_infidelity_exact(prob, controls) == pytest.approx(expected, abs=1e-12)

    def test_imaginary_controls_change_the_state(self):
        rng = np.random.default_rng(8)
        psi0 = haar_random_state(2, rng)
        prob = GrapeProblem(n_qubits=2, slices=1, shots=math.inf, psi0=psi0)
        real_ctrl = np.array([0.3, 0.2, -0.4], dtype=complex)
        out_real = grape_final_state(prob, real_ctrl)
        out_mixed = grape_final_state(prob, real_ctrl + 0.5j * np.ones(3))
        assert abs(abs(np.vdot(out_real, out_mixed)) - 1.0) > 1e-3

    def test_wrong_length_rejected(self):
        prob = GrapeProblem(n_qubits=2, slices=5, psi0=np.array([1, 0, 0, 0], complex))
        with pytest.raises(ValueError):
            grape_objective(prob, np.zeros(14, dtype=complex))

    def test_single_slice_single_pair_solvable(self):
        # 2-qubit, one slice, ZZ control only: |psi0> = e^{+i t ZZ/2}|target>
        # is driven exactly back onto the target by J_z = t / dt
        from spsakit.applications import _bond_operators

        bonds = _bond_operators(2, False)
        target = np.zeros(4, dtype=complex)
        target[0] = 1.0
        t = 0.7
        w, u = np.linalg.eigh(-0.5 * bonds[2])
        psi0 = u @ (np.exp(1j * t * w) * (u.conj().T @ target))
        prob = GrapeProblem(n_qubits=2, slices=1, shots=math.inf, psi0=psi0)
        controls = np.array([0.0, 0.0, t / prob.dt], dtype=complex)
        assert grape_objective(prob, controls) == pytest.approx(0.0, abs=1e-12)


class TestSgqt:
    def test_parameter_count(self):
        assert param_count(SgqtProblem(n_qubits=6)) == 64

    def test_true_state_gives_zero(self):
        rng = np.random.default_rng(9)
        unknown = haar_random_state(3, rng)
        prob = SgqtProblem(n_qubits=3, shots=math.inf, unknown=unknown)
        assert sgqt_objective(prob, 2.5 * unknown) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_guess_gives_one(self):
        unknown = np.zeros(4, dtype=complex)
        unknown[0] = 1.0
        guess = np.zeros(4, dtype=complex)
        guess[1] = 1.0
        prob = SgqtProblem(n_qubits=2, shots=math.inf, unknown=unknown)
        assert sgqt_objective(prob, guess) == pytest.approx(1.0)

    def test_scale_and_phase_invariance(self):
        rng = np.random.default_rng(10)
        unknown = haar_random_state(2, rng)
        guess = haar_random_state(2, rng)
        prob = SgqtProblem(n_qubits=2, shots=math.inf, unknown=unknown)
        base = sgqt_objective(prob, guess)
        for c in (2.0, -0.3, 1.7j, 0.2 - 0.9j):
            assert sgqt_objective(prob, c * guess) == pytest.approx(base, abs=1e-12)

    def test_zero_vector_rejected(self):
        prob = SgqtProblem(n_qubits=2, unknown=np.array([1, 0, 0, 0], complex))
        with pytest.raises(ValueError):
            sgqt_objective(prob, np.zeros(4, dtype=complex))


class TestOracleSuite:
    def test_materialize_resolves_haar_states(self):
        rng = np.random.default_rng(11)
        grape = materialize(GrapeProblem(n_qubits=2, slices=3), rng)
        assert grape.psi0 is not None
        sgqt = materialize(SgqtProblem(n_qubits=2), rng)
        assert sgqt.unknown is not None
        vqe = VqeProblem(n_qubits=2, periodic=False)
        assert materialize(vqe, rng) is vqe

    def test_initial_point_shapes(self):
        rng = np.random.default_rng(12)
        assert initial_point(VqeProblem(n_qubits=4, layers=1), rng).shape == (8,)
        grape0 = initial_point(GrapeProblem(n_qubits=2, slices=5), rng)
        np.testing.assert_array_equal(grape0, np.zeros(15))
        sgqt0 = initial_point(SgqtProblem(n_qubits=3), rng)
        assert abs(np.linalg.norm(sgqt0) - 1.0) < 1e-10

    def test_objective_counts_one_eval_per_call(self):
        from spsakit.estimators import EvaluationBudget
        from spsakit.optimizers import _counted

        rng = np.random.default_rng(13)
        prob = materialize(SgqtProblem(n_qubits=2, shots=100), rng)
        oracles = make_oracles(prob, rng)
        budget = EvaluationBudget()
        counted = _counted(oracles.objective, budget, "objective")
        z = initial_point(prob, rng)
        counted(z)
        counted(z)
        assert budget.objective_evals == 2

    def test_real_field_adapter_same_landscape(self):
        rng = np.random.default_rng(14)
        prob = materialize(SgqtProblem(n_qubits=2, shots=math.inf), rng)
        oracles_c = make_oracles(prob, rng, "complex")
        oracles_r = make_oracles(prob, rng, "real")
        z = haar_random_state(2, np.random.default_rng(15))
        assert oracles_r.objective(interleave_complex(z)) == pytest.approx(
            oracles_c.objective(z), abs=1e-12)
        assert oracles_r.monitor(interleave_complex(z)) == pytest.approx(
            oracles_c.monitor(z), abs=1e-12)

    def test_noiseless_objectives_bounded(self):
        rng = np.random.default_rng(16)
        grape = materialize(GrapeProblem(n_qubits=2, slices=3, shots=math.inf), rng)
        sgqt = materialize(SgqtProblem(n_qubits=2, shots=math.inf), rng)
        for _ in range(20):
            ctrl = 0.5 * (rng.standard_normal(9) + 1j * rng.standard_normal(9))
            v = grape_objective(grape, ctrl)
            assert 0.0 <= v <= 1.0
            amps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            v = sgqt_objective(sgqt, amps)
            assert 0.0 <= v <= 1.0

    @pytest.mark.parametrize("problem_factory", [
        lambda rng: materialize(SgqtProblem(n_qubits=2, shots=math.inf), rng),
        lambda rng: materialize(GrapeProblem(n_qubits=2, slices=2, shots=math.inf), rng),
        lambda rng: VqeProblem(n_qubits=2, layers=1, periodic=False, shots=math.inf),
    ])
    def test_sp_gradient_matches_finite_differences(self, problem_factory):
        # exhaustively averaged simultaneous-perturbation estimate vs central
        # differences of the noiseless objective, on the realified landscape
        import itertools

        rng = np.random.default_rng(17)
        prob = problem_factory(rng)
        oracles = make_oracles(prob, rng, "real")
        p = 2 * param_count(prob)
        theta = 0.4 * np.random.default_rng(18).standard_normal(p)
        if isinstance(prob, SgqtProblem):
            theta += interleave_complex(initial_point(prob, rng))

        eps = 1e-5
        fd = np.zeros(p)
        for i in range(p):
            e = np.zeros(p)
            e[i] = eps
            fd[i] = (oracles.monitor(theta + e) - oracles.monitor(theta - e)) / (2 * eps)

        total = np.zeros(p)
        count = 0
        for signs in itertools.product([1.0, -1.0], repeat=p):
            delta = np.array(signs)
            g, _ = gradient_estimate(oracles.monitor, theta, 1e-4, delta)
            total += g
            count += 1
        est = total / count
        scale = max(np.linalg.norm(fd), 1e-6)
        assert np.linalg.norm(est - fd) / scale < 0.02
