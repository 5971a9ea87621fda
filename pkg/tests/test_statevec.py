import numpy as np
import pytest

from stabcorrect.errors import ResidualVanished
from stabcorrect.gf2 import PauliLabel
from stabcorrect.ledger import CostLedger
from stabcorrect.pauli import (
    PhasedPauli,
    StabilizerState,
    enumerate_stabilizer_states,
    stab_state_prep,
    statevector_of,
    weyl_matrix,
)
from stabcorrect.statevec import (
    ProbTable,
    StateVector,
    apply_circuit,
    apply_weyl,
    basis_state,
    bruteforce_stab_dim_fidelity,
    bruteforce_stab_fidelity,
    distribution_tables,
    expectation_table,
    gowers3_metrics,
    hadamard_test_estimate,
    label_index,
    lcu_residual,
    load_statevector,
    measure_block,
    overlap,
    random_state,
    sample_weyl_indices,
    save_statevector,
    statevector_from_json,
    statevector_to_json,
    tensor,
    two_copy_retention,
    weyl_expectation,
)

from conftest import t_state

lab = PauliLabel.from_string
pp = PhasedPauli.from_string

SQ2 = 1 / np.sqrt(2)


class TestApplyWeyl:
    def test_x_flips(self):
        out = apply_weyl(basis_state(1), lab("X"))
        assert np.allclose(out.amps, [0, 1])

    def test_y_phase(self):
        out = apply_weyl(basis_state(1), lab("Y"))
        assert np.allclose(out.amps, [0, 1j])

    def test_involution(self, rng):
        psi = random_state(3, rng)
        for _ in range(20):
            x = PauliLabel(3, int(rng.integers(8)), int(rng.integers(8)))
            back = apply_weyl(apply_weyl(psi, x), x)
            assert np.allclose(back.amps, psi.amps)

    def test_against_matrix(self, rng):
        psi = random_state(2, rng)
        for x in range(4):
            for z in range(4):
                l = PauliLabel(2, x, z)
                got = apply_weyl(psi, l).amps
                want = weyl_matrix(PhasedPauli(l, 0)) @ psi.amps
                assert np.allclose(got, want)


class TestApplyCircuit:
    def test_h_plus(self):
        from stabcorrect.pauli import CliffordCircuit

        out = apply_circuit(basis_state(1), CliffordCircuit(1, (("H", (0,)),)))
        assert np.allclose(out.amps, [SQ2, SQ2])

    def test_bell(self):
        from stabcorrect.pauli import CliffordCircuit

        circ = CliffordCircuit(2, (("H", (0,)), ("CNOT", (0, 1))))
        out = apply_circuit(basis_state(2), circ)
        assert np.allclose(out.amps, [SQ2, 0, 0, SQ2])

    def test_prep_cross_module(self, rng):
        states = enumerate_stabilizer_states(2)
        ledger = CostLedger()
        for idx in rng.choice(len(states), size=20, replace=False):
            st = states[int(idx)]
            circ = stab_state_prep(st)
            out = apply_circuit(basis_state(2), circ, ledger)
            assert np.allclose(out.amps, statevector_of(st), atol=1e-12)
        assert ledger.totals["gate_count"] > 0


class TestExpectations:
    def test_z_on_zero(self):
        assert weyl_expectation(basis_state(1), lab("Z")) == pytest.approx(1.0)

    def test_x_on_zero(self):
        assert weyl_expectation(basis_state(1), lab("X")) == pytest.approx(0.0)

    def test_t_state_bloch(self):
        T = t_state()
        assert weyl_expectation(T, lab("X")) == pytest.approx(SQ2, abs=1e-12)
        assert weyl_expectation(T, lab("Y")) == pytest.approx(SQ2, abs=1e-12)
        assert weyl_expectation(T, lab("Z")) == pytest.approx(0.0, abs=1e-12)

    def test_requires_normalized(self):
        un = StateVector(1, np.array([2.0, 0]), normalized=False)
        with pytest.raises(ValueError):
            weyl_expectation(un, lab("Z"))

    def test_table_matches_singles(self, rng):
        psi = random_state(3, rng)
        table = expectation_table(psi)
        for idx in rng.integers(0, 64, size=20):
            l = PauliLabel.from_vector(3, int(idx))
            assert table[int(idx)] == pytest.approx(weyl_expectation(psi, l), abs=1e-10)


class TestDistributions:
    def test_zero_state_support(self):
        p, q = distribution_tables(basis_state(2))
        for x in range(4):
            for z in range(4):
                val = p.values[label_index(PauliLabel(2, x, z))]
                assert val == pytest.approx(0.25 if x == 0 else 0.0, abs=1e-12)

    def test_t_state_tables(self):
        p, q = distribution_tables(t_state())
        # index order: I, X, Z, Y
        assert np.allclose(p.values, [0.5, 0.25, 0.0, 0.25], atol=1e-12)
        assert np.allclose(q.values, [0.375, 0.25, 0.125, 0.25], atol=1e-12)

    def test_invariants_random(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 6))
            p, q = distribution_tables(random_state(n, rng))
            for table in (p, q):
                assert abs(table.values.sum() - 1) < 1e-10
                assert table.values.max() <= 2.0**-n + 1e-12

    def test_probtable_validation(self):
        with pytest.raises(ValueError):
            ProbTable(1, np.array([0.9, 0.0, 0.0, 0.0]))
        with pytest.raises(ValueError):
            ProbTable(1, np.array([0.6, 0.4, 0.0, 0.0]))  # entry above 1/2


class TestSampling:
    def test_zero_state_always_z_type(self, rng):
        idx = sample_weyl_indices(basis_state(3), 500, rng, None)
        assert np.all(idx & 0b111 == 0)  # a-part zero

    def test_stabilizer_uniform_on_group(self, rng):
        st = StabilizerState(2, (pp("+XX"), pp("+ZZ")))
        psi = StateVector(2, statevector_of(st))
        ledger = CostLedger()
        draws = 100_000
        idx = sample_weyl_indices(psi, draws, rng, ledger)
        counts = np.bincount(idx, minlength=16)
        group = [i for i in range(16) if counts[i] > 0]
        assert len(group) == 4
        expected = draws / 4
        assert np.all(np.abs(counts[group] - expected) < 3 * np.sqrt(expected))
        assert ledger.totals["copies_consumed"] == 4 * draws

    def test_t_state_frequencies(self, rng):
        draws = 100_000
        idx = sample_weyl_indices(t_state(), draws, rng, None)
        freq = np.bincount(idx, minlength=4) / draws
        want = np.array([0.375, 0.25, 0.125, 0.25])
        sig = np.sqrt(want * (1 - want) / draws)
        assert np.all(np.abs(freq - want) < 4 * sig)

    def test_retention_extremes(self, rng):
        ledger = CostLedger()
        assert two_copy_retention(basis_state(1), lab("Z"), rng, ledger)
        assert not two_copy_retention(basis_state(1), lab("X"), rng, ledger)
        assert ledger.totals["copies_consumed"] == 4

    def test_retention_rate(self, rng):
        hits = sum(two_copy_retention(t_state(), lab("X"), rng) for _ in range(20_000))
        assert abs(hits / 20_000 - 0.5) < 3 * np.sqrt(0.25 / 20_000)

    def test_retention_alternative_law(self, rng):
        hits = sum(
            two_copy_retention(t_state(), lab("X"), rng, law="two-copy-measurement")
            for _ in range(20_000)
        )
        assert abs(hits / 20_000 - 0.75) < 3 * np.sqrt(0.1875 / 20_000)


class TestGowersMetrics:
    def test_t_state_exact(self):
        m = gowers3_metrics(t_state())
        assert m.proxy == pytest.approx(5 / 8, abs=1e-12)
        assert m.u3pow8 == pytest.approx(3 / 4, abs=1e-12)

    def test_stabilizer_is_one(self, rng):
        st = enumerate_stabilizer_states(2)[11]
        m = gowers3_metrics(StateVector(2, statevector_of(st)))
        assert m.proxy == pytest.approx(1.0, abs=1e-10)
        assert m.u3pow8 == pytest.approx(1.0, abs=1e-10)

    def test_tensorization(self, rng):
        for _ in range(30):
            a = random_state(int(rng.integers(1, 4)), rng)
            b = random_state(int(rng.integers(1, 3)), rng)
            mab = gowers3_metrics(tensor(a, b))
            assert mab.proxy == pytest.approx(
                gowers3_metrics(a).proxy * gowers3_metrics(b).proxy, abs=1e-10
            )

    def test_double_t(self):
        m = gowers3_metrics(tensor(t_state(), t_state()))
        assert m.proxy == pytest.approx(25 / 64, abs=1e-12)

    def test_sandwich_random(self, rng):
        for _ in range(200):
            m = gowers3_metrics(random_state(int(rng.integers(1, 5)), rng))
            assert m.u3pow8 >= m.proxy >= m.u3pow8**2 - 1e-12

    def test_completeness_n4(self, rng):
        # proxy dominates the sixth power of the stabilizer fidelity
        for _ in range(40):
            psi = random_state(4, rng)
            fid, _ = bruteforce_stab_fidelity(psi)
            assert gowers3_metrics(psi).proxy >= fid**6 - 1e-12

    def test_sampled_within_band(self, rng):
        ledger = CostLedger()
        hits = 0
        runs = 60
        for _ in range(runs):
            m = gowers3_metrics(t_state(), "sampled", 0.05, rng, ledger, fail_prob=1e-3)
            hits += abs(m.proxy - 5 / 8) <= 0.05
        assert hits >= runs - 2
        assert ledger.totals["copies_consumed"] > 0


class TestHadamardTest:
    def test_exact(self):
        plus = StateVector(1, np.array([SQ2, SQ2]))
        val = hadamard_test_estimate(basis_state(1), plus, 0.1, 0.1, exact=True)
        assert val == pytest.approx(SQ2)

    def test_self_overlap(self, rng):
        psi = random_state(2, rng)
        est = hadamard_test_estimate(psi, psi, 0.05, 1e-3, rng)
        assert abs(est - 1.0) < 0.1

    def test_coverage(self, rng):
        # statistical band holds over repetitions
        plus = StateVector(1, np.array([SQ2, SQ2]))
        true = overlap(basis_state(1), plus)
        misses = 0
        for _ in range(200):
            est = hadamard_test_estimate(basis_state(1), plus, 0.08, 0.01, rng)
            if abs(est.real - true.real) > 0.08 or abs(est.imag - true.imag) > 0.08:
                misses += 1
        assert misses <= 6

    def test_ledger_charges(self, rng):
        ledger = CostLedger()
        hadamard_test_estimate(basis_state(1), basis_state(1), 0.1, 0.1, rng, ledger)
        assert ledger.totals["queries_conU"] > 0


class TestMeasureBlock:
    def test_bell_halves(self, rng):
        bell = StateVector(2, np.array([SQ2, 0, 0, SQ2]))
        seen = set()
        for _ in range(40):
            out, prob, post = measure_block(bell, (0,), "computational", rng)
            assert prob == pytest.approx(0.5)
            seen.add(out)
            want = np.zeros(4, dtype=complex)
            want[3 if out else 0] = 1.0
            assert np.allclose(post.amps, want)
        assert seen == {0, 1}

    def test_project_prob_one(self, rng):
        zp = tensor(basis_state(1), StateVector(1, np.array([SQ2, SQ2])))
        out, prob, post = measure_block(zp, (0,), ("project", np.array([1.0, 0])), rng)
        assert out == 0 and prob == pytest.approx(1.0)

    def test_project_cos2(self, rng):
        th = np.pi / 6
        cs = StateVector(2, np.array([np.cos(th), 0, 0, np.sin(th)]))
        _, prob, _ = measure_block(
            cs, (0, 1), ("project", np.array([1.0, 0, 0, 0])), rng, force_outcome=0
        )
        assert prob == pytest.approx(np.cos(th) ** 2)

    def test_zero_probability_branch(self, rng):
        with pytest.raises(ValueError):
            measure_block(basis_state(2), (0,), "computational", rng, force_outcome=1)

    def test_projector_post_states(self, rng):
        psi = random_state(3, rng)
        vec = random_state(2, rng).amps
        out, prob, post = measure_block(psi, (0, 1), ("project", vec), rng, force_outcome=0)
        assert np.linalg.norm(post.amps) == pytest.approx(1.0)
        out1, prob1, post1 = measure_block(psi, (0, 1), ("project", vec), rng, force_outcome=1)
        assert prob1 == pytest.approx(prob)
        recon = np.sqrt(prob) * post.amps + np.sqrt(1 - prob) * post1.amps
        assert np.allclose(recon, psi.amps)


class TestLcuResidual:
    def test_gram_schmidt_step(self, rng):
        T = t_state()
        plus = StabilizerState(1, (pp("+X"),))
        c1 = overlap(StateVector(1, statevector_of(plus)), T)
        ledger = CostLedger()
        resid, success = lcu_residual(T, [stab_state_prep(plus)], [c1], 1.0, ledger)
        assert abs(overlap(StateVector(1, statevector_of(plus)), resid)) < 1e-12
        r1 = np.sqrt(1 - abs(c1) ** 2)
        assert success == pytest.approx((r1 / (1 + abs(c1))) ** 2, abs=1e-12)
        assert ledger.totals["queries_conU"] > 0

    def test_degenerate(self, rng):
        plus = StabilizerState(1, (pp("+X"),))
        vec = StateVector(1, statevector_of(plus))
        with pytest.raises(ResidualVanished):
            lcu_residual(vec, [stab_state_prep(plus)], [1.0 + 0j], 1.0)

    def test_alpha_cancels(self, rng):
        psi = random_state(2, rng)
        st = enumerate_stabilizer_states(2)[7]
        beta = overlap(StateVector(2, statevector_of(st)), psi)
        _, s1 = lcu_residual(psi, [stab_state_prep(st)], [beta], 1.0)
        _, s2 = lcu_residual(psi, [stab_state_prep(st)], [beta], 0.37)
        assert s1 == pytest.approx(s2, abs=1e-12)


class TestBruteForce:
    def test_basis_state(self):
        val, arg = bruteforce_stab_fidelity(basis_state(3))
        assert val == pytest.approx(1.0)

    def test_t_state(self):
        val, _ = bruteforce_stab_fidelity(t_state())
        assert val == pytest.approx((2 + np.sqrt(2)) / 4, abs=1e-12)

    def test_bell(self):
        bell = StateVector(2, np.array([SQ2, 0, 0, SQ2]))
        assert bruteforce_stab_fidelity(bell)[0] == pytest.approx(1.0)

    def test_lagrangian_lower_bound(self, rng):
        # fidelity dominates the mean expectation over every Lagrangian
        from stabcorrect.pauli import lagrangian_subspaces

        for _ in range(30):
            n = int(rng.integers(1, 4))
            psi = random_state(n, rng)
            fid, _ = bruteforce_stab_fidelity(psi)
            w2 = expectation_table(psi) ** 2
            for basis in lagrangian_subspaces(n):
                span = np.array(basis.enumerate_span())
                assert fid >= w2[span].mean() - 1e-10

    def test_stab_dim_fidelity_t0_matches(self, rng):
        for _ in range(10):
            psi = random_state(2, rng)
            assert bruteforce_stab_dim_fidelity(psi, 0) == pytest.approx(
                bruteforce_stab_fidelity(psi)[0], abs=1e-9
            )

    def test_stab_dim_fidelity_monotone(self, rng):
        psi = random_state(3, rng)
        vals = [bruteforce_stab_dim_fidelity(psi, t) for t in range(3)]
        assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12

    def test_stab_dim_product_state(self, rng):
        sigma = random_state(1, rng)
        psi = tensor(sigma, basis_state(2))
        assert bruteforce_stab_dim_fidelity(psi, 1) == pytest.approx(1.0, abs=1e-9)


class TestSerialization:
    def test_binary_round_trip(self, rng, tmp_path):
        psi = random_state(3, rng)
        path = tmp_path / "state.bin"
        save_statevector(psi, str(path))
        back = load_statevector(str(path))
        assert back.n == 3 and np.allclose(back.amps, psi.amps)

    def test_json_round_trip(self, rng):
        psi = random_state(2, rng)
        back = statevector_from_json(statevector_to_json(psi))
        assert np.allclose(back.amps, psi.amps)
