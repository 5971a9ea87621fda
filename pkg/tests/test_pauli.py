import itertools

import numpy as np
import pytest

from stabcorrect.gf2 import PauliLabel, rref_basis, rref_basis_from_labels
from stabcorrect.pauli import (
    CliffordCircuit,
    CliffordTableau,
    PhasedPauli,
    StabilizerState,
    apply_gates_dense,
    canonicalize_subgroup,
    clifford_from_anticommuting_pair,
    clifford_from_isotropic,
    conjugate,
    enumerate_stabilizer_states,
    pauli_product,
    stab_state_prep,
    stabilizer_inner_product,
    stabilizer_state_matrix,
    statevector_of,
    synthesize_circuit,
    tableau_from_circuit,
    weyl_matrix,
)
from stabcorrect.pauli import _conj_gate

from conftest import random_circuit, random_phased

lab = PauliLabel.from_string
pp = PhasedPauli.from_string

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
S = np.diag([1, 1j])
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])
GATES_1Q = {"H": H, "S": S, "X": X, "Z": Z}


def circuit_matrix(circ: CliffordCircuit) -> np.ndarray:
    dim = 1 << circ.n
    mat = np.eye(dim, dtype=complex)
    for col in range(dim):
        vec = np.zeros(dim, dtype=complex)
        vec[col] = 1.0
        mat[:, col] = apply_gates_dense(vec, circ.n, circ.gates)
    return mat


class TestProduct:
    def test_x_squared(self):
        assert pauli_product(pp("X"), pp("X")) == pp("I")

    def test_x_times_z(self):
        got = pauli_product(pp("X"), pp("Z"))
        assert got == PhasedPauli(lab("Y"), 3)  # -i W_(1,1)

    def test_involution_random(self, rng):
        for _ in range(100):
            w = PhasedPauli(PauliLabel(3, int(rng.integers(8)), int(rng.integers(8))), 0)
            assert pauli_product(w, w) == PhasedPauli(PauliLabel(3, 0, 0), 0)

    def test_against_matrices_exhaustive_1q(self):
        for x1, z1, p1, x2, z2, p2 in itertools.product(range(2), range(2), range(4), range(2), range(2), range(4)):
            a = PhasedPauli(PauliLabel(1, x1, z1), p1)
            b = PhasedPauli(PauliLabel(1, x2, z2), p2)
            got = weyl_matrix(pauli_product(a, b))
            assert np.allclose(got, weyl_matrix(a) @ weyl_matrix(b))

    def test_against_matrices_random_2q(self, rng):
        for _ in range(100):
            a, b = random_phased(2, rng), random_phased(2, rng)
            assert np.allclose(
                weyl_matrix(pauli_product(a, b)), weyl_matrix(a) @ weyl_matrix(b)
            )

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            pauli_product(pp("X"), pp("XX"))


class TestGateConjugation:
    @pytest.mark.parametrize("name", ["H", "S", "X", "Z"])
    def test_single_qubit_exhaustive(self, name):
        g = GATES_1Q[name]
        for xb, zb, ph in itertools.product(range(2), range(2), range(4)):
            p = PhasedPauli(PauliLabel(1, xb, zb), ph)
            got = weyl_matrix(_conj_gate(name, (0,), p))
            assert np.allclose(got, g @ weyl_matrix(p) @ g.conj().T)

    def test_cnot_exhaustive(self):
        cnot = np.zeros((4, 4), dtype=complex)
        for j in range(4):
            c, t = j & 1, (j >> 1) & 1
            cnot[(c | ((t ^ c) << 1)), j] = 1.0
        for xb, zb, ph in itertools.product(range(4), range(4), range(4)):
            p = PhasedPauli(PauliLabel(2, xb, zb), ph)
            got = weyl_matrix(_conj_gate("CNOT", (0, 1), p))
            assert np.allclose(got, cnot @ weyl_matrix(p) @ cnot.conj().T)

    def test_defining_relations(self):
        assert _conj_gate("H", (0,), pp("X")) == pp("Z")
        assert _conj_gate("S", (0,), pp("X")) == pp("Y")
        assert _conj_gate("CNOT", (0, 1), pp("XI")) == pp("XX")


class TestTableau:
    def test_conjugate_matches_gate_chain(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 5))
            circ = random_circuit(n, rng, length=16)
            tab = tableau_from_circuit(circ)
            p = random_phased(n, rng)
            q = p
            for name, qs in circ.gates:
                q = _conj_gate(name, qs, q)
            assert conjugate(tab, p) == q

    def test_conjugation_preserves_symplectic(self, rng):
        from stabcorrect.gf2 import symplectic_product

        for _ in range(100):
            n = int(rng.integers(1, 7))
            tab = tableau_from_circuit(random_circuit(n, rng))
            for _ in range(100):
                a, b = random_phased(n, rng), random_phased(n, rng)
                assert symplectic_product(
                    conjugate(tab, a).label, conjugate(tab, b).label
                ) == symplectic_product(a.label, b.label)

    def test_validity(self, rng):
        tab = tableau_from_circuit(random_circuit(3, rng))
        assert tab.is_valid()

    def test_inverse(self, rng):
        n = 3
        tab = tableau_from_circuit(random_circuit(n, rng))
        inv = tab.inverse()
        for p in (pp("XII"), pp("IZI"), pp("-IYX")):
            assert conjugate(inv, conjugate(tab, p)) == p


class TestSynthesis:
    def test_identity_empty(self):
        assert synthesize_circuit(CliffordTableau.identity(3)).gates == ()

    def test_hadamard_single(self):
        tab = tableau_from_circuit(CliffordCircuit(1, (("H", (0,)),)))
        assert synthesize_circuit(tab).gates == (("H", (0,)),)

    @pytest.mark.parametrize("trial", range(8))
    def test_round_trip_exact(self, trial):
        rng = np.random.default_rng(3000 + trial)
        for _ in range(25):
            n = int(rng.integers(1, 7))
            tab = tableau_from_circuit(random_circuit(n, rng))
            circ = synthesize_circuit(tab)
            assert tableau_from_circuit(circ) == tab
            assert len(circ) <= 14 * n * n + 20

    def test_unitary_action_up_to_phase(self, rng):
        # applying the synthesized gates equals the original circuit's action
        # up to one global phase
        for _ in range(10):
            n = int(rng.integers(1, 4))
            orig = random_circuit(n, rng)
            tab = tableau_from_circuit(orig)
            m1 = circuit_matrix(orig)
            m2 = circuit_matrix(synthesize_circuit(tab))
            ratio = m1 @ m2.conj().T
            assert np.allclose(ratio, ratio[0, 0] * np.eye(1 << n))
            assert abs(abs(ratio[0, 0]) - 1) < 1e-9


class TestPairReduction:
    def test_xz_identity(self):
        tab = clifford_from_anticommuting_pair(pp("X"), pp("Z"))
        assert tab == CliffordTableau.identity(1)

    def test_zx_hadamard(self):
        tab = clifford_from_anticommuting_pair(pp("Z"), pp("X"))
        assert conjugate(tab, pp("Z")) == pp("X")
        assert conjugate(tab, pp("X")) == pp("Z")

    def test_commuting_rejected(self):
        with pytest.raises(ValueError):
            clifford_from_anticommuting_pair(pp("YX"), pp("ZZ"))

    def test_random_pairs(self, rng):
        from stabcorrect.gf2 import symplectic_product

        done = 0
        while done < 100:
            n = int(rng.integers(1, 7))
            p = PhasedPauli(
                PauliLabel(n, int(rng.integers(1 << n)), int(rng.integers(1 << n))),
                2 * int(rng.integers(2)),
            )
            q = PhasedPauli(
                PauliLabel(n, int(rng.integers(1 << n)), int(rng.integers(1 << n))),
                2 * int(rng.integers(2)),
            )
            if symplectic_product(p.label, q.label) == 0:
                continue
            tab = clifford_from_anticommuting_pair(p, q)
            assert conjugate(tab, p) == PhasedPauli(PauliLabel(n, 1, 0), 0)
            assert conjugate(tab, q) == PhasedPauli(PauliLabel(n, 0, 1), 0)
            done += 1


class TestIsotropicReduction:
    def test_z_line_identity_action(self):
        tab = clifford_from_isotropic(rref_basis_from_labels([lab("Z")]), 1)
        assert conjugate(tab, pp("Z")).label == lab("Z")

    def test_x_line(self):
        tab = clifford_from_isotropic(rref_basis_from_labels([lab("X")]), 1)
        assert conjugate(tab, pp("X")).label == lab("Z")

    def test_bell_pair_generators(self):
        basis = rref_basis_from_labels([lab("XX"), lab("ZZ")])
        tab = clifford_from_isotropic(basis, 2)
        imgs = {conjugate(tab, pp(s)).label for s in ("XX", "ZZ")}
        target = set(rref_basis_from_labels([lab("IZ"), lab("ZI")]).labels(2))
        spanned = rref_basis([l.to_vector() for l in imgs], 4)
        assert spanned == rref_basis([l.to_vector() for l in target], 4)

    def test_rejects_non_isotropic(self):
        with pytest.raises(ValueError):
            clifford_from_isotropic(rref_basis_from_labels([lab("X"), lab("Z")]), 1)

    def test_maps_to_designated_tail(self, rng):
        from stabcorrect.gf2 import is_isotropic

        done = 0
        while done < 50:
            n = int(rng.integers(2, 7))
            gens = [
                PauliLabel(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)))
                for _ in range(int(rng.integers(1, n + 1)))
            ]
            basis = rref_basis_from_labels(gens)
            if basis.rank == 0 or not is_isotropic(basis, n):
                continue
            d = basis.rank
            tab = clifford_from_isotropic(basis, n)
            img = rref_basis(
                [conjugate(tab, PhasedPauli(l, 0)).label.to_vector() for l in basis.labels(n)],
                2 * n,
            )
            want = rref_basis([1 << (n + q) for q in range(n - d, n)], 2 * n)
            assert img == want
            done += 1


class TestCanonicalize:
    @pytest.mark.parametrize(
        "gens,km",
        [
            (["XI", "ZI", "IZ"], (1, 1)),
            (["XI", "IZ"], (0, 2)),
            (["XI", "ZI"], (1, 0)),
            (["ZZ", "XX"], (0, 2)),
        ],
    )
    def test_examples(self, gens, km):
        _, k, m = canonicalize_subgroup([lab(g) for g in gens])
        assert (k, m) == km

    def test_identity_action_when_canonical(self):
        tab, k, m = canonicalize_subgroup([lab("XI"), lab("ZI"), lab("IZ")])
        for s in ("XI", "ZI", "IZ"):
            assert conjugate(tab, pp(s)).label == lab(s)

    @pytest.mark.parametrize("trial", range(10))
    def test_exact_image_random(self, trial):
        rng = np.random.default_rng(4000 + trial)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            cnt = int(rng.integers(1, 2 * n + 2))
            gens = [
                PauliLabel(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)))
                for _ in range(cnt)
            ]
            tab, k, m = canonicalize_subgroup(gens)
            img = rref_basis(
                [conjugate(tab, PhasedPauli(g, 0)).label.to_vector() for g in gens],
                2 * n,
            )
            rows = []
            for q in range(k):
                rows += [1 << q, 1 << (n + q)]
            rows += [1 << (n + q) for q in range(k, k + m)]
            assert img == rref_basis(rows, 2 * n)
            assert k + m <= n


class TestStabilizerStates:
    def test_validation(self):
        with pytest.raises(ValueError):
            StabilizerState(2, (pp("+XI"), pp("+ZI")))  # anticommute
        with pytest.raises(ValueError):
            StabilizerState(2, (pp("+ZI"), pp("-ZI")))  # dependent
        with pytest.raises(ValueError):
            StabilizerState(1, (PhasedPauli(lab("X"), 1),))  # not Hermitian

    def test_prep_all_zero_empty(self):
        st = StabilizerState(3, tuple(pp(s) for s in ("+ZII", "+IZI", "+IIZ")))
        assert stab_state_prep(st).gates == ()

    def test_prep_plus(self):
        st = StabilizerState(1, (pp("+X"),))
        assert stab_state_prep(st).gates == (("H", (0,)),)

    def test_prep_bell(self):
        st = StabilizerState(2, (pp("+XX"), pp("+ZZ")))
        vec = np.zeros(4, dtype=complex)
        vec[0] = 1.0
        out = apply_gates_dense(vec, 2, stab_state_prep(st).gates)
        assert np.allclose(out, np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_prep_matches_convention_random(self, rng):
        states = enumerate_stabilizer_states(2)
        for idx in rng.choice(len(states), size=40, replace=False):
            st = states[int(idx)]
            vec = np.zeros(4, dtype=complex)
            vec[0] = 1.0
            out = apply_gates_dense(vec, 2, stab_state_prep(st).gates)
            assert np.allclose(out, statevector_of(st), atol=1e-12)

    def test_statevector_stabilized(self, rng):
        states = enumerate_stabilizer_states(2)
        for idx in rng.choice(len(states), size=30, replace=False):
            st = states[int(idx)]
            vec = statevector_of(st)
            for g in st.generators:
                assert np.allclose(weyl_matrix(g) @ vec, vec, atol=1e-12)

    def test_inner_product_examples(self):
        zero = StabilizerState(1, (pp("+Z"),))
        plus = StabilizerState(1, (pp("+X"),))
        bell = StabilizerState(2, (pp("+XX"), pp("+ZZ")))
        zz = StabilizerState(2, (pp("+ZI"), pp("+IZ")))
        assert abs(stabilizer_inner_product(zero, zero) - 1) < 1e-12
        assert abs(stabilizer_inner_product(zero, plus) - 1 / np.sqrt(2)) < 1e-12
        assert abs(stabilizer_inner_product(zz, bell) - 1 / np.sqrt(2)) < 1e-12

    def test_inner_product_against_dense(self):
        # every pair from the full two-qubit catalog
        states, matrix = stabilizer_state_matrix(2)
        gram = matrix.conj() @ matrix.T
        for i in range(len(states)):
            for j in range(len(states)):
                got = stabilizer_inner_product(states[i], states[j])
                assert abs(got - gram[i, j]) < 1e-12

    def test_serialization_round_trip(self, rng):
        states = enumerate_stabilizer_states(2)
        st = states[int(rng.integers(len(states)))]
        assert StabilizerState.from_json(st.to_json()) == st


class TestEnumeration:
    @pytest.mark.parametrize("n,count", [(1, 6), (2, 60), (3, 1080)])
    def test_counts(self, n, count):
        assert len(enumerate_stabilizer_states(n)) == count

    def test_duplicate_free(self):
        _, matrix = stabilizer_state_matrix(2)
        gram = np.abs(matrix.conj() @ matrix.T)
        np.fill_diagonal(gram, 0.0)
        assert gram.max() < 1 - 1e-9

    def test_cap(self):
        with pytest.raises(ValueError):
            enumerate_stabilizer_states(5)

    def test_sorted_by_serialization(self):
        states, _ = stabilizer_state_matrix(2)
        keys = [s.sort_key() for s in states]
        assert keys == sorted(keys)
