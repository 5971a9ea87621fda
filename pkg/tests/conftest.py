import numpy as np
import pytest

from stabcorrect.gf2 import PauliLabel
from stabcorrect.pauli import CliffordCircuit, PhasedPauli, statevector_of
from stabcorrect.statevec import StateVector


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_label(n, rng):
    return PauliLabel(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))


def random_phased(n, rng):
    return PhasedPauli(random_label(n, rng), int(rng.integers(4)))


def random_circuit(n, rng, length=None):
    length = length if length is not None else 4 * n * n + 4
    gates = []
    while len(gates) < length:
        kind = int(rng.integers(0, 4 if n == 1 else 5))
        if kind == 4:
            c = int(rng.integers(n))
            t = int(rng.integers(n - 1))
            t = t if t < c else t + 1
            gates.append(("CNOT", (c, t)))
        else:
            gates.append((("H", "S", "X", "Z")[kind], (int(rng.integers(n)),)))
    return CliffordCircuit(n, tuple(gates))


def t_state():
    return StateVector(1, np.array([1.0, np.exp(1j * np.pi / 4)]) / np.sqrt(2))


def planted_state(n, rng, weight=0.9):
    """sqrt(w)|s> + sqrt(1-w)|junk orthogonal>, with the plant returned."""
    from stabcorrect.pauli import enumerate_stabilizer_states

    states = enumerate_stabilizer_states(n)
    s = states[int(rng.integers(len(states)))]
    sv = statevector_of(s)
    junk = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    junk -= np.vdot(sv, junk) * sv
    junk /= np.linalg.norm(junk)
    return s, StateVector(n, np.sqrt(weight) * sv + np.sqrt(1 - weight) * junk)


def orthogonal_stab_pair(n, rng):
    """Two stabilizer states with exactly zero overlap."""
    from stabcorrect.pauli import enumerate_stabilizer_states

    states = enumerate_stabilizer_states(n)
    while True:
        s1 = states[int(rng.integers(len(states)))]
        v1 = statevector_of(s1)
        order = rng.permutation(len(states))
        for j in order:
            s2 = states[int(j)]
            if abs(np.vdot(v1, statevector_of(s2))) < 1e-12:
                return s1, s2
