"""Phased Pauli arithmetic, Clifford tableaus, circuit synthesis, and
stabilizer states with exact inner products.

Operator convention: a ``PhasedPauli`` with label (a, b) and phase t is
i^t * W_(a,b) where W_(a,b) = i^{|a&b|} X^a Z^b.  Hermitian signed Paulis
carry phase 0 (+) or 2 (-).  Phase bookkeeping is exact: every rule below is
validated against dense matrices in the test suite.

Statevector indices are little-endian in the qubit number (qubit q is bit q),
matching the label bit layout, so no bit reversal appears anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np

from .gf2 import (
    Gf2Basis,
    PauliLabel,
    is_isotropic,
    rref_basis,
    symplectic_product,
    symplectic_product_vec,
    symplectic_gram_schmidt,
)

GATE_NAMES = ("H", "S", "CNOT", "X", "Z")

_SIGNS = {0: "+", 1: "+i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PhasedPauli:
    label: PauliLabel
    phase: int  # exponent t in i^t

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase & 3)

    @property
    def n(self) -> int:
        return self.label.n

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    def negate(self) -> "PhasedPauli":
        return PhasedPauli(self.label, self.phase + 2)

    def to_string(self) -> str:
        return _SIGNS[self.phase] + self.label.to_string()

    @staticmethod
    def from_string(s: str) -> "PhasedPauli":
        phase = 0
        if s.startswith("-i"):
            phase, s = 3, s[2:]
        elif s.startswith("+i"):
            phase, s = 1, s[2:]
        elif s.startswith("-"):
            phase, s = 2, s[1:]
        elif s.startswith("+"):
            s = s[1:]
        return PhasedPauli(PauliLabel.from_string(s), phase)

    def __repr__(self):
        return f"PhasedPauli({self.to_string()!r})"


def identity_pauli(n: int) -> PhasedPauli:
    return PhasedPauli(PauliLabel(n, 0, 0), 0)


def pauli_product(p: PhasedPauli, q: PhasedPauli) -> PhasedPauli:
    """Exact operator product, including the i-power phase."""
    if p.n != q.n:
        raise ValueError("size mismatch")
    ax, bx = p.label.x, p.label.z
    ay, by = q.label.x, q.label.z
    a, b = ax ^ ay, bx ^ by
    theta = (
        (ax & bx).bit_count()
        + (ay & by).bit_count()
        + 2 * (bx & ay).bit_count()
        - (a & b).bit_count()
    )
    return PhasedPauli(PauliLabel(p.n, a, b), p.phase + q.phase + theta)


# ---------------------------------------------------------------------------
# single-gate conjugation  g P g^dagger, exact phases

def _conj_gate(name: str, qs: tuple[int, ...], p: PhasedPauli) -> PhasedPauli:
    a, b = p.label.x, p.label.z
    # bare form i^u X^a Z^b
    u = (p.phase + (a & b).bit_count()) & 3
    if name == "H":
        bit = 1 << qs[0]
        aq, bq = a & bit, b & bit
        if aq and bq:
            u += 2
        a = (a & ~bit) | (bit if bq else 0)
        b = (b & ~bit) | (bit if aq else 0)
    elif name == "S":
        bit = 1 << qs[0]
        if a & bit:
            b ^= bit
            u += 1
    elif name == "CNOT":
        cbit, tbit = 1 << qs[0], 1 << qs[1]
        if a & cbit:
            a ^= tbit
        if b & tbit:
            b ^= cbit
    elif name == "X":
        bit = 1 << qs[0]
        if b & bit:
            u += 2
    elif name == "Z":
        bit = 1 << qs[0]
        if a & bit:
            u += 2
    else:
        raise ValueError(f"unknown gate {name!r}")
    return PhasedPauli(PauliLabel(p.n, a, b), u - (a & b).bit_count())


# ---------------------------------------------------------------------------
# circuits and tableaus


@dataclass(frozen=True)
class CliffordCircuit:
    n: int
    gates: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        for name, qs in self.gates:
            if name not in GATE_NAMES:
                raise ValueError(f"unknown gate {name!r}")
            want = 2 if name == "CNOT" else 1
            if len(qs) != want or any(not 0 <= q < self.n for q in qs):
                raise ValueError(f"bad qubits {qs} for {name} on {self.n} qubits")
            if name == "CNOT" and qs[0] == qs[1]:
                raise ValueError("CNOT control equals target")

    def __len__(self):
        return len(self.gates)

    def inverse(self) -> "CliffordCircuit":
        inv = []
        for name, qs in reversed(self.gates):
            if name == "S":
                inv.append(("S", qs))
                inv.append(("Z", qs))
            else:
                inv.append((name, qs))
        return CliffordCircuit(self.n, tuple(inv))

    def to_json(self) -> list[dict]:
        return [{"gate": g, "qubits": list(qs)} for g, qs in self.gates]

    @staticmethod
    def from_json(n: int, data: list[dict]) -> "CliffordCircuit":
        return CliffordCircuit(
            n, tuple((d["gate"], tuple(d["qubits"])) for d in data)
        )


@dataclass(frozen=True)
class CliffordTableau:
    """Images of X_q and Z_q under conjugation, as Hermitian signed Paulis."""

    n: int
    x_images: tuple[PhasedPauli, ...]
    z_images: tuple[PhasedPauli, ...]

    @staticmethod
    def identity(n: int) -> "CliffordTableau":
        xs = tuple(PhasedPauli(PauliLabel(n, 1 << q, 0), 0) for q in range(n))
        zs = tuple(PhasedPauli(PauliLabel(n, 0, 1 << q), 0) for q in range(n))
        return CliffordTableau(n, xs, zs)

    def apply_gate(self, name: str, qs: tuple[int, ...]) -> "CliffordTableau":
        return CliffordTableau(
            self.n,
            tuple(_conj_gate(name, qs, p) for p in self.x_images),
            tuple(_conj_gate(name, qs, p) for p in self.z_images),
        )

    def is_valid(self) -> bool:
        imgs = self.x_images + self.z_images
        if any(not p.is_hermitian for p in imgs):
            return False
        base = CliffordTableau.identity(self.n)
        ref = base.x_images + base.z_images
        for i in range(2 * self.n):
            for j in range(i + 1, 2 * self.n):
                if symplectic_product(imgs[i].label, imgs[j].label) != symplectic_product(
                    ref[i].label, ref[j].label
                ):
                    return False
        labs = [p.label.to_vector() for p in imgs]
        return rref_basis(labs, 2 * self.n).rank == 2 * self.n

    def inverse(self) -> "CliffordTableau":
        return tableau_from_circuit(synthesize_circuit(self).inverse())


def tableau_from_circuit(circuit: CliffordCircuit) -> CliffordTableau:
    tab = CliffordTableau.identity(circuit.n)
    for name, qs in circuit.gates:
        tab = tab.apply_gate(name, qs)
    return tab


def conjugate(tableau: CliffordTableau, p: PhasedPauli) -> PhasedPauli:
    """Exact U P U^dagger obtained by multiplying out the generator images."""
    if tableau.n != p.n:
        raise ValueError("size mismatch")
    a, b = p.label.x, p.label.z
    acc = identity_pauli(p.n)
    for q in range(p.n):
        if (a >> q) & 1:
            acc = pauli_product(acc, tableau.x_images[q])
    for q in range(p.n):
        if (b >> q) & 1:
            acc = pauli_product(acc, tableau.z_images[q])
    return PhasedPauli(acc.label, acc.phase + p.phase + (a & b).bit_count())


# ---------------------------------------------------------------------------
# reduction engine shared by synthesis routines
#
# All routines work on a mutable list of tracked Paulis; emitting a gate
# conjugates every tracked element, so commutation relations among them are
# preserved exactly at each step.


class _Reducer:
    def __init__(self, n: int, tracked: list[PhasedPauli]):
        self.n = n
        self.tracked = tracked
        self.gates: list[tuple[str, tuple[int, ...]]] = []

    def emit(self, name: str, *qs: int) -> None:
        self.gates.append((name, qs))
        self.tracked[:] = [_conj_gate(name, qs, p) for p in self.tracked]

    def _first_bit(self, mask: int, off: int) -> int:
        m = mask >> off
        if m == 0:
            raise ValueError("no set bit above offset")
        return (m & -m).bit_length() - 1 + off

    def _make_x_at(self, idx: int, q: int) -> None:
        p = self.tracked[idx]
        aq, bq = (p.label.x >> q) & 1, (p.label.z >> q) & 1
        if aq and bq:
            self.emit("S", q)
        elif bq and not aq:
            self.emit("H", q)

    def _single_to_x(self, idx: int, off: int, target: int) -> None:
        # reduce tracked[idx] (supported on qubits >= off) to +-X_target
        p = self.tracked[idx]
        if p.label.x >> off == 0:
            self.emit("H", self._first_bit(p.label.z, off))
        pivot = self._first_bit(self.tracked[idx].label.x, off)
        self._make_x_at(idx, pivot)
        p = self.tracked[idx]
        for q in range(off, self.n):
            if q == pivot:
                continue
            if ((p.label.x >> q) & 1) or ((p.label.z >> q) & 1):
                self._make_x_at(idx, q)
                self.emit("CNOT", pivot, q)
        if pivot != target:
            self.emit("CNOT", target, pivot)
            self.emit("CNOT", pivot, target)
            self.emit("CNOT", target, pivot)

    def reduce_pair(self, ip: int, iq: int, off: int) -> None:
        """Map the anticommuting pair to exactly (+X_off, +Z_off).

        Both operators must act trivially below ``off``; every emitted gate
        touches only qubits >= off.
        """
        xoff = PauliLabel(self.n, 1 << off, 0)
        zoff = PauliLabel(self.n, 0, 1 << off)
        if self.tracked[ip].label != xoff:
            self._single_to_x(ip, off, off)
        if self.tracked[iq].label != zoff:
            # partner anticommutes with +-X_off, so it carries X or Y at off
            # once roles are swapped through a Hadamard sandwich
            self.emit("H", off)
            q_op = self.tracked[iq]
            if (q_op.label.z >> off) & 1:
                self.emit("S", off)
            q_op = self.tracked[iq]
            for q in range(off + 1, self.n):
                if ((q_op.label.x >> q) & 1) or ((q_op.label.z >> q) & 1):
                    self._make_x_at(iq, q)
                    self.emit("CNOT", off, q)
            self.emit("H", off)
        if self.tracked[ip].phase == 2:
            self.emit("Z", off)
        if self.tracked[iq].phase == 2:
            self.emit("X", off)
        assert self.tracked[ip] == PhasedPauli(xoff, 0)
        assert self.tracked[iq] == PhasedPauli(zoff, 0)

    def reduce_isotropic(self, indices: list[int], off: int) -> None:
        """Map commuting independent tracked elements to +Z_off, +Z_off+1, ...

        Earlier placements are protected: each new element commutes with the
        placed +Z_q, hence carries no X there, and any residual Z_q component
        is removed by multiplying with the placed generator (a row operation
        inside the group, sign tracked exactly).
        """
        placed: list[int] = []
        for t, idx in enumerate(indices):
            target = off + t
            for s, q in enumerate(placed):
                if (self.tracked[idx].label.z >> q) & 1:
                    self.tracked[idx] = pauli_product(
                        self.tracked[idx], self.tracked[indices[s]]
                    )
            if self.tracked[idx].label.is_identity:
                raise ValueError("dependent generator in isotropic reduction")
            if self.tracked[idx].label != PauliLabel(self.n, 0, 1 << target):
                lowest = min(
                    q for q in range(self.n)
                    if ((self.tracked[idx].label.x >> q) & 1)
                    or ((self.tracked[idx].label.z >> q) & 1)
                )
                self._single_to_x(idx, lowest, target)
                self.emit("H", target)
            if self.tracked[idx].phase == 2:
                self.emit("X", target)
            assert self.tracked[idx] == PhasedPauli(
                PauliLabel(self.n, 0, 1 << target), 0
            )
            placed.append(target)


def clifford_from_anticommuting_pair(p: PhasedPauli, q: PhasedPauli) -> CliffordTableau:
    """U with U p U^dagger = +X_0 and U q U^dagger = +Z_0."""
    if p.n != q.n:
        raise ValueError("size mismatch")
    if not (p.is_hermitian and q.is_hermitian):
        raise ValueError("inputs must be Hermitian signed Paulis")
    if symplectic_product(p.label, q.label) == 0:
        raise ValueError("inputs commute")
    red = _Reducer(p.n, [p, q])
    red.reduce_pair(0, 1, 0)
    return tableau_from_circuit(CliffordCircuit(p.n, tuple(red.gates)))


def clifford_from_isotropic(basis: Gf2Basis, n: int) -> CliffordTableau:
    """Conjugation carries span(basis) onto <Z_{n-d}, ..., Z_{n-1}>."""
    if not is_isotropic(basis, n):
        raise ValueError("input basis is not isotropic")
    d = basis.rank
    tracked = [PhasedPauli(lab, 0) for lab in basis.labels(n)]
    red = _Reducer(n, tracked)
    red.reduce_isotropic(list(range(d)), n - d)
    return tableau_from_circuit(CliffordCircuit(n, tuple(red.gates)))


def canonicalize_subgroup(generators) -> tuple[CliffordTableau, int, int]:
    """Clifford U and (k, m) with the span of the conjugated generators equal,
    as an unsigned set, to <Z_0, X_0, ..., Z_{k-1}, X_{k-1}, Z_k, ..., Z_{k+m-1}>:
    the k symplectic pairs land on the first k qubits, the center on the next m.
    """
    generators = list(generators)
    if not generators:
        raise ValueError("need at least one generator")
    n = generators[0].n
    sgs = symplectic_gram_schmidt(generators)
    k, m = len(sgs.pairs), len(sgs.center)
    tracked = [PhasedPauli(lab, 0) for pair in sgs.pairs for lab in pair]
    tracked += [PhasedPauli(lab, 0) for lab in sgs.center]
    red = _Reducer(n, tracked)
    for i in range(k):
        red.reduce_pair(2 * i, 2 * i + 1, i)
    red.reduce_isotropic(list(range(2 * k, 2 * k + m)), k)
    return tableau_from_circuit(CliffordCircuit(n, tuple(red.gates))), k, m


def canonicalize_subgroup_center_tail(generators) -> tuple[CliffordTableau, int, int]:
    """Variant layout: the k symplectic pairs still occupy the first k qubits
    but the center lands on the last m qubits, leaving the middle block free.
    Used where the free qubits must survive unmeasured."""
    generators = list(generators)
    if not generators:
        raise ValueError("need at least one generator")
    n = generators[0].n
    sgs = symplectic_gram_schmidt(generators)
    k, m = len(sgs.pairs), len(sgs.center)
    tracked = [PhasedPauli(lab, 0) for pair in sgs.pairs for lab in pair]
    tracked += [PhasedPauli(lab, 0) for lab in sgs.center]
    red = _Reducer(n, tracked)
    for i in range(k):
        red.reduce_pair(2 * i, 2 * i + 1, i)
    red.reduce_isotropic(list(range(2 * k, 2 * k + m)), n - m)
    return tableau_from_circuit(CliffordCircuit(n, tuple(red.gates))), k, m


def synthesize_circuit(tableau: CliffordTableau) -> CliffordCircuit:
    """Gate list whose extracted tableau reproduces the input exactly,
    including signs; O(n^2) gates."""
    n = tableau.n
    tracked = list(tableau.x_images) + list(tableau.z_images)
    red = _Reducer(n, tracked)
    for j in range(n):
        red.reduce_pair(j, n + j, j)
    # gates compose to tableau^{-1}; invert the list
    return CliffordCircuit(n, tuple(red.gates)).inverse()


# ---------------------------------------------------------------------------
# dense simulation helpers (shared with the statevector module)


def apply_gate_dense(amps: np.ndarray, n: int, name: str, qs: tuple[int, ...]) -> np.ndarray:
    out = amps.copy()
    if name == "CNOT":
        c, t = qs
        idx = np.arange(out.shape[0])
        sel = (idx >> c) & 1 == 1
        out[idx[sel]] = amps[idx[sel] ^ (1 << t)]
        return out
    (q,) = qs
    idx = np.arange(out.shape[0])
    hi = (idx >> q) & 1 == 1
    if name == "H":
        lo_idx = idx[~hi]
        hi_idx = lo_idx | (1 << q)
        a0, a1 = amps[lo_idx], amps[hi_idx]
        r = np.sqrt(0.5)
        out[lo_idx] = r * (a0 + a1)
        out[hi_idx] = r * (a0 - a1)
    elif name == "S":
        out[idx[hi]] = 1j * amps[idx[hi]]
    elif name == "X":
        out[idx] = amps[idx ^ (1 << q)]
    elif name == "Z":
        out[idx[hi]] = -amps[idx[hi]]
    else:
        raise ValueError(f"unknown gate {name!r}")
    return out


def apply_gates_dense(amps: np.ndarray, n: int, gates) -> np.ndarray:
    for name, qs in gates:
        amps = apply_gate_dense(amps, n, name, qs)
    return amps


def weyl_matrix(p: PhasedPauli) -> np.ndarray:
    """Dense matrix of the operator, for oracle checks at small n."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    I2 = np.eye(2, dtype=complex)
    facs = []
    for q in range(p.n - 1, -1, -1):
        aq, bq = (p.label.x >> q) & 1, (p.label.z >> q) & 1
        m = I2
        if aq:
            m = X
        if bq:
            m = m @ Z if aq else Z
        facs.append(m)
    mat = reduce(np.kron, facs) if facs else np.eye(1, dtype=complex)
    phase = 1j ** ((p.phase + (p.label.x & p.label.z).bit_count()) % 4)
    return phase * mat


# ---------------------------------------------------------------------------
# stabilizer states

_OMEGA_BLOCK = (("H", (0,)), ("S", (0,)), ("H", (0,)), ("S", (0,)), ("H", (0,)), ("S", (0,)))


@dataclass(frozen=True)
class StabilizerState:
    """n commuting, independent, Hermitian signed generators.

    The stabilized vector is unique; its global phase is fixed by making the
    amplitude of the smallest-index basis state with nonzero amplitude real
    positive.
    """

    n: int
    generators: tuple[PhasedPauli, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if len(self.generators) != self.n:
            raise ValueError("need exactly n generators")
        for g in self.generators:
            if g.n != self.n or not g.is_hermitian:
                raise ValueError("generators must be Hermitian n-qubit Paulis")
        labs = [g.label for g in self.generators]
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if symplectic_product(labs[i], labs[j]):
                    raise ValueError("generators must commute")
        if rref_basis([l.to_vector() for l in labs], 2 * self.n).rank != self.n:
            raise ValueError("generator labels must be independent")

    def to_json(self) -> list[str]:
        return [g.to_string() for g in self.generators]

    @staticmethod
    def from_json(strings: list[str]) -> "StabilizerState":
        gens = tuple(PhasedPauli.from_string(s) for s in strings)
        return StabilizerState(gens[0].n, gens)

    def sort_key(self) -> tuple[str, ...]:
        return tuple(sorted(g.to_string() for g in self.generators))

    def __repr__(self):
        return f"StabilizerState({self.to_json()})"


def _unphased_prep(state: StabilizerState) -> tuple[CliffordCircuit, np.ndarray]:
    n = state.n
    red = _Reducer(n, list(state.generators))
    red.reduce_isotropic(list(range(n)), 0)
    circuit = CliffordCircuit(n, tuple(red.gates)).inverse()
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    amps = apply_gates_dense(amps, n, circuit.gates)
    return circuit, amps


def _canonical_phase_factor(amps: np.ndarray) -> complex:
    nz = np.flatnonzero(np.abs(amps) > 1e-9)
    lead = amps[nz[0]]
    return abs(lead) / lead


def statevector_of(state: StabilizerState) -> np.ndarray:
    """Dense amplitudes under the global-phase convention."""
    if "vec" not in state._cache:
        _, amps = _unphased_prep(state)
        state._cache["vec"] = amps * _canonical_phase_factor(amps)
    return state._cache["vec"]


def stab_state_prep(state: StabilizerState) -> CliffordCircuit:
    """Circuit mapping |0...0> to the stabilized state, convention phase
    included (an omega = exp(i pi/4) global factor is a 6-gate H/S block)."""
    circuit, amps = _unphased_prep(state)
    factor = _canonical_phase_factor(amps)
    k = int(round((np.angle(factor) / (np.pi / 4)) % 8))
    if abs(factor - np.exp(1j * np.pi * k / 4)) > 1e-9:
        raise AssertionError("prep phase is not an 8th root of unity")
    gates = circuit.gates + _OMEGA_BLOCK * k
    return CliffordCircuit(state.n, gates)


def stabilizer_inner_product(s1: StabilizerState, s2: StabilizerState) -> complex:
    """Exact overlap <s1|s2> under the global-phase convention."""
    if s1.n != s2.n:
        raise ValueError("size mismatch")
    return complex(np.vdot(statevector_of(s1), statevector_of(s2)))


# ---------------------------------------------------------------------------
# exhaustive enumeration (the brute-force oracle)

ENUMERATION_CAP = 4

def _move_vector(v: int, n: int, move: tuple) -> int:
    mask = (1 << n) - 1
    a, b = v & mask, (v >> n) & mask
    kind = move[0]
    if kind == "H":
        q = move[1]
        bit = 1 << q
        aq, bq = a & bit, b & bit
        a = (a & ~bit) | (bit if bq else 0)
        b = (b & ~bit) | (bit if aq else 0)
    elif kind == "S":
        q = move[1]
        bit = 1 << q
        if a & bit:
            b ^= bit
    else:  # CNOT
        c, t = move[1], move[2]
        if a & (1 << c):
            a ^= 1 << t
        if b & (1 << t):
            b ^= 1 << c
    return a | (b << n)


@lru_cache(maxsize=None)
def lagrangian_subspaces(n: int) -> tuple[Gf2Basis, ...]:
    """All Lagrangian subspaces of F_2^{2n}, via the symplectic group orbit
    of the Z-type subspace (the action is transitive)."""
    return _isotropic_orbit(n, n)


@lru_cache(maxsize=None)
def isotropic_subspaces(n: int, d: int) -> tuple[Gf2Basis, ...]:
    return _isotropic_orbit(n, d)


def _isotropic_orbit(n: int, d: int) -> tuple[Gf2Basis, ...]:
    moves = [("H", q) for q in range(n)] + [("S", q) for q in range(n)]
    moves += [("CNOT", c, t) for c in range(n) for t in range(n) if c != t]
    start = rref_basis([1 << (n + q) for q in range(d)], 2 * n)
    seen = {start.rows: start}
    frontier = [start]
    while frontier:
        nxt = []
        for basis in frontier:
            for mv in moves:
                rows = [_move_vector(v, n, mv) for v in basis.rows]
                cand = rref_basis(rows, 2 * n)
                if cand.rows not in seen:
                    seen[cand.rows] = cand
                    nxt.append(cand)
        frontier = nxt
    return tuple(sorted(seen.values(), key=lambda b: b.rows))


def _symplectic_dual_basis(rows: tuple[int, ...], n: int) -> list[int]:
    """Vectors y_i with [y_i, rows_j] = delta_ij, by Gaussian elimination on
    the pairing patterns of the 2n unit vectors."""
    basis_vec: list[int] = []
    basis_pat: list[int] = []
    for bit in range(2 * n):
        vv = 1 << bit
        pp = 0
        for j, r in enumerate(rows):
            pp |= symplectic_product_vec(vv, r, n) << j
        for bv, bp in zip(basis_vec, basis_pat):
            if pp & (bp & -bp):
                pp ^= bp
                vv ^= bv
        if pp:
            basis_vec.append(vv)
            basis_pat.append(pp)
    duals = []
    for i in range(len(rows)):
        want = 1 << i
        yv, yp = 0, 0
        for bv, bp in zip(basis_vec, basis_pat):
            if (want ^ yp) & (bp & -bp):
                yp ^= bp
                yv ^= bv
        if yp != want:
            raise ValueError("dual basis solve failed")
        duals.append(yv)
    return duals


@lru_cache(maxsize=None)
def _stab_catalog(n: int) -> tuple[tuple[StabilizerState, ...], np.ndarray]:
    if n > ENUMERATION_CAP:
        raise ValueError(f"enumeration capped at n <= {ENUMERATION_CAP}")
    states: list[StabilizerState] = []
    vecs: list[np.ndarray] = []
    for basis in lagrangian_subspaces(n):
        gens0 = tuple(
            PhasedPauli(PauliLabel.from_vector(n, v), 0) for v in basis.rows
        )
        base = StabilizerState(n, gens0)
        base_vec = statevector_of(base)
        duals = _symplectic_dual_basis(basis.rows, n)
        for eps in range(1 << n):
            gens = tuple(
                PhasedPauli(g.label, 2 * ((eps >> i) & 1))
                for i, g in enumerate(gens0)
            )
            y = 0
            for i in range(n):
                if (eps >> i) & 1:
                    y ^= duals[i]
            vec = _apply_weyl_vector(base_vec, n, y)
            vec = vec * _canonical_phase_factor(vec)
            st = StabilizerState(n, gens)
            st._cache["vec"] = vec
            states.append(st)
            vecs.append(vec)
    order = sorted(range(len(states)), key=lambda i: states[i].sort_key())
    states = [states[i] for i in order]
    matrix = np.array([vecs[i] for i in order])
    return tuple(states), matrix


def _apply_weyl_vector(amps: np.ndarray, n: int, label_vec: int) -> np.ndarray:
    mask = (1 << n) - 1
    a, b = label_vec & mask, (label_vec >> n) & mask
    idx = np.arange(amps.shape[0])
    phase = 1j ** ((a & b).bit_count() % 4)
    signs = 1.0 - 2.0 * (np.bitwise_count(np.uint64(b) & idx.astype(np.uint64)) & 1).astype(
        float
    )
    out = np.empty_like(amps)
    out[idx ^ a] = phase * signs * amps
    return out


def enumerate_stabilizer_states(n: int) -> list[StabilizerState]:
    """Exhaustive duplicate-free list, sorted by canonical serialization."""
    states, _ = _stab_catalog(n)
    return list(states)


def stabilizer_state_matrix(n: int) -> tuple[tuple[StabilizerState, ...], np.ndarray]:
    """Catalog plus the stacked matrix of canonical statevectors."""
    return _stab_catalog(n)
