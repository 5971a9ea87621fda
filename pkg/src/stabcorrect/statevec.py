"""Dense statevector oracle: Weyl action and expectations, characteristic and
difference-sampling distribution tables, two-copy retention, overlap and
sampling estimators, block measurements, combination-residual preparation,
and the brute-force stabilizer-fidelity oracle.

All "measurements" draw from exactly computed Born probabilities; finite-shot
behavior enters only through declared shot counts in the estimators, which
makes every statistical guarantee directly testable.  Tables of size 4^n are
capped by ``STABCORRECT_TABLE_CAP`` (default 12).

States are immutable values; operations return new states.  Independent
trials may run concurrently provided each owns a distinct RngStream path and
a private CostLedger merged afterwards.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ResidualVanished
from .gf2 import PauliLabel
from .ledger import CostLedger
from .pauli import (
    CliffordCircuit,
    StabilizerState,
    apply_gates_dense,
    stabilizer_state_matrix,
)

NORM_TOL = 1e-10
EQ_TOL = 1e-12


def table_cap() -> int:
    return int(os.environ.get("STABCORRECT_TABLE_CAP", "12"))


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amps: np.ndarray
    normalized: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (1 << self.n,):
            raise ValueError("amplitude table must have 2^n entries")
        object.__setattr__(self, "amps", amps)
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("state marked normalized is not")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def basis_state(n: int, index: int = 0) -> StateVector:
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    raw = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, raw / np.linalg.norm(raw))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    # the second factor occupies the higher qubit indices
    return StateVector(
        a.n + b.n, np.kron(b.amps, a.amps), a.normalized and b.normalized
    )


def overlap(a: StateVector, b: StateVector) -> complex:
    return complex(np.vdot(a.amps, b.amps))


def statevector_of_stab(state: StabilizerState) -> StateVector:
    from .pauli import statevector_of

    return StateVector(state.n, statevector_of(state))


# ---------------------------------------------------------------------------
# Weyl action and distributions


def label_index(label: PauliLabel) -> int:
    return label.x | (label.z << label.n)


def label_from_index(n: int, idx: int) -> PauliLabel:
    return PauliLabel.from_vector(n, idx)


def apply_weyl(psi: StateVector, label: PauliLabel) -> StateVector:
    """Exact action of i^{|a&b|} X^a Z^b."""
    if label.n != psi.n:
        raise ValueError("size mismatch")
    a, b = label.x, label.z
    idx = np.arange(1 << psi.n, dtype=np.uint64)
    phase = 1j ** ((a & b).bit_count() % 4)
    signs = 1.0 - 2.0 * (np.bitwise_count(np.uint64(b) & idx) & 1).astype(float)
    out = np.empty_like(psi.amps)
    out[idx.astype(np.int64) ^ a] = phase * signs * psi.amps
    return StateVector(psi.n, out, psi.normalized)


def apply_circuit(
    psi: StateVector, circuit: CliffordCircuit, ledger: CostLedger | None = None
) -> StateVector:
    if circuit.n != psi.n:
        raise ValueError("size mismatch")
    amps = apply_gates_dense(psi.amps, psi.n, circuit.gates)
    if ledger is not None:
        ledger.charge("apply_circuit", gates=len(circuit))
    return StateVector(psi.n, amps, psi.normalized)


def weyl_expectation(psi: StateVector, label: PauliLabel) -> float:
    """<psi|W_x|psi>, real for normalized pure states, in [-1, 1]."""
    if not psi.normalized:
        raise ValueError("expectation values require a normalized state")
    val = np.vdot(psi.amps, apply_weyl(psi, label).amps)
    return float(val.real)


def expectation_table(psi: StateVector) -> np.ndarray:
    """All 4^n expectations <W_x>, indexed by ``label_index``."""
    if "exps" not in psi._cache:
        if psi.n > table_cap():
            raise ValueError(f"table cap exceeded: n={psi.n} > {table_cap()}")
        psi._cache["exps"] = kernels.char_expectations(psi.amps, psi.n)
    return psi._cache["exps"]


@dataclass(frozen=True)
class ProbTable:
    """Distribution over the 4^n labels; entries never exceed 2^-n."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if abs(vals.sum() - 1.0) > NORM_TOL:
            raise ValueError("probability table does not sum to 1")
        if vals.min() < -EQ_TOL or vals.max() > 2.0 ** (-self.n) + EQ_TOL:
            raise ValueError("entry outside [0, 2^-n]")


def distribution_tables(psi: StateVector) -> tuple[ProbTable, ProbTable]:
    """Characteristic table p(x) = <W_x>^2 / 2^n and its XOR self-convolution
    q = p * p (the law of difference sampling), via the fast transform."""
    if not psi.normalized:
        raise ValueError("tables require a normalized state")
    if "pq" not in psi._cache:
        exps = expectation_table(psi)
        p = exps * exps / (1 << psi.n)
        q = kernels.xor_convolve(p, p)
        np.clip(q, 0.0, None, out=q)
        psi._cache["pq"] = (ProbTable(psi.n, p), ProbTable(psi.n, q))
    return psi._cache["pq"]


def _q_sampler(psi: StateVector):
    if "qcum" not in psi._cache:
        _, q = distribution_tables(psi)
        psi._cache["qcum"] = np.cumsum(q.values)
    return psi._cache["qcum"]


def sample_weyl_indices(
    psi: StateVector, size: int, rng: np.random.Generator, ledger: CostLedger | None
) -> np.ndarray:
    """Batched difference sampling: label indices drawn from q, 4 copies each."""
    cum = _q_sampler(psi)
    u = rng.random(size)
    idx = np.searchsorted(cum, u * cum[-1], side="right")
    if ledger is not None:
        ledger.charge("bell_difference", copies=4 * size)
    return np.minimum(idx, cum.shape[0] - 1)


def sample_weyl_dist(
    psi: StateVector, rng: np.random.Generator, ledger: CostLedger | None = None
) -> PauliLabel:
    """One label drawn with probability q(x)."""
    idx = sample_weyl_indices(psi, 1, rng, ledger)[0]
    return label_from_index(psi.n, int(idx))


def two_copy_retention(
    psi: StateVector,
    label: PauliLabel,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    law: str = "expectation-squared",
) -> bool:
    """Keep the label with probability <W_x>^2 (two copies consumed).

    ``law="two-copy-measurement"`` instead reports the +1 outcome of one
    W_x (x) W_x measurement, which occurs with probability (1 + <W_x>^2)/2;
    that reading is exposed for comparison only.
    """
    w = weyl_expectation(psi, label)
    if ledger is not None:
        ledger.charge("retention", copies=2)
    if law == "expectation-squared":
        return bool(rng.random() < w * w)
    if law == "two-copy-measurement":
        return bool(rng.random() < 0.5 * (1.0 + w * w))
    raise ValueError(f"unknown retention law {law!r}")


# ---------------------------------------------------------------------------
# metrics and estimators


@dataclass(frozen=True)
class GowersMetrics:
    proxy: float      # E_{x~q}[<W_x>^2]
    u3pow8: float     # E_{x~p}[<W_x>^2]
    mode: str
    shots: int = 0


def gowers3_metrics(
    psi: StateVector,
    mode: str = "exact",
    delta: float = 0.05,
    rng: np.random.Generator | None = None,
    ledger: CostLedger | None = None,
    fail_prob: float = 1e-3,
) -> GowersMetrics:
    """Correlation metrics of the label distributions.

    Exact mode evaluates both averages from the tables and cross-checks the
    triple-correlation identity  E_{x~q}[2^n p(x)] = 2^{2n} sum_x p(x)^3,
    which holds for pure states.  Sampled mode estimates the q-average to
    within ``delta`` with probability >= 1 - fail_prob using O(1/delta^2)
    six-copy shots.
    """
    p, q = distribution_tables(psi)
    w2 = expectation_table(psi) ** 2
    if mode == "exact":
        proxy = float(np.dot(q.values, w2))
        u3pow8 = float(np.dot(p.values, w2))
        triple = float((4.0 ** psi.n) * np.sum(p.values ** 3))
        if abs(proxy - triple) > 1e-9:
            raise AssertionError("triple-correlation identity violated")
        return GowersMetrics(proxy, u3pow8, "exact")
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    shots = int(np.ceil(2.0 * np.log(2.0 / fail_prob) / delta**2))
    xs = sample_weyl_indices(psi, shots, rng, ledger)
    pr_plus = 0.5 * (1.0 + w2[xs])
    outcomes = 2.0 * (rng.random(shots) < pr_plus) - 1.0
    proxy = float(outcomes.mean())
    # the p-average needs conjugate-assisted pair sampling; same estimator shape
    pcum = np.cumsum(p.values)
    ys = np.minimum(
        np.searchsorted(pcum, rng.random(shots) * pcum[-1], side="right"),
        pcum.shape[0] - 1,
    )
    pr_plus = 0.5 * (1.0 + w2[ys])
    out2 = 2.0 * (rng.random(shots) < pr_plus) - 1.0
    if ledger is not None:
        # two measured copies per proxy shot; two sampling plus two measured
        # copies per conjugate-pair shot
        ledger.charge("gowers_sampled", copies=6 * shots)
    return GowersMetrics(proxy, float(out2.mean()), "sampled", shots)


def hadamard_test_estimate(
    prep_a: StateVector,
    prep_b: StateVector,
    eps: float,
    delta: float,
    rng: np.random.Generator | None = None,
    ledger: CostLedger | None = None,
    exact: bool = False,
) -> complex:
    """Estimate <a|b> within eps per real/imaginary part, w.p. >= 1 - delta.

    Each shot interferes the two controlled preparations once; the real part
    uses Pr[0] = (1 + Re<a|b>)/2, the imaginary part the S-twisted variant.
    """
    val = overlap(prep_a, prep_b)
    if exact:
        return val
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    shots = int(np.ceil(2.0 * np.log(4.0 / delta) / eps**2))
    p_re = np.clip(0.5 * (1.0 + val.real), 0.0, 1.0)
    p_im = np.clip(0.5 * (1.0 + val.imag), 0.0, 1.0)
    re = 2.0 * rng.binomial(shots, p_re) / shots - 1.0
    im = 2.0 * rng.binomial(shots, p_im) / shots - 1.0
    if ledger is not None:
        ledger.charge("hadamard_test", queries_conU=2 * shots)
    return complex(re, im)


# ---------------------------------------------------------------------------
# measurements


def _block_values(n: int, block: tuple[int, ...]) -> np.ndarray:
    idx = np.arange(1 << n)
    vals = np.zeros(1 << n, dtype=np.int64)
    for i, q in enumerate(block):
        vals |= ((idx >> q) & 1) << i
    return vals


def measure_block(
    psi: StateVector,
    block,
    basis="computational",
    rng: np.random.Generator | None = None,
    ledger: CostLedger | None = None,
    force_outcome=None,
):
    """Born-rule measurement of a qubit block.

    ``basis="computational"`` returns (bitstring outcome, probability,
    renormalized post-state).  ``basis=("project", vec)`` measures the
    projector onto the 2^|block| state ``vec``; outcome 0 means "onto the
    state".  Explicitly forcing a zero-probability branch raises.
    """
    block = tuple(block)
    if not psi.normalized:
        raise ValueError("measurement requires a normalized state")
    if ledger is not None:
        ledger.charge("measure", copies=1)
    if basis == "computational":
        vals = _block_values(psi.n, block)
        probs = np.bincount(vals, weights=np.abs(psi.amps) ** 2, minlength=1 << len(block))
        if force_outcome is not None:
            outcome = int(force_outcome)
            if probs[outcome] < 1e-15:
                raise ValueError("zero-probability branch requested")
        else:
            if rng is None:
                raise ValueError("sampling needs an rng")
            outcome = int(rng.choice(probs.shape[0], p=probs / probs.sum()))
        sel = vals == outcome
        post = np.where(sel, psi.amps, 0.0)
        post = post / np.sqrt(probs[outcome])
        return outcome, float(probs[outcome]), StateVector(psi.n, post)
    kind, vec = basis
    if kind != "project":
        raise ValueError(f"unknown basis {basis!r}")
    vec = np.asarray(vec, dtype=complex)
    vals = _block_values(psi.n, block)
    rest_qubits = tuple(q for q in range(psi.n) if q not in block)
    rest_vals = _block_values(psi.n, rest_qubits)
    # contraction amp_rest(y) = sum_x conj(vec[x]) psi[x at block, y at rest]
    contr = np.zeros(1 << len(rest_qubits), dtype=complex)
    np.add.at(contr, rest_vals, np.conj(vec[vals]) * psi.amps)
    p0 = float(np.sum(np.abs(contr) ** 2))
    if force_outcome is not None:
        outcome = int(force_outcome)
        pr = p0 if outcome == 0 else 1.0 - p0
        if pr < 1e-15:
            raise ValueError("zero-probability branch requested")
    else:
        if rng is None:
            raise ValueError("sampling needs an rng")
        outcome = 0 if rng.random() < p0 else 1
    if outcome == 0:
        # post = |vec> (x) contr / sqrt(p0), reassembled on the full register
        post = vec[vals] * contr[rest_vals] / np.sqrt(p0)
        return 0, p0, StateVector(psi.n, post)
    proj = vec[vals] * contr[rest_vals]
    post = (psi.amps - proj) / np.sqrt(1.0 - p0)
    return 1, p0, StateVector(psi.n, post)


def lcu_residual(
    psi: StateVector,
    circuits: list[CliffordCircuit],
    coeffs: list[complex],
    alpha: float,
    ledger: CostLedger | None = None,
    tol: float = 1e-9,
) -> tuple[StateVector, float]:
    """Residual (psi - sum_j beta_j phi_j)/norm via combination-of-unitaries
    postselection; returns the normalized residual and the exact success
    probability (||V|0>|| / ||a||_1)^2 with ||a||_1 = (1 + sum|beta_j|)/alpha.

    A residual below tolerance raises ResidualVanished: the running expansion
    already reproduces the state.
    """
    if alpha <= 0:
        raise ValueError("normalizer must be positive")
    resid = psi.amps.copy()
    zero = basis_state(psi.n)
    for beta, circ in zip(coeffs, circuits):
        resid = resid - beta * apply_circuit(zero, circ).amps
    rnorm = float(np.linalg.norm(resid))
    a1 = (1.0 + sum(abs(b) for b in coeffs)) / alpha
    success = (rnorm / alpha / a1) ** 2
    if ledger is not None:
        attempts = int(np.ceil(1.0 / success)) if success > 0 else 0
        gates = sum(len(c) for c in circuits)
        ledger.charge(
            "lcu",
            queries_conU=attempts * (1 + len(circuits)),
            gates=attempts * gates,
        )
    if rnorm < tol:
        raise ResidualVanished(f"residual norm {rnorm:.2e} below tolerance")
    return StateVector(psi.n, resid / rnorm), success


# ---------------------------------------------------------------------------
# brute-force oracles


def bruteforce_stab_fidelity(psi: StateVector) -> tuple[float, StabilizerState]:
    """Exact max overlap^2 over every stabilizer state; first catalog entry
    within 1e-12 of the maximum wins, so ties break by serialization order."""
    states, matrix = stabilizer_state_matrix(psi.n)
    vals = np.abs(matrix.conj() @ psi.amps) ** 2
    best = float(vals.max())
    arg = int(np.argmax(vals >= best - 1e-12))
    return best, states[arg]


def bruteforce_stab_dim_fidelity(psi: StateVector, t: int) -> float:
    """Exact max overlap^2 with any state of stabilizer dimension >= n - t.

    Every such state rotates to |sigma> (x) |z| under a Clifford carrying its
    isotropic group to the Z tail, where the optimum over sigma equals the
    branch weight; so the maximum over all dimension-(n-t) isotropic
    subspaces and branches z is exhaustive.
    """
    from .pauli import clifford_from_isotropic, isotropic_subspaces, synthesize_circuit

    n = psi.n
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    if t == n:
        return 1.0
    best = 0.0
    for basis in isotropic_subspaces(n, n - t):
        tab = clifford_from_isotropic(basis, n)
        rotated = apply_circuit(psi, synthesize_circuit(tab))
        weights = np.abs(rotated.amps.reshape(1 << (n - t), 1 << t)) ** 2
        best = max(best, float(weights.sum(axis=1).max()))
    return best


# ---------------------------------------------------------------------------
# import / export


def save_statevector(psi: StateVector, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", psi.n))
        fh.write(psi.amps.astype("<c16").tobytes())


def load_statevector(path: str) -> StateVector:
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<Q", fh.read(8))
        amps = np.frombuffer(fh.read(), dtype="<c16").astype(complex)
    norm_ok = abs(np.linalg.norm(amps) - 1.0) <= NORM_TOL
    return StateVector(int(n), amps, normalized=norm_ok)


def statevector_to_json(psi: StateVector) -> dict:
    return {
        "n": psi.n,
        "normalized": psi.normalized,
        "amps": [[float(a.real), float(a.imag)] for a in psi.amps],
    }


def statevector_from_json(data: dict) -> StateVector:
    amps = np.array([complex(re, im) for re, im in data["amps"]])
    return StateVector(int(data["n"]), amps, bool(data["normalized"]))
