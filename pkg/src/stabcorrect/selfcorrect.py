"""The self-correction pipeline: difference-sampling retention, edge and
common-neighbor membership tests, small-doubling collection, covering-subgroup
construction behind a pluggable membership oracle, stabilizer extraction
(proper and improper), and the tolerant tester for high stabilizer dimension.

The published threshold constants for the common-neighbor test are
astronomically small (gamma^350-scale); ``published_bsg_params`` evaluates them
exactly in rational arithmetic for inspection, while ``BsgParams.practical``
provides desk-scale presets that planted instances validate end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BlockWeightBelowTolerance,
    CollectionEmpty,
    NoCandidateFound,
    PfrSubgroupNotFound,
    SelfCorrectionFailed,
)
from .gf2 import Gf2Basis, PauliLabel, mub_covering, rref_basis
from .ledger import CostLedger
from .pauli import (
    CliffordTableau,
    PhasedPauli,
    StabilizerState,
    canonicalize_subgroup,
    conjugate,
    synthesize_circuit,
)
from .statevec import (
    GowersMetrics,
    StateVector,
    apply_circuit,
    distribution_tables,
    expectation_table,
    gowers3_metrics,
    label_from_index,
    label_index,
    measure_block,
    overlap,
    sample_weyl_indices,
    statevector_of_stab,
)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class BsgParams:
    zeta1: float
    zeta2: float
    zeta3: float
    rho1: float
    rho2: float
    r: int
    s: int
    delta: float

    def __post_init__(self):
        if not (0 < self.zeta2 <= self.zeta1 <= 1 and 0 < self.zeta3 <= 1):
            raise ValueError("edge thresholds out of range")
        if not (0 < self.rho1 < 1 and 0 < self.rho2 < 1):
            raise ValueError("neighbor thresholds out of range")
        if self.r < 1 or self.s < 1:
            raise ValueError("sample counts must be positive")

    @staticmethod
    def practical(gamma: float, delta: float = 0.05) -> "BsgParams":
        """Desk-scale preset: thresholds at (0.6, 0.4, 0.5) * gamma/4,
        common-neighbor cutoffs at 0.1, and 64 outer/inner samples."""
        base = gamma / 4.0
        return BsgParams(0.6 * base, 0.4 * base, 0.5 * base, 0.1, 0.1, 64, 64, delta)

    @property
    def zeta_slack(self) -> float:
        return self.zeta2 / 2.0


PUBLISHED_C1 = 2**10 * 10**2
PUBLISHED_C2 = 2**39 * 10**15


@dataclass(frozen=True)
class PublishedBsgParams:
    """Exact rational evaluation of the published parameter formulas; for
    documentation and inspection, not default execution."""

    gamma: Fraction
    delta: Fraction
    rho: Fraction          # graph density floor gamma^5/20
    rho1: Fraction
    rho2: Fraction
    rho3: Fraction
    interval_low: Fraction     # gamma/180
    interval_high: Fraction    # gamma/18
    subinterval_count: Fraction  # 1/rho3
    subinterval_width: Fraction  # gamma*rho3/20
    mu: Fraction                 # half width
    r: int
    s: int

    def zetas_for_subinterval(self, i: int) -> tuple[Fraction, Fraction, Fraction]:
        lo = self.interval_low + i * self.subinterval_width
        zeta = lo + self.mu
        return zeta + self.mu / 2, zeta - self.mu / 2, zeta + self.mu / 2


def published_bsg_params(gamma, delta=Fraction(1, 100)) -> PublishedBsgParams:
    g = Fraction(gamma)
    d = Fraction(delta)
    rho = g**5 / 20
    rho1 = g**350 / (10240 * Fraction(PUBLISHED_C1) ** 3 * Fraction(PUBLISHED_C2) ** 5)
    rho2 = 9 * g**202 / (2560 * Fraction(PUBLISHED_C1) * Fraction(PUBLISHED_C2) ** 3)
    rho3 = g**349 / (2560 * Fraction(PUBLISHED_C1) ** 3 * Fraction(PUBLISHED_C2) ** 5)
    width = g * rho3 / 20
    # shot counts sized so edge estimates resolve rho1/100
    import math

    log_term = max(1.0, math.log(4.0 / float(d)))
    shots = Fraction(2 * 10**4) / rho1**2 * Fraction(int(math.ceil(log_term)))
    r = s = int(shots) if shots < 10**12 else 10**12  # representative, clamped
    return PublishedBsgParams(
        g, d, rho, rho1, rho2, rho3,
        g / 180, g / 18, 1 / rho3, width, width / 2, r, s,
    )


# ---------------------------------------------------------------------------
# sampling and membership tests


def _w2(psi: StateVector) -> np.ndarray:
    if "w2" not in psi._cache:
        psi._cache["w2"] = expectation_table(psi) ** 2
    return psi._cache["w2"]


def sample_paulis(
    psi: StateVector,
    gamma: float,
    delta: float,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    exact_filter: bool = False,
    rounds: int | None = None,
) -> list[PauliLabel]:
    """Difference sampling plus two-copy retention.

    Runs O(log(1/delta)/gamma^2) rounds; each retained label survived a
    retention draw with probability <W_x>^2.  With ``exact_filter`` the output
    is additionally restricted to labels with <W_x>^2 >= gamma/4 (the
    exact-table realization of the conditioning used downstream).
    """
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    m = rounds if rounds is not None else int(np.ceil(4.0 * np.log(1.0 / delta) / gamma**2))
    idx = sample_weyl_indices(psi, m, rng, ledger)
    w2 = _w2(psi)[idx]
    keep = rng.random(m) < w2
    if ledger is not None:
        ledger.charge("retention", copies=2 * m)
    if exact_filter:
        keep &= _w2(psi)[idx] >= gamma / 4.0
    return [label_from_index(psi.n, int(i)) for i in idx[keep]]


def _draw_retained(
    psi: StateVector,
    count: int,
    rng: np.random.Generator,
    ledger: CostLedger | None,
    max_batches: int = 64,
) -> np.ndarray:
    """Label indices that passed retention, batched until ``count`` collected."""
    out: list[np.ndarray] = []
    got = 0
    w2 = _w2(psi)
    rate = max(float(np.dot(distribution_tables(psi)[1].values, w2)), 1e-3)
    for _ in range(max_batches):
        want = max(int(np.ceil((count - got) / rate)) + 4, 8)
        idx = sample_weyl_indices(psi, want, rng, ledger)
        if ledger is not None:
            ledger.charge("retention", copies=2 * want)
        kept = idx[rng.random(want) < w2[idx]]
        out.append(kept)
        got += kept.shape[0]
        if got >= count:
            break
    if got < count:
        raise CollectionEmpty(f"retention produced {got} < {count} samples")
    return np.concatenate(out)[:count]


def _edge_batch(
    psi: StateVector,
    xs: np.ndarray,
    ys: np.ndarray,
    zeta: float,
    zeta_p: float,
    delta: float,
    rng: np.random.Generator,
    ledger: CostLedger | None,
    exact: bool,
) -> np.ndarray:
    w2 = _w2(psi)
    wx, wy, wxy = w2[xs], w2[ys], w2[xs ^ ys]
    if exact:
        return (wx >= zeta) & (wy >= zeta) & (wxy >= zeta)
    shots = int(np.ceil(2.0 * np.log(6.0 / delta) / zeta_p**2))
    m = xs.shape[0]

    def est(w):
        pr = np.clip(0.5 * (1.0 + w), 0.0, 1.0)
        return 2.0 * rng.binomial(shots, pr) / shots - 1.0

    passed = (est(wx) >= zeta) & (est(wy) >= zeta) & (est(wxy) >= zeta)
    flag = passed & (rng.random(m) < wxy)
    if ledger is not None:
        ledger.charge("edge_test", copies=(6 * shots + 2) * m)
    return flag


def edge_test(
    psi: StateVector,
    x: PauliLabel,
    y: PauliLabel,
    zeta: float,
    zeta_p: float,
    delta: float,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    exact: bool = False,
) -> bool:
    """Decide (x, y) edge membership: the three expectations <W_x>^2,
    <W_y>^2, <W_{x+y}>^2 must clear the threshold, and x+y must pass a
    retention draw (the choice-set surrogate).

    With probability >= 1 - delta a 1 implies membership at threshold
    zeta - zeta_p and a 0 implies non-membership at zeta + zeta_p.  Exact
    mode thresholds the table values and skips the retention coin, making
    the output deterministic and monotone in zeta.
    """
    if not zeta_p < zeta:
        raise ValueError("slack must be smaller than the threshold")
    xs = np.array([label_index(x)])
    ys = np.array([label_index(y)])
    return bool(_edge_batch(psi, xs, ys, zeta, zeta_p, delta, rng, ledger, exact)[0])


def bsg_test(
    psi: StateVector,
    u: PauliLabel,
    v: PauliLabel,
    params: BsgParams,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    exact: bool = False,
) -> bool:
    """Membership flag for the small-doubling neighborhood of u.

    Draws r outer and r*s inner retained samples, runs the edge tests, and
    thresholds the empirical common-neighbor frequencies: a sample z counts
    against (u, v) when too few inner samples are joint neighbors of v and z.
    """
    delta_p = params.delta / (5.0 * (1 + params.r + 2 * params.r * params.s))
    uu = np.array([label_index(u)])
    vv = np.array([label_index(v)])
    if not _edge_batch(
        psi, uu, vv, params.zeta1, params.zeta_slack, delta_p, rng, ledger, exact
    )[0]:
        return False
    r, s = params.r, params.s
    z = _draw_retained(psi, r, rng, ledger)
    w = _draw_retained(psi, r * s, rng, ledger).reshape(r, s)
    xk = _edge_batch(
        psi, np.repeat(uu, r), z, params.zeta2, params.zeta_slack, delta_p, rng, ledger, exact
    )
    yk = _edge_batch(
        psi, np.repeat(vv, r * s), w.ravel(), params.zeta3, params.zeta_slack,
        delta_p, rng, ledger, exact,
    ).reshape(r, s)
    zk = _edge_batch(
        psi, np.repeat(z, s), w.ravel(), params.zeta3, params.zeta_slack,
        delta_p, rng, ledger, exact,
    ).reshape(r, s)
    bk = (yk & zk).mean(axis=1) <= params.rho1
    return bool((xk & bk).mean() <= params.rho2)


def collect_small_doubling(
    psi: StateVector,
    t: int,
    gamma: float,
    delta: float,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    params: BsgParams | None = None,
    exact: bool = False,
    stop_after: int | None = None,
    vertex_budget: int | None = None,
) -> list[list[PauliLabel]]:
    """Candidate sets of test-accepted labels, each of size >= t.

    Iterates sampled vertices u and gathers the v's the membership test
    accepts; ``stop_after`` returns early once that many qualifying sets
    exist (the pipeline uses 1).  An empty collection raises so callers can
    retry with fresh randomness.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    params = params or BsgParams.practical(gamma, delta)
    m = min(6 * t + 24, 256)
    verts = np.unique(_draw_retained(psi, m, rng, ledger))
    if vertex_budget is not None:
        verts = verts[:vertex_budget]
    collection: list[list[PauliLabel]] = []
    for u in verts:
        ul = label_from_index(psi.n, int(u))
        accepted = [
            label_from_index(psi.n, int(v))
            for v in verts
            if v != u and bsg_test(psi, ul, label_from_index(psi.n, int(v)), params, rng, ledger, exact)
        ]
        if len(accepted) >= t:
            collection.append(accepted)
            if stop_after is not None and len(collection) >= stop_after:
                break
    if not collection:
        raise CollectionEmpty("no candidate set reached the requested size")
    return collection


# ---------------------------------------------------------------------------
# covering-subgroup oracle


@dataclass(frozen=True)
class PfrOracle:
    """Membership predicate for the covering subgroup; consistency is
    guaranteed by construction (the predicate closes over a fixed basis)."""

    provenance: str  # "planted" | "threshold-span"
    basis: Gf2Basis

    def __call__(self, label: PauliLabel) -> bool:
        return self.basis.contains(label.to_vector())


def make_pfr_oracle(
    mode: str,
    *,
    basis: Gf2Basis | None = None,
    psi: StateVector | None = None,
    theta: float | None = None,
    n_samples: int = 256,
    shots: int = 512,
    rng: np.random.Generator | None = None,
    ledger: CostLedger | None = None,
) -> PfrOracle:
    """Planted mode wraps a known subgroup basis; threshold-span mode spans
    the sampled labels whose estimated <W_x>^2 clears theta (a heuristic
    stand-in for an actual construction)."""
    if mode == "planted":
        if basis is None:
            raise ValueError("planted mode needs a subgroup basis")
        return PfrOracle("planted", basis)
    if mode == "threshold-span":
        if psi is None or theta is None or rng is None:
            raise ValueError("threshold-span mode needs psi, theta and rng")
        idx = np.unique(sample_weyl_indices(psi, n_samples, rng, ledger))
        w2 = _w2(psi)[idx]
        est = 2.0 * rng.binomial(shots, np.clip(0.5 * (1.0 + w2), 0.0, 1.0)) / shots - 1.0
        if ledger is not None:
            ledger.charge("oracle_build", copies=2 * shots * idx.shape[0])
        keep = idx[est >= theta]
        span = rref_basis([int(v) for v in keep], 2 * psi.n)
        return PfrOracle("threshold-span", span)
    raise ValueError(f"unknown oracle mode {mode!r}")


@dataclass(frozen=True)
class SubgroupV:
    """A label subgroup with its (exact-table) retained mass E_{x in V}[<W_x>^2]."""

    n: int
    basis: Gf2Basis
    mass: float | None

    def __post_init__(self):
        if self.mass is not None and not -1e-9 <= self.mass <= 1 + 1e-9:
            raise ValueError("retained mass outside [0, 1]")

    @property
    def dim(self) -> int:
        return self.basis.rank

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "basis": self.basis.to_json(self.n),
            "dim": self.dim,
            "mass": self.mass,
        }


def pfr_subgroup(
    samples: list[PauliLabel],
    oracle: PfrOracle,
    delta: float,
    psi: StateVector | None = None,
    t_min: int | None = None,
    strict: bool = False,
) -> SubgroupV:
    """Span of the oracle-accepted pairwise sums.

    The acceptance floor defaults to n+1 distinct sums at desk scale; strict
    mode uses the published 4n^2 + log(10/delta).  Too few accepted sums
    raises the failure sentinel.
    """
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    n = samples[0].n
    sums = {
        (a.add(b)).to_vector() for i, a in enumerate(samples) for b in samples[i:]
    }
    accepted = [v for v in sums if oracle(PauliLabel.from_vector(n, v))]
    floor = t_min
    if floor is None:
        floor = int(np.ceil(4 * n * n + np.log(10.0 / delta))) if strict else n + 1
    if len(accepted) < floor:
        raise PfrSubgroupNotFound(f"{len(accepted)} accepted sums < floor {floor}")
    basis = rref_basis(accepted, 2 * n)
    mass = None
    if psi is not None and basis.rank <= 16:
        w2 = _w2(psi)
        span = np.array(basis.enumerate_span())
        mass = float(w2[span].mean())
    return SubgroupV(n, basis, mass)


# ---------------------------------------------------------------------------
# stabilizer extraction


@dataclass(frozen=True)
class CandidateStabilizer:
    state: StabilizerState
    fidelity: float
    provenance: dict

    def __post_init__(self):
        if not -1e-9 <= self.fidelity <= 1 + 1e-9:
            raise ValueError("fidelity outside [0, 1]")

    def to_json(self) -> dict:
        return {
            "generators": self.state.to_json(),
            "fidelity": self.fidelity,
            "provenance": self.provenance,
        }


def _mub_sign_states(k: int) -> list[tuple[StabilizerState, int, int]]:
    """All k-qubit stabilizer states over the MUB groups with every sign
    assignment, as (state, group index, sign pattern)."""
    out = []
    for gi, group in enumerate(mub_covering(k).groups):
        gens0 = [PauliLabel.from_vector(k, v) for v in group.rows]
        for eps in range(1 << k):
            gens = tuple(
                PhasedPauli(g, 2 * ((eps >> i) & 1)) for i, g in enumerate(gens0)
            )
            out.append((StabilizerState(k, gens), gi, eps))
    return out


def _shadow_cost(m: int, eps: float, delta: float) -> int:
    return int(np.ceil(np.log(max(m, 2) / delta) / eps**2))


def find_stabilizer(
    psi: StateVector,
    sub: SubgroupV,
    gamma: float,
    delta: float,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    n_rounds: int | None = None,
) -> CandidateStabilizer:
    """Extract the best product-form stabilizer compatible with the subgroup.

    Canonicalizes the subgroup (k pairs, m center), builds the k-qubit MUB
    candidate list with all 2^k sign patterns, repeatedly projects the first
    k qubits of the rotated state onto each candidate followed by a
    computational measurement of the rest, and returns the collected
    candidate of maximal fidelity, rotated back.  Fidelities are exact; the
    estimation cost is charged to the ledger.
    """
    labels = sub.basis.labels(psi.n)
    tableau, k, m = canonicalize_subgroup(labels)
    circuit = synthesize_circuit(tableau)
    rotated = apply_circuit(psi, circuit, ledger)
    n = psi.n
    rounds = n_rounds if n_rounds is not None else min(max(int(np.ceil(4.0 / max(gamma, 1e-6))), 8), 64)
    collected: dict[tuple[int, int], tuple] = {}
    if k == 0:
        for _ in range(rounds):
            z, _, _ = measure_block(rotated, tuple(range(n)), "computational", rng, ledger)
            collected[(-1, z)] = (None, z, -1, -1)
    else:
        candidates = [
            (cand, statevector_of_stab(cand), gi, eps)
            for cand, gi, eps in _mub_sign_states(k)
        ]
        for _ in range(rounds):
            for ci, (cand, vec, gi, eps) in enumerate(candidates):
                out, _, post = measure_block(
                    rotated, tuple(range(k)), ("project", vec.amps), rng, ledger
                )
                if out == 0:
                    z, _, _ = measure_block(
                        post, tuple(range(k, n)), "computational", rng, ledger
                    )
                    collected[(ci, z)] = (cand, z, gi, eps)
    if not collected:
        raise NoCandidateFound("no candidate collected within the round budget")
    inverse = tableau.inverse()
    best: CandidateStabilizer | None = None
    for cand, z, gi, eps in collected.values():
        gens: list[PhasedPauli] = []
        if cand is not None:
            for g in cand.generators:
                lifted = PauliLabel(n, g.label.x, g.label.z)
                gens.append(PhasedPauli(lifted, g.phase))
        for j in range(n - k):
            gens.append(
                PhasedPauli(PauliLabel(n, 0, 1 << (k + j)), 2 * ((z >> j) & 1))
            )
        rotated_back = tuple(conjugate(inverse, g) for g in gens)
        state = StabilizerState(n, rotated_back)
        fid = abs(overlap(statevector_of_stab(state), psi)) ** 2
        entry = CandidateStabilizer(
            state,
            float(fid),
            {"mub_index": gi, "sign_pattern": eps, "z": z, "k": k, "m": m},
        )
        if best is None or entry.fidelity > best.fidelity:
            best = entry
    if ledger is not None:
        ledger.charge(
            "fidelity_shadows",
            copies=_shadow_cost(len(collected), max(gamma, 1e-3) / 8.0, delta),
        )
    return best


@dataclass(frozen=True)
class HighStabDimResult:
    tableau: CliffordTableau
    sigma: StateVector
    z: int
    k: int
    block_weight: float

    def reconstruct(self) -> StateVector:
        """Dense form of the described state: rotate |sigma> (x) |z> back."""
        n = self.tableau.n
        amps = np.zeros(1 << n, dtype=complex)
        amps[(self.z << self.k) : (self.z << self.k) + (1 << self.k)] = self.sigma.amps
        circuit = synthesize_circuit(self.tableau.inverse())
        return apply_circuit(StateVector(n, amps), circuit)


def find_high_stab_dim(
    psi: StateVector,
    sub: SubgroupV,
    gamma: float,
    delta: float,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    n_rounds: int | None = None,
    block_tol: float = 1e-9,
) -> HighStabDimResult:
    """Improper extraction: only the rotated center block (the last m qubits)
    is measured computationally; the heaviest sampled branch is kept and its
    exact normalized conditional block on the remaining k = n - m qubits is
    returned (the desk-scale stand-in for tomography of that block).  The
    described state has stabilizer dimension >= n - k by construction."""
    from .pauli import canonicalize_subgroup_center_tail

    labels = sub.basis.labels(psi.n)
    tableau, _, m = canonicalize_subgroup_center_tail(labels)
    circuit = synthesize_circuit(tableau)
    rotated = apply_circuit(psi, circuit, ledger)
    n = psi.n
    k = n - m
    rounds = n_rounds if n_rounds is not None else min(max(int(np.ceil(4.0 / max(gamma, 1e-6))), 8), 64)
    seen: set[int] = set()
    for _ in range(rounds):
        z, _, _ = measure_block(rotated, tuple(range(k, n)), "computational", rng, ledger)
        seen.add(z)
    mags = np.abs(rotated.amps.reshape(1 << m, 1 << k)) ** 2
    weights = mags.sum(axis=1)
    best_z = max(seen, key=lambda z: weights[z])
    if weights[best_z] < block_tol:
        raise BlockWeightBelowTolerance("all sampled branches carry negligible weight")
    block = rotated.amps.reshape(1 << m, 1 << k)[best_z]
    sigma = StateVector(k, block / np.sqrt(weights[best_z]))
    if ledger is not None:
        eps = max(gamma, 1e-3) / 8.0
        ledger.charge(
            "block_shadows",
            copies=int(np.ceil(4.0**k / eps**2 * np.log(max(len(seen), 2) / delta))),
        )
        ledger.charge(
            "block_tomography",
            copies=int(np.ceil(4.0**k / eps**2 * np.log(1.0 / delta))),
        )
    return HighStabDimResult(tableau, sigma, int(best_z), k, float(weights[best_z]))


# ---------------------------------------------------------------------------
# end-to-end pipeline


def _resolve_oracle(
    oracle_mode,
    psi: StateVector,
    gamma: float,
    rng: np.random.Generator,
    ledger: CostLedger | None,
) -> PfrOracle:
    if isinstance(oracle_mode, PfrOracle):
        return oracle_mode
    kind = oracle_mode[0]
    if kind == "planted":
        return make_pfr_oracle("planted", basis=oracle_mode[1])
    if kind == "threshold-span":
        theta = oracle_mode[1] if len(oracle_mode) > 1 else gamma / 4.0
        return make_pfr_oracle(
            "threshold-span", psi=psi, theta=theta, rng=rng, ledger=ledger
        )
    raise ValueError(f"unknown oracle mode {oracle_mode!r}")


def self_correct(
    psi: StateVector,
    gamma: float,
    delta: float,
    oracle_mode,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
    attempts: int = 32,
    params: BsgParams | None = None,
    exact_tests: bool = False,
    collect_t: int | None = None,
) -> CandidateStabilizer:
    """Chain sampling, small-doubling collection, subgroup construction and
    stabilizer extraction, retrying failed stages with fresh randomness up to
    the attempt budget."""
    t = collect_t if collect_t is not None else min(psi.n + 3, (1 << psi.n) - 1)
    oracle = _resolve_oracle(oracle_mode, psi, gamma, rng, ledger)
    last: Exception | None = None
    for _ in range(attempts):
        try:
            collection = collect_small_doubling(
                psi, t, gamma, delta, rng, ledger,
                params=params, exact=exact_tests, stop_after=1,
            )
            sub = pfr_subgroup(collection[0], oracle, delta, psi=psi)
            return find_stabilizer(psi, sub, gamma, delta, rng, ledger)
        except (CollectionEmpty, PfrSubgroupNotFound, NoCandidateFound) as exc:
            last = exc
    raise SelfCorrectionFailed(f"attempt budget exhausted: {last}")


def tolerant_test(
    psi: StateVector,
    eps1: float,
    eps2: float,
    t: int,
    delta: float,
    rng: np.random.Generator | None = None,
    ledger: CostLedger | None = None,
    mode: str = "exact",
    separation_c: float = 1.0,
) -> str:
    """Tolerant test for closeness to stabilizer dimension >= n - t.

    Yes instances guarantee a q-average of at least 2^{-2t} eps1^6; the no
    bound eps2^{1/C} must sit strictly below it (C is configuration).  The
    estimate is thresholded with a tenth of the separation as margin.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    yes_floor = 2.0 ** (-2 * t) * eps1**6
    no_ceiling = eps2 ** (1.0 / separation_c)
    if yes_floor <= no_ceiling:
        raise ValueError("inseparable (eps1, eps2, t) configuration")
    margin = (yes_floor - no_ceiling) / 10.0
    metrics: GowersMetrics = gowers3_metrics(
        psi, mode=mode, delta=margin, rng=rng, ledger=ledger, fail_prob=delta
    )
    return "yes" if metrics.proxy >= yes_floor - margin else "no"
