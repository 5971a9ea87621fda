"""Iterative self-correction: the error-free loop, the robust loop with a
per-iteration error schedule and full coefficient recomputation, pluggable
base learners, and the downstream applications (low-extent learning,
mimicking-state comparison, high-stabilizer-dimension decomposition).

The loops are inherently sequential; parallelize at the level of independent
experiment configurations with disjoint RNG paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoefficientPrefixExhausted, ResidualVanished
from .ledger import CostLedger
from .pauli import (
    CliffordCircuit,
    StabilizerState,
    stab_state_prep,
    stabilizer_inner_product,
)
from .statevec import (
    StateVector,
    bruteforce_stab_fidelity,
    gowers3_metrics,
    hadamard_test_estimate,
    lcu_residual,
    overlap,
    statevector_of_stab,
)

PROGRESS_TOL = 1e-10
PREFIX_TOL = 1e-9
ZERO_RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class ErrorSchedule:
    """Inner-estimate tolerances: delta = eta^3/12, delta_t = delta/(3 t^4)."""

    eta: float

    @property
    def delta(self) -> float:
        return self.eta**3 / 12.0

    def tolerance(self, t: int) -> float:
        return self.delta / (3.0 * t**4)


@dataclass(frozen=True)
class BaseLearner:
    """A stabilizer-producing subroutine with its fidelity promise.

    ``promise`` must be monotone increasing; it maps the loop's threshold
    parameter to the per-iteration fidelity floor used for the budget bound.
    """

    learn: callable  # (StateVector, Generator, CostLedger | None) -> StabilizerState
    promise: callable  # float -> float
    provenance: str


def base_learner_bruteforce(n_cap: int = 4) -> BaseLearner:
    def learn(psi: StateVector, rng, ledger) -> StabilizerState:
        if psi.n > n_cap:
            raise ValueError(f"brute-force learner capped at n <= {n_cap}")
        _, state = bruteforce_stab_fidelity(psi)
        return state

    return BaseLearner(learn, lambda eps: max(eps - 1e-9, 1e-9), "bruteforce_agnostic")


def base_learner_self_correct(
    gamma: float,
    delta: float,
    oracle_mode,
    attempts: int = 32,
    promise_c1: float = 1.0,
    promise_c2: float = 1.0,
    collect_t: int | None = None,
) -> BaseLearner:
    """Wrap the full pipeline as a base learner.  The fidelity floor as a
    function of the threshold has no pinned universal exponent, so both
    constants are configuration."""
    from .selfcorrect import self_correct

    def learn(psi: StateVector, rng, ledger) -> StabilizerState:
        cand = self_correct(
            psi, gamma, delta, oracle_mode, rng, ledger,
            attempts=attempts, collect_t=collect_t,
        )
        return cand.state

    return BaseLearner(
        learn,
        lambda eps: max(min(promise_c1 * eps**promise_c2, 1.0), 1e-9),
        "self_correct",
    )


# ---------------------------------------------------------------------------
# decomposition record


@dataclass
class Decomposition:
    n: int
    terms: list[tuple[complex, StabilizerState]]
    residual_norm: float
    residual: StateVector | None
    stop_reason: str
    iterations: int
    ledger: CostLedger
    eps: float
    eta: float
    beta_history: list[list[complex]] = field(default_factory=list)

    def __post_init__(self):
        if any(abs(beta) > 1.0 + 1e-6 for beta, _ in self.terms):
            raise ValueError("coefficient magnitude above 1")
        if self.iterations != len(self.terms):
            raise ValueError("iteration count disagrees with the term list")

    def structured_vector(self) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=complex)
        for beta, phi in self.terms:
            out += beta * statevector_of_stab(phi).amps
        return out

    def reconstruction(self) -> np.ndarray:
        out = self.structured_vector()
        if self.residual is not None:
            out = out + self.residual_norm * self.residual.amps
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"beta": [beta.real, beta.imag], "generators": phi.to_json()}
                for beta, phi in self.terms
            ],
            "residual_norm": self.residual_norm,
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "ledger": self.ledger.to_json(),
        }


STOP_GOWERS = "gowers_below"
STOP_ALPHA = "alpha_below"
STOP_TOMOGRAPHY = "tomography_complete"
STOP_BUDGET = "budget"


# ---------------------------------------------------------------------------
# coefficient recomputation


def recompute_coeffs(betas: list[complex], tol: float = PREFIX_TOL):
    """From running-estimate coefficients, rebuild (c, r, alpha):
    c_{j+1} = beta_{j+1}/sqrt(1 - sum_{i<=j}|beta_i|^2),
    r_{j+1}^2 = (1 - sum_{i<=j+1}|beta_i|^2) / (1 - sum_{i<=j}|beta_i|^2),
    alpha_{j+1} = prod_{i<=j}|r_i| (alpha_1 = 1).

    Raises once a prefix sum reaches 1 within tolerance: tomography is then
    essentially complete and the division is ill-posed.
    """
    cs: list[complex] = []
    rs: list[float] = []
    alphas: list[float] = [1.0]
    prev = 1.0
    acc = 0.0
    for j, beta in enumerate(betas):
        if prev <= tol:
            raise CoefficientPrefixExhausted(
                f"prefix sum reached 1 - {prev:.2e} before term {j + 1}"
            )
        acc += abs(beta) ** 2
        cur = 1.0 - acc
        cs.append(beta / np.sqrt(prev))
        rs.append(float(np.sqrt(max(cur, 0.0) / prev)))
        alphas.append(alphas[-1] * rs[-1])
        prev = cur
    return cs, rs, alphas


def _exact_betas(psi: StateVector, phis: list[StabilizerState]) -> list[complex]:
    betas: list[complex] = []
    for j, phi in enumerate(phis):
        val = overlap(statevector_of_stab(phi), psi)
        for i in range(j):
            val -= betas[i] * stabilizer_inner_product(phi, phis[i])
        betas.append(val)
    return betas


def _charge_proxy_estimate(ledger: CostLedger | None, eps6: float) -> None:
    if ledger is not None:
        ledger.charge("gowers_estimate", copies=int(np.ceil(16.0 / eps6**2)))


# ---------------------------------------------------------------------------
# error-free loop


def iterate_error_free(
    psi: StateVector,
    eps: float,
    learner: BaseLearner,
    ledger: CostLedger | None = None,
    rng: np.random.Generator | None = None,
) -> Decomposition:
    """Exact-mode loop: all estimates are exact, stopping on the two
    conditions (q-average below eps^6, or alpha^2 below eps) or on exact
    tomography.  Asserts the per-iteration progress identity and enforces
    k <= 1/eta^2."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    ledger = ledger if ledger is not None else CostLedger()
    eta = learner.promise(eps)
    t_max = int(np.ceil(1.0 / eta**2))
    phis: list[StabilizerState] = []
    preps: list[CliffordCircuit] = []
    betas: list[complex] = []
    rs: list[float] = []
    residual = psi
    stop = STOP_BUDGET
    for t in range(1, t_max + 1):
        alpha = float(np.prod(rs)) if rs else 1.0
        if alpha**2 < eps:
            stop = STOP_ALPHA
            break
        if t > 1:
            try:
                residual, _ = lcu_residual(psi, preps, betas, alpha, ledger)
            except ResidualVanished:
                stop = STOP_TOMOGRAPHY
                residual = None
                break
        metrics = gowers3_metrics(residual, "exact")
        _charge_proxy_estimate(ledger, eps**6)
        if metrics.proxy < eps**6:
            stop = STOP_GOWERS
            break
        phi = learner.learn(residual, rng, ledger)
        prev_unnorm = psi.amps - _structured(psi.n, betas, phis)
        phis.append(phi)
        preps.append(stab_state_prep(phi))
        beta = overlap(statevector_of_stab(phi), psi)
        for i in range(t - 1):
            beta -= betas[i] * stabilizer_inner_product(phi, phis[i])
        betas.append(beta)
        c = beta / alpha
        r = float(np.sqrt(max(1.0 - abs(c) ** 2, 0.0)))
        rs.append(r)
        # progress identity: the removed mass is |c_t|^2 prod_{j<t} r_j^2
        new_unnorm = psi.amps - _structured(psi.n, betas, phis)
        drop = np.linalg.norm(prev_unnorm) ** 2 - np.linalg.norm(new_unnorm) ** 2
        if abs(drop - abs(c) ** 2 * alpha**2) > PROGRESS_TOL:
            raise AssertionError("progress identity violated")
        new_norm = float(np.linalg.norm(new_unnorm))
        if new_norm > ZERO_RESIDUAL_TOL:
            resid_state = StateVector(psi.n, new_unnorm / new_norm)
            if abs(overlap(statevector_of_stab(phi), resid_state)) > 1e-10:
                raise AssertionError("residual is not orthogonal to the new term")
        else:
            stop = STOP_TOMOGRAPHY
            residual = None
            break
    else:
        stop = STOP_BUDGET
    unnorm = psi.amps - _structured(psi.n, betas, phis)
    norm = float(np.linalg.norm(unnorm))
    residual_state = (
        StateVector(psi.n, unnorm / norm) if norm > ZERO_RESIDUAL_TOL else None
    )
    dec = Decomposition(
        psi.n,
        list(zip(betas, phis)),
        norm,
        residual_state,
        stop,
        len(betas),
        ledger,
        eps,
        eta,
    )
    if len(betas) * eta**2 > 1.0 + 1e-9:
        raise AssertionError("iteration budget bound violated")
    return dec


def _structured(n: int, betas, phis) -> np.ndarray:
    out = np.zeros(1 << n, dtype=complex)
    for beta, phi in zip(betas, phis):
        out += beta * statevector_of_stab(phi).amps
    return out


# ---------------------------------------------------------------------------
# robust loop


def iterate_robust(
    psi: StateVector,
    eps: float,
    learner: BaseLearner,
    ledger: CostLedger | None = None,
    rng: np.random.Generator | None = None,
    schedule: ErrorSchedule | None = None,
    estimator="exact",
    threshold_factor: float = 1.0,
    est_fail: float = 1e-6,
) -> Decomposition:
    """Noise-tolerant loop: iteration t re-estimates every overlap <phi_j|psi>
    at tolerance delta/(3 t^4), rebuilds the coefficient vector with exact
    stabilizer cross-overlaps, recomputes (c, r, alpha), and prepares the
    next residual by combination-of-unitaries.

    ``estimator`` is "exact", "hadamard", or a callable
    (j, t, true_value, tol) -> estimate used to inject controlled errors.
    ``threshold_factor`` scales the eps^6 stopping threshold (used by the
    stabilizer-dimension decomposition).
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    ledger = ledger if ledger is not None else CostLedger()
    eta = learner.promise(eps)
    schedule = schedule or ErrorSchedule(eta)
    t_max = int(np.ceil(9.0 / eta**2)) + 8
    threshold = threshold_factor * eps**6
    phis: list[StabilizerState] = []
    preps: list[CliffordCircuit] = []
    vecs: list[StateVector] = []
    cross: list[list[complex]] = []  # cross[j][i] = <phi_j|phi_i>, i < j
    betas: list[complex] = []
    alpha_prev = 1.0
    history: list[list[complex]] = []
    residual = psi
    stop = STOP_BUDGET
    for t in range(1, t_max + 1):
        if alpha_prev**2 < eps:
            stop = STOP_ALPHA
            break
        if t > 1:
            try:
                residual, _ = lcu_residual(psi, preps, betas, alpha_prev, ledger)
            except ResidualVanished:
                stop = STOP_TOMOGRAPHY
                residual = None
                break
        metrics = gowers3_metrics(residual, "exact")
        _charge_proxy_estimate(ledger, threshold / 2.0)
        if metrics.proxy < threshold:
            stop = STOP_GOWERS
            break
        phi = learner.learn(residual, rng, ledger)
        phis.append(phi)
        preps.append(stab_state_prep(phi))
        vecs.append(statevector_of_stab(phi))
        cross.append([stabilizer_inner_product(phi, phis[i]) for i in range(t - 1)])
        tol_t = schedule.tolerance(t)
        new_betas: list[complex] = []
        for j in range(t):
            true_val = overlap(vecs[j], psi)
            if estimator == "exact":
                zeta = true_val
            elif estimator == "hadamard":
                zeta = hadamard_test_estimate(
                    vecs[j], psi, tol_t, est_fail, rng, ledger
                )
            else:
                zeta = estimator(j + 1, t, true_val, tol_t)
            for i in range(j):
                zeta = zeta - new_betas[i] * cross[j][i]
            new_betas.append(zeta)
        try:
            _, rs, alphas = recompute_coeffs(new_betas)
        except CoefficientPrefixExhausted:
            stop = STOP_TOMOGRAPHY
            betas = new_betas
            history.append(list(new_betas))
            residual = None
            alpha_prev = 0.0
            break
        betas = new_betas
        history.append(list(new_betas))
        alpha_prev = alphas[-1]
    else:
        stop = STOP_BUDGET
    unnorm = psi.amps - _structured(psi.n, betas, phis)
    norm = float(np.linalg.norm(unnorm))
    residual_state = (
        StateVector(psi.n, unnorm / norm) if norm > ZERO_RESIDUAL_TOL else None
    )
    dec = Decomposition(
        psi.n,
        list(zip(betas, phis)),
        norm,
        residual_state,
        stop,
        len(betas),
        ledger,
        eps,
        eta,
        history,
    )
    if len(betas) * eta**2 > 9.0 + 1e-9:
        raise AssertionError("iteration budget bound violated")
    return dec


# ---------------------------------------------------------------------------
# applications


@dataclass(frozen=True)
class LowExtentResult:
    decomposition: Decomposition
    state: StateVector          # normalized structured part
    overlap_sq: float           # exact |<state|psi>|^2
    lcu_success: float          # preparation success probability
    recipe: dict                # coefficients + generator strings

    def to_json(self) -> dict:
        return {
            "overlap_sq": self.overlap_sq,
            "lcu_success": self.lcu_success,
            "recipe": self.recipe,
            "stop_reason": self.decomposition.stop_reason,
            "iterations": self.decomposition.iterations,
        }


def learn_low_extent(
    psi: StateVector,
    xi: float,
    eps_prime: float,
    learner: BaseLearner,
    ledger: CostLedger | None = None,
    rng: np.random.Generator | None = None,
    estimator="exact",
) -> LowExtentResult:
    """Run the robust loop at eps = (eps'/(2 xi))^2 and normalize the
    structured part; for extent-xi inputs the exact achieved overlap is at
    least 1/2 - eps'."""
    if xi < 1:
        raise ValueError("xi must be >= 1")
    eps = (eps_prime / (2.0 * xi)) ** 2
    dec = iterate_robust(psi, eps, learner, ledger, rng, estimator=estimator)
    structured = dec.structured_vector()
    norm = float(np.linalg.norm(structured))
    if norm < ZERO_RESIDUAL_TOL:
        raise ResidualVanished("structured part is numerically zero")
    state = StateVector(psi.n, structured / norm)
    ov = float(abs(np.vdot(state.amps, psi.amps)) ** 2)
    coeff_sum = sum(abs(b) for b, _ in dec.terms)
    success = (norm / coeff_sum) ** 2 if coeff_sum > 0 else 1.0
    recipe = {
        "coeffs": [[b.real, b.imag] for b, _ in dec.terms],
        "generators": [phi.to_json() for _, phi in dec.terms],
        "normalization": norm,
        "success_probability": success,
    }
    return LowExtentResult(dec, state, ov, success, recipe)


@dataclass(frozen=True)
class MimicReport:
    entries: list[dict]
    eps: float
    eps_prime: float
    fidelity_gap_bound: float

    def all_within_bounds(self) -> bool:
        return all(e["deviation"] <= e["bound"] + 1e-12 for e in self.entries)


def mimic_compare(dec: Decomposition, targets, xi: float) -> MimicReport:
    """Exact inner-product deviations between the state and its mimicking
    combination, per declared low-extent target (coeffs, stabilizer states)
    with sum |c_i| <= xi.  Each deviation obeys sum|c_i| * sqrt(eps); the
    fidelity gap over the whole class obeys 3 * xi * sqrt(eps)."""
    structured = dec.structured_vector()
    residual_part = (
        dec.residual_norm * dec.residual.amps
        if dec.residual is not None
        else np.zeros_like(structured)
    )
    psi_amps = structured + residual_part
    root_eps = float(np.sqrt(dec.eps))
    entries = []
    for coeffs, stabs in targets:
        csum = sum(abs(c) for c in coeffs)
        if csum > xi + 1e-9:
            raise ValueError("target coefficient mass exceeds the declared extent")
        tvec = np.zeros_like(structured)
        for c, st in zip(coeffs, stabs):
            tvec += c * statevector_of_stab(st).amps
        deviation = abs(np.vdot(tvec, psi_amps) - np.vdot(tvec, structured))
        entries.append(
            {
                "coeff_mass": csum,
                "deviation": float(deviation),
                "bound": csum * root_eps,
            }
        )
    eps_prime = xi * root_eps
    return MimicReport(entries, dec.eps, eps_prime, 3.0 * eps_prime)


def decompose_stab_dim(
    psi: StateVector,
    eps: float,
    t: int,
    learner: BaseLearner,
    ledger: CostLedger | None = None,
    rng: np.random.Generator | None = None,
    estimator="exact",
) -> Decomposition:
    """Robust loop with the stopping threshold relaxed to 2^{-2t} eps^6; the
    residual then satisfies |alpha|^2 * F_{S(n-t)} <= eps (t = 0 reduces to
    the plain robust loop, same code path)."""
    if not 0 <= t < psi.n:
        raise ValueError("need 0 <= t < n")
    return iterate_robust(
        psi, eps, learner, ledger, rng,
        estimator=estimator, threshold_factor=2.0 ** (-2 * t),
    )
