"""Thermal states for noncommuting conserved charges.

Builds generalized Gibbs states gamma = exp(-sum_j mu_j Q_j)/Z for
charge sets that need not commute, solves for the potentials that hit
target expectation values, constructs an explicit approximate
microcanonical subspace on N copies, and audits the resource-theoretic
consequences: subsystem reduction toward the thermal state, canonical
typicality, generalized free-energy monotones under charge-conserving
channels, and complete passivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linops import (
    dagger,
    eigh,
    func_hermitian,
    haar_in_subspace,
    partial_trace,
    reconstruct,
    tensor,
    trace_distance,
)


@dataclass(frozen=True)
class ChargeSet:
    """Charges Q_0 (the Hamiltonian) through Q_c on one copy's space.

    ``operators`` are Hermitian matrices; they must be linearly
    independent as vectors, so the potentials are identifiable.
    """

    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(q, dtype=complex) for q in self.operators)
        object.__setattr__(self, "operators", ops)
        if not ops:
            raise ValueError("need at least one charge")
        gram = np.array(
            [[np.trace(dagger(a) @ b) for b in ops] for a in ops]
        )
        if abs(np.linalg.det(gram)) < 1e-12 * np.trace(np.abs(gram)) ** len(ops):
            raise ValueError("charges are linearly dependent")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def exponent(self, mu) -> np.ndarray:
        """sum_j mu_j Q_j."""
        return sum(m * q for m, q in zip(mu, self.operators))

    def spectral_diameters(self):
        out = []
        for q in self.operators:
            vals = np.linalg.eigvalsh(q)
            out.append(float(vals[-1] - vals[0]))
        return out


@dataclass
class Nats:
    """Generalized Gibbs state with its partition scalar and targets hit."""

    state: np.ndarray
    log_z: float
    mu: np.ndarray
    expectations: np.ndarray

    @property
    def z(self) -> float:
        return math.exp(self.log_z)


@dataclass(frozen=True)
class AmcParams:
    """Tolerances of the approximate microcanonical definition."""

    eta: float
    eta_prime: float
    epsilon: float
    delta: float
    delta_prime: float
    n_copies: int

    def __post_init__(self):
        if not self.eta > self.eta_prime > 0:
            raise ValueError("need eta > eta' > 0")
        if not self.delta > 0:
            raise ValueError("need delta > 0")
        if not self.delta_prime > 0 or not self.epsilon > 0:
            raise ValueError("need positive epsilon and delta'")


def build_nats(charges: ChargeSet, mu) -> Nats:
    """gamma = exp(-sum mu_j Q_j)/Z via the exponent's spectrum."""
    mu = np.asarray(mu, dtype=float)
    if len(mu) != len(charges.operators):
        raise ValueError("one potential per charge")
    x = charges.exponent(mu)
    vals, vecs = eigh(x)
    shifted = np.exp(-(vals - vals.min()))
    z_shifted = shifted.sum()
    state = reconstruct(shifted / z_shifted, vecs)
    log_z = math.log(z_shifted) - vals.min()
    expectations = np.array(
        [float(np.real(np.trace(state @ q))) for q in charges.operators]
    )
    return Nats(state=state, log_z=log_z, mu=mu, expectations=expectations)


def _kubo_mori_jacobian(charges: ChargeSet, nats: Nats) -> np.ndarray:
    """d<Q_j>/d mu_k, the negated generalized (Kubo-Mori) covariance."""
    x = charges.exponent(nats.mu)
    vals, vecs = eigh(x)
    w = np.exp(-(vals - vals.min()))
    w /= w.sum()
    # log-mean of Gibbs weights: integral_0^1 w_i^s w_l^(1-s) ds
    wi = w[:, None]
    wl = w[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.log(wi) - np.log(wl)
        lm = np.where(np.abs(log_ratio) > 1e-12, (wi - wl) / log_ratio, wi)
    qs = [dagger(vecs) @ q @ vecs for q in charges.operators]
    c = len(charges.operators)
    jac = np.zeros((c, c))
    for j in range(c):
        for k in range(c):
            corr = float(np.real(np.sum(lm * qs[k] * qs[j].T)))
            jac[j, k] = -(corr - nats.expectations[j] * nats.expectations[k])
    return jac


def solve_potentials(
    charges: ChargeSet,
    targets,
    mu0=None,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> Nats:
    """Newton iteration for the potentials hitting target expectations.

    The Jacobian is the generalized covariance of the charges in the
    current Gibbs state; a backtracking line search keeps the residual
    monotone.  Raises if the residual stagnates (targets outside the
    attainable set).
    """
    targets = np.asarray(targets, dtype=float)
    mu = np.zeros(len(charges.operators)) if mu0 is None else np.asarray(mu0, float)
    nats = build_nats(charges, mu)
    residual = nats.expectations - targets
    best = float(np.linalg.norm(residual))
    for _ in range(max_iter):
        if best <= tol:
            return nats
        jac = _kubo_mori_jacobian(charges, nats)
        try:
            step = np.linalg.solve(jac, residual)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, residual, rcond=None)[0]
        scale = 1.0
        for _ in range(40):
            trial_mu = mu - scale * step
            trial = build_nats(charges, trial_mu)
            trial_residual = trial.expectations - targets
            trial_res = float(np.linalg.norm(trial_residual))
            if trial_res < best:
                mu, nats, best = trial_mu, trial, trial_res
                residual = trial_residual
                break
            scale /= 2.0
        else:
            break
    if best > tol:
        raise ValueError(
            f"potential solve stagnated: best residual {best:.3e} > {tol:g}"
        )
    return nats


def averaged_charge(q: np.ndarray, n_copies: int, budget: int = 4096) -> np.ndarray:
    """(1/N) sum_l 1 x ... x Q (at slot l) x ... x 1 on the N-copy space."""
    q = np.asarray(q, dtype=complex)
    d = q.shape[0]
    if d**n_copies > budget:
        raise ValueError(
            f"averaged charge needs dimension {d**n_copies} > budget {budget}"
        )
    eye = np.eye(d, dtype=complex)
    total = np.zeros((d**n_copies, d**n_copies), dtype=complex)
    for slot in range(n_copies):
        factors = [eye] * n_copies
        factors[slot] = q
        total += tensor(*factors)
    return total / n_copies


@dataclass
class BandProjector:
    projector: np.ndarray
    rank: int
    empty: bool


def band_projector(q_bar: np.ndarray, center: float, half_width: float) -> BandProjector:
    """Projector onto eigenvalues of q_bar within [center - hw, center + hw]."""
    if half_width <= 0:
        raise ValueError("half-width must be positive")
    vals, vecs = eigh(q_bar)
    inside = np.abs(vals - center) <= half_width
    rank = int(inside.sum())
    if rank == 0:
        return BandProjector(
            projector=np.zeros_like(q_bar), rank=0, empty=True
        )
    cols = vecs[:, inside]
    return BandProjector(projector=cols @ dagger(cols), rank=rank, empty=False)


def deviation_operator(charges: ChargeSet, targets, n_copies: int) -> np.ndarray:
    """D = sum_j ((Qbar_j - v_j) / Sigma(Q_j))^2 on the N-copy space."""
    targets = np.asarray(targets, dtype=float)
    diameters = charges.spectral_diameters()
    d_tot = charges.dim**n_copies
    dev = np.zeros((d_tot, d_tot), dtype=complex)
    eye = np.eye(d_tot, dtype=complex)
    for q, v, sigma in zip(charges.operators, targets, diameters):
        if sigma <= 0:
            continue
        shifted = (averaged_charge(q, n_copies) - v * eye) / sigma
        dev += shifted @ shifted
    return dev


def amc_subspace(
    charges: ChargeSet, targets, n_copies: int, eta: float
) -> np.ndarray:
    """Numerical surrogate for the approximate microcanonical subspace.

    Returns the orthonormal eigenvectors of the deviation operator
    D = sum_j ((Qbar_j - v_j)/Sigma_j)^2 with eigenvalue at most
    (c+1) eta^2, where c+1 counts the charges with nonzero spectral
    diameter.  For a single commuting charge this space coincides with
    the band projector's range.
    """
    dev = deviation_operator(charges, targets, n_copies)
    n_active = sum(1 for s in charges.spectral_diameters() if s > 0)
    vals, vecs = eigh(dev)
    keep = vals <= n_active * eta**2
    if not np.any(keep):
        raise ValueError(
            f"empty subspace: smallest deviation eigenvalue {vals[0]:.4g} "
            f"exceeds {n_active} * eta^2 = {n_active * eta**2:.4g}"
        )
    return vecs[:, keep]


@dataclass
class AmcReport:
    condition1_margins: list
    condition1_ok: bool
    condition2_margins: list
    condition2_ok: bool
    condition2_vacuous: bool


def amc_conditions_check(
    basis: np.ndarray,
    charges: ChargeSet,
    targets,
    params: AmcParams,
    samples: int,
    rng: np.random.Generator,
) -> AmcReport:
    """Audit the two defining inequalities of the a.m.c. subspace.

    Condition 1: Haar samples supported in M must give every averaged
    charge a high probability of measuring near its target.  Condition 2:
    states with sharply peaked statistics (built here as mixtures of
    band-projector eigenvectors) must put weight >= 1 - epsilon in M.
    """
    targets = np.asarray(targets, dtype=float)
    n = params.n_copies
    diameters = charges.spectral_diameters()
    bands_eta = []
    bands_eta_prime = []
    for q, v, sigma in zip(charges.operators, targets, diameters):
        q_bar = averaged_charge(q, n)
        bands_eta.append(band_projector(q_bar, v, params.eta * sigma))
        bands_eta_prime.append(band_projector(q_bar, v, params.eta_prime * sigma))
    p_m = basis @ dagger(basis)

    margins1 = []
    for _ in range(samples):
        psi = haar_in_subspace(basis, rng)
        worst = min(
            float(np.real(psi.conj() @ band.projector @ psi))
            for band in bands_eta
        )
        margins1.append(worst)
    ok1 = all(m >= 1.0 - params.delta for m in margins1)

    # candidate sharply peaked states: uniform mixtures over the joint
    # numerical range of all eta'-band projectors
    margins2 = []
    candidates = []
    joint = None
    for band in bands_eta_prime:
        joint = band.projector if joint is None else joint @ band.projector
    if joint is not None:
        vals, vecs = np.linalg.eigh((joint + dagger(joint)) / 2)
        near_one = vals > 0.9
        if np.any(near_one):
            cols = vecs[:, near_one]
            candidates.append(cols @ dagger(cols) / cols.shape[1])
    vacuous = True
    for omega in candidates:
        peaked = all(
            float(np.real(np.trace(omega @ band.projector))) >= 1.0 - params.delta_prime
            for band in bands_eta_prime
        )
        if not peaked:
            continue
        vacuous = False
        margins2.append(float(np.real(np.trace(omega @ p_m))))
    ok2 = vacuous or all(m >= 1.0 - params.epsilon for m in margins2)
    return AmcReport(
        condition1_margins=margins1,
        condition1_ok=ok1,
        condition2_margins=margins2,
        condition2_ok=ok2,
        condition2_vacuous=vacuous,
    )


def _safe_log(vals: np.ndarray) -> np.ndarray:
    return np.log(np.clip(vals, 1e-300, None))


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Quantum relative entropy D(rho || sigma) in nats."""
    rvals, rvecs = eigh(rho)
    rvals = np.clip(rvals, 0.0, None)
    svals, svecs = eigh(sigma)
    log_sigma = reconstruct(_safe_log(svals), svecs)
    entropy = float(rvals @ _safe_log(np.where(rvals > 0, rvals, 1.0)))
    cross = float(np.real(np.trace(rho @ log_sigma)))
    return entropy - cross


@dataclass
class ReductionReport:
    relative_entropies: list
    trace_distances: list
    pinsker_ok: bool

    @property
    def mean_relative_entropy(self) -> float:
        return float(np.mean(self.relative_entropies))


def microcanonical_reduction(
    basis: np.ndarray, charges: ChargeSet, mu, n_copies: int
) -> ReductionReport:
    """Per-copy distance between the normalized subspace state and the NATS.

    Omega is the normalized projector onto the subspace; each copy's
    reduced state is compared with gamma via relative entropy and trace
    norm, and Pinsker's inequality D >= ||.||_1^2 / 2 is verified.
    """
    gamma = build_nats(charges, mu).state
    d = charges.dim
    omega = basis @ dagger(basis) / basis.shape[1]
    rel_ents, dists = [], []
    pinsker = True
    for copy in range(n_copies):
        reduced = partial_trace(omega, [copy], [d] * n_copies)
        dist = trace_distance(reduced, gamma)
        rel = relative_entropy(reduced, gamma)
        rel_ents.append(rel)
        dists.append(dist)
        if rel < dist**2 / 2.0 - 1e-10:
            pinsker = False
    return ReductionReport(
        relative_entropies=rel_ents, trace_distances=dists, pinsker_ok=pinsker
    )


@dataclass
class TypicalityReport:
    mean_distance: float
    stderr: float
    bound: float
    bound_ok: bool


def typicality_probe(
    basis: np.ndarray,
    charges: ChargeSet,
    mu,
    n_copies: int,
    shots: int,
    rng: np.random.Generator,
) -> TypicalityReport:
    """Average per-copy trace distance of Haar samples in M to the NATS.

    Checked against d/sqrt(dim M) + sqrt(2 mean D), combining canonical
    typicality with the microcanonical bound through Pinsker.
    """
    if shots < 100:
        raise ValueError("typicality statistics need at least 100 shots")
    gamma = build_nats(charges, mu).state
    d = charges.dim
    dims = [d] * n_copies
    samples = []
    for _ in range(shots):
        psi = haar_in_subspace(basis, rng)
        rho = np.outer(psi, psi.conj())
        dist = np.mean(
            [
                trace_distance(partial_trace(rho, [copy], dims), gamma)
                for copy in range(n_copies)
            ]
        )
        samples.append(float(dist))
    samples = np.asarray(samples)
    reduction = microcanonical_reduction(basis, charges, mu, n_copies)
    bound = d / math.sqrt(basis.shape[1]) + math.sqrt(
        2.0 * max(reduction.mean_relative_entropy, 0.0)
    )
    mean = float(samples.mean())
    return TypicalityReport(
        mean_distance=mean,
        stderr=float(samples.std(ddof=1) / math.sqrt(shots)),
        bound=bound,
        bound_ok=mean <= bound + 1e-9,
    )


# ---------------------------------------------------------------------------
# generalized free energies
# ---------------------------------------------------------------------------


def renyi_divergence(p, q, alpha: float) -> float:
    """Classical Renyi divergence D_alpha(p || q) in nats.

    D_1 is the Kullback-Leibler limit; alpha = 0 uses the support
    convention; +inf is returned when alpha > 1 and q vanishes on the
    support of p.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(p < -1e-12) or np.any(q < -1e-12):
        raise ValueError("negative probabilities")
    p = np.clip(p, 0.0, None)
    q = np.clip(q, 0.0, None)
    p = p / p.sum()
    q = q / q.sum()
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    support = p > 0
    if alpha > 1 and np.any(q[support] == 0):
        return math.inf
    if abs(alpha - 1.0) < 1e-12:
        return float(np.sum(p[support] * (np.log(p[support]) - _safe_log(q[support]))))
    if alpha == 0.0:
        return float(-np.log(q[support].sum()))
    total = np.sum(p[support] ** alpha * q[support] ** (1.0 - alpha))
    return float(np.log(total) / (alpha - 1.0))


def work_basis_distribution(rho: np.ndarray, payoff: np.ndarray, tol: float = 1e-9):
    """Outcome distribution of the payoff observable, degeneracies grouped."""
    vals, vecs = eigh(payoff)
    groups = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > tol * max(1.0, np.ptp(vals)):
            groups.append((start, i))
            start = i
    probs = []
    levels = []
    basis_rho = dagger(vecs) @ rho @ vecs
    diag = np.real(np.diag(basis_rho))
    for lo, hi in groups:
        probs.append(float(diag[lo:hi].sum()))
        levels.append(float(vals[lo:hi].mean()))
    return np.asarray(levels), np.asarray(probs)


def free_energy(
    rho: np.ndarray,
    gamma: Nats,
    payoff: np.ndarray,
    alpha: float,
    temperature: float = 1.0,
) -> float:
    """F_alpha = k_B T D_alpha(p || q) - k_B T log Z over payoff outcomes.

    p and q are the measurement distributions of the payoff observable
    in rho and in the thermal state; ties in payoff eigenvalues are
    grouped before binning.
    """
    _, p = work_basis_distribution(rho, payoff)
    _, q = work_basis_distribution(gamma.state, payoff)
    return temperature * renyi_divergence(p, q, alpha) - temperature * gamma.log_z


def quantum_free_energy_petz(
    rho: np.ndarray, gamma: Nats, alpha: float, temperature: float = 1.0
) -> float:
    """F~_alpha from the Petz divergence log Tr(rho^a gamma^(1-a))/(a-1)."""
    if abs(alpha - 1.0) < 1e-12:
        div = relative_entropy(rho, gamma.state)
    else:
        ra = func_hermitian(rho, lambda x: np.clip(x, 0, None) ** alpha)
        ga = func_hermitian(gamma.state, lambda x: max(x, 1e-300) ** (1.0 - alpha))
        div = math.copysign(1.0, alpha) / (alpha - 1.0) * math.log(
            max(float(np.real(np.trace(ra @ ga))), 1e-300)
        )
    return temperature * div - temperature * gamma.log_z


def quantum_free_energy_sandwiched(
    rho: np.ndarray, gamma: Nats, alpha: float, temperature: float = 1.0
) -> float:
    """F^_alpha from the sandwiched divergence."""
    if abs(alpha - 1.0) < 1e-12:
        div = relative_entropy(rho, gamma.state)
    else:
        power = (1.0 - alpha) / (2.0 * alpha)
        g = func_hermitian(gamma.state, lambda x: max(x, 1e-300) ** power)
        inner = g @ rho @ g
        ia = func_hermitian(inner, lambda x: np.clip(x, 0, None) ** alpha)
        div = math.log(max(float(np.real(np.trace(ia))), 1e-300)) / (alpha - 1.0)
    return temperature * div - temperature * gamma.log_z


# ---------------------------------------------------------------------------
# passivity
# ---------------------------------------------------------------------------


@dataclass
class PassivityResult:
    passive: bool
    witness: tuple | None
    extractable: float


def passivity_check(rho: np.ndarray, payoff: np.ndarray, copies: int = 1) -> PassivityResult:
    """Is rho^(x n) passive with respect to the total payoff function?

    Passive means no unitary can lower Tr(W rho): equivalently the state
    commutes with W and its populations are non-increasing in the payoff
    eigenvalue.  When not passive, a two-level rotation witness in the
    payoff eigenbasis achieving the best pairwise decrease is returned
    as (i, j, decrease).
    """
    if copies < 1 or copies > 3:
        raise ValueError("copies must be 1..3")
    d = rho.shape[0]
    if d**copies > 512:
        raise ValueError("total dimension above 512")
    eye = np.eye(d, dtype=complex)
    rho_tot = rho
    w_tot = payoff
    for _ in range(copies - 1):
        w_tot = tensor(w_tot, eye) + tensor(
            np.eye(w_tot.shape[0], dtype=complex), payoff
        )
        rho_tot = tensor(rho_tot, rho)
    comm = np.max(np.abs(rho_tot @ w_tot - w_tot @ rho_tot))
    w_vals, w_vecs = eigh(w_tot)
    rho_w = dagger(w_vecs) @ rho_tot @ w_vecs
    best = (None, 0.0)
    # pairwise search in the payoff eigenbasis: the optimal two-level
    # rotation for levels (i, j) pushes the 2x2 block's larger eigenvalue
    # onto the smaller payoff value
    for i in range(len(w_vals)):
        for j in range(i + 1, len(w_vals)):
            gap = w_vals[j] - w_vals[i]
            if gap <= 1e-12:
                continue
            block = rho_w[np.ix_([i, j], [i, j])]
            bvals = np.linalg.eigvalsh(block)
            current = float(np.real(block[0, 0]) * w_vals[i] + np.real(block[1, 1]) * w_vals[j])
            optimal = bvals[1] * w_vals[i] + bvals[0] * w_vals[j]
            decrease = current - float(optimal)
            if decrease > best[1]:
                best = ((i, j), decrease)
    passive = comm <= 1e-10 and best[1] <= 1e-10
    if passive:
        return PassivityResult(passive=True, witness=None, extractable=0.0)
    witness = (best[0][0], best[0][1], best[1]) if best[0] else None
    return PassivityResult(passive=False, witness=witness, extractable=best[1])


# ---------------------------------------------------------------------------
# charge-conserving (NATO) channels
# ---------------------------------------------------------------------------


def _pinch(g: np.ndarray, vals: np.ndarray, vecs: np.ndarray, tol: float = 1e-9):
    """Project g onto the commutant of one observable: keep only blocks
    within eigenvalue clusters (clustered at relative tolerance tol)."""
    gb = dagger(vecs) @ g @ vecs
    scale = max(np.ptp(vals), 1.0)
    mask = np.abs(vals[:, None] - vals[None, :]) <= tol * scale
    return vecs @ (gb * mask) @ dagger(vecs)


def commutant_project(
    g: np.ndarray, conserved, tol: float = 1e-9, max_sweeps: int = 500
) -> np.ndarray:
    """Orthogonal projection of Hermitian g onto the joint commutant.

    Alternating projection onto each single-operator commutant (a
    pinching in that operator's eigenbasis) converges to the projection
    onto the intersection; eigenvalue clusters are resolved with the
    given singular-value-style cutoff.
    """
    specs = [eigh(a) for a in conserved]
    out = (g + dagger(g)) / 2.0
    for _ in range(max_sweeps):
        for vals, vecs in specs:
            out = _pinch(out, vals, vecs, tol)
        worst = max(
            np.max(np.abs(out @ a - a @ out)) for a in conserved
        )
        if worst <= tol * max(np.max(np.abs(out)), 1e-30):
            break
    return (out + dagger(out)) / 2.0


@dataclass
class NatoChannel:
    unitary: np.ndarray
    reservoir: np.ndarray
    dims: tuple
    trivial: bool

    def apply(self, rho: np.ndarray) -> np.ndarray:
        joint = tensor(rho, self.reservoir)
        evolved = self.unitary @ joint @ dagger(self.unitary)
        return partial_trace(evolved, [0], list(self.dims))


def sample_nato_channel(
    system_charges: ChargeSet,
    reservoir_charges: ChargeSet,
    mu,
    rng: np.random.Generator,
    generator_scale: float = 1.0,
) -> NatoChannel:
    """One random charge-conserving channel with a thermal reservoir.

    A random Hermitian generator on system x reservoir is projected onto
    the joint commutant of every total charge; the channel conjugates by
    exp(i G) and traces out the reservoir, whose state is the NATS with
    the same potentials.
    """
    if len(system_charges.operators) != len(reservoir_charges.operators):
        raise ValueError("system and reservoir need matching charge lists")
    ds, dr = system_charges.dim, reservoir_charges.dim
    if ds * dr > 256:
        raise ValueError("joint dimension above 256")
    eye_s = np.eye(ds, dtype=complex)
    eye_r = np.eye(dr, dtype=complex)
    totals = [
        tensor(qs, eye_r) + tensor(eye_s, qr)
        for qs, qr in zip(system_charges.operators, reservoir_charges.operators)
    ]
    raw = rng.standard_normal((ds * dr, ds * dr)) + 1j * rng.standard_normal(
        (ds * dr, ds * dr)
    )
    raw = generator_scale * (raw + dagger(raw)) / 2.0
    g = commutant_project(raw, totals)
    trivial = np.max(np.abs(g - np.trace(g) / g.shape[0] * np.eye(g.shape[0]))) < 1e-12
    vals, vecs = eigh(g)
    unitary = (vecs * np.exp(1j * vals)) @ dagger(vecs)
    gamma_r = build_nats(reservoir_charges, mu).state
    return NatoChannel(
        unitary=unitary, reservoir=gamma_r, dims=(ds, dr), trivial=trivial
    )


@dataclass
class SecondLawAudit:
    worst_violation: float
    fixed_point_error: float
    channels: int


def second_law_audit(
    rho: np.ndarray,
    system_charges: ChargeSet,
    reservoir_charges: ChargeSet,
    mu,
    n_channels: int,
    alphas,
    rng: np.random.Generator,
    temperature: float = 1.0,
) -> SecondLawAudit:
    """Monotonicity of the generalized free energies under sampled channels.

    The input state is pinched in the payoff eigenbasis (the classical
    divergences are defined over payoff outcomes), every sampled channel
    is applied, and the worst increase of F_alpha over channels and the
    alpha grid is reported, along with the worst fixed-point error of
    the system NATS.
    """
    gamma_s = build_nats(system_charges, mu)
    payoff = system_charges.exponent(mu)
    vals, vecs = eigh(payoff)
    pinched = reconstruct(
        np.real(np.diag(dagger(vecs) @ rho @ vecs)), vecs
    )
    before = {a: free_energy(pinched, gamma_s, payoff, a, temperature) for a in alphas}
    worst = -math.inf
    fixed_err = 0.0
    for _ in range(n_channels):
        channel = sample_nato_channel(system_charges, reservoir_charges, mu, rng)
        out = channel.apply(pinched)
        for a in alphas:
            after = free_energy(out, gamma_s, payoff, a, temperature)
            worst = max(worst, after - before[a])
        fixed_err = max(
            fixed_err, trace_distance(channel.apply(gamma_s.state), gamma_s.state)
        )
    return SecondLawAudit(
        worst_violation=worst, fixed_point_error=fixed_err, channels=n_channels
    )
