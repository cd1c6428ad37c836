"""Quasiprobability tables behind out-of-time-ordered correlators.

The out-of-time-ordered correlator F(t) = <W(t)^dag V^dag W(t) V> is the
constrained moment of a complex, Kirkwood-Dirac-like distribution over
sequential measurement outcomes.  This module computes that distribution
at coarse (eigenvalue) and fine (eigenvalue + degeneracy label)
resolution, the complex two-variable work distribution it collapses to,
the Jarzynski-like moment identities, and the time-ordered, k-fold, and
regulated variants.

All time evolution is exact, via the spectral decomposition of H, so the
algebraic identities hold at 1e-10 tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linops import PAULIS, dagger, eigh, func_hermitian
from ..spinchain import IsingParams, build_ising

SIGNS = (1, -1)


def pauli_site(axis: str, site: int, n_sites: int) -> np.ndarray:
    """Single-site Pauli sigma^axis acting on ``site`` of an N-qubit chain."""
    from ..spinchain import site_operator

    return site_operator(PAULIS[axis], site, n_sites)


class OtocSetting:
    """A scrambling scenario: Hamiltonian, butterfly operators, state.

    ``w_op`` and ``v_op`` default to Pauli-like operators (Hermitian,
    squaring to the identity); the coarse table then has 16 entries.
    ``rho`` defaults to the infinite-temperature state.
    """

    def __init__(self, hamiltonian, w_op, v_op, rho=None):
        self.hamiltonian = np.asarray(hamiltonian, dtype=complex)
        self.dim = self.hamiltonian.shape[0]
        self.w_op = np.asarray(w_op, dtype=complex)
        self.v_op = np.asarray(v_op, dtype=complex)
        if self.w_op.shape != self.hamiltonian.shape or self.v_op.shape != self.hamiltonian.shape:
            raise ValueError("W, V, and H must share one Hilbert space")
        self.rho = (
            np.eye(self.dim, dtype=complex) / self.dim
            if rho is None
            else np.asarray(rho, dtype=complex)
        )
        self.evals, self.evecs = eigh(self.hamiltonian)

    def evolution(self, t: float) -> np.ndarray:
        """Exact propagator U(t) = exp(-i H t)."""
        return (self.evecs * np.exp(-1j * self.evals * t)) @ dagger(self.evecs)

    def w_heisenberg(self, t: float) -> np.ndarray:
        """W(t) = U^dag W U."""
        u = self.evolution(t)
        return dagger(u) @ self.w_op @ u

    def involutions_ok(self, atol: float = 1e-12) -> bool:
        eye = np.eye(self.dim)
        return (
            np.max(np.abs(self.w_op @ self.w_op - eye)) < atol
            and np.max(np.abs(self.v_op @ self.v_op - eye)) < atol
        )

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ op))


def ising_setting(
    n_sites: int,
    h: float = 0.5,
    g: float = 1.05,
    w_axis: str = "z",
    v_axis: str = "z",
    rho=None,
) -> OtocSetting:
    """Mixed-field Ising chain with W on the first site, V on the last."""
    ham = build_ising(IsingParams(n_sites=n_sites, h=h, g=g))
    w = pauli_site(w_axis, 0, n_sites)
    v = pauli_site(v_axis, n_sites - 1, n_sites)
    return OtocSetting(ham, w, v, rho=rho)


@dataclass
class QuasiprobTable:
    """Complex quasiprobability over outcome tuples.

    ``values`` maps (v1, w2, v2, w3) sign tuples (coarse mode) or longer
    k-fold tuples to complex numbers.  ``fine`` optionally carries the
    degeneracy-resolved array with axes ordered ((v1, lam1), (w2, al2),
    (v2, lam2), (w3, al3)), each axis listing the +1 block first.
    """

    values: dict
    fine: np.ndarray | None = None

    def __getitem__(self, key):
        return self.values[key]

    def total(self) -> complex:
        return complex(sum(self.values.values()))

    @staticmethod
    def coarse_keys():
        """All 16 (v1, w2, v2, w3) sign tuples, in abcd legend order.

        abcd with a, b, c, d in {0, 1} encodes w3 = (-1)^a, v2 = (-1)^b,
        w2 = (-1)^c, v1 = (-1)^d, matching the column order of the CSV
        reports.
        """
        keys = []
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    for d in (0, 1):
                        keys.append(((-1) ** d, (-1) ** c, (-1) ** b, (-1) ** a))
        return keys

    @staticmethod
    def abcd_labels():
        return [f"{a}{b}{c}{d}" for a in (0, 1) for b in (0, 1) for c in (0, 1) for d in (0, 1)]


def otoc(setting: OtocSetting, t: float) -> complex:
    """F(t) = Tr(rho W(t)^dag V^dag W(t) V)."""
    wt = setting.w_heisenberg(t)
    return complex(
        np.trace(setting.rho @ dagger(wt) @ dagger(setting.v_op) @ wt @ setting.v_op)
    )


def _projectors(op: np.ndarray) -> dict:
    eye = np.eye(op.shape[0], dtype=complex)
    return {s: (eye + s * op) / 2.0 for s in SIGNS}


def coarse_quasiprob(setting: OtocSetting, t: float) -> QuasiprobTable:
    """Sixteen-entry table Tr(P^{W(t)}_{w3} P^V_{v2} P^{W(t)}_{w2} P^V_{v1} rho).

    Eigenprojectors P^O_a = (1 + a O)/2 require Pauli-like W and V.
    """
    if not setting.involutions_ok():
        raise ValueError("coarse mode needs involutory (Pauli-like) W and V")
    wt = setting.w_heisenberg(t)
    proj_w = _projectors(wt)
    proj_v = _projectors(setting.v_op)
    # pair products reused across the 16 entries
    left = {(w, v): proj_w[w] @ proj_v[v] for w in SIGNS for v in SIGNS}
    right = {(w, v): left[w, v] @ setting.rho for w in SIGNS for v in SIGNS}
    values = {}
    for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
        values[(v1, w2, v2, w3)] = complex(
            np.sum(left[w3, v2].T * right[w2, v1])
        )
    return QuasiprobTable(values=values)


def reconstruct_otoc(table: QuasiprobTable) -> complex:
    """F(t) = sum v1 w2 v2* w3* A(v1, w2, v2, w3)."""
    return complex(
        sum(
            v1 * w2 * np.conj(v2) * np.conj(w3) * val
            for (v1, w2, v2, w3), val in table.values.items()
        )
    )


def sixteen_term_expansion(setting: OtocSetting, t: float) -> QuasiprobTable:
    """Coarse table assembled from the correlators that survive
    multiplying out the four projectors, for involutory W and V:

    16 A = (1 + w2 w3 + v1 v2)
         + [w2 + w3 (1 + v1 v2)] <W(t)> + [v1 (1 + w2 w3) + v2] <V>
         + (w2 v1 + w3 v1 + w3 v2) <W(t) V> + w2 v2 <V W(t)>
         + w2 w3 v2 <W(t) V W(t)> + w2 v1 v2 <V W(t) V> + w2 w3 v1 v2 F(t)
    """
    if not setting.involutions_ok():
        raise ValueError("expansion assumes W^2 = V^2 = identity")
    wt = setting.w_heisenberg(t)
    v = setting.v_op
    ew = setting.expect(wt)
    ev = setting.expect(v)
    ewv = setting.expect(wt @ v)
    evw = setting.expect(v @ wt)
    ewvw = setting.expect(wt @ v @ wt)
    evwv = setting.expect(v @ wt @ v)
    f = setting.expect(wt @ v @ wt @ v)
    values = {}
    for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
        values[(v1, w2, v2, w3)] = (
            (1 + w2 * w3 + v1 * v2)
            + (w2 + w3 * (1 + v1 * v2)) * ew
            + (v1 * (1 + w2 * w3) + v2) * ev
            + (w2 * v1 + w3 * v1 + w3 * v2) * ewv
            + w2 * v2 * evw
            + w2 * w3 * v2 * ewvw
            + w2 * v1 * v2 * evwv
            + w2 * w3 * v1 * v2 * f
        ) / 16.0
    return QuasiprobTable(values=values)


def fine_basis(axis: str, site: int, n_sites: int) -> np.ndarray:
    """Degeneracy-resolving eigenbasis of a single-site Pauli.

    Columns are (Pauli eigenvector on ``site``) x (sigma^z product states
    on the other sites); the +1 eigenspace occupies the first half.
    """
    vecs = {
        "z": (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
        "x": (np.array([1.0, 1.0]) / np.sqrt(2), np.array([1.0, -1.0]) / np.sqrt(2)),
        "y": (np.array([1.0, 1.0j]) / np.sqrt(2), np.array([1.0, -1.0j]) / np.sqrt(2)),
    }[axis]
    basis_2 = (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex))
    dim = 1 << n_sites
    half = dim // 2
    basis = np.zeros((dim, dim), dtype=complex)
    for block, local in enumerate(vecs):
        for label in range(half):
            # bits of ``label`` fill the other sites left to right; the
            # site axes are ordered as in tensor(): site 0 outermost
            bits = [(label >> (n_sites - 2 - k)) & 1 for k in range(n_sites - 1)]
            column = np.array([1.0 + 0.0j])
            it = iter(bits)
            for j in range(n_sites):
                factor = local if j == site else basis_2[next(it)]
                column = np.kron(column, factor)
            basis[:, block * half + label] = column
    return basis


def _check_orthonormal(basis: np.ndarray, atol: float = 1e-10):
    gram = dagger(basis) @ basis
    if np.max(np.abs(gram - np.eye(basis.shape[1]))) > atol:
        raise ValueError("degeneracy-resolving basis is not orthonormal")


def fine_quasiprob(
    setting: OtocSetting,
    t: float,
    w_basis: np.ndarray,
    v_basis: np.ndarray,
) -> QuasiprobTable:
    """Degeneracy-resolved table of products of four matrix elements,

    A(v1,lam1; w2,al2; v2,lam2; w3,al3) = <w3,al3|U|v2,lam2>
        <v2,lam2|U^dag|w2,al2> <w2,al2|U|v1,lam1> <v1,lam1|rho U^dag|w3,al3>.

    The full d^4 array is returned with axes (v1, w2, v2, w3); summing
    each axis over its degeneracy half reproduces the coarse table.
    """
    _check_orthonormal(w_basis)
    _check_orthonormal(v_basis)
    u = setting.evolution(t)
    m_wv = dagger(w_basis) @ u @ v_basis          # <w|U|v>
    m_vw = dagger(v_basis) @ dagger(u) @ w_basis  # <v|U^dag|w>
    m_rho = dagger(v_basis) @ setting.rho @ dagger(u) @ w_basis
    fine = np.einsum("ab,bc,cd,da->dcba", m_wv, m_vw, m_wv, m_rho, optimize=True)
    values = _coarse_from_fine(fine)
    return QuasiprobTable(values=values, fine=fine)


def _coarse_from_fine(fine: np.ndarray) -> dict:
    dim = fine.shape[0]
    half = dim // 2
    blocks = fine.reshape(2, half, 2, half, 2, half, 2, half).sum(axis=(1, 3, 5, 7))
    values = {}
    for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
        idx = tuple(0 if s == 1 else 1 for s in (v1, w2, v2, w3))
        values[(v1, w2, v2, w3)] = complex(blocks[idx])
    return values


def marginal(table: QuasiprobTable, axis: int) -> np.ndarray:
    """Marginalize the fine table onto one outcome slot (a probability)."""
    if table.fine is None:
        raise ValueError("marginals need a fine-mode table")
    axes = tuple(i for i in range(4) if i != axis)
    return np.real_if_close(table.fine.sum(axis=axes))


def amplitude(
    setting: OtocSetting,
    t: float,
    w_basis: np.ndarray,
    v_basis: np.ndarray,
) -> np.ndarray:
    """Probability amplitudes of the three-measurement forward protocol,

    A_rho(j; w1,al1; v1,lam1; w2,al2)
        = <w2,al2|U|v1,lam1> <v1,lam1|U^dag|w1,al1> <w1,al1|U|j> sqrt(p_j),

    returned as an array with axes (j, w1, v1, w2).  The rho eigenbasis
    {|j>} comes from its spectral decomposition.
    """
    _check_orthonormal(w_basis)
    _check_orthonormal(v_basis)
    p, rho_vecs = eigh(setting.rho)
    p = np.clip(p, 0.0, None)
    u = setting.evolution(t)
    m_wv = dagger(w_basis) @ u @ v_basis
    m_vw = dagger(v_basis) @ dagger(u) @ w_basis
    m_wj = dagger(w_basis) @ u @ rho_vecs
    return np.einsum(
        "cd,db,bj,j->jbdc",
        m_wv,
        m_vw,
        m_wj,
        np.sqrt(p),
        optimize=True,
    )


def quasiprob_from_amplitudes(
    setting: OtocSetting,
    t: float,
    w_basis: np.ndarray,
    v_basis: np.ndarray,
) -> QuasiprobTable:
    """Fine table rebuilt as sum_{j, (w1,al1)} A*(j; w3; v2; w2) A(j; w1; v1; w2).

    Marginalizing the amplitude products over the shared initial outcome
    j and the first protocol's W outcome reproduces ``fine_quasiprob``.
    """
    amps = amplitude(setting, t, w_basis, v_basis)
    # amps axes: (j, w-slot, v-slot, w2); the starred copy carries (w3, v2)
    fine = np.einsum("jabc,jedc->dcba", amps.conj(), amps, optimize=True)
    return QuasiprobTable(values=_coarse_from_fine(fine), fine=fine)


def work_distribution(table: QuasiprobTable) -> "WorkDistribution":
    """Collapse the coarse table onto W = w3* v2*, W' = w2 v1."""
    values = {}
    for (v1, w2, v2, w3), val in table.values.items():
        key = (np.conj(w3) * np.conj(v2), w2 * v1)
        key = (complex(key[0]).real, complex(key[1]).real)
        values[key] = values.get(key, 0.0) + val
    return WorkDistribution(values=values)


@dataclass
class WorkDistribution:
    """Complex two-variable analog of a work distribution."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def total(self) -> complex:
        return complex(sum(self.values.values()))

    def moment(self) -> complex:
        """Exact mixed first moment sum W W' P(W, W')."""
        return complex(sum(w * wp * val for (w, wp), val in self.values.items()))

    def characteristic(self, beta: float, beta_p: float) -> complex:
        """G(beta, beta') = < exp(-(beta W + beta' W')) >."""
        return complex(
            sum(
                np.exp(-(beta * w + beta_p * wp)) * val
                for (w, wp), val in self.values.items()
            )
        )


def jarzynski_moment(dist: WorkDistribution, step: float = 1e-4) -> tuple[complex, complex]:
    """The OTOC as a moment of the work distribution, two ways.

    Returns (exact sum W W' P, central mixed finite difference of the
    characteristic function); both equal F(t).
    """
    exact = dist.moment()
    g = dist.characteristic
    fd = (
        g(step, step) - g(step, -step) - g(-step, step) + g(-step, -step)
    ) / (4.0 * step * step)
    return exact, fd


# ---------------------------------------------------------------------------
# time-ordered correlator
# ---------------------------------------------------------------------------


def toc_quasiprob(setting: OtocSetting, t: float) -> QuasiprobTable:
    """Coarse quasiprobability behind the time-ordered correlator,

    A_TOC(v1, w1, v2) = Tr(P^V_{v2} U^dag P^W_{w1} U P^V_{v1} rho),

    an 8-entry table for Pauli-like W and V.  When rho is diagonal in
    the V eigenbasis every entry is a nonnegative probability.
    """
    u = setting.evolution(t)
    wt = dagger(u) @ setting.w_op @ u
    proj_w = _projectors(wt)
    proj_v = _projectors(setting.v_op)
    values = {}
    for v1 in SIGNS:
        for w1 in SIGNS:
            for v2 in SIGNS:
                values[(v1, w1, v2)] = complex(
                    np.trace(proj_v[v2] @ proj_w[w1] @ proj_v[v1] @ setting.rho)
                )
    return QuasiprobTable(values=values)


def toc_moment(table: QuasiprobTable) -> complex:
    """Mixed moment sum (w1 v2)(w1 v1) A_TOC = <V W(t)^2 V> (time ordered)."""
    return complex(
        sum(
            (w1 * v2) * (w1 * v1) * val
            for (v1, w1, v2), val in table.values.items()
        )
    )


def toc_correlator(setting: OtocSetting, t: float) -> complex:
    """Direct trace F_TOC(t) = <V^dag W(t)^dag W(t) V>."""
    wt = setting.w_heisenberg(t)
    v = setting.v_op
    return complex(np.trace(setting.rho @ dagger(v) @ dagger(wt) @ wt @ v))


# ---------------------------------------------------------------------------
# k-fold OTOC
# ---------------------------------------------------------------------------


def kfold_otoc(setting: OtocSetting, t: float, k: int) -> complex:
    """F^(k)(t) = <W(t) V ... W(t) V> with 2k alternating factors."""
    if k not in (2, 3):
        raise ValueError("k-fold OTOC implemented for k in {2, 3}")
    if k == 3 and setting.dim > 64:
        raise ValueError("k = 3 supported up to dimension 64")
    wt = setting.w_heisenberg(t)
    block = wt @ setting.v_op
    out = np.eye(setting.dim, dtype=complex)
    for _ in range(k):
        out = out @ block
    return complex(np.trace(setting.rho @ out))


def kfold_quasiprob(setting: OtocSetting, t: float, k: int) -> QuasiprobTable:
    """k-extended coarse table over (v1, w2, ..., v_k, w_{k+1})."""
    if k not in (2, 3):
        raise ValueError("k-fold tables implemented for k in {2, 3}")
    if k == 3 and setting.dim > 64:
        raise ValueError("k = 3 supported up to dimension 64")
    u = setting.evolution(t)
    wt = dagger(u) @ setting.w_op @ u
    proj_w = _projectors(wt)
    proj_v = _projectors(setting.v_op)
    from itertools import product

    values = {}
    for signs in product(SIGNS, repeat=2 * k):
        # signs order: (v1, w2, v2, w3, ..., v_k, w_{k+1});
        # build the product P_{w_{k+1}} P_{v_k} ... P_{w_2} P_{v_1} rho
        chain = np.eye(setting.dim, dtype=complex)
        for i in range(k):
            chain = proj_w[signs[2 * i + 1]] @ proj_v[signs[2 * i]] @ chain
        values[signs] = complex(np.trace(chain @ setting.rho))
    return QuasiprobTable(values=values)


def kfold_moment(table: QuasiprobTable) -> complex:
    """Product moment sum (prod w)(prod v) A^(k)."""
    return complex(
        sum(np.prod(signs) * val for signs, val in table.values.items())
    )


# ---------------------------------------------------------------------------
# regulated variant
# ---------------------------------------------------------------------------


def _thermal_fourth_root(setting: OtocSetting, temperature: float):
    beta = 1.0 / temperature
    z = np.sum(np.exp(-beta * (setting.evals - setting.evals.min()))) * np.exp(
        -beta * setting.evals.min()
    )
    quarter = (
        setting.evecs
        * np.exp(-beta * setting.evals / 4.0)
    ) @ dagger(setting.evecs)
    return quarter / z**0.25, z


def check_thermal(setting: OtocSetting, temperature: float, atol: float = 1e-8):
    beta = 1.0 / temperature
    gibbs = func_hermitian(setting.hamiltonian, lambda e: np.exp(-beta * e))
    gibbs /= np.trace(gibbs).real
    if np.max(np.abs(setting.rho - gibbs)) > atol:
        raise ValueError("regulated tables require the thermal state e^{-H/T}/Z")


def regulated_quasiprob(
    setting: OtocSetting, t: float, temperature: float
) -> QuasiprobTable:
    """Coarse table with rho^(1/4) spread between the projectors.

    Entries are built from the complex-time propagator
    U_reg = U(t) rho^(1/4), i.e. propagation along tau = t - i/(4T):

    A_reg = sum over degeneracies of <w3|U_reg|v2> <v2|U_reg^dag|w2>
            <w2|U_reg|v1> <v1|U_reg^dag|w3>.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    check_thermal(setting, temperature)
    quarter, _ = _thermal_fourth_root(setting, temperature)
    u = setting.evolution(t)
    u_reg = u @ quarter
    proj_w = _projectors(setting.w_op)
    proj_v = _projectors(setting.v_op)
    # heisenberg-like sandwich with the complex-time propagator
    values = {}
    for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
        op = (
            dagger(u_reg)
            @ proj_w[w3]
            @ u_reg
            @ proj_v[v2]
            @ dagger(u_reg)
            @ proj_w[w2]
            @ u_reg
            @ proj_v[v1]
        )
        values[(v1, w2, v2, w3)] = complex(np.trace(op))
    return QuasiprobTable(values=values)


def regulated_otoc(setting: OtocSetting, t: float, temperature: float) -> complex:
    """F_reg(t) = Tr(rho^1/4 W(t) rho^1/4 V rho^1/4 W(t) rho^1/4 V)."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    quarter, _ = _thermal_fourth_root(setting, temperature)
    wt = setting.w_heisenberg(t)
    v = setting.v_op
    return complex(
        np.trace(quarter @ wt @ quarter @ v @ quarter @ wt @ quarter @ v)
    )
