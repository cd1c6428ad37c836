"""Quasiprobability averages over Brownian (noise-driven) circuits.

The time-evolution operator obeys the Ito stochastic equation

    U(t + dt) - U(t) = -(N/2) U dt - i dB(t) U,

with dB a Gaussian combination of all two-site Pauli products.  Shots
are integrated in parallel with Euler-Maruyama steps; unitarity is
restored by polar projection at fixed intervals, and shots whose drift
exceeds a threshold before projection are discarded and counted.  At
each sample time the per-shot OTOC, two-point function, and coarse
quasiprobability table are evaluated at infinite temperature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linops import IDENTITY_2, PAULIS, dagger, stream_rng, tensor
from .core import QuasiprobTable

_CHUNK = 512


def _pair_basis(n_qubits: int) -> np.ndarray:
    """All sigma_i^a sigma_j^b with i < j and a, b in {1, x, y, z}."""
    singles = [IDENTITY_2, PAULIS["x"], PAULIS["y"], PAULIS["z"]]
    ops = []
    for i in range(n_qubits):
        for j in range(i + 1, n_qubits):
            for a in singles:
                for b in singles:
                    factors = [IDENTITY_2] * n_qubits
                    factors[i] = a
                    factors[j] = b
                    ops.append(tensor(*factors))
    return np.stack(ops)


@dataclass
class BrownianPoint:
    """Ensemble estimates at one sample time."""

    t: float
    f_mean: complex
    f_err: float
    g_mean: complex
    g_err: float
    table_mean: dict
    table_err: dict
    # per-entry residual of 16A - (1 + w2w3 + v1v2) - w2w3v1v2 F, whose
    # ensemble mean vanishes with the two-point function
    residual_mean: dict
    residual_err: dict


@dataclass
class BrownianResult:
    n_qubits: int
    dt: float
    shots: int
    discarded: int
    points: list


def _sample_observables(u_batch, w_diag, v_diag):
    """Per-shot F, G, and coarse table at rho = 1/d for W, V diagonal."""
    d = u_batch.shape[-1]
    wt = np.einsum("sji,j,sjk->sik", u_batch.conj(), w_diag, u_batch, optimize=True)
    g = np.einsum("sii,i->s", wt, v_diag) / d
    a = wt * v_diag[None, None, :]
    f = np.einsum("sjk,skj->s", a, a) / d
    # coarse table from batched projector products
    eye = np.eye(d)
    proj_w = {s: (eye[None, :, :] + s * wt) / 2.0 for s in (1, -1)}
    proj_v = {s: (1.0 + s * v_diag) / 2.0 for s in (1, -1)}
    tables = {}
    prod = {}
    for w in (1, -1):
        for v in (1, -1):
            prod[(w, v)] = proj_w[w] * proj_v[v][None, None, :]
    for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
        tables[(v1, w2, v2, w3)] = (
            np.einsum("sij,sji->s", prod[(w3, v2)], prod[(w2, v1)]) / d
        )
    return f, g, tables


def brownian_average(
    n_qubits: int,
    dt: float,
    shots: int,
    t_grid,
    seed: int,
    project_every: int = 100,
    drift_tol: float = 1e-3,
) -> BrownianResult:
    """Ensemble averages of F, G, and the coarse table over noise draws.

    W = sigma^z on qubit 0 and V = sigma^z on qubit 1 (all single-site
    Pauli choices are equivalent under the noise ensemble's symmetry).
    Shots are split into fixed-size chunks with independent RNG streams,
    so results do not depend on execution order.
    """
    if dt > 1e-3:
        raise ValueError("Ito discretization needs dt <= 1e-3")
    if n_qubits > 6:
        raise ValueError("Brownian ensemble supported up to 6 qubits")
    t_grid = [float(t) for t in sorted(t_grid)]
    if t_grid[0] < 0:
        raise ValueError("sample times must be nonnegative")
    d = 1 << n_qubits
    basis = _pair_basis(n_qubits)
    n_terms = basis.shape[0]
    basis_flat_re = np.ascontiguousarray(basis.real.reshape(n_terms, d * d))
    basis_flat_im = np.ascontiguousarray(basis.imag.reshape(n_terms, d * d))
    amp = np.sqrt(dt / (8.0 * (n_qubits - 1)))
    w_diag = np.array([1.0 if not (i >> (n_qubits - 1)) & 1 else -1.0 for i in range(d)])
    v_diag = np.array(
        [1.0 if not (i >> (n_qubits - 2)) & 1 else -1.0 for i in range(d)]
    )

    per_shot = {t: {"f": [], "g": [], "tab": []} for t in t_grid}
    discarded = 0
    chunk_starts = list(range(0, shots, _CHUNK))
    for chunk_index, start in enumerate(chunk_starts):
        size = min(_CHUNK, shots - start)
        rng = stream_rng(seed, chunk_index)
        u = np.broadcast_to(np.eye(d, dtype=complex), (size, d, d)).copy()
        alive = np.ones(size, dtype=bool)
        t_now = 0.0
        steps_since_projection = 0
        for t_target in t_grid:
            n_steps = int(round((t_target - t_now) / dt))
            for _ in range(n_steps):
                noise = rng.standard_normal((size, n_terms))
                db = (noise @ basis_flat_re + 1j * (noise @ basis_flat_im)).reshape(
                    size, d, d
                )
                u = u - (n_qubits / 2.0) * dt * u - 1j * amp * np.matmul(db, u)
                steps_since_projection += 1
                if steps_since_projection >= project_every:
                    drift = np.max(
                        np.abs(
                            np.matmul(u.conj().transpose(0, 2, 1), u) - np.eye(d)
                        ),
                        axis=(1, 2),
                    )
                    # the Ito scheme accumulates O(sqrt(dt)) drift per step by
                    # construction; the discard budget is per step, so only
                    # genuinely blown-up trajectories are dropped
                    alive &= drift <= drift_tol * steps_since_projection
                    uu, _, vh = np.linalg.svd(u)
                    u = np.matmul(uu, vh)
                    steps_since_projection = 0
            t_now = t_target
            # snapshot on a freshly projected copy
            uu, _, vh = np.linalg.svd(u)
            u_snap = np.matmul(uu, vh)
            f, g, tables = _sample_observables(u_snap[alive], w_diag, v_diag)
            per_shot[t_target]["f"].append(f)
            per_shot[t_target]["g"].append(g)
            per_shot[t_target]["tab"].append(tables)
        discarded += int(np.sum(~alive))

    points = []
    for t in t_grid:
        f = np.concatenate(per_shot[t]["f"])
        g = np.concatenate(per_shot[t]["g"])
        n = len(f)
        tables = {
            key: np.concatenate([tab[key] for tab in per_shot[t]["tab"]])
            for key in QuasiprobTable.coarse_keys()
        }
        table_mean, table_err = {}, {}
        res_mean, res_err = {}, {}
        for (v1, w2, v2, w3), samples in tables.items():
            table_mean[(v1, w2, v2, w3)] = complex(samples.mean())
            table_err[(v1, w2, v2, w3)] = float(
                np.real(samples).std(ddof=1) / np.sqrt(n)
            )
            resid = samples - (1 + w2 * w3 + v1 * v2 + w2 * w3 * v1 * v2 * f) / 16.0
            res_mean[(v1, w2, v2, w3)] = complex(resid.mean())
            res_err[(v1, w2, v2, w3)] = float(
                max(np.real(resid).std(ddof=1), np.abs(np.imag(resid)).std(ddof=1))
                / np.sqrt(n)
            )
        points.append(
            BrownianPoint(
                t=t,
                f_mean=complex(f.mean()),
                f_err=float(np.real(f).std(ddof=1) / np.sqrt(n)),
                g_mean=complex(g.mean()),
                g_err=float(
                    max(np.real(g).std(ddof=1), np.imag(g).std(ddof=1)) / np.sqrt(n)
                ),
                table_mean=table_mean,
                table_err=table_err,
                residual_mean=res_mean,
                residual_err=res_err,
            )
        )
    return BrownianResult(
        n_qubits=n_qubits,
        dt=dt,
        shots=shots,
        discarded=discarded,
        points=points,
    )
