"""Dense complex-Hermitian linear algebra and seeded randomness.

Everything downstream (chain builders, engine strokes, quasiprobability
tables, thermal-state solvers) is built on the handful of primitives in
this module.  All operations are pure; arrays are never mutated in place.
"""

from __future__ import annotations

import numpy as np

HERM_ATOL = 1e-12
RECON_RTOL = 1e-10

# Single-qubit constants used throughout the package.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


class NonHermitianError(ValueError):
    """Raised when an operator fails the Hermiticity check."""


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def max_asymmetry(a: np.ndarray) -> float:
    """Largest elementwise deviation of ``a`` from its conjugate transpose."""
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def check_hermitian(a: np.ndarray, atol: float = HERM_ATOL) -> np.ndarray:
    """Validate that ``a`` is square and Hermitian to within ``atol``.

    Returns ``a`` as a complex array.  Raises :class:`NonHermitianError`
    with the maximum asymmetry in the message otherwise.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {a.shape}")
    asym = max_asymmetry(a)
    if asym > atol:
        raise NonHermitianError(
            f"matrix is not Hermitian: max |A - A^dag| = {asym:.3e} > {atol:.0e}"
        )
    return a


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive.

    Pins the overall phase of every eigenvector, which makes adiabatic
    level maps deterministic across runs and BLAS builds.
    """
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(lead) > 0, lead / np.abs(lead), 1.0)
    return vecs / phases[np.newaxis, :]


def eigh(a: np.ndarray, atol: float = HERM_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    each eigenvector's largest-magnitude component made real and positive.
    Within numerically degenerate clusters any orthonormal basis may be
    returned; callers must not rely on the intra-cluster choice.
    """
    a = check_hermitian(a, atol=atol)
    vals, vecs = np.linalg.eigh(a)
    return vals, _fix_phases(vecs)


def reconstruct(vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Reassemble ``sum_k vals[k] |vecs[:,k]><vecs[:,k]|``."""
    return (vecs * vals) @ dagger(vecs)


def func_hermitian(a: np.ndarray, f, atol: float = HERM_ATOL) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix via its spectrum.

    ``f`` must be defined (finite) at every eigenvalue; otherwise a
    ``ValueError`` names the offending eigenvalue.
    """
    vals, vecs = eigh(a, atol=atol)
    with np.errstate(divide="ignore", invalid="ignore"):
        fvals = np.asarray([f(v) for v in vals], dtype=float)
    bad = ~np.isfinite(fvals)
    if np.any(bad):
        raise ValueError(
            f"function undefined at eigenvalue {vals[np.argmax(bad)]:.6g}"
        )
    return reconstruct(fvals, vecs)


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of the given operators, left to right."""
    out = np.array([[1.0 + 0.0j]])
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(rho: np.ndarray, keep, dims) -> np.ndarray:
    """Trace out all subsystems except those in ``keep``.

    Parameters
    ----------
    rho : (D, D) array with D = prod(dims)
    keep : iterable of subsystem indices to retain, in ascending order
    dims : sequence of subsystem dimensions

    The retained subsystems keep their original relative order.
    """
    dims = [int(d) for d in dims]
    keep = sorted(int(k) for k in keep)
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    d_total = int(np.prod(dims))
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d_total, d_total):
        raise ValueError(
            f"state has shape {rho.shape} but dims {dims} imply {d_total}"
        )
    t = rho.reshape(dims + dims)
    # Trace out the complement, highest index first so lower axes stay valid.
    m = n
    for k in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=k, axis2=k + m)
        m -= 1
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def thermal_state(h: np.ndarray, beta: float) -> np.ndarray:
    """Gibbs state exp(-beta h)/Z, stabilized by shifting the spectrum.

    ``beta = inf`` returns the (possibly degenerate) ground-space projector,
    normalized; ``beta = 0`` returns the maximally mixed state.
    """
    vals, vecs = eigh(h)
    if np.isinf(beta):
        ground = np.isclose(vals, vals[0], rtol=0.0, atol=1e-12 * max(1.0, np.ptp(vals)))
        weights = ground.astype(float)
    else:
        weights = np.exp(-beta * (vals - vals.min()))
    weights = weights / weights.sum()
    return reconstruct(weights, vecs)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm ||a - b||_1 for Hermitian a, b."""
    vals = np.linalg.eigvalsh(a - b)
    return float(np.sum(np.abs(vals)))


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible RNG stream.

    The same ``(seed, stream)`` pair yields the same draws on any machine
    and under any scheduling, so ensembles can be farmed out to workers
    without losing determinism.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.default_rng(ss)


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector in dimension ``dim``."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def haar_in_subspace(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector in the span of orthonormal ``basis`` columns."""
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[1] == 0:
        raise ValueError("subspace basis must have at least one column")
    overlap = dagger(basis) @ basis
    if np.max(np.abs(overlap - np.eye(basis.shape[1]))) > 1e-10:
        raise ValueError("subspace basis columns are not orthonormal")
    return basis @ haar_state(basis.shape[1], rng)
