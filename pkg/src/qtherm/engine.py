"""Four-stroke Otto cycle on a disordered chain.

The working medium is the half-filling sector of the random-field
Heisenberg chain.  One cycle consists of

1. tuning the Hamiltonian from the weak-disorder ("GOE") endpoint to the
   strong-disorder ("MBL") endpoint, isolated from both baths;
2. thermalizing with a cold, narrow-bandwidth bath that can only move
   weight across gaps smaller than its bandwidth;
3. tuning back to the weak-disorder endpoint;
4. resetting by full thermalization with the hot bath.

Strokes 1 and 3 are simulated either adiabatically (occupations ride the
sorted levels) or diabatically (a chain of stepwise propagators whose
step count is set by the tuning speed).  Work and heat are accounted
per stroke from E(t) = Tr(H(t) rho(t)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linops import dagger, eigh, reconstruct, thermal_state
from .spinchain import (
    DisorderRealization,
    HeisenbergParams,
    build_heisenberg,
    draw_realization,
)

FIRST_LAW_RTOL = 1e-10


@dataclass(frozen=True)
class CycleConfig:
    """Bath and drive parameters for one engine cycle.

    ``speed`` is the tuning speed v = E |d alpha / dt| in units of
    energy^2; zero selects the adiabatic stroke map.  The diabatic
    timestep is ``dt_fraction / mean_gap``, i.e. the phase accumulated
    between levels one mean spacing apart is ``dt_fraction`` radians
    per step.
    """

    wb: float
    beta_c: float = np.inf
    beta_h: float = 0.0
    speed: float = 0.0
    dt_fraction: float = 0.405
    max_steps: int = 500_000

    def __post_init__(self):
        if self.wb < 0:
            raise ValueError("cold-bath bandwidth must be nonnegative")
        if not (self.beta_c >= self.beta_h >= 0):
            raise ValueError("need beta_c >= beta_h >= 0")
        if self.speed < 0:
            raise ValueError("tuning speed must be nonnegative")


@dataclass(frozen=True)
class CycleRecord:
    """Energy bookkeeping for one cycle.

    Sign conventions: W > 0 is work output during a tuning stroke,
    Q > 0 is heat absorbed during a thermalization stroke.  W1 + W3 and
    Q2 + Q4 must agree (first law) because stroke 4 closes the cycle.
    """

    w1: float
    q2: float
    w3: float
    q4: float
    energies: tuple[float, float, float, float]  # E(0), E(tau), E(tau'), E(tau'')

    @property
    def w_tot(self) -> float:
        return self.w1 + self.w3

    def check_first_law(self, energy_unit: float = 1.0) -> None:
        gap = abs(self.w_tot - (self.q2 + self.q4))
        if gap > FIRST_LAW_RTOL * energy_unit:
            raise AssertionError(f"first-law violation: {gap:.3e}")


@dataclass(frozen=True)
class QubitToyParams:
    delta_goe: float
    delta_mbl: float

    def __post_init__(self):
        if not (0 <= self.delta_mbl <= self.delta_goe) or self.delta_goe <= 0:
            raise ValueError("need 0 <= delta_mbl <= delta_goe, delta_goe > 0")


def initial_state(h_start: np.ndarray, beta_h: float) -> np.ndarray:
    """Hot-bath Gibbs state exp(-beta_h H)/Z the engine begins each cycle in."""
    return thermal_state(h_start, beta_h)


def adiabatic_stroke(
    rho: np.ndarray,
    spec_start: tuple[np.ndarray, np.ndarray],
    spec_end: tuple[np.ndarray, np.ndarray],
) -> np.ndarray:
    """Transport occupations level-by-level between two eigenbases.

    The map is rho -> U rho U^dag with U_{lm} = sum_j <s_l|E_j(end)>
    <E_j(start)|s_m>; the population on the j-th start level lands
    exactly on the j-th end level.
    """
    vals0, vecs0 = spec_start
    vals1, vecs1 = spec_end
    if vecs0.shape != vecs1.shape or rho.shape != vecs0.shape:
        raise ValueError("dimension mismatch between state and spectral data")
    u = vecs1 @ dagger(vecs0)
    return u @ rho @ dagger(u)


def diabatic_stroke(
    rho: np.ndarray,
    path,
    alpha_start: float,
    alpha_end: float,
    speed: float,
    dt: float,
    energy_unit: float = 1.0,
    max_steps: int = 500_000,
) -> np.ndarray:
    """Stepwise-driven stroke at finite tuning speed.

    alpha jumps by v*dt/E after every interval dt during which the
    instantaneous Hamiltonian is held fixed, so the stroke propagator is
    the ordered product exp(-i H(a_n) t_n) ... exp(-i H(a_0) dt) with the
    number of steps set by the speed.  ``path(alpha)`` returns the
    Hamiltonian matrix.
    """
    if speed <= 0:
        raise ValueError("diabatic stroke needs a positive speed")
    if dt <= 0:
        raise ValueError("timestep must be positive")
    total_time = energy_unit * abs(alpha_end - alpha_start) / speed
    n_full, remainder = divmod(total_time, dt)
    n_full = int(n_full)
    n_steps = n_full + (1 if remainder > 0 else 0)
    if n_steps > max_steps:
        raise ValueError(
            f"stroke needs {n_steps} steps at speed {speed:g}, cap is {max_steps}"
        )
    direction = 1.0 if alpha_end >= alpha_start else -1.0
    dim = rho.shape[0]
    u_total = np.eye(dim, dtype=complex)
    for k in range(n_steps):
        alpha_k = alpha_start + direction * k * speed * dt / energy_unit
        step_time = dt if k < n_full else remainder
        # plain LAPACK eigh: the propagator is phase-convention independent
        vals, vecs = np.linalg.eigh(path(alpha_k))
        u_step = (vecs * np.exp(-1j * vals * step_time)) @ vecs.conj().T
        u_total = u_step @ u_total
    drift = np.max(np.abs(dagger(u_total) @ u_total - np.eye(dim)))
    if drift > 1e-8:
        raise AssertionError(f"stroke propagator lost unitarity: {drift:.2e}")
    return u_total @ rho @ dagger(u_total)


def gap_chains(vals: np.ndarray, wb: float) -> list[tuple[int, int]]:
    """Maximal runs [i, j] of consecutive levels with every internal gap < wb."""
    chains = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or not (vals[i] - vals[i - 1] < wb):
            chains.append((start, i - 1))
            start = i
    return chains


def _redistribute(populations: np.ndarray, vals: np.ndarray, wb: float, beta_c: float):
    """Pool weight within every sub-bandwidth chain and reapportion it
    as a Gibbs distribution at the cold-bath temperature."""
    out = populations.copy()
    for lo, hi in gap_chains(vals, wb):
        if hi == lo:
            continue
        block = vals[lo : hi + 1]
        total = populations[lo : hi + 1].sum()
        if np.isinf(beta_c):
            weights = (block == block.min()).astype(float)
        else:
            weights = np.exp(-beta_c * (block - block.min()))
        out[lo : hi + 1] = total * weights / weights.sum()
    return out


def cold_thermalize(
    rho: np.ndarray,
    spec: tuple[np.ndarray, np.ndarray],
    wb: float,
    beta_c: float,
) -> tuple[np.ndarray, float]:
    """Narrow-bandwidth cold bath: dephase, then Gibbs-reapportion chains.

    The state is first pinched in the energy eigenbasis (the bath
    measures energy; diabatic strokes can leave coherences).  Weight then
    rebalances within every maximal chain of levels connected by gaps
    smaller than ``wb``; levels isolated by larger gaps are untouched.
    Returns the new state and the heat Q2 absorbed.
    """
    if wb < 0:
        raise ValueError("bandwidth must be nonnegative")
    vals, vecs = spec
    populations = np.real(np.diag(dagger(vecs) @ rho @ vecs)).copy()
    new_populations = _redistribute(populations, vals, wb, beta_c)
    q2 = float((new_populations - populations) @ vals)
    return reconstruct(new_populations, vecs), q2


def hot_thermalize(
    rho: np.ndarray, h: np.ndarray, beta_h: float
) -> tuple[np.ndarray, float]:
    """Full reset to the hot Gibbs state; returns (state, Q4 absorbed)."""
    new_rho = thermal_state(h, beta_h)
    q4 = float(np.real(np.trace(h @ (new_rho - rho))))
    return new_rho, q4


def run_cycle_operators(
    h_start: np.ndarray,
    h_end: np.ndarray,
    config: CycleConfig,
    path=None,
    energy_unit: float = 1.0,
    mean_gap: float | None = None,
) -> CycleRecord:
    """One full cycle between explicit endpoint Hamiltonians.

    ``path`` (alpha -> Hamiltonian) is only needed for diabatic strokes.
    """
    spec0 = eigh(h_start)
    spec1 = eigh(h_end)
    rho = initial_state(h_start, config.beta_h)
    e0 = float(np.real(np.trace(h_start @ rho)))

    if config.speed == 0.0:
        rho = adiabatic_stroke(rho, spec0, spec1)
    else:
        if path is None:
            raise ValueError("diabatic strokes need the full tuning path")
        if mean_gap is None:
            raise ValueError("diabatic strokes need the mean gap to set the timestep")
        dt = config.dt_fraction / mean_gap
        rho = diabatic_stroke(
            rho, path, 0.0, 1.0, config.speed, dt, energy_unit, config.max_steps
        )
    e_tau = float(np.real(np.trace(h_end @ rho)))

    rho, q2 = cold_thermalize(rho, spec1, config.wb, config.beta_c)
    e_tau_p = e_tau + q2

    if config.speed == 0.0:
        rho = adiabatic_stroke(rho, spec1, spec0)
    else:
        dt = config.dt_fraction / mean_gap
        rho = diabatic_stroke(
            rho, path, 1.0, 0.0, config.speed, dt, energy_unit, config.max_steps
        )
    e_tau_pp = float(np.real(np.trace(h_start @ rho)))

    _, q4 = hot_thermalize(rho, h_start, config.beta_h)

    record = CycleRecord(
        w1=e0 - e_tau,
        q2=q2,
        w3=e_tau_p - e_tau_pp,
        q4=q4,
        energies=(e0, e_tau, e_tau_p, e_tau_pp),
    )
    record.check_first_law(energy_unit)
    return record


def run_cycle(
    realization: DisorderRealization,
    params: HeisenbergParams,
    config: CycleConfig,
) -> CycleRecord:
    """One cycle of the disordered-Heisenberg engine for one disorder draw."""
    from .spinchain import assemble_heisenberg, heisenberg_parts

    parts = heisenberg_parts(params, realization)
    h_start = assemble_heisenberg(params, parts, 0.0)
    h_end = assemble_heisenberg(params, parts, 1.0)
    path = None
    if config.speed > 0:
        path = lambda a: assemble_heisenberg(params, parts, a)
    return run_cycle_operators(
        h_start,
        h_end,
        config,
        path=path,
        energy_unit=params.energy_unit,
        mean_gap=params.mean_gap,
    )


def _adiabatic_records_fast(vals0, vals1, configs):
    """Populations-only cycle evaluation shared across bath configs.

    Adiabatic strokes never create coherences, so the cycle reduces to
    bookkeeping on the two sorted spectra.  Equivalent to
    ``run_cycle_operators`` with speed 0 (covered by tests).
    """
    records = []
    for config in configs:
        if np.isinf(config.beta_h):
            p0 = np.zeros_like(vals0)
            p0[0] = 1.0
        else:
            w = np.exp(-config.beta_h * (vals0 - vals0.min()))
            p0 = w / w.sum()
        e0 = float(p0 @ vals0)
        e_tau = float(p0 @ vals1)
        p1 = _redistribute(p0, vals1, config.wb, config.beta_c)
        q2 = float((p1 - p0) @ vals1)
        e_tau_p = e_tau + q2
        e_tau_pp = float(p1 @ vals0)
        records.append(
            CycleRecord(
                w1=e0 - e_tau,
                q2=q2,
                w3=e_tau_p - e_tau_pp,
                q4=e0 - e_tau_pp,
                energies=(e0, e_tau, e_tau_p, e_tau_pp),
            )
        )
    return records


@dataclass
class SweepPoint:
    """Disorder-ensemble averages at one bath configuration."""

    config: CycleConfig
    n_realizations: int
    mean: dict
    stderr: dict
    eta: float
    eta_err: float
    eta_defined: bool


def _aggregate(config, records) -> SweepPoint:
    fields = {
        "w1": np.array([r.w1 for r in records]),
        "w3": np.array([r.w3 for r in records]),
        "q2": np.array([r.q2 for r in records]),
        "q4": np.array([r.q4 for r in records]),
        "w_tot": np.array([r.w_tot for r in records]),
    }
    n = len(records)
    mean = {k: float(v.mean()) for k, v in fields.items()}
    stderr = {
        k: float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        for k, v in fields.items()
    }
    # efficiency: numerator and denominator disorder-averaged separately
    if mean["q4"] == 0.0:
        eta, eta_err, defined = float("nan"), float("nan"), False
    else:
        eta = mean["w_tot"] / mean["q4"]
        w, q = fields["w_tot"], fields["q4"]
        if n > 1:
            cov = np.cov(w, q, ddof=1) / n
            eta_err = float(
                np.sqrt(
                    max(
                        cov[0, 0] / mean["q4"] ** 2
                        + mean["w_tot"] ** 2 * cov[1, 1] / mean["q4"] ** 4
                        - 2 * mean["w_tot"] * cov[0, 1] / mean["q4"] ** 3,
                        0.0,
                    )
                )
            )
        else:
            eta_err = 0.0
        defined = True
    return SweepPoint(
        config=config,
        n_realizations=n,
        mean=mean,
        stderr=stderr,
        eta=eta,
        eta_err=eta_err,
        eta_defined=defined,
    )


def _sweep_one_realization(params, seed, r, configs, adiabatic_only):
    real = draw_realization(params.n_sites, seed, r)
    if adiabatic_only:
        vals0 = np.linalg.eigvalsh(build_heisenberg(params, real, 0.0))
        vals1 = np.linalg.eigvalsh(build_heisenberg(params, real, 1.0))
        return _adiabatic_records_fast(vals0, vals1, configs)
    return [run_cycle(real, params, c) for c in configs]


def ensemble_sweep(
    params: HeisenbergParams,
    configs,
    n_realizations: int,
    seed: int,
    workers: int = 1,
) -> list[SweepPoint]:
    """Disorder-ensemble averages of the cycle across bath/drive configs.

    Realization r always uses RNG stream (seed, r), so the result is
    independent of ``workers``; partial results are reduced in
    realization order.
    """
    if n_realizations < 2:
        raise ValueError("need at least two realizations for standard errors")
    configs = list(configs)
    adiabatic_only = all(c.speed == 0.0 for c in configs)

    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        job = partial(
            _sweep_one_realization,
            params,
            seed,
            configs=configs,
            adiabatic_only=adiabatic_only,
        )
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_real = list(pool.map(job, range(n_realizations)))
    else:
        per_real = [
            _sweep_one_realization(params, seed, r, configs, adiabatic_only)
            for r in range(n_realizations)
        ]

    return [
        _aggregate(config, [recs[i] for recs in per_real])
        for i, config in enumerate(configs)
    ]


def _work_curve_one_realization(params, seed, r, wb, v_grid, beta_c, beta_h, dt_fraction):
    from .spinchain import assemble_heisenberg, heisenberg_parts

    real = draw_realization(params.n_sites, seed, r)
    parts = heisenberg_parts(params, real)
    h0 = assemble_heisenberg(params, parts, 0.0)
    h1 = assemble_heisenberg(params, parts, 1.0)
    spec0, spec1 = eigh(h0), eigh(h1)
    path = lambda a: assemble_heisenberg(params, parts, a)
    dt = dt_fraction / params.mean_gap

    records = _adiabatic_records_fast(
        spec0[0], spec1[0], [CycleConfig(wb=wb, beta_c=beta_c, beta_h=beta_h)]
    )
    for v in v_grid:
        rho = thermal_state(h0, beta_h)
        e0 = float(np.real(np.trace(h0 @ rho)))
        rho = diabatic_stroke(rho, path, 0.0, 1.0, v, dt, params.energy_unit)
        e_tau = float(np.real(np.trace(h1 @ rho)))
        rho, q2 = cold_thermalize(rho, spec1, wb, beta_c)
        rho = diabatic_stroke(rho, path, 1.0, 0.0, v, dt, params.energy_unit)
        e_tau_pp = float(np.real(np.trace(h0 @ rho)))
        _, q4 = hot_thermalize(rho, h0, beta_h)
        records.append(
            CycleRecord(
                w1=e0 - e_tau,
                q2=q2,
                w3=e_tau + q2 - e_tau_pp,
                q4=q4,
                energies=(e0, e_tau, e_tau + q2, e_tau_pp),
            )
        )
    return records


def diabatic_work_curve(
    params: HeisenbergParams,
    wb: float,
    v_grid,
    n_realizations: int,
    seed: int,
    beta_c: float = np.inf,
    beta_h: float = 0.0,
    dt_fraction: float = 0.405,
    workers: int = 1,
) -> list[SweepPoint]:
    """Work output vs tuning speed, with the adiabatic cycle as reference.

    Returns one SweepPoint per grid entry; the first entry (speed 0) is
    the adiabatic reference, the rest follow ``v_grid`` in order.
    Endpoint diagonalizations are shared across speeds.
    """
    v_grid = [float(v) for v in v_grid]
    if any(v <= 0 for v in v_grid):
        raise ValueError("speed grid entries must be positive")
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        job = partial(
            _work_curve_one_realization,
            params,
            seed,
            wb=wb,
            v_grid=v_grid,
            beta_c=beta_c,
            beta_h=beta_h,
            dt_fraction=dt_fraction,
        )
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_real = list(pool.map(job, range(n_realizations)))
    else:
        per_real = [
            _work_curve_one_realization(
                params, seed, r, wb, v_grid, beta_c, beta_h, dt_fraction
            )
            for r in range(n_realizations)
        ]
    configs = [CycleConfig(wb=wb, beta_c=beta_c, beta_h=beta_h)] + [
        CycleConfig(wb=wb, beta_c=beta_c, beta_h=beta_h, speed=v) for v in v_grid
    ]
    return [
        _aggregate(config, [recs[i] for recs in per_real])
        for i, config in enumerate(configs)
    ]


def pooled_mbl_gaps(params: HeisenbergParams, n_realizations: int, seed: int):
    """Central-window gaps of the strong-disorder endpoint, pooled over
    realizations; feedstock for the level-repulsion estimate."""
    from .spinchain import central_window

    pooled = []
    for r in range(n_realizations):
        real = draw_realization(params.n_sites, seed, r)
        vals = np.linalg.eigvalsh(build_heisenberg(params, real, 1.0))
        pooled.append(np.diff(central_window(vals)))
    return np.concatenate(pooled)


def qubit_toy(params: QubitToyParams) -> tuple[float, float]:
    """Closed-form two-level engine: W_tot = (dGOE - dMBL)/2, eta = 1 - ratio."""
    w_tot = (params.delta_goe - params.delta_mbl) / 2.0
    eta = 1.0 - params.delta_mbl / params.delta_goe
    return w_tot, eta


def qubit_toy_record(params: QubitToyParams) -> CycleRecord:
    """CycleRecord of the ideal qubit engine (T_H = inf, T_C = 0)."""
    w_tot, _ = qubit_toy(params)
    return CycleRecord(
        w1=0.0,
        q2=-params.delta_mbl / 2.0,
        w3=w_tot,
        q4=params.delta_goe / 2.0,
        energies=(0.0, 0.0, -params.delta_mbl / 2.0, -params.delta_goe / 2.0),
    )


def worst_case_rate(records) -> tuple[float, float]:
    """Fraction of cycles with W_tot < 0, plus its binomial standard error."""
    w = np.array([r.w_tot for r in records])
    if len(w) == 0:
        raise ValueError("empty ensemble")
    p = float(np.mean(w < 0))
    err = math.sqrt(p * (1 - p) / len(w))
    return p, err
