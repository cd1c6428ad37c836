"""Closed-form engine predictions and bounds, as pure functions.

These reproduce the leading-order expressions for per-cycle heat, work,
and efficiency of the localization-assisted Otto engine, the work costs
of finite-speed driving, and the speed/coupling windows that the
thermodynamic-limit scaling arguments impose.  Order-of-magnitude
relations keep their stated prefactors where the source gives one and
prefactor 1 otherwise; results carry a flag so callers can compare
logarithms rather than values for those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)


@dataclass(frozen=True)
class AnalyticInputs:
    """Engine scales entering the closed-form predictions.

    ``mean_gap`` is the level spacing <delta> of the working medium,
    ``wb`` the cold-bath bandwidth, ``delta_minus`` the level-repulsion
    scale, and ``xi_loc``/``xi_deep`` the shallow and deep localization
    lengths used by the thermodynamic-limit estimates.
    """

    mean_gap: float
    wb: float
    beta_c: float = math.inf
    beta_h: float = 0.0
    energy_unit: float = 1.0
    n_sites: int = 12
    speed: float = 0.0
    delta_minus: float = 0.0
    xi_loc: float = 12.0
    xi_deep: float = 1.0

    @property
    def in_validity_regime(self) -> bool:
        """True in the operating corner T_C << Wb << <delta>."""
        small_bandwidth = self.wb < self.mean_gap
        cold_bath = math.isinf(self.beta_c) or self.beta_c * self.wb > 1.0
        return small_bandwidth and cold_bath


@dataclass(frozen=True)
class Prediction:
    value: float
    valid: bool
    order_of_magnitude: bool = False


def _hot_suppression(inputs: AnalyticInputs) -> float:
    """exp(-N (beta_H E)^2 / 4), the thermal-average Gaussian factor."""
    x = inputs.n_sites * (inputs.beta_h * inputs.energy_unit) ** 2 / 4.0
    return math.exp(-x)


def _inv(beta: float) -> float:
    return 0.0 if math.isinf(beta) else 1.0 / beta


def predict_q2(inputs: AnalyticInputs) -> Prediction:
    """Mean heat absorbed from the cold bath,
    (-Wb^2/2 + pi^2/(6 beta_C^2)) exp(-N (beta_H E)^2/4) / <delta>."""
    tc = _inv(inputs.beta_c)
    value = (
        (-inputs.wb**2 / 2.0 + math.pi**2 * tc**2 / 6.0)
        * _hot_suppression(inputs)
        / inputs.mean_gap
    )
    return Prediction(value, inputs.in_validity_regime)


def predict_q4(inputs: AnalyticInputs) -> Prediction:
    """Mean heat absorbed from the hot bath,
    Wb - 2 ln2 / beta_C + Wb^2/(2 <delta>) + 4 ln2 Wb/(beta_C <delta>)."""
    tc = _inv(inputs.beta_c)
    value = (
        inputs.wb
        - 2.0 * LN2 * tc
        + inputs.wb**2 / (2.0 * inputs.mean_gap)
        + 4.0 * LN2 * inputs.wb * tc / inputs.mean_gap
    )
    return Prediction(value, inputs.in_validity_regime)


def predict_wtot(inputs: AnalyticInputs) -> Prediction:
    """Mean work output per cycle, Wb - 2 ln2/beta_C + 4 ln2 Wb/(beta_C <delta>)."""
    tc = _inv(inputs.beta_c)
    value = inputs.wb - 2.0 * LN2 * tc + 4.0 * LN2 * inputs.wb * tc / inputs.mean_gap
    return Prediction(value, inputs.in_validity_regime)


def predict_eta(inputs: AnalyticInputs) -> Prediction:
    """Efficiency 1 - phi' with the finite-T_C corrections retained.

    Undefined (NaN, invalid) when the predicted work output vanishes.
    """
    if predict_wtot(inputs).value == 0.0:
        return Prediction(math.nan, False)
    tc = _inv(inputs.beta_c)
    phi = (
        inputs.wb / (2.0 * inputs.mean_gap)
        + LN2 * tc / inputs.mean_gap
        - 2.0 * LN2 * (inputs.wb / inputs.mean_gap) * tc / inputs.mean_gap
    )
    return Prediction(1.0 - phi, inputs.in_validity_regime)


@dataclass(frozen=True)
class DiabaticCosts:
    w_apt: float
    w_lz: float
    w_frac_lz: float
    order_of_magnitude: bool = True


def diabatic_costs(inputs: AnalyticInputs, epsilon: float = 1.0 / 3.0) -> DiabaticCosts:
    """Average work costs of the three finite-speed transition channels.

    * APT hops (level-repelling regime):
      (1/sqrt(N)) v^2 beta_H / (E <delta>) log(<delta>^2/v) exp(-N(beta_H E)^2/4);
      vanishes at beta_H = 0 and in the adiabatic limit.
    * Avoided-crossing (Landau-Zener) hops cost zero on average by symmetry.
    * Interrupted-crossing hops at the start of stroke 3:
      v^2 delta_-^2 / (80 eps^5 Wb^5) + eps Wb.
    """
    v = inputs.speed
    if v < 0:
        raise ValueError("speed must be nonnegative")
    if v == 0.0:
        return DiabaticCosts(w_apt=0.0, w_lz=0.0, w_frac_lz=0.0)
    if inputs.beta_h == 0.0:
        w_apt = 0.0
    else:
        log_arg = inputs.mean_gap**2 / v
        # outside v << <delta>^2 the regulated log turns negative; clamp
        log_term = max(math.log(log_arg), 0.0)
        w_apt = (
            (1.0 / math.sqrt(inputs.n_sites))
            * v**2
            * inputs.beta_h
            / (inputs.energy_unit * inputs.mean_gap)
            * log_term
            * _hot_suppression(inputs)
        )
    w_frac = (
        v**2 * inputs.delta_minus**2 / (80.0 * epsilon**5 * inputs.wb**5)
        + epsilon * inputs.wb
    )
    return DiabaticCosts(w_apt=w_apt, w_lz=0.0, w_frac_lz=w_frac)


def frac_lz_probability(inputs: AnalyticInputs, gap: float) -> float:
    """Probability v^2 delta_-^2 / (16 gap^6) of an interrupted-crossing hop."""
    return inputs.speed**2 * inputs.delta_minus**2 / (16.0 * gap**6)


def repulsion_scale(length: float, xi: float, energy_unit: float = 1.0) -> float:
    """Level-repulsion matrix element of a length-L rearrangement,
    E exp(-L/xi) 2^(-L); equals E at L = 0."""
    return energy_unit * math.exp(-length / xi) * 2.0 ** (-length)


def subengine_gap(xi_loc: float, energy_unit: float = 1.0) -> float:
    """Effective mean gap E sqrt(xi) / 2^xi of a length-xi subengine."""
    return energy_unit * math.sqrt(xi_loc) / 2.0**xi_loc


def macro_power(n_macro: float, xi_loc: float, energy_unit: float = 1.0) -> float:
    """Whole-engine per-cycle output, linear in the site count:
    N_macro sqrt(xi) E / 2^xi."""
    return n_macro * math.sqrt(xi_loc) * energy_unit / 2.0**xi_loc


@dataclass(frozen=True)
class SpeedWindow:
    v_min: float
    v_max: float
    regime: str
    order_of_magnitude: bool = True

    @property
    def empty(self) -> bool:
        return not self.v_min < self.v_max


def speed_window(inputs: AnalyticInputs, regime: str = "deep") -> SpeedWindow:
    """Tuning-speed window for independent, near-ideal subengines.

    The lower bound E^2 exp(-3 xi_loc / xi(t)) 2^(-2.5 xi_loc) keeps
    cross-subengine avoided crossings diabatic; xi(t) is the deep or the
    shallow localization length depending on ``regime``.  The upper bound
    is (Wb)^3/delta_- (interrupted crossings, deep regime, with
    Wb ~ subengine gap / 10) or <delta>^2 (APT hops, shallow regime).
    """
    e2 = inputs.energy_unit**2
    xi = inputs.xi_loc
    if regime == "deep":
        xi_t = inputs.xi_deep
        # Wb ~ <delta>_subengine / 10 and delta_- = E exp(-xi/xi_deep) 2^-xi
        v_max = e2 * math.exp(xi / inputs.xi_deep) * 2.0 ** (-2.0 * xi) / 1e3
    elif regime == "shallow":
        xi_t = inputs.xi_loc
        v_max = e2 * 2.0 ** (-2.0 * xi)
    else:
        raise ValueError("regime must be 'deep' or 'shallow'")
    v_min = e2 * math.exp(-3.0 * xi / xi_t) * 2.0 ** (-2.5 * xi)
    return SpeedWindow(v_min=v_min, v_max=v_max, regime=regime)


def cold_time_bounds(inputs: AnalyticInputs) -> tuple[float, float]:
    """Lower bounds on the cold-thermalization time.

    Markovian coupling gives tau > E^2 / (Wb delta_-^2); suppressing
    multi-quantum exchanges gives tau >> Wb (E / delta_-^L)^(2/(L-1))
    with L = max(<delta>/Wb, xi_loc).
    """
    if inputs.wb <= 0 or inputs.delta_minus <= 0:
        raise ValueError("need positive bandwidth and repulsion scale")
    tau_markov = inputs.energy_unit**2 / (inputs.wb * inputs.delta_minus**2)
    big_l = max(inputs.mean_gap / inputs.wb, inputs.xi_loc)
    tau_high_order = inputs.wb * (
        inputs.energy_unit / inputs.delta_minus**big_l
    ) ** (2.0 / (big_l - 1.0))
    return tau_markov, tau_high_order
