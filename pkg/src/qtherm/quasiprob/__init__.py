"""OTOC quasiprobabilities: tables, moments, protocols, circuit averages."""

from .core import (
    OtocSetting,
    QuasiprobTable,
    WorkDistribution,
    coarse_quasiprob,
    fine_quasiprob,
    amplitude,
    quasiprob_from_amplitudes,
    ising_setting,
    jarzynski_moment,
    kfold_otoc,
    kfold_quasiprob,
    kfold_moment,
    otoc,
    pauli_site,
    reconstruct_otoc,
    regulated_otoc,
    regulated_quasiprob,
    sixteen_term_expansion,
    toc_moment,
    toc_quasiprob,
    work_distribution,
)
from .measure import (
    infer_quasiprob_from_weak,
    interference_inner_product,
    state_decomposition,
    weak_measurement_simulate,
    weak_value_retrodiction,
)
from .brownian import brownian_average

__all__ = [
    "OtocSetting",
    "QuasiprobTable",
    "WorkDistribution",
    "amplitude",
    "brownian_average",
    "coarse_quasiprob",
    "fine_quasiprob",
    "infer_quasiprob_from_weak",
    "interference_inner_product",
    "ising_setting",
    "jarzynski_moment",
    "kfold_moment",
    "kfold_otoc",
    "kfold_quasiprob",
    "otoc",
    "pauli_site",
    "quasiprob_from_amplitudes",
    "reconstruct_otoc",
    "regulated_otoc",
    "regulated_quasiprob",
    "sixteen_term_expansion",
    "state_decomposition",
    "toc_moment",
    "toc_quasiprob",
    "weak_measurement_simulate",
    "weak_value_retrodiction",
    "work_distribution",
]
