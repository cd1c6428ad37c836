"""Numerical toolkit for localization-assisted quantum engines,
out-of-time-ordered correlators and their quasiprobabilities, and
thermal states with noncommuting charges.

Subpackages
-----------
linops
    Dense complex-Hermitian linear algebra, tensor helpers, seeded RNG streams.
spinchain
    Disordered Heisenberg / Ising chain builders and level statistics.
engine
    Four-stroke Otto cycle on a disordered chain, adiabatic or stepwise-driven.
analytics
    Closed-form engine predictions and bounds, for comparison with simulation.
quasiprob
    OTOC quasiprobability tables, moments, measurement protocols, Brownian circuits.
nats
    Non-Abelian thermal states, approximate microcanonical subspaces, second laws.
cli
    Reproducible experiment runner emitting CSV tables and figures.
"""

__version__ = "0.1.0"
