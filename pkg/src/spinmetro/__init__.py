"""Exact collective-spin simulation of linear (n J_z) and quadratic (J_z^2)
metrology protocols, their Monte Carlo estimators, a two-mode condensate
parameter layer and precision-scaling sweeps."""
from .dicke import (
    BlochProduct,
    CollectiveHamiltonian,
    DickeState,
    bloch_length,
    embed_product,
    evolve,
    expectation,
    reduced_bloch,
    rotate_x,
    rotate_y,
    variance,
)
from .interferometer import KerrConfig, decompose, fock_phase, run_interferometer
from .noise import NoiseModel, apply_noise
from .protocols import (
    EstimationResult,
    OperatingPointError,
    Protocol,
    ProtocolSpec,
    estimate_gamma,
    evaluate_eq1,
    sample_outcomes,
)
from .scaling import SweepResult, fit_exponent, run_bec_sweep, run_sweep

__version__ = "0.1.0"
