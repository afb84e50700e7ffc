"""Two-mode Mach-Zehnder interferometer with Kerr and cross-Kerr phase shifters.

The shifters imprint chi1 n1^2 + chi2 n2^2 + 2 chi12 n1 n2 on the Fock state
|n1, n2>.  With n = n1 + n2 and J_z = (n1 - n2)/2 this is

    (chi + chi12) n^2 / 2 + (chi1 - chi2) n J_z + 2 (chi - chi12) J_z^2,

where chi = (chi1 + chi2)/2.  The chi values are accumulated phases
(rate times time already folded in), so the equivalent collective
Hamiltonian acts for unit time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import dicke
from .dicke import BlochProduct, CollectiveHamiltonian

__all__ = [
    "KerrConfig",
    "KerrDecomposition",
    "decompose",
    "fock_phase",
    "kerr_hamiltonian",
    "run_interferometer",
]


@dataclass(frozen=True)
class KerrConfig:
    chi1: float
    chi2: float
    chi12: float

    def __post_init__(self):
        for name in ("chi1", "chi2", "chi12"):
            if not np.isfinite(float(getattr(self, name))):
                raise ValueError(f"{name} must be finite")


class KerrDecomposition(NamedTuple):
    global_coeff: float  # multiplies n^2
    linear_coeff: float  # multiplies n J_z
    quad_coeff: float  # multiplies J_z^2

    @property
    def pure_linear(self) -> bool:
        return self.quad_coeff == 0


def decompose(k: KerrConfig) -> KerrDecomposition:
    chi = (k.chi1 + k.chi2) / 2
    return KerrDecomposition((chi + k.chi12) / 2, k.chi1 - k.chi2, 2 * (chi - k.chi12))


def fock_phase(k: KerrConfig, n1: int, n2: int):
    """Total phase chi1 n1^2 + chi2 n2^2 + 2 chi12 n1 n2 on |n1, n2>."""
    if n1 < 0 or n2 < 0:
        raise ValueError("mode occupations must be nonnegative")
    return k.chi1 * n1 * n1 + k.chi2 * n2 * n2 + 2 * k.chi12 * n1 * n2


def kerr_hamiltonian(k: KerrConfig, n: int) -> CollectiveHamiltonian:
    """Collective Hamiltonian (for unit time) equivalent to the shifters at fixed n.

    The n^2 term is kept in ``c0`` so amplitudes, not only observable
    statistics, agree with the Fock-space phases.
    """
    glob, lin, quad = decompose(k)
    return CollectiveHamiltonian(c0=glob * n * n, a=lin, b=quad)


def run_interferometer(n: int, input_beta: float, k: KerrConfig,
                       readout_obs: str = "Jz") -> tuple[float, float]:
    """Mean and variance of the readout after the second beamsplitter.

    The first beamsplitter prepares ``embed_product(n, input_beta, 0)``; the
    final 50/50 beamsplitter is e^{-i pi/2 J_y}, which maps the output J_z
    onto -J_x of the state inside the interferometer.
    """
    if n < 1:
        raise ValueError("need at least one particle")
    state = dicke.embed_product(BlochProduct(n, input_beta, 0.0))
    state = dicke.evolve(state, kerr_hamiltonian(k, n), 1.0)
    state = dicke.rotate_y(state, np.pi / 2)
    if readout_obs in ("Jx", "Jy", "Jz"):
        return dicke.expectation(state, readout_obs), dicke.variance(state, readout_obs)
    raise ValueError(f"readout must be Jx, Jy or Jz, got {readout_obs!r}")
