"""Two-mode Bose-Einstein condensate parameters.

Maps trap geometry and s-wave scattering lengths onto the collective
Hamiltonian gamma1 eta (n-1) J_z + gamma2 eta J_z^2 (plus an ignorable
constant), where eta = int |psi_n|^4 is the inverse effective volume of the
shared condensate mode.

Geometry: a potential k r^q / 2 in ``d`` longitudinal dimensions, with
bare ground-state half-width R0 = (hbar^2 / m k)^{1/(q+2)}, and a tight
harmonic trap of ground-state half-width s = (hbar / 2 m omega0)^{1/2} in
the remaining D = 3 - d dimensions.  For d = 3, R0 is the trap half-width
and s is unused.

Two regimes are modelled for eta:

* kinetic (few atoms): the bare single-particle ground state, obtained
  from a radial finite-volume eigen-solve;
* Thomas-Fermi: transverse Gaussian of half-width s times a longitudinal
  Thomas-Fermi profile, giving eta = alpha(q, d) / (s^D R0^d) (n_L/n)^{d/(d+q)}.

All lengths are in metres, masses in kg, energies in joules; conversion to
angular rates (division by hbar) happens only in :func:`bec_hamiltonian`.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import constants
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal

from .dicke import CollectiveHamiltonian

__all__ = [
    "COUPLING_UNITS",
    "Couplings",
    "CriticalNumbers",
    "EtaValue",
    "OutOfModelError",
    "Species",
    "TimeBudget",
    "NumberCheck",
    "TrapGeometry",
    "alpha",
    "bare_ground_state",
    "bec_hamiltonian",
    "chemical_potential",
    "couplings",
    "critical_numbers",
    "crossover_number",
    "eta",
    "load_config",
    "number_constraint",
    "peak_density_estimate",
    "preset",
    "scaling_exponent",
    "time_budget",
    "tf_radius",
    "with_loss_ratio",
]

HBAR = constants.hbar
COUPLING_UNITS = "J m^3"

# unit sphere surface in d dimensions
_SPHERE = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}


class OutOfModelError(ValueError):
    """Atom number outside the range the condensate model describes."""


@dataclass(frozen=True)
class TrapGeometry:
    d: int
    q: float
    R0: float
    s: float = 0.0

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"longitudinal dimension must be 1, 2 or 3, got {self.d}")
        if not self.q > 0:
            raise ValueError(f"hardness exponent must be positive, got {self.q}")
        if not self.R0 > 0:
            raise ValueError("R0 must be positive")
        if self.d < 3 and not self.s > 0:
            raise ValueError("transverse half-width s must be positive when d < 3")

    @property
    def D(self) -> int:
        return 3 - self.d

    @property
    def hard_walls(self) -> bool:
        return math.isinf(self.q)


@dataclass(frozen=True)
class Species:
    """Scattering lengths (m), atomic mass (kg) and inelastic-loss parameter.

    ``gamma_loss`` carries the units of gamma1 (J m^3); the loss rate of the
    condensate is gamma_loss * eta / (2 hbar).
    """

    a11: float
    a22: float
    a12: float
    mass: float
    gamma_loss: float = 0.0

    def __post_init__(self):
        if min(self.a11, self.a22, self.a12) <= 0:
            raise ValueError("scattering lengths must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.gamma_loss < 0:
            raise ValueError("loss parameter must be nonnegative")


class Couplings(NamedTuple):
    g11: float
    g22: float
    g12: float
    g: float
    gamma1: float
    gamma2: float

    units = COUPLING_UNITS


def couplings(sp: Species) -> Couplings:
    """Contact couplings g_ij = 4 pi hbar^2 a_ij / m and their combinations.

    gamma1 = (g11 - g22)/2 and gamma2 = g - g12 with g = (g11 + g22)/2.  The
    length combinations are summed exactly (``math.fsum``) so degenerate
    ratios give an exact zero.
    """
    unit = 4 * math.pi * HBAR**2 / sp.mass
    g11, g22, g12 = unit * sp.a11, unit * sp.a22, unit * sp.a12
    gamma1 = unit * math.fsum([sp.a11, -sp.a22]) / 2
    gamma2 = unit * math.fsum([sp.a11, sp.a22, -2 * sp.a12]) / 2
    return Couplings(g11, g22, g12, (g11 + g22) / 2, gamma1, gamma2)


def with_loss_ratio(sp: Species, loss_ratio: float) -> Species:
    """Species whose loss parameter satisfies Gamma / (2 gamma1) = loss_ratio."""
    gamma1 = couplings(sp).gamma1
    return Species(sp.a11, sp.a22, sp.a12, sp.mass, gamma_loss=2 * abs(gamma1) * loss_ratio)


# -- critical numbers and eta -----------------------------------------------

class CriticalNumbers(NamedTuple):
    n_L: float  # n_c when d = 3
    n_T: float  # inf when d = 3

    @property
    def n_c(self) -> float:
        return self.n_L


def critical_numbers(tg: TrapGeometry, sp: Species) -> CriticalNumbers:
    """Atom numbers where scattering energy matches longitudinal/transverse kinetic energy."""
    n_L = (tg.R0 / sp.a11) * (tg.s / tg.R0) ** tg.D if tg.D else tg.R0 / sp.a11
    if tg.d == 3:
        return CriticalNumbers(n_L, math.inf)
    power = tg.d if tg.hard_walls else tg.d * (tg.q + 2) / tg.q
    return CriticalNumbers(n_L, (tg.s / sp.a11) * (tg.R0 / tg.s) ** power)


def scaling_exponent(d: int, q) -> Fraction | float:
    """Precision exponent xi = (d + 3q) / (2 (d + q)); exact for rational q."""
    if d not in (1, 2, 3):
        raise ValueError(f"d must be 1, 2 or 3, got {d}")
    if isinstance(q, float) and math.isinf(q):
        return Fraction(3, 2)
    if isinstance(q, float) and q.is_integer():
        q = int(q)
    if not q > 0:
        raise ValueError("q must be positive")
    if isinstance(q, (int, Fraction)):
        q = Fraction(q)
        return (d + 3 * q) / (2 * (d + q))
    return (d + 3 * q) / (2 * (d + q))


def _tf_moments(q: float, d: int) -> tuple[float, float]:
    # int_0^1 (1-u^q)^k u^{d-1} du for k = 1, 2
    if math.isinf(q):
        return 1 / d, 1 / d
    i1 = quad(lambda u: (1 - u**q) * u ** (d - 1), 0, 1, epsabs=1e-13, epsrel=1e-12)[0]
    i2 = quad(lambda u: (1 - u**q) ** 2 * u ** (d - 1), 0, 1, epsabs=1e-13, epsrel=1e-12)[0]
    return i1, i2


def _tf_prefactor(q: float, d: int) -> float:
    # R = R0 (C n / n_L)^{1/(q+d)}
    D = 3 - d
    i1, _ = _tf_moments(q, d)
    return 8 * math.pi * (2 * math.sqrt(math.pi)) ** (-D) / (_SPHERE[d] * i1)


@lru_cache(maxsize=None)
def alpha(q: float, d: int) -> float:
    """Geometric factor alpha_{q,d} of the Thomas-Fermi eta law, by quadrature."""
    D = 3 - d
    i1, i2 = _tf_moments(q, d)
    exponent = 0.0 if math.isinf(q) else d / (q + d)
    return (2 * math.sqrt(math.pi)) ** (-D) * i2 / (_SPHERE[d] * i1**2) * _tf_prefactor(q, d) ** (-exponent)


def tf_radius(tg: TrapGeometry, sp: Species, n: float) -> float:
    """Longitudinal Thomas-Fermi radius."""
    if tg.hard_walls:
        return tg.R0
    n_L = critical_numbers(tg, sp).n_L
    return tg.R0 * (_tf_prefactor(tg.q, tg.d) * n / n_L) ** (1 / (tg.q + tg.d))


def chemical_potential(tg: TrapGeometry, sp: Species, n: float) -> float:
    """Longitudinal chemical potential lambda = k R^q / 2 of the Thomas-Fermi profile (J)."""
    if tg.hard_walls:
        raise ValueError("the chemical potential is not defined by the profile edge for hard walls")
    k = HBAR**2 / (sp.mass * tg.R0 ** (tg.q + 2))
    return 0.5 * k * tf_radius(tg, sp, n) ** tg.q


@lru_cache(maxsize=None)
def bare_ground_state(q: float, d: int, points: int = 4000) -> tuple[float, float]:
    """(int |f|^4, energy) of the bare longitudinal ground state in units of R0.

    Solves -1/2 Laplacian + r^q / 2 for a radially symmetric function in d
    dimensions (hbar = m = k = 1, so R0 = 1) with a finite-volume scheme on
    cells r_i = (i + 1/2) h.  Hard walls (q = inf) put a node at r = 1.
    """
    r_max = 1.0 if math.isinf(q) else max(6.0, 3.0 * 40 ** (1 / q))
    h = r_max / points
    r = (np.arange(points) + 0.5) * h
    face = (np.arange(1, points + 1) * h) ** (d - 1)  # area factor at r_{i+1/2}
    weight = r ** (d - 1) * h
    pot = np.zeros(points) if math.isinf(q) else 0.5 * r**q
    diag = 0.5 * face / h + weight * pot
    diag[1:] += 0.5 * face[:-1] / h
    diag[-1] += 0.5 * face[-1] / h  # Dirichlet ghost node at r_max
    off = -0.5 * face[:-1] / h
    scale = 1 / np.sqrt(weight)
    energies, vecs = eigh_tridiagonal(diag * scale**2, off * scale[:-1] * scale[1:],
                                      select="i", select_range=(0, 0))
    u = vecs[:, 0] * scale
    norm = _SPHERE[d] * np.sum(weight * u**2)
    u /= math.sqrt(norm)
    return float(_SPHERE[d] * np.sum(weight * u**4)), float(energies[0])


def _eta_bare(tg: TrapGeometry) -> float:
    long_eta, _ = bare_ground_state(tg.q, tg.d)
    return long_eta / tg.R0**tg.d * (2 * math.sqrt(math.pi) * tg.s) ** (-tg.D)


def _eta_tf(tg: TrapGeometry, sp: Species, n: float) -> float:
    n_L = critical_numbers(tg, sp).n_L
    exponent = 0.0 if tg.hard_walls else tg.d / (tg.d + tg.q)
    return alpha(tg.q, tg.d) / (tg.s**tg.D * tg.R0**tg.d) * (n_L / n) ** exponent


def crossover_number(tg: TrapGeometry, sp: Species) -> float:
    """Atom number where the Thomas-Fermi eta meets the bare-trap eta.

    Of order n_L; for hard walls (where both laws are flat) it is n_L itself.
    """
    n_L = critical_numbers(tg, sp).n_L
    if tg.hard_walls:
        return n_L
    ratio = _eta_tf(tg, sp, n_L) / _eta_bare(tg)
    return n_L * ratio ** ((tg.d + tg.q) / tg.d)


class EtaValue(NamedTuple):
    value: float  # m^-3
    regime: str  # "kinetic" or "thomas-fermi"


def eta(tg: TrapGeometry, sp: Species, n: float) -> EtaValue:
    """Inverse effective volume int |psi_n|^4 of the condensate mode."""
    if n < 1:
        raise ValueError("need at least one atom")
    n_T = critical_numbers(tg, sp).n_T
    if n >= n_T:
        raise OutOfModelError(
            f"n = {n:g} reaches the density-limited regime (n_T = {n_T:.3g}); "
            "three-body losses dominate there")
    if n < crossover_number(tg, sp):
        return EtaValue(_eta_bare(tg), "kinetic")
    return EtaValue(_eta_tf(tg, sp, n), "thomas-fermi")


def peak_density_estimate(tg: TrapGeometry, sp: Species, n: float) -> float:
    """Order-of-magnitude density n / (s^D R^d) with R ~ R0 (n/n_L)^{1/(q+d)} (m^-3)."""
    n_L = critical_numbers(tg, sp).n_L
    radius = tg.R0 if tg.hard_walls else tg.R0 * (n / n_L) ** (1 / (tg.q + tg.d))
    return n / (tg.s**tg.D * radius**tg.d)


def single_particle_energy(tg: TrapGeometry, sp: Species) -> float:
    """Kinetic plus trap energy of the bare mode (J)."""
    _, e_long = bare_ground_state(tg.q, tg.d)
    energy = e_long * HBAR**2 / (sp.mass * tg.R0**2)
    if tg.D:
        omega0 = HBAR / (2 * sp.mass * tg.s**2)
        energy += tg.D * HBAR * omega0 / 2
    return energy


def bec_hamiltonian(tg: TrapGeometry, sp: Species, n: int,
                    exact_n_minus_one: bool = True) -> CollectiveHamiltonian:
    """Collective Hamiltonian (rad/s) of the two-mode condensate at atom number n.

    The linear term gamma1 eta (n-1) J_z is written as a * n J_z, so
    a = gamma1 eta (n-1) / (n hbar); with ``exact_n_minus_one=False`` the
    large-n replacement n - 1 -> n is used.  ``c0`` holds the state-independent
    part n E0 + (g + g12) eta n^2/4 - g eta n/2, which only adds a global phase.
    """
    cp = couplings(sp)
    e = eta(tg, sp, n).value
    pairs = (n - 1) / n if exact_n_minus_one else 1.0
    e0 = single_particle_energy(tg, sp)
    h0 = n * e0 + 0.25 * (cp.g + cp.g12) * e * n**2 - 0.5 * cp.g * e * n
    return CollectiveHamiltonian(c0=h0 / HBAR, a=cp.gamma1 * e * pairs / HBAR, b=cp.gamma2 * e / HBAR)


# -- budgets ----------------------------------------------------------------

class TimeBudget(NamedTuple):
    loss_ratio: float  # Gamma / (2 gamma1)
    max_phase: float  # signal phase reachable while the loss phase stays below 1


def time_budget(sp: Species, gamma1: float, n: float = 1) -> TimeBudget:
    """Loss-limited signal-phase budget.

    Inelastic loss accumulates phase Gamma eta t / 2 while the signal
    accumulates gamma1 eta n t; keeping the former below one radian caps the
    latter at n (2 gamma1 / Gamma).
    """
    if gamma1 == 0:
        raise ValueError("gamma1 must be nonzero")
    ratio = sp.gamma_loss / (2 * abs(gamma1))
    return TimeBudget(ratio, math.inf if ratio == 0 else n / ratio)


class NumberCheck(NamedTuple):
    passed: bool
    advantage_obviated: bool
    phase_limit: float


def number_constraint(n: float, delta_n: float, accumulated_phase: float,
                      margin: float = 0.1) -> NumberCheck:
    """Is the nonlinear phase small enough for an atom-number error ``delta_n``?

    Passes when accumulated_phase < margin * n / delta_n ("much smaller" fixed
    at a factor ten).  Also flags delta_n > sqrt(n), where the number
    requirement is at least as strict as the phase-dispersion limit of a J_z^2
    protocol.
    """
    if delta_n < 0:
        raise ValueError("delta_n must be nonnegative")
    limit = math.inf if delta_n == 0 else margin * n / delta_n
    return NumberCheck(accumulated_phase < limit, delta_n > math.sqrt(n), limit)


# -- presets ----------------------------------------------------------------

def _rb87() -> tuple[TrapGeometry, Species]:
    a0 = constants.physical_constants["Bohr radius"][0]
    # round a0 to 40 significant bits so 97, 100 and 103 multiples are exact
    mant, exp = math.frexp(a0)
    unit = math.ldexp(round(math.ldexp(mant, 40)), exp - 40)
    mass = 86.909180527 * constants.physical_constants["atomic mass constant"][0]
    sp = Species(a11=103 * unit, a22=97 * unit, a12=100 * unit, mass=mass)
    return TrapGeometry(d=3, q=2, R0=10e-6, s=100e-9), with_loss_ratio(sp, 1 / 26)


_PRESETS = {"rb87": _rb87}


def preset(name: str) -> tuple[TrapGeometry, Species]:
    """Built-in geometry and species; ``"rb87"`` has a22 : a12 : a11 = 0.97 : 1 : 1.03."""
    try:
        return _PRESETS[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(_PRESETS)}") from None


_CONFIG_KEYS = {"d", "q", "R0_m", "s_m", "a11_m", "a22_m", "a12_m", "mass_kg", "loss_ratio"}


def load_config(path, base: str | None = None) -> tuple[TrapGeometry, Species]:
    """Read ``key = value`` lines (``#`` comments) into geometry and species.

    Keys: d, q, R0_m, s_m, a11_m, a22_m, a12_m, mass_kg, loss_ratio.  Missing
    keys fall back to the preset ``base`` when given.  ``q = inf`` selects hard
    walls.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_string("[trap]\n" + Path(path).read_text())
    values = dict(parser["trap"])
    unknown = set(values) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if base is not None:
        tg0, sp0 = preset(base)
        defaults = {"d": tg0.d, "q": tg0.q, "R0_m": tg0.R0, "s_m": tg0.s, "a11_m": sp0.a11,
                    "a22_m": sp0.a22, "a12_m": sp0.a12, "mass_kg": sp0.mass,
                    "loss_ratio": sp0.gamma_loss / (2 * abs(couplings(sp0).gamma1))}
    else:
        defaults = {"loss_ratio": 0.0}
    merged = {**defaults, **values}
    missing = _CONFIG_KEYS - set(merged)
    if missing:
        raise ValueError(f"missing config keys: {sorted(missing)}")
    try:
        q = float(merged["q"])
        tg = TrapGeometry(d=int(merged["d"]), q=q, R0=float(merged["R0_m"]), s=float(merged["s_m"]))
        sp = Species(float(merged["a11_m"]), float(merged["a22_m"]), float(merged["a12_m"]),
                     float(merged["mass_kg"]))
        ratio = float(merged["loss_ratio"])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad config value: {exc}") from exc
    return tg, (with_loss_ratio(sp, ratio) if ratio else sp)
