"""Permutation-symmetric states of n two-level systems in the Dicke basis.

A state of n qubits that is symmetric under exchange lives in the
(n + 1)-dimensional subspace spanned by the J_z eigenstates |m>, with
m = -n/2, ..., n/2.  Amplitudes are stored in ascending order of m, so
index i corresponds to m = i - n/2.

Conventions
-----------
J_z|0> = +|0>/2 for a single qubit, so the all-|0> product state sits on
m = +n/2 (the last entry) and a level with k qubits flipped to |1> has
m = n/2 - k.  Rotations are e^{-i angle J_k}.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.sparse import diags
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln, xlogy

__all__ = [
    "BlochProduct",
    "CollectiveHamiltonian",
    "DickeState",
    "OBSERVABLES",
    "apply_operator",
    "bloch_length",
    "embed_product",
    "equatorial_moments",
    "evolve",
    "expectation",
    "ladder_coefficients",
    "m_values",
    "reduced_bloch",
    "rotate_x",
    "rotate_y",
    "rotate_z",
    "variance",
    "wigner_small_d",
]

OBSERVABLES = ("Jx", "Jy", "Jz", "Jz2", "Jx2", "Jy2")

# above this size the dense eigenbasis of J_x is not cached
_SPECTRAL_MAX_N = 2048


def m_values(n: int) -> np.ndarray:
    """J_z eigenvalues -n/2, ..., n/2 in storage order."""
    return np.arange(n + 1) - n / 2


def ladder_coefficients(n: int) -> np.ndarray:
    """<m+1|J_+|m> = sqrt(j(j+1) - m(m+1)) for m = -j, ..., j-1."""
    j = n / 2
    m = m_values(n)[:-1]
    return np.sqrt((j - m) * (j + m + 1))


@dataclass(frozen=True)
class DickeState:
    """Pure symmetric state of ``n`` qubits.

    Parameters
    ----------
    n : int
        Number of qubits (bosons in two modes).
    amps : array_like
        ``n + 1`` complex amplitudes ordered by m = -n/2, ..., n/2.
    """

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"particle count must be a positive integer, got {self.n}")
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} amplitudes, got shape {amps.shape}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, n: int, amps, normalize: bool = True) -> "DickeState":
        amps = np.asarray(amps, dtype=complex)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def basis(cls, n: int, m: float) -> "DickeState":
        """The J_z eigenstate |j = n/2, m>."""
        index = m + n / 2
        if index != int(index) or not 0 <= index <= n:
            raise ValueError(f"m = {m} is not a level of n = {n}")
        amps = np.zeros(n + 1, dtype=complex)
        amps[int(index)] = 1.0
        return cls(n, amps)

    @property
    def m(self) -> np.ndarray:
        return m_values(self.n)

    @property
    def probabilities(self) -> np.ndarray:
        """Distribution of J_z outcomes."""
        p = np.abs(self.amps) ** 2
        return p / p.sum()

    def overlap(self, other: "DickeState") -> complex:
        """<self|other>."""
        if other.n != self.n:
            raise ValueError("states have different particle numbers")
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "DickeState") -> float:
        """|<self|other>|, i.e. equality up to global phase when it is 1."""
        return abs(self.overlap(other))


@dataclass(frozen=True)
class BlochProduct:
    """[cos(beta/2)|0> + e^{i phi} sin(beta/2)|1>]^{(x) n}."""

    n: int
    beta: float
    phi: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"particle count must be a positive integer, got {self.n}")
        if not 0.0 <= self.beta <= np.pi:
            raise ValueError(f"beta must lie in [0, pi], got {self.beta}")
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2 * np.pi)))


@dataclass(frozen=True)
class CollectiveHamiltonian:
    """c0 + a n J_z + b J_z^2, all coefficients in radians per unit time."""

    c0: float = 0.0
    a: float = 0.0
    b: float = 0.0

    def eigenphases(self, n: int, t: float) -> np.ndarray:
        m = m_values(n)
        return -t * (self.c0 + self.a * n * m + self.b * m * m)


def embed_product(p: BlochProduct) -> DickeState:
    n = p.n
    k = n - np.arange(n + 1)  # qubits flipped to |1> at each level
    c, s = np.cos(p.beta / 2), np.sin(p.beta / 2)
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    # xlogy keeps 0 * log(0) = 0 at the poles
    log_mag = 0.5 * log_binom + xlogy(n - k, c) + xlogy(k, s)
    amps = np.exp(log_mag) * np.exp(1j * k * p.phi)
    return DickeState.from_amplitudes(n, amps)


def evolve(s: DickeState, h: CollectiveHamiltonian, t: float) -> DickeState:
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    phases = h.eigenphases(s.n, t)
    return DickeState(s.n, s.amps * np.exp(1j * phases))


def _apply_jplus(n: int, psi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi)
    out[1:] = ladder_coefficients(n) * psi[:-1]
    return out


def _apply_jminus(n: int, psi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi)
    out[:-1] = ladder_coefficients(n) * psi[1:]
    return out


def apply_operator(n: int, op: str, psi: np.ndarray) -> np.ndarray:
    """Act with J_x, J_y or J_z on a raw amplitude vector."""
    if op == "Jz":
        return m_values(n) * psi
    up, down = _apply_jplus(n, psi), _apply_jminus(n, psi)
    if op == "Jx":
        return 0.5 * (up + down)
    if op == "Jy":
        return -0.5j * (up - down)
    raise ValueError(f"unknown operator {op!r}")


def _real(value: complex, what: str) -> float:
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > 1e-8 * scale:
        raise ValueError(f"<{what}> has imaginary part {value.imag!r}; state is corrupted")
    return float(value.real)


def expectation(s: DickeState, obs: str) -> float:
    """Expectation of a collective observable.

    ``obs`` is one of ``"Jx", "Jy", "Jz", "Jz2", "Jx2", "Jy2"``.  Off-diagonal
    operators are applied through the tridiagonal ladder elements.
    """
    psi = s.amps
    if obs == "Jz2":
        return float(np.sum(np.abs(psi) ** 2 * m_values(s.n) ** 2))
    if obs in ("Jx2", "Jy2"):
        phi = apply_operator(s.n, obs[:2], psi)
        return float(np.vdot(phi, phi).real)
    if obs in ("Jx", "Jy", "Jz"):
        return _real(np.vdot(psi, apply_operator(s.n, obs, psi)), obs)
    raise ValueError(f"unknown observable {obs!r}; expected one of {OBSERVABLES}")


def variance(s: DickeState, obs: str) -> float:
    if obs not in ("Jx", "Jy", "Jz"):
        raise ValueError(f"variance is defined for Jx, Jy, Jz, got {obs!r}")
    mean = expectation(s, obs)
    var = expectation(s, obs + "2") - mean**2
    if var < -1e-10 * max(1.0, mean**2):
        raise ValueError(f"negative variance {var!r} for {obs}; state is corrupted")
    return max(var, 0.0)


def equatorial_moments(s: DickeState, phi: float) -> tuple[float, float]:
    """Mean and variance of J_phi = cos(phi) J_x + sin(phi) J_y."""
    psi = s.amps
    op = np.cos(phi) * apply_operator(s.n, "Jx", psi) + np.sin(phi) * apply_operator(s.n, "Jy", psi)
    mean = _real(np.vdot(psi, op), "J_phi")
    second = float(np.vdot(op, op).real)
    return mean, max(second - mean**2, 0.0)


def reduced_bloch(s: DickeState) -> tuple[float, float, float]:
    """Bloch vector of the single-qubit reduced state.

    For a symmetric state every qubit has the same reduced state, with
    Bloch vector 2<J>/n; its purity is (1 + |b|^2)/2, so |b| = 1 exactly
    when the state is a product.
    """
    n = s.n
    return tuple(2 * expectation(s, k) / n for k in ("Jx", "Jy", "Jz"))


def bloch_length(s: DickeState) -> float:
    return float(np.linalg.norm(reduced_bloch(s)))


@lru_cache(maxsize=16)
def _jx_eigenbasis(n: int) -> tuple[np.ndarray, np.ndarray]:
    # J_x is real symmetric tridiagonal with eigenvalues -j..j, spacing 1
    offdiag = 0.5 * ladder_coefficients(n)
    _, vecs = eigh_tridiagonal(np.zeros(n + 1), offdiag)
    vecs.setflags(write=False)
    return m_values(n), vecs


def _rotate_x_vec(n: int, psi: np.ndarray, angle: float) -> np.ndarray:
    if n > _SPECTRAL_MAX_N:
        off = 0.5 * ladder_coefficients(n)
        jx = diags([off, off], [-1, 1], format="csr")
        return expm_multiply(-1j * angle * jx, psi)
    lam, vecs = _jx_eigenbasis(n)
    return vecs @ (np.exp(-1j * angle * lam) * (vecs.T @ psi))


def rotate_z(s: DickeState, angle: float) -> DickeState:
    return DickeState(s.n, s.amps * np.exp(-1j * angle * s.m))


def rotate_x(s: DickeState, angle: float) -> DickeState:
    """Apply e^{-i angle J_x}."""
    return DickeState.from_amplitudes(s.n, _rotate_x_vec(s.n, s.amps, angle))


def rotate_y(s: DickeState, angle: float) -> DickeState:
    """Apply e^{-i angle J_y}.

    Uses e^{-i a J_y} = e^{-i pi/2 J_z} e^{-i a J_x} e^{+i pi/2 J_z}, so the
    only decomposition needed is the (cached) eigenbasis of J_x.
    """
    quarter = np.exp(-0.5j * np.pi * s.m)
    psi = quarter * _rotate_x_vec(s.n, np.conj(quarter) * s.amps, angle)
    return DickeState.from_amplitudes(s.n, psi)


def wigner_small_d(n: int, angle: float) -> np.ndarray:
    """Matrix d^j_{m'm}(angle) = <m'|e^{-i angle J_y}|m>, j = n/2.

    Rows and columns follow the storage order m = -j, ..., j.
    """
    if n > _SPECTRAL_MAX_N:
        raise ValueError(f"dense rotation matrix requested for n = {n} > {_SPECTRAL_MAX_N}")
    lam, vecs = _jx_eigenbasis(n)
    quarter = np.exp(-0.5j * np.pi * m_values(n))
    d = (quarter[:, None] * vecs) @ (np.exp(-1j * angle * lam)[:, None] * (vecs.T * np.conj(quarter)))
    if np.max(np.abs(d.imag)) > 1e-9:
        raise ArithmeticError("rotation matrix acquired an imaginary part")
    return d.real
