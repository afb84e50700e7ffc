"""Metrology protocols: analytic precision, measurement sampling and estimation.

Three protocols are covered, all estimating a coupling ``gamma`` that
multiplies a dimensionless Hamiltonian for a time ``t``:

``HALF_CAT_JZ2``
    J_z^2 coupling on the half-cat state, parity readout on the first half.
``PRODUCT_JZ2``
    J_z^2 coupling on a product state tilted by ``beta``, J_y readout.
``PRODUCT_NJZ``
    n J_z coupling on the equatorial product state, J_x (or any other
    equatorial component) readout.  No entanglement is ever generated.

The precision figure is the units-corrected deviation
``<(gamma_est / (d<gamma_est>/dgamma) - gamma)^2>^{1/2}``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import dicke
from .dicke import BlochProduct, CollectiveHamiltonian

__all__ = [
    "EstimationResult",
    "MeasurementRecords",
    "OperatingPointError",
    "Protocol",
    "ProtocolSpec",
    "RECORD_FIELDS",
    "analytic_delta_gamma",
    "default_halfwidth",
    "estimate_gamma",
    "evaluate_eq1",
    "halfcat_precision",
    "halfcat_signal",
    "jz2_product_precision",
    "jz2_readout",
    "jz2_readout_distribution",
    "njz_moments",
    "njz_precision",
    "sample_outcomes",
    "stream",
]

RECORD_FIELDS = ("protocol", "n", "t", "gamma_true", "nu", "outcome", "detected")


class OperatingPointError(ValueError):
    """The operating point cannot yield an informative estimate."""


class Protocol(str, Enum):
    HALF_CAT_JZ2 = "halfcat"
    PRODUCT_JZ2 = "jz2"
    PRODUCT_NJZ = "njz"


@dataclass(frozen=True)
class ProtocolSpec:
    """One metrology experiment.

    ``nu`` is the number of trials pooled into a single estimate.  ``beta`` is
    only used by ``PRODUCT_JZ2`` and ``readout_phi`` (the azimuth of the
    measured equatorial component) only by ``PRODUCT_NJZ``.
    """

    kind: Protocol
    n: int
    t: float
    gamma_true: float
    nu: int = 1
    beta: float = math.pi / 4
    readout_phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Protocol(self.kind))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError(f"nu must be a positive integer, got {self.nu}")
        if not self.t > 0:
            raise ValueError(f"interrogation time must be positive, got {self.t}")
        if not np.isfinite(self.gamma_true):
            raise ValueError("gamma_true must be finite")
        if self.kind is Protocol.HALF_CAT_JZ2 and (self.n < 2 or self.n % 2):
            raise ValueError(f"half-cat protocol needs an even n >= 2, got {self.n}")
        if self.kind is Protocol.PRODUCT_JZ2 and not 0 < self.beta <= math.pi / 2:
            raise ValueError(f"beta must lie in (0, pi/2], got {self.beta}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nu", int(self.nu))

    @property
    def phase_rate(self) -> float:
        """d(fringe phase)/d(gamma) for the signal being inverted."""
        if self.kind is Protocol.PRODUCT_NJZ:
            return self.t * self.n
        if self.kind is Protocol.HALF_CAT_JZ2:
            return self.t * self.n**2 / 4
        # mean-field precession rate of the tilted state about z
        return self.t * self.n * math.cos(self.beta)

    @property
    def fringe_phase(self) -> float:
        """Phase argument of the cosine fringe at ``gamma_true``."""
        if self.kind is Protocol.PRODUCT_NJZ:
            return self.gamma_true * self.phase_rate - self.readout_phi
        return self.gamma_true * self.phase_rate


# -- analytic formulas ------------------------------------------------------

def halfcat_precision(n: int, t: float, nu: int = 1) -> float:
    if n < 2 or n % 2:
        raise ValueError(f"half-cat protocol needs an even n >= 2, got {n}")
    return 4 / (t * n**2 * math.sqrt(nu))


def halfcat_signal(n: int, t: float, gamma: float) -> float:
    """<X...X> on the first half after J_z^2 evolution of the half-cat state.

    The state is a two-branch superposition of |0...0>|0...0> (m = n/2) and
    |1...1>|0...0> (m = 0); under J_z^2 only their relative phase
    gamma t n^2/4 matters, and the parity reads out its cosine.
    """
    if n < 2 or n % 2:
        raise ValueError(f"half-cat protocol needs an even n >= 2, got {n}")
    branch_m = np.array([n / 2, 0.0])
    branches = np.exp(-1j * gamma * t * branch_m**2) / math.sqrt(2)
    # parity on the first half swaps the two branches
    return float((np.conj(branches[0]) * branches[1] + np.conj(branches[1]) * branches[0]).real)


def njz_moments(n: int, t: float, gamma: float) -> tuple[float, float]:
    """(<J_x>, Var J_x) after n J_z evolution of the equatorial product state."""
    phase = gamma * t * n
    return n / 2 * math.cos(phase), n / 4 * math.sin(phase) ** 2


def njz_precision(n: int, t: float, nu: int = 1) -> float:
    return 1 / (t * n**1.5 * math.sqrt(nu))


def jz2_readout(n: int, t: float, gamma: float, beta: float) -> tuple[float, float, float]:
    """Exact (<J_y>, Var J_y, d<J_y>/dgamma) for the product-state J_z^2 protocol.

    The gamma derivative is taken inside the amplitude sum: each amplitude
    carries e^{-i gamma t m^2}, so d/dgamma multiplies it by -i t m^2.
    """
    state = dicke.evolve(dicke.embed_product(BlochProduct(n, beta, 0.0)),
                         CollectiveHamiltonian(b=gamma), t)
    psi = state.amps
    jy_psi = dicke.apply_operator(n, "Jy", psi)
    mean = float(np.vdot(psi, jy_psi).real)
    var = max(float(np.vdot(jy_psi, jy_psi).real) - mean**2, 0.0)
    dpsi = -1j * t * state.m**2 * psi
    dmean = 2 * float(np.vdot(dpsi, jy_psi).real)
    return mean, var, dmean


def jz2_product_precision(n: int, t: float, gamma: float, beta: float, nu: int = 1) -> float:
    """Error-propagation precision Delta J_y / |d<J_y>/dgamma| / sqrt(nu)."""
    if not 0 < beta <= math.pi / 2:
        raise ValueError(f"beta must lie in (0, pi/2], got {beta}")
    _, var, dmean = jz2_readout(n, t, gamma, beta)
    if abs(dmean) < 1e-12 * t * n**2:
        raise OperatingPointError(f"<J_y> is insensitive to gamma at n={n}, beta={beta}")
    return math.sqrt(var) / abs(dmean) / math.sqrt(nu)


def analytic_delta_gamma(spec: ProtocolSpec) -> float:
    if spec.kind is Protocol.PRODUCT_NJZ:
        return njz_precision(spec.n, spec.t, spec.nu)
    if spec.kind is Protocol.HALF_CAT_JZ2:
        return halfcat_precision(spec.n, spec.t, spec.nu)
    return jz2_product_precision(spec.n, spec.t, spec.gamma_true, spec.beta, spec.nu)


# -- sampling ---------------------------------------------------------------

@dataclass
class MeasurementRecords:
    """Per-trial readouts of one estimate.

    ``outcome`` is J_x (or J_phi), the first-half parity, or J_y, depending on
    the protocol; ``detected`` is the number of particles counted in that
    trial (equal to n unless particles were lost or the number fluctuated).
    """

    spec: ProtocolSpec
    outcomes: np.ndarray
    detected: np.ndarray

    def rows(self):
        s = self.spec
        for outcome, det in zip(self.outcomes, self.detected):
            yield (s.kind.value, s.n, s.t, s.gamma_true, s.nu, float(outcome), int(det))

    def to_csv(self, fh=None) -> str:
        """Write the records as CSV; returns the text when ``fh`` is None."""
        sink = fh if fh is not None else io.StringIO()
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        writer.writerows(self.rows())
        return sink.getvalue() if fh is None else ""


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (n, grid point, repeat, ...) cell."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def jz2_readout_distribution(n: int, t: float, gamma: float, beta: float) -> np.ndarray:
    """Distribution of J_y outcomes, indexed like ``m_values(n)``.

    The J_y eigenbasis is reached with e^{-i pi/2 J_x}, after which a J_z
    measurement reads out J_y.
    """
    state = dicke.evolve(dicke.embed_product(BlochProduct(n, beta, 0.0)),
                         CollectiveHamiltonian(b=gamma), t)
    return dicke.rotate_x(state, math.pi / 2).probabilities


def njz_trials(rng, n_atoms, phase, contrast, nu) -> np.ndarray:
    """J_phi outcomes: half the +1/-1 imbalance of independent equatorial spins."""
    p_plus = 0.5 * (1 + contrast * np.cos(phase))
    plus = rng.binomial(n_atoms, np.clip(p_plus, 0.0, 1.0), size=nu)
    return plus - np.asarray(n_atoms) / 2


def sample_outcomes(spec: ProtocolSpec, seed=None) -> MeasurementRecords:
    """Draw ``spec.nu`` noiseless readouts; deterministic for a given seed."""
    rng = _as_rng(seed)
    n, nu = spec.n, spec.nu
    detected = np.full(nu, n)
    if spec.kind is Protocol.PRODUCT_NJZ:
        outcomes = njz_trials(rng, n, spec.fringe_phase, 1.0, nu)
    elif spec.kind is Protocol.HALF_CAT_JZ2:
        p_plus = 0.5 * (1 + halfcat_signal(n, spec.t, spec.gamma_true))
        outcomes = np.where(rng.random(nu) < p_plus, 1.0, -1.0)
    else:
        probs = jz2_readout_distribution(n, spec.t, spec.gamma_true, spec.beta)
        outcomes = rng.choice(dicke.m_values(n), size=nu, p=probs)
    return MeasurementRecords(spec, np.asarray(outcomes, dtype=float), detected)


# -- estimation -------------------------------------------------------------

def _check_branch(spec: ProtocolSpec):
    phase = spec.fringe_phase
    if not 0 < phase < math.pi:
        raise OperatingPointError(
            f"fringe phase {phase:.4g} rad lies outside (0, pi); arccos inversion is ambiguous")


def _jz2_bracket(spec: ProtocolSpec) -> tuple[float, float]:
    # a quarter fringe either side keeps <J_y>(gamma) monotonic
    w = math.pi / (4 * spec.phase_rate)
    return spec.gamma_true - w, spec.gamma_true + w


def estimate_gamma(spec: ProtocolSpec, outcomes) -> float:
    """Invert the mean readout of one batch of trials into an estimate of gamma.

    ``outcomes`` is a :class:`MeasurementRecords` or a bare array of readouts
    (then every trial is assumed to have detected ``spec.n`` particles).
    Sample means outside the fringe range are clamped, never rejected.
    """
    if isinstance(outcomes, MeasurementRecords):
        values, detected = outcomes.outcomes, outcomes.detected
    else:
        values = np.asarray(outcomes, dtype=float)
        detected = np.full(values.shape, spec.n)
    n, t = spec.n, spec.t
    if spec.kind is Protocol.PRODUCT_NJZ:
        _check_branch(spec)
        # contrast normalized by the particles actually counted
        contrast = 2 * values.sum() / max(detected.sum(), 1)
        phase = spec.readout_phi + math.acos(min(1.0, max(-1.0, contrast)))
        return phase / (t * n)
    if spec.kind is Protocol.HALF_CAT_JZ2:
        _check_branch(spec)
        parity = min(1.0, max(-1.0, float(values.mean())))
        return math.acos(parity) * 4 / (t * n**2)
    target = values.mean() * n / detected.mean()
    lo, hi = _jz2_bracket(spec)

    def residual(g):
        return jz2_readout(n, t, g, spec.beta)[0] - target

    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo * f_hi > 0:
        return lo if abs(f_lo) < abs(f_hi) else hi
    return brentq(residual, lo, hi, xtol=1e-15 * max(abs(lo), abs(hi)), rtol=1e-13)


@dataclass
class EstimationResult:
    gamma_est_samples: np.ndarray
    slope: float
    delta_gamma: float
    analytic_delta_gamma: Optional[float]
    stderr: float = 0.0
    halfwidth: float = 0.0
    bias: float = 0.0
    spec: Optional[ProtocolSpec] = field(default=None, repr=False)

    @property
    def rms_deviation(self) -> float:
        """Plain RMS of gamma_est - gamma_true, without the slope correction."""
        dev = self.gamma_est_samples - self.spec.gamma_true
        return float(np.sqrt(np.mean(dev**2)))

    def to_dict(self) -> dict:
        s = self.spec
        out = {
            "protocol": s.kind.value if s else None,
            "n": s.n if s else None,
            "t": s.t if s else None,
            "gamma_true": s.gamma_true if s else None,
            "nu": s.nu if s else None,
            "repeats": int(len(self.gamma_est_samples)),
            "gamma_est_mean": float(np.mean(self.gamma_est_samples)),
            "slope": self.slope,
            "delta_gamma": self.delta_gamma,
            "stderr": self.stderr,
            "analytic_delta_gamma": self.analytic_delta_gamma,
            "halfwidth": self.halfwidth,
            "bias": self.bias,
        }
        if s is not None and s.kind is Protocol.PRODUCT_JZ2:
            out["beta"] = s.beta
        return out


def default_halfwidth(spec: ProtocolSpec, analytic: float) -> float:
    """Half-width of the gamma grid used for the finite-difference slope.

    ``max(0.1/rate, 2*analytic)``, then shrunk so that neither grid point
    leaves the principal branch of an arccos fringe.
    """
    rate = spec.phase_rate
    h = max(0.1 / rate, 2 * analytic)
    if spec.kind is not Protocol.PRODUCT_JZ2:
        phase = spec.fringe_phase
        h = min(h, 0.5 * min(phase, math.pi - phase) / rate)
    return h


def evaluate_eq1(spec: ProtocolSpec, repeats: int = 200, gamma_grid_halfwidth=None,
                 *, seed: int = 0, noise=None) -> EstimationResult:
    """Monte Carlo units-corrected deviation of the protocol's estimator.

    Three batches of ``repeats`` independent estimates are drawn at
    ``gamma_true`` and ``gamma_true +- h``.  The outer batches give the slope
    d<gamma_est>/dgamma by central difference; the inner batch gives the
    deviation, evaluated in the local affine model of <gamma_est>, i.e.
    ``<((gamma_est - <gamma_est>) / slope)^2>^{1/2}``.  This equals the
    units-corrected deviation whenever <gamma_est> = slope * gamma, without
    letting Monte Carlo error in the slope masquerade as estimator bias.

    Every (n, grid point, repeat) cell draws from its own stream derived from
    ``seed``; noise draws (``noise``, a :class:`spinmetro.noise.NoiseModel`)
    use a separate stream so noisy and noiseless runs share measurement
    randomness.
    """
    if repeats < 2:
        raise ValueError("need at least two repeats")
    if spec.kind is not Protocol.PRODUCT_JZ2:
        _check_branch(spec)
    if noise is not None and not noise.is_trivial:
        from .noise import apply_noise

        def model(s):
            return apply_noise(s, noise)

        analytic = model(spec).analytic_delta_gamma()
    else:
        model = None
        analytic = analytic_delta_gamma(spec)
    h = gamma_grid_halfwidth if gamma_grid_halfwidth is not None else default_halfwidth(spec, analytic)
    if not h > 0:
        raise ValueError("gamma grid half-width must be positive")

    estimates = np.empty((3, repeats))
    for gi, offset in enumerate((-h, 0.0, h)):
        s = replace(spec, gamma_true=spec.gamma_true + offset)
        sampler = model(s) if model is not None else None
        for r in range(repeats):
            rng = stream(seed, spec.n, gi, r, 0)
            if sampler is None:
                records = sample_outcomes(s, rng)
            else:
                records = sampler.sample(rng, stream(seed, spec.n, gi, r, 1))
            estimates[gi, r] = estimate_gamma(s, records)

    lo, mid, hi = estimates
    slope = (hi.mean() - lo.mean()) / (2 * h)
    if not abs(slope) > 1e-3:
        raise OperatingPointError(f"estimator slope {slope:.3g} is uninformative at n={spec.n}")
    slope_se = math.sqrt(lo.var(ddof=1) / repeats + hi.var(ddof=1) / repeats) / (2 * h)

    dev = (mid - mid.mean()) / slope
    sq = dev**2
    delta = math.sqrt(sq.mean())
    se_stat = sq.std(ddof=1) / math.sqrt(repeats) / (2 * delta) if delta > 0 else 0.0
    stderr = math.hypot(se_stat, delta * slope_se / abs(slope))
    return EstimationResult(
        gamma_est_samples=mid,
        slope=float(slope),
        delta_gamma=delta,
        analytic_delta_gamma=analytic,
        stderr=stderr,
        halfwidth=h,
        bias=float(mid.mean() / slope - spec.gamma_true),
        spec=spec,
    )
