"""Independent-particle noise for the product-state protocols.

Three parametric models, applied at the sampling level:

* dephasing: each particle's equatorial coherence decays by e^{-rate t};
* loss: every particle survives a trial with probability 1 - loss_fraction;
* number uncertainty: the true particle number of each estimate is
  round(Normal(n, number_sigma)) while the estimator keeps assuming n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import dicke
from .protocols import (
    MeasurementRecords,
    Protocol,
    ProtocolSpec,
    jz2_product_precision,
    jz2_readout_distribution,
    njz_trials,
)

__all__ = ["NoiseModel", "NoisyProtocol", "apply_noise", "rounded_normal_variance"]


@dataclass(frozen=True)
class NoiseModel:
    """Noise parameters.

    ``loss_at_full_rate`` selects how lost particles affect the phase: when
    True (default) the phase accumulates at the rate set by the pre-loss
    number and loss only thins the particles that reach the detector; when
    False the phase rate follows the surviving number.
    """

    dephasing_rate: float = 0.0
    loss_fraction: float = 0.0
    number_sigma: float = 0.0
    loss_at_full_rate: bool = True

    def __post_init__(self):
        if self.dephasing_rate < 0 or self.number_sigma < 0:
            raise ValueError("noise rates must be nonnegative")
        if not 0 <= self.loss_fraction < 1:
            raise ValueError(f"loss fraction must lie in [0, 1), got {self.loss_fraction}")

    @property
    def is_trivial(self) -> bool:
        return self.dephasing_rate == 0 and self.loss_fraction == 0 and self.number_sigma == 0


def rounded_normal_variance(mean: float, sigma: float) -> float:
    """Exact variance of round(Normal(mean, sigma))."""
    if sigma == 0:
        return 0.0
    k = np.arange(math.floor(mean - 12 * sigma) - 1, math.ceil(mean + 12 * sigma) + 2)
    p = norm.cdf((k + 0.5 - mean) / sigma) - norm.cdf((k - 0.5 - mean) / sigma)
    p /= p.sum()
    mu = np.sum(p * k)
    return float(np.sum(p * (k - mu) ** 2))


@dataclass(frozen=True)
class NoisyProtocol:
    spec: ProtocolSpec
    noise: NoiseModel

    def _draw_number(self, noise_rng) -> int:
        if self.noise.number_sigma == 0:
            return self.spec.n
        return max(0, int(round(noise_rng.normal(self.spec.n, self.noise.number_sigma))))

    def sample(self, rng, noise_rng=None) -> MeasurementRecords:
        """Draw one batch of ``spec.nu`` noisy readouts."""
        noise_rng = rng if noise_rng is None else noise_rng
        spec, nm = self.spec, self.noise
        nu = spec.nu
        n_true = self._draw_number(noise_rng)
        if spec.kind is Protocol.PRODUCT_JZ2:
            n_eff = max(n_true, 1)
            probs = jz2_readout_distribution(n_eff, spec.t, spec.gamma_true, spec.beta)
            outcomes = rng.choice(dicke.m_values(n_eff), size=nu, p=probs)
            return MeasurementRecords(spec, outcomes.astype(float), np.full(nu, n_eff))

        if nm.loss_fraction > 0:
            survivors = noise_rng.binomial(n_true, 1 - nm.loss_fraction, size=nu)
        else:
            survivors = np.full(nu, n_true)
        phase_number = n_true if nm.loss_at_full_rate else survivors
        phase = spec.gamma_true * spec.t * phase_number - spec.readout_phi
        contrast = math.exp(-nm.dephasing_rate * spec.t)
        outcomes = njz_trials(rng, survivors, phase, contrast, nu)
        return MeasurementRecords(spec, np.asarray(outcomes, dtype=float), survivors)

    def analytic_delta_gamma(self) -> float:
        """Error-propagation precision of the noisy readout (first order)."""
        spec, nm = self.spec, self.noise
        if spec.kind is Protocol.PRODUCT_JZ2:
            if nm.number_sigma == 0:
                return jz2_product_precision(spec.n, spec.t, spec.gamma_true, spec.beta, spec.nu)
            base = jz2_product_precision(spec.n, spec.t, spec.gamma_true, spec.beta, spec.nu)
            # J_z^2 phases scale like n: a number error dn shifts gamma by gamma*dn/n
            extra = spec.gamma_true * math.sqrt(rounded_normal_variance(spec.n, nm.number_sigma)) / spec.n
            return math.hypot(base, extra)
        n, t, nu = spec.n, spec.t, spec.nu
        keep = 1 - nm.loss_fraction
        theta = spec.fringe_phase
        c = math.exp(-nm.dephasing_rate * t)
        sin_theta = math.sin(theta)
        if sin_theta == 0:
            return math.inf
        dtheta = math.sqrt(1 - (c * math.cos(theta)) ** 2) / (c * abs(sin_theta) * math.sqrt(n * keep * nu))
        slope = 1.0
        var_theta = dtheta**2
        if not nm.loss_at_full_rate and nm.loss_fraction > 0:
            slope = keep
            var_theta += (spec.gamma_true * t) ** 2 * n * keep * nm.loss_fraction / nu
        var_gamma = var_theta / (t * n * slope) ** 2
        var_gamma += (spec.gamma_true / n) ** 2 * rounded_normal_variance(n, nm.number_sigma)
        return math.sqrt(var_gamma)


def apply_noise(spec: ProtocolSpec, nm: NoiseModel) -> NoisyProtocol:
    """Attach a noise model to a product-state protocol."""
    if spec.kind is Protocol.HALF_CAT_JZ2:
        raise ValueError("noise models apply to product-state protocols only")
    if spec.kind is Protocol.PRODUCT_JZ2 and (nm.dephasing_rate > 0 or nm.loss_fraction > 0):
        raise ValueError(
            "the J_z^2 protocol is simulated as a pure symmetric state; only number "
            "uncertainty is supported for it")
    return NoisyProtocol(spec, nm)
