import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from spinmetro import dicke, protocols
from spinmetro.dicke import BlochProduct, CollectiveHamiltonian
from spinmetro.protocols import (
    OperatingPointError,
    Protocol,
    ProtocolSpec,
    estimate_gamma,
    evaluate_eq1,
    halfcat_precision,
    halfcat_signal,
    jz2_product_precision,
    njz_moments,
    njz_precision,
    sample_outcomes,
)
from spinmetro.scaling import fit_exponent

NJZ, HALF, JZ2 = Protocol.PRODUCT_NJZ, Protocol.HALF_CAT_JZ2, Protocol.PRODUCT_JZ2


def mid_fringe(kind, n, t=1.0, nu=1, **kw):
    gamma = {NJZ: math.pi / (2 * t * n), HALF: 2 * math.pi / (t * n**2)}[kind]
    return ProtocolSpec(kind, n, t, gamma, nu, **kw)


# -- analytic formulas ------------------------------------------------------

@pytest.mark.parametrize("n,t,nu,expected", [(2, 1, 1, 1.0), (10, 1, 1, 0.04), (10, 2, 4, 0.01)])
def test_halfcat_precision(n, t, nu, expected):
    assert halfcat_precision(n, t, nu) == pytest.approx(expected, rel=1e-12)


def test_halfcat_precision_rejects_odd_n():
    with pytest.raises(ValueError):
        halfcat_precision(7, 1.0)
    with pytest.raises(ValueError):
        ProtocolSpec(HALF, 7, 1.0, 0.1)


@pytest.mark.parametrize("n,t,nu,expected", [(1, 1, 1, 1.0), (100, 1, 1, 1e-3), (100, 1, 100, 1e-4)])
def test_njz_precision(n, t, nu, expected):
    assert njz_precision(n, t, nu) == pytest.approx(expected, rel=1e-12)


def test_halfcat_signal_examples():
    assert halfcat_signal(10, 1.0, 0.0) == pytest.approx(1.0)
    n, t = 8, 0.5
    assert halfcat_signal(n, t, 4 * math.pi / (t * n**2)) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("gt", [0.0, 0.13, 0.9, 2.4])
def test_halfcat_signal_four_qubit_oracle(gt):
    n = 4
    full = (oracles.kron_all([np.array([1, 0])] * 4)
            + oracles.kron_all([np.array([0, 1])] * 2 + [np.array([1, 0])] * 2)) / math.sqrt(2)
    full = full.ravel()
    full = oracles.evolve(full, n, 0.0, 0.0, gt, 1.0)
    parity = oracles.kron_all([oracles.X, oracles.X, oracles.I2, oracles.I2])
    assert halfcat_signal(n, 1.0, gt) == pytest.approx(oracles.moment(full, parity).real, abs=1e-12)


def test_njz_moments_examples():
    assert njz_moments(12, 1.0, 0.0) == (6.0, 0.0)
    mean, var = njz_moments(12, 1.0, math.pi / 24)
    assert mean == pytest.approx(0, abs=1e-12)
    assert var == pytest.approx(3.0)


def test_njz_moments_match_dicke_pipeline():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(1, 513))
        gamma, t = rng.uniform(-1, 1), rng.uniform(0, 3)
        s = dicke.evolve(dicke.embed_product(BlochProduct(n, math.pi / 2)), CollectiveHamiltonian(a=gamma), t)
        mean, var = njz_moments(n, t, gamma)
        assert dicke.expectation(s, "Jx") == pytest.approx(mean, abs=1e-10)
        assert dicke.variance(s, "Jx") == pytest.approx(var, abs=1e-10)
    s = dicke.evolve(dicke.embed_product(BlochProduct(7, math.pi / 2)), CollectiveHamiltonian(a=0.3), 1.0)
    assert (dicke.expectation(s, "Jx"), dicke.variance(s, "Jx")) == pytest.approx(njz_moments(7, 1.0, 0.3), abs=1e-10)


def test_jz2_derivative_matches_finite_difference():
    n, t, g, beta = 40, 1.0, 1e-3, math.pi / 4
    h = 1e-7
    up = protocols.jz2_readout(n, t, g + h, beta)[0]
    down = protocols.jz2_readout(n, t, g - h, beta)[0]
    assert protocols.jz2_readout(n, t, g, beta)[2] == pytest.approx((up - down) / (2 * h), rel=1e-6)


def test_jz2_small_phase_limit():
    # for gamma t -> 0, d<J_y>/dgamma -> t n(n-1) sin(2 beta)/4 and Var J_y -> n/4
    n, t, beta = 200, 1.0, math.pi / 4
    _, var, dmean = protocols.jz2_readout(n, t, 1e-9, beta)
    assert var == pytest.approx(n / 4, rel=1e-6)
    assert dmean == pytest.approx(t * n * (n - 1) * math.sin(2 * beta) / 4, rel=1e-6)


def test_jz2_analytic_scaling():
    ns = [32, 64, 128, 256]
    vals = [(n, jz2_product_precision(n, 1.0, 1e-6, math.pi / 4)) for n in ns]
    slope, _ = fit_exponent(vals)
    assert slope == pytest.approx(-1.5, abs=0.05)


def test_jz2_beta_optimum():
    n, t, g = 64, 1.0, 1e-6
    best = jz2_product_precision(n, t, g, math.pi / 4)
    for beta in np.linspace(0.05, math.pi / 2, 40)[:-1]:
        assert best <= jz2_product_precision(n, t, g, beta) * (1 + 1e-12)


def test_jz2_equator_is_insensitive():
    with pytest.raises(OperatingPointError):
        jz2_product_precision(64, 1.0, 1e-6, math.pi / 2)


def test_jz2_phase_dispersion():
    n, t = 1000, 1.0
    small = jz2_product_precision(n, t, 1e-9, math.pi / 4)
    # the coherent state's J_z^2 twist smears it out once gamma t sqrt(n) ~ 1
    dispersed = jz2_product_precision(n, t, 1 / (t * math.sqrt(n)), math.pi / 4)
    assert dispersed > 10 * small


def test_spec_validation():
    with pytest.raises(ValueError):
        ProtocolSpec(NJZ, 0, 1.0, 0.1)
    with pytest.raises(ValueError):
        ProtocolSpec(NJZ, 4, 0.0, 0.1)
    with pytest.raises(ValueError):
        ProtocolSpec(NJZ, 4, 1.0, 0.1, nu=0)
    with pytest.raises(ValueError):
        ProtocolSpec(JZ2, 4, 1.0, 0.1, beta=2.0)


# -- sampling ---------------------------------------------------------------

def test_njz_sampling_at_zero_phase():
    rec = sample_outcomes(ProtocolSpec(NJZ, 33, 1.0, 0.0, nu=50), seed=1)
    assert np.all(rec.outcomes == 33 / 2)


def test_njz_sampling_quarter_fringe():
    n, nu = 50, 100_000
    rec = sample_outcomes(mid_fringe(NJZ, n, nu=nu), seed=2)
    assert abs(rec.outcomes.mean()) < 5 * math.sqrt(n / 4 / nu)
    assert rec.outcomes.var() == pytest.approx(n / 4, rel=0.05)


def test_halfcat_sampling():
    n, t, nu = 12, 1.0, 100_000
    gamma = 4 * (math.pi / 3) / (t * n**2)
    rec = sample_outcomes(ProtocolSpec(HALF, n, t, gamma, nu), seed=3)
    assert set(np.unique(rec.outcomes)) <= {-1.0, 1.0}
    sigma = math.sqrt((1 - 0.25) / nu)
    assert abs(rec.outcomes.mean() - 0.5) < 5 * sigma


def test_jz2_sampling_matches_exact_moments():
    n, t, g, nu = 30, 1.0, 0.002, 100_000
    rec = sample_outcomes(ProtocolSpec(JZ2, n, t, g, nu), seed=4)
    mean, var, _ = protocols.jz2_readout(n, t, g, math.pi / 4)
    assert abs(rec.outcomes.mean() - mean) < 5 * math.sqrt(var / nu)
    assert rec.outcomes.var() == pytest.approx(var, rel=0.05)


def test_sampling_deterministic_and_serializable():
    spec = mid_fringe(NJZ, 20, nu=5)
    a, b = sample_outcomes(spec, seed=9), sample_outcomes(spec, seed=9)
    assert np.array_equal(a.outcomes, b.outcomes)
    text = a.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "protocol,n,t,gamma_true,nu,outcome,detected"
    assert len(lines) == 6
    assert text == b.to_csv()


# -- estimation -------------------------------------------------------------

def test_njz_inversion_consistency():
    n, t = 40, 0.7
    spec = ProtocolSpec(NJZ, n, t, 1.1 / (t * n))
    exact_mean = njz_moments(n, t, spec.gamma_true)[0]
    assert estimate_gamma(spec, [exact_mean]) == pytest.approx(spec.gamma_true, rel=1e-13)


def test_halfcat_inversion_consistency():
    spec = mid_fringe(HALF, 16)
    parity = halfcat_signal(16, 1.0, spec.gamma_true)
    assert estimate_gamma(spec, [parity]) == pytest.approx(spec.gamma_true, rel=1e-12)


def test_jz2_inversion_consistency():
    spec = ProtocolSpec(JZ2, 64, 1.0, 0.1 / 64**2)
    mean = protocols.jz2_readout(64, 1.0, spec.gamma_true, spec.beta)[0]
    assert estimate_gamma(spec, [mean]) == pytest.approx(spec.gamma_true, rel=1e-9)


def test_branch_ambiguity_reported():
    spec = ProtocolSpec(NJZ, 10, 1.0, 4.0 / 10)
    with pytest.raises(OperatingPointError):
        estimate_gamma(spec, [0.0])
    with pytest.raises(OperatingPointError):
        evaluate_eq1(spec, repeats=100)


def _rms(spec, repeats, seed):
    est = [estimate_gamma(spec, sample_outcomes(spec, protocols.stream(seed, r))) for r in range(repeats)]
    return math.sqrt(np.mean((np.array(est) - spec.gamma_true) ** 2))


def test_njz_monte_carlo_rms():
    spec = mid_fringe(NJZ, 64, nu=10_000)
    assert _rms(spec, 400, 21) == pytest.approx(njz_precision(64, 1.0, 10_000), rel=0.10)


def test_halfcat_monte_carlo_rms():
    spec = mid_fringe(HALF, 32, nu=10_000)
    assert _rms(spec, 400, 22) == pytest.approx(halfcat_precision(32, 1.0, 10_000), rel=0.10)


def test_units_corrected_matches_plain_rms_when_unbiased():
    res = evaluate_eq1(mid_fringe(NJZ, 64, nu=10_000), repeats=400, seed=5)
    assert res.slope == pytest.approx(1.0, abs=0.05)
    assert res.delta_gamma == pytest.approx(res.rms_deviation, rel=0.15)
    assert res.delta_gamma == pytest.approx(res.analytic_delta_gamma, rel=0.10)


def test_units_corrected_njz_scaling():
    rows = [(n, evaluate_eq1(mid_fringe(NJZ, n, nu=10_000), repeats=200, seed=6).delta_gamma)
            for n in (16, 64, 256)]
    slope, _ = fit_exponent(rows)
    assert slope == pytest.approx(-1.5, abs=0.1)


def test_units_corrected_sqrt_nu_law():
    a = evaluate_eq1(mid_fringe(NJZ, 64, nu=10_000), repeats=400, seed=7).delta_gamma
    b = evaluate_eq1(mid_fringe(NJZ, 64, nu=40_000), repeats=400, seed=8).delta_gamma
    assert b / a == pytest.approx(0.5, rel=0.10)


def test_units_corrected_reproducible():
    spec = mid_fringe(HALF, 20, nu=100)
    a = evaluate_eq1(spec, repeats=100, seed=3)
    b = evaluate_eq1(spec, repeats=100, seed=3)
    assert a.delta_gamma == b.delta_gamma
    assert np.array_equal(a.gamma_est_samples, b.gamma_est_samples)


def test_units_corrected_rejects_too_few_repeats():
    with pytest.raises(ValueError):
        evaluate_eq1(mid_fringe(NJZ, 16), repeats=1)


def test_estimator_consistency_large_nu():
    spec = mid_fringe(NJZ, 100, nu=1_000_000)
    est = np.array([estimate_gamma(spec, sample_outcomes(spec, protocols.stream(11, r)))
                    for r in range(60)])
    se = est.std(ddof=1) / math.sqrt(len(est))
    assert abs(est.mean() - spec.gamma_true) < 3 * se


def test_equatorial_invariance():
    n, nu, phi = 64, 10_000, math.pi / 3
    base = evaluate_eq1(mid_fringe(NJZ, n, nu=nu), repeats=300, seed=12)
    gamma = (math.pi / 2 + phi) / n
    turned = evaluate_eq1(ProtocolSpec(NJZ, n, 1.0, gamma, nu, readout_phi=phi), repeats=300, seed=13)
    assert abs(turned.delta_gamma - base.delta_gamma) < 3 * math.hypot(turned.stderr, base.stderr)


@pytest.mark.parametrize("kind,ns,expected", [
    (HALF, [16, 32, 64, 128, 256], -2.0),
    (NJZ, [16, 32, 64, 128, 256], -1.5),
    (JZ2, [32, 64, 128, 256, 512], -1.5),
])
def test_analytic_scaling_laws(kind, ns, expected):
    rows = []
    for n in ns:
        gamma = 0.1 / n**2 if kind is JZ2 else mid_fringe(kind, n).gamma_true
        rows.append((n, protocols.analytic_delta_gamma(ProtocolSpec(kind, n, 1.0, gamma))))
    assert fit_exponent(rows)[0] == pytest.approx(expected, abs=0.05)


@pytest.mark.slow
@pytest.mark.parametrize("kind,expected", [(HALF, -2.0), (NJZ, -1.5), (JZ2, -1.5)])
def test_monte_carlo_scaling_laws(kind, expected):
    rows = []
    for n in (16, 32, 64, 128, 256):
        spec = (ProtocolSpec(JZ2, n, 1.0, 0.1 / n**2, 10_000) if kind is JZ2
                else mid_fringe(kind, n, nu=10_000))
        rows.append((n, evaluate_eq1(spec, repeats=200, seed=14).delta_gamma))
    assert fit_exponent(rows)[0] == pytest.approx(expected, abs=0.1)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 200), frac=st.floats(0.05, 0.95), t=st.floats(0.1, 5))
def test_njz_estimate_inverts_exact_mean(n, frac, t):
    spec = ProtocolSpec(NJZ, n, t, frac * math.pi / (t * n))
    mean = njz_moments(n, t, spec.gamma_true)[0]
    assert estimate_gamma(spec, [mean]) == pytest.approx(spec.gamma_true, rel=1e-9)
