"""
Independent-particle noise and atom-number uncertainty
=======================================================

Dephasing and loss act on each particle separately, so they cost a
constant factor but leave the n^{-3/2} exponent alone.  An uncertain atom
number is different: it matters once the nonlinear phase approaches
n / delta n.
"""

from spinmetro.noise import NoiseModel
from spinmetro.protocols import Protocol, ProtocolSpec, evaluate_eq1
from spinmetro.scaling import run_sweep

grid = [16, 32, 64, 128, 256, 512, 1024]
for label, noise in (("noiseless", None),
                     ("dephasing 0.2", NoiseModel(dephasing_rate=0.2)),
                     ("loss 20%", NoiseModel(loss_fraction=0.2))):
    res = run_sweep("njz", grid, nu=10_000, repeats=200, noise=noise, seed=5)
    print(f"{label:14s} exponent {res.exponent:.3f} +- {res.exponent_stderr:.3f}"
          f"   delta gamma(n=1024) = {res.rows[-1].delta_gamma:.3e}")

# J_z^2 product protocol, n = 256, delta n / n = 1%: n / delta n = 100
n, dn = 256, 2.56
print()
for phase in (5.0, 50.0, 1000.0):
    spec = ProtocolSpec(Protocol.PRODUCT_JZ2, n, 1.0, phase / n**2, nu=10_000)
    clean = evaluate_eq1(spec, repeats=200, seed=2)
    noisy = evaluate_eq1(spec, repeats=200, seed=2, noise=NoiseModel(number_sigma=dn))
    print(f"phase {phase:7.1f} rad   noisy / noiseless = {noisy.delta_gamma / clean.delta_gamma:6.2f}")
