"""
n J_z coupling: beating 1/n without entanglement
=================================================

A product state on the equator precesses under n J_z at a rate n times
faster than a single spin.  Reading J_x gives a fringe whose slope grows
like n while its noise only grows like sqrt(n), so delta gamma ~ n^{-3/2}.
"""

import math

import numpy as np

from spinmetro import dicke
from spinmetro.dicke import BlochProduct, CollectiveHamiltonian
from spinmetro.protocols import Protocol, ProtocolSpec, evaluate_eq1, njz_precision

# the probe: n spins pointing along +x
n, t = 200, 1.0
state = dicke.embed_product(BlochProduct(n, math.pi / 2))

# evolve for a range of couplings and watch the fringe
for gamma in np.linspace(0, math.pi / (t * n), 5):
    s = dicke.evolve(state, CollectiveHamiltonian(a=gamma), t)
    print(f"gamma t n = {gamma * t * n:5.3f}   <J_x> = {dicke.expectation(s, 'Jx'):8.3f}"
          f"   single-spin Bloch length = {dicke.bloch_length(s):.15f}")

# the Bloch length stays at one: the state is a product at every time.
# Now estimate gamma from simulated measurements at mid-fringe.
print()
for n in (16, 64, 256, 1024):
    spec = ProtocolSpec(Protocol.PRODUCT_NJZ, n, t, math.pi / (2 * t * n), nu=10_000)
    res = evaluate_eq1(spec, repeats=200, seed=1)
    print(f"n = {n:5d}   delta gamma = {res.delta_gamma:.3e} +- {res.stderr:.1e}"
          f"   1/(t n^1.5 sqrt(nu)) = {njz_precision(n, t, spec.nu):.3e}")
