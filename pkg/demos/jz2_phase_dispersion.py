"""
J_z^2 coupling on a product state: phase dispersion
====================================================

With a J_z^2 Hamiltonian a tilted product state also reaches n^{-3/2}
scaling, but only while gamma t is small: each |m> picks up a phase
quadratic in m, the state twists and smears around the equator, and the
J_y readout loses its signal.
"""

import math

import numpy as np

from spinmetro import dicke
from spinmetro.dicke import BlochProduct, CollectiveHamiltonian
from spinmetro.protocols import jz2_product_precision
from spinmetro.scaling import fit_exponent

t = 1.0

# small gamma t: the precision scales as n^{-3/2}
rows = [(n, jz2_product_precision(n, t, 0.1 / n**2, math.pi / 4)) for n in (32, 64, 128, 256, 512)]
slope, err = fit_exponent(rows)
print(f"small-phase exponent: {slope:.3f} +- {err:.3f}")

# the best tilt is beta = pi/4
n = 128
for beta in (0.2, 0.5, math.pi / 4, 1.1, 1.4):
    print(f"beta = {beta:.3f}   delta gamma = {jz2_product_precision(n, t, 1e-6, beta):.4e}")

# let gamma t grow: entanglement and phase dispersion set in together
n = 1000
s0 = dicke.embed_product(BlochProduct(n, math.pi / 4))
print()
for gt in (1e-5, 1e-3, 1e-2, 3e-2, 0.1):
    s = dicke.evolve(s0, CollectiveHamiltonian(b=gt), 1.0)
    print(f"gamma t = {gt:7.0e}   Bloch length = {dicke.bloch_length(s):.4f}"
          f"   delta gamma = {jz2_product_precision(n, 1.0, gt, math.pi / 4):.3e}")
