"""
A Mach-Zehnder interferometer with Kerr phase shifters
=======================================================

Kerr shifters chi1 n1^2 and chi2 n2^2 plus a cross-Kerr 2 chi12 n1 n2
act on n bosons as a global phase, an n J_z term and a J_z^2 term.
Opposite Kerr phases (chi2 = -chi1), or a cross-Kerr equal to the mean
Kerr phase, remove J_z^2 and leave a pure n J_z coupling.
"""

import math

import numpy as np

from spinmetro.interferometer import KerrConfig, decompose, run_interferometer

for k in (KerrConfig(0.02, -0.02, 0.0), KerrConfig(0.03, 0.01, 0.02), KerrConfig(0.03, 0.01, 0.0)):
    d = decompose(k)
    print(f"{k}\n   n^2: {d.global_coeff:+.4f}   nJ_z: {d.linear_coeff:+.4f}"
          f"   J_z^2: {d.quad_coeff:+.4f}   pure linear: {d.pure_linear}")

# the output fringe of the pure n J_z case is (n/2) cos(2 chi1 n)
print()
n = 40
for chi in np.linspace(0, math.pi / (2 * n), 6):
    mean, var = run_interferometer(n, math.pi / 2, KerrConfig(chi, -chi, 0.0))
    print(f"chi1 = {chi:.4f}   <J_z out> = {mean:+8.3f}   Var = {var:7.3f}"
          f"   (n/2)|cos 2 chi1 n| = {n / 2 * abs(math.cos(2 * chi * n)):7.3f}")
