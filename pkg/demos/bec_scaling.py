"""
Two-component condensate: super-Heisenberg scaling from collisions
===================================================================

For Rb-87 with a22 : a12 : a11 = 0.97 : 1 : 1.03 the J_z^2 coefficient
vanishes and the condensate realizes a pure effective n J_z coupling.
The mode volume grows with n in the Thomas-Fermi regime, so the coupling
weakens and the precision of gamma1 scales as n^{-xi} with
xi = (d + 3q) / (2 (d + q)).
"""

import math

from spinmetro import bec
from spinmetro.scaling import geometric_grid, run_bec_sweep

tg, sp = bec.preset("rb87")
cp = bec.couplings(sp)
print(f"gamma1 = {cp.gamma1:.3e} {cp.units}, gamma2 = {cp.gamma2}")
print(f"n_c = {bec.critical_numbers(tg, sp).n_c:.0f}, Thomas-Fermi from n ~ {bec.crossover_number(tg, sp):.0f}")

for n in (1_000, 10_000, 100_000, 1_000_000):
    e = bec.eta(tg, sp, n)
    print(f"n = {n:8d}   eta = {e.value:.3e} m^-3 ({e.regime})")

res = run_bec_sweep(tg, sp, geometric_grid(10_000, 1_000_000, 6))
print(f"\nfitted exponent {res.exponent:.4f}; predicted -xi = {-float(bec.scaling_exponent(3, 2)):.4f}")

# lower-dimensional traps and harder walls push xi past one
for d in (1, 2, 3):
    for q in (2, 6, math.inf):
        print(f"d = {d}  q = {q:>3}   xi = {bec.scaling_exponent(d, q)}")

budget = bec.time_budget(sp, cp.gamma1, n=100)
print(f"\nloss ratio Gamma/2gamma1 = 1/{1 / budget.loss_ratio:.0f}; "
      f"signal phase budget at n = 100: {budget.max_phase:.0f} rad")
