"""From the closed-loop solid angle to a phase that freezes.

A spin starting along x in an isolated field sweeps a cone once per Larmor
period and picks up pi(1 - cos theta). Coupled to a thermal bath, the Bloch
vector spirals toward the pole and the phase settles at a finite value. The
hotter the bath, the sooner it settles.
"""

import math

from bathphase import InitialState, PhysicalParams, phase_at_infinity, phase_series
from bathphase.geophase import settling_time

print("isolated spin, one period")
for theta in (math.pi / 6, math.pi / 3, math.pi / 2):
    series = phase_series(PhysicalParams(1.0, 1.0, 0.0), InitialState(theta), tau_max=2 * math.pi)
    print(f"  theta={theta:.4f}  Phi={series.phi_principal[-1]:+.6f}  pi(1-cos)={math.pi * (1 - math.cos(theta)):.6f}")

print("\nthermal bath, g^2/w_N = 0.01, start along x")
print("  k_BT/w_N   Phi(inf)   settles by (Larmor periods)")
for temp in (0.1, 0.3, 1.0, 3.0, 10.0):
    p = PhysicalParams.from_ratios(g2_over_omega=0.01, temp_over_omega=temp)
    lim = phase_at_infinity(p, InitialState(math.pi / 2), keep_series=True)
    t = settling_time(lim.series, lim.phi_infinity, 1e-3)
    print(f"  {temp:8.2f}  {lim.phi_infinity:+9.4f}   {t / (2 * math.pi):8.1f}")
