"""Where squeezing helps.

In a thermal bath, a hotter bath lowers the limiting phase. With strong
squeezing (r = 2) there is a window where heating raises it, and there is a
coupling range where the squeezed limit beats the thermal one.
"""

import math

import numpy as np

from bathphase import InitialState, PhysicalParams, SweepSpec, run_sweep

state = InitialState(math.pi / 2)


def limits(variable, values, base, r):
    p = PhysicalParams(base.omega_n, base.temperature, base.g, base.Omega, r)
    spec = SweepSpec(variable, tuple(values), p, state, "squeezed" if r else "thermal")
    return np.abs(run_sweep(spec).column("phi_infinity"))


temps = np.geomspace(0.1, 10, 9)
base = PhysicalParams.from_ratios(g2_over_omega=0.01, temp_over_omega=1.0)
print("|Phi(inf)| vs k_BT/w_N  (g^2/w_N = 0.01)")
print("    T       r=0      r=2")
for t, a, b in zip(temps, limits("temperature", temps, base, 0.0), limits("temperature", temps, base, 2.0)):
    print(f"  {t:6.3f}  {a:7.3f}  {b:7.3f}")

couplings = np.geomspace(0.001, 1, 9)
base = PhysicalParams.from_ratios(g2_over_omega=0.01, temp_over_omega=1.0)
print("\n|Phi(inf)| vs g^2/w_N  (k_BT = w_N)")
print("    g^2      r=0      r=2")
for g2, a, b in zip(couplings, limits("coupling", couplings, base, 0.0), limits("coupling", couplings, base, 2.0)):
    mark = "  <- squeezing wins" if b > a else ""
    print(f"  {g2:6.4f}  {a:7.3f}  {b:7.3f}{mark}")
