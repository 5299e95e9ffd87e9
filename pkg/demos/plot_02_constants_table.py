"""
Adaptive and non-adaptive constants
===================================

For each density we compute ``h(x) = 2 phi'(x) f(x)``, its maximum ``h*``,
the integral ``T(f)``, and from those the two asymptotic constants

* ``C_adapt = 1 / (4 f(0)^2)``, reached by the two-round protocol;
* ``C_non = alpha* / T(f)``, a floor for every one-bit non-adaptive protocol.

A ratio above one means adaptivity buys a strictly better constant.
"""

from onebit_dme import constants_for, make_density
from onebit_dme.constants import alpha_star

t_star, a_star = alpha_star()
print(f"alpha* = {a_star:.7f} at t* = {t_star:.6f}\n")

print(f"{'density':>14} {'x*':>8} {'h*':>8} {'T':>10} {'C_non':>8} {'C_adapt':>8} {'ratio':>7}")
for name, beta in [("ggd", 1.5), ("logistic", None), ("hypsecant", None), ("sin2", None)]:
    c = constants_for(make_density(name, beta))
    print(f"{make_density(name, beta).label:>14} {c.x_star:8.4f} {c.h_star:8.4f} {c.T:10.6f} "
          f"{c.c_non:8.4f} {c.c_adapt:8.4f} {c.ratio:7.4f}")

# The rippled sin2 density also exposes its normalizer.
print(f"\nsin2 normalizer on the unit-variance scale: {constants_for(make_density('sin2')).z_std:.6f}")
