"""
How much can one threshold bit tell two close locations apart?
==============================================================

Shift the location by ``+eps`` and ``-eps``. A threshold bit then has two
Bernoulli laws, and their squared Hellinger distance per ``eps^2`` measures
how informative that bit is. Near the centre of the density the ratio tends
to ``2 f(0)^2``. The table shows where it peaks and how it compares with
``T(f)`` on the two branches of ``h^-1``.
"""

import numpy as np

from onebit_dme import T_of_f, make_density
from onebit_dme.constants import hellinger_ratios
from onebit_dme.errors import ConvergenceError

thetas = np.round(np.arange(-6, 6.001, 0.01), 10)
for name, beta in [("ggd", 1.5), ("logistic", None), ("hypsecant", None), ("sin2", None)]:
    d = make_density(name, beta)
    r = hellinger_ratios(d, 1e-3, thetas)
    try:
        outer = f"{T_of_f(d, 'outer'):.4f}"
    except ConvergenceError:
        outer = "n/a"
    print(f"{d.label:>14}: max ratio {r.max():.5f} at theta={thetas[r.argmax()] + 0.0:+.2f}; "
          f"2 f(0)^2 = {2 * d.f0**2:.5f}; T inner = {T_of_f(d):.5f}; T outer = {outer}")
