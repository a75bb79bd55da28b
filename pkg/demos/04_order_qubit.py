"""
Reading the order out of a spin
===============================

The particle carries a spin that precesses with its proper time. Agents in
the two laboratories measure it and write down when they met the particle.
A referee combines both notes into an order qubit, whose Bloch vector tells
a definite order, a classical mixture and a genuine superposition apart.
"""

import math

import numpy as np

from icolab import quantum as q
from icolab import scenarios

r = 1 / math.sqrt(2)
for label, (alpha, beta) in {"only A": (1, 0), "equal": (r, r), "phase i": (r, 1j * r)}.items():
    for sc in (scenarios.gravitational_switch(), scenarios.superposed_paths_switch()):
        s = q.order_qubit_summary(sc.with_amplitudes(alpha, beta))
        bloch = ", ".join(f"{c:+.3f}" for c in s["bloch"])
        print(f"{label:8s} {sc.name:24s} Bloch ({bloch})  {s['class']}")

# sigma_z alone cannot tell a coin flip from a superposition
mix = q.DensityMatrix.mixture([[1, 0], [0, 1]], [0.5, 0.5])
sup = q.DensityMatrix.from_pure(q.PLUS_X)
for name, rho in (("mixture", mix), ("superposition", sup)):
    b = q.tomography(rho)
    print(f"{name:14s} z = {b.z:+.3f}  class {q.classify_order(b).value}")

# with a finite number of shots the estimate scatters around the exact vector
rho = q.postselect_order_qubit(q.order_state(r, 1j * r)).rho
for shots in (100, 10_000):
    print(shots, "shots:", q.tomography(rho, shots=shots, rng=np.random.default_rng(0)))
