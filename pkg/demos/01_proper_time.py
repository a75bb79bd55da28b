"""
Clocks along worldlines
=======================

Proper time is the one clock reading every observer agrees on. This script
integrates it for a moving clock, a clock in a weak gravitational field, and
checks that an arbitrary smooth change of coordinates leaves it unchanged.
"""

import numpy as np

from icolab import geometry as geo
from icolab import worldlines as wl

# a clock moving at v = 0.6 ticks 0.8 per unit of chart time
mink = geo.minkowski(2)
moving = wl.uniform_velocity([0.0], [0.6], (0.0, 1.0))
print("moving clock:", wl.proper_time(moving, mink))

# a static clock at potential Phi = -0.01 runs slow by sqrt(1 + 2 Phi)
field = geo.weak_field(lambda x: np.full(np.shape(x)[:-1], -0.01))
still = wl.static([0.0], (0.0, 1.0))
print("clock in a potential:", wl.proper_time(still, field), "expected", np.sqrt(0.98))

# now a wiggly path near a point mass, seen in randomly chosen coordinates
g = geo.weak_field(geo.point_mass_potential(0.02, [1.0]))
path = wl.sinusoidal([0.0], 0.2, 2.0, (0.0, 3.0))
tau = wl.proper_time(path, g)
rng = np.random.default_rng(0)
for k in range(5):
    phi = geo.random_diffeomorphism(rng, anchors=[path(1.0), path(2.0)])
    tau_k = wl.proper_time(geo.pushforward_curve(phi, path), geo.pushforward_metric(phi, g))
    print(f"chart {k}: tau = {tau_k:.12f}  (relative change {abs(tau_k - tau) / tau:.1e})")
