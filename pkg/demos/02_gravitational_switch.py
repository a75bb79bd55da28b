"""
A mass in two places
====================

A test particle rests between two laboratories. A mass sits next to one
laboratory or the other, in superposition. Each laboratory sets off towards
the particle when its own clock reads 1, and the one near the mass has the
slower clock. Which laboratory the particle meets first depends on where
the mass is.
"""

from icolab import causal_order as co
from icolab import scenarios

sc = scenarios.gravitational_switch(mass=0.01)
for name, br in zip("AB", sc.branches):
    t1, t2 = br.taus
    print(f"branch {name}: tau1 = {t1:.9f}, tau2 = {t2:.9f}, s = {br.s:+d}")
print("order product:", co.order_product(sc), "->", co.verdict(sc))

# resetting the particle's clock cannot make both events simultaneous in both branches
report = co.reparametrization_no_go_check(sc)
print(f"clocks agree at E1 (tau* = {report.tau_star:.6f}); at E2 they read "
      f"{report.tau2_a:.6f} and {report.tau2_b:.6f}, straddling tau*: {report.straddles}")

# the same question with a definite control, where the labs leave at fixed chart times
control = scenarios.definite_control()
print("control:", co.verdict(control), [b.s for b in control.branches])

# a heavier mass separates the two orders further
for m in (0.005, 0.01, 0.02):
    s = scenarios.gravitational_switch(mass=m)
    print(f"mass {m}: |delta tau| = {abs(s.branch_a.delta_tau):.6f}")
