"""Canned two-branch scenarios.

Two sources of indefinite order are covered: a mass in superposition of two
locations (the metric differs between branches) and a test particle in
superposition of two routes on flat spacetime (the paths differ). A control
family with definite order completes the set. All scenarios live in 1+1
dimensions and are mirror symmetric, so the test particle meets its first
and second laboratory at the same two proper times in both branches.
"""

from __future__ import annotations

import math

import numpy as np

from . import geometry as geo
from . import worldlines as wl
from .causal_order import BranchedScenario, build_branch, order_product
from .errors import ConfigurationError, ScenarioInvalidError

INV_SQRT2 = 1 / math.sqrt(2)
TIMING_TOL = 1e-6
WEAK_FIELD_LIMIT = 0.1


def check_timing(scenario, tol=TIMING_TOL):
    """Return ``(tau_star_1, tau_star_2)`` if both branches share their crossing times.

    Raises
    ------
    ScenarioInvalidError
        If ``{tau1, tau2}`` differs between the branches by more than ``tol``.
    """
    a = sorted(scenario.branch_a.taus)
    b = sorted(scenario.branch_b.taus)
    if max(abs(a[0] - b[0]), abs(a[1] - b[1])) > tol:
        raise ScenarioInvalidError(
            f"crossing times differ between branches: {tuple(a)} vs {tuple(b)}"
        )
    return 0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])


def _check_weak(potential, curves):
    pts = np.concatenate([c.samples(256)[1] for c in curves])
    worst = float(np.max(np.abs(potential(pts))))
    if worst >= WEAK_FIELD_LIMIT:
        raise ConfigurationError(f"|Phi| reaches {worst:.3g} on the worldlines; weak field needs < 0.1")


def _amplitudes(alpha, beta):
    return complex(alpha), complex(beta)


def departure_time(clock_reading, potential_at_lab):
    """Chart time at which a static clock in potential ``Phi`` shows ``clock_reading``."""
    return clock_reading / math.sqrt(1.0 + 2.0 * potential_at_lab)


def _lab(x, depart, speed, t_end, label):
    direction = -math.copysign(1.0, x)
    return wl.piecewise_linear(
        [(0.0, x), (depart, x), (t_end, x + direction * speed * (t_end - depart))], label=label
    )


def _switch_branch(mass_x, mass, soft, lab_distance, departures, speed, t_end):
    pot = geo.point_mass_potential(mass, [mass_x], soft)
    metric = geo.weak_field(pot, 2, name=f"weak_field(m={mass:g}, x={mass_x:g})")
    g0 = wl.static([0.0], (0.0, t_end), "gamma0")
    g1 = _lab(-lab_distance, departures[0], speed, t_end, "gamma1")
    g2 = _lab(+lab_distance, departures[1], speed, t_end, "gamma2")
    _check_weak(pot, (g0, g1, g2))
    return metric, g0, g1, g2


def gravitational_switch(mass=0.01, lab_distance=1.0, mass_offset=0.2, soft=0.05,
                         clock_reading=1.0, lab_speed=0.5, t_end=4.0,
                         alpha=INV_SQRT2, beta=INV_SQRT2):
    """Mass near laboratory 2 in branch A and near laboratory 1 in branch B.

    The test particle rests at ``x = 0``; the laboratories rest at
    ``x = -/+ lab_distance``. Each laboratory leaves towards the particle
    when its own clock reads ``clock_reading``, then moves at ``lab_speed``.
    The laboratory next to the mass has the slower clock, so it departs
    later and meets the particle second. Branch A therefore has
    ``tau1 < tau2``.
    """
    if mass < 0:
        raise ConfigurationError("mass must be non-negative")
    potential_params = dict(mass=mass, soft=soft)
    branches = []
    for mass_x in (lab_distance + mass_offset, -(lab_distance + mass_offset)):
        pot = geo.point_mass_potential(mass, [mass_x], soft)
        _check_weak(pot, [wl.static([x], (0.0, t_end), "gamma1") for x in (-lab_distance, lab_distance)])
        deps = [departure_time(clock_reading, float(pot(np.array([0.0, x]))))
                for x in (-lab_distance, lab_distance)]
        if max(deps) + lab_distance / lab_speed >= t_end:
            raise ConfigurationError("t_end too short for both crossings")
        parts = _switch_branch(mass_x, mass, soft, lab_distance, deps, lab_speed, t_end)
        branches.append(build_branch(*parts))
    sc = BranchedScenario(branches[0], branches[1], *_amplitudes(alpha, beta),
                          name="gravitational_switch",
                          meta=dict(potential_params, lab_distance=lab_distance,
                                    mass_offset=mass_offset, clock_reading=clock_reading,
                                    lab_speed=lab_speed, t_end=t_end))
    check_timing(sc)
    return sc


def _route(lab_distance, start_offset, speeds, mirror):
    """Two-leg route across both laboratories, optionally mirrored in x."""
    x0 = lab_distance + start_offset
    v1, v2 = speeds
    t_mid = x0 / v1
    t_end = t_mid + x0 / v2
    sgn = -1.0 if mirror else 1.0
    return wl.piecewise_linear([(0.0, -sgn * x0), (t_mid, 0.0), (t_end, sgn * x0)], "gamma0")


def superposed_paths_switch(lab_distance=1.0, start_offset=0.5, speeds=(0.5, 0.4),
                            same_route=False, alpha=INV_SQRT2, beta=INV_SQRT2):
    """Flat spacetime in both branches; the particle's route differs.

    Branch A meets laboratory 1 first, branch B laboratory 2 first. With
    ``same_route`` both branches take route A and the order is definite.
    """
    if not all(0 < v < 1 for v in speeds):
        raise ConfigurationError("speeds must lie in (0, 1)")
    metric = geo.minkowski(2)
    routes = (_route(lab_distance, start_offset, speeds, False),
              _route(lab_distance, start_offset, speeds, not same_route))
    t_end = routes[0].lambda_range[1]
    labs = (wl.static([-lab_distance], (0.0, t_end), "gamma1"),
            wl.static([lab_distance], (0.0, t_end), "gamma2"))
    branches = [build_branch(metric, r, *labs) for r in routes]
    sc = BranchedScenario(branches[0], branches[1], *_amplitudes(alpha, beta),
                          name="superposed_paths_switch",
                          meta=dict(lab_distance=lab_distance, start_offset=start_offset,
                                    speeds=list(speeds), same_route=same_route))
    check_timing(sc)
    return sc


def definite_control(variant="mirrored_masses", mass=0.01, lab_distance=1.0, mass_offset=0.2,
                     soft=0.05, departures=(1.0, 1.5), lab_speed=0.5, t_end=4.5,
                     alpha=INV_SQRT2, beta=INV_SQRT2):
    """Branches that differ but agree on the order of the two events.

    ``"identical"`` superposes route A of the flat scenario with itself.
    ``"mirrored_masses"`` keeps the two mass positions of the gravitational
    switch but lets the laboratories leave at fixed chart times, so the
    metric differs between branches while the order does not.
    """
    if variant == "identical":
        base = superposed_paths_switch(same_route=True, alpha=alpha, beta=beta)
        sc = BranchedScenario(base.branch_a, base.branch_a, base.amp_a, base.amp_b,
                              name="definite_control", meta={"variant": variant})
    elif variant == "mirrored_masses":
        branches = []
        for mass_x in (-(lab_distance + mass_offset), lab_distance + mass_offset):
            parts = _switch_branch(mass_x, mass, soft, lab_distance, departures, lab_speed, t_end)
            branches.append(build_branch(*parts))
        sc = BranchedScenario(branches[0], branches[1], *_amplitudes(alpha, beta),
                              name="definite_control",
                              meta=dict(variant=variant, mass=mass, departures=list(departures)))
    else:
        raise ConfigurationError(f"unknown definite_control variant {variant!r}")
    if order_product(sc) != 1:
        raise ScenarioInvalidError("definite_control produced opposite orders")
    check_timing(sc)
    return sc


SCENARIOS = {
    "gravitational_switch": gravitational_switch,
    "superposed_paths_switch": superposed_paths_switch,
    "definite_control": definite_control,
}


def build_scenario(name, params=None):
    """Look up a constructor by name and call it with keyword ``params``."""
    try:
        ctor = SCENARIOS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}"
        ) from None
    try:
        return ctor(**(params or {}))
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {name}: {exc}") from None
