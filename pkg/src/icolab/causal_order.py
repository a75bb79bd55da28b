"""Events, per-branch causal order, branch superpositions and quantum diffeomorphisms.

A branch is one classical configuration: a metric and three worldlines.
The events are the crossings of the test particle ``gamma0`` with the two
systems, and the order sign is the sign of the difference of the test
particle's proper times at the two crossings. A scenario superposes two
branches with complex amplitudes; a quantum diffeomorphism acts with an
independent map on each branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geo
from . import worldlines as wl
from .errors import (
    ConfigurationError,
    ConstructionError,
    DegenerateOrderError,
    NotApplicableError,
    OrientationError,
    ScenarioInvalidError,
)


@dataclass(frozen=True)
class EventRecord:
    id: int
    tau: float
    point: np.ndarray
    lambda0: float
    lambda_system: float


@dataclass(frozen=True)
class BranchConfig:
    metric: geo.MetricField
    gamma0: wl.Worldline
    gamma1: wl.Worldline
    gamma2: wl.Worldline
    events: tuple[EventRecord, EventRecord]
    tau_total: float
    delta_tau: float
    s: int

    @property
    def dim(self):
        return self.metric.dim

    @property
    def taus(self):
        return self.events[0].tau, self.events[1].tau

    def points(self):
        return self.events[0].point, self.events[1].point


@dataclass(frozen=True)
class BranchedScenario:
    branch_a: BranchConfig
    branch_b: BranchConfig
    amp_a: complex = 1 / math.sqrt(2)
    amp_b: complex = 1 / math.sqrt(2)
    name: str = "scenario"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        norm = abs(self.amp_a) ** 2 + abs(self.amp_b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ConfigurationError(f"amplitudes not normalized: |a|^2 + |b|^2 = {norm!r}")
        if self.branch_a.dim != self.branch_b.dim:
            raise ConfigurationError("branches have different dimensions")

    @property
    def branches(self):
        return self.branch_a, self.branch_b

    def with_amplitudes(self, alpha, beta):
        return replace(self, amp_a=complex(alpha), amp_b=complex(beta))


def build_branch(metric, gamma0, gamma1, gamma2, *, cross_tol=wl.CROSS_TOL, rtol=wl.QUAD_RTOL,
                 check_timelike=True):
    """Detect the two events of one classical branch and compute its order sign.

    Raises
    ------
    ScenarioInvalidError
        Unless ``gamma0`` crosses each system exactly once.
    OrientationError
        If a system tangent is not future pointing relative to ``gamma0``.
    DegenerateOrderError
        If the two events are not resolved in proper time.
    """
    curves = (gamma0.with_label("gamma0"), gamma1.with_label("gamma1"), gamma2.with_label("gamma2"))
    if any(c.dim != metric.dim for c in curves):
        raise ConfigurationError("worldline and metric dimensions differ")
    gamma0, gamma1, gamma2 = curves
    if check_timelike:
        for c in curves:
            wl.check_timelike(c, metric)

    lam_i = gamma0.lambda_range[0]
    tau_total = wl.proper_time(gamma0, metric, rtol=rtol)
    events = []
    for k, sys in ((1, gamma1), (2, gamma2)):
        hits = wl.detect_coincidences(gamma0, sys, cross_tol)
        if len(hits) != 1:
            raise ScenarioInvalidError(f"gamma0 crosses gamma{k} {len(hits)} times, expected once")
        hit = hits[0]
        v0 = gamma0.velocity(hit.lambda0)
        vk = sys.velocity(hit.lambda_other)
        if not wl.orientation_sign(metric, hit.point, v0, vk):
            raise OrientationError(f"gamma{k} is not future pointing at its crossing")
        tau = wl.proper_time(gamma0, metric, lam_i, hit.lambda0, rtol=rtol)
        events.append(EventRecord(k, tau, np.asarray(hit.point), hit.lambda0, hit.lambda_other))

    delta = events[1].tau - events[0].tau
    if abs(delta) < 10 * rtol * max(1.0, tau_total):
        raise DegenerateOrderError(f"events not ordered: |delta tau| = {abs(delta):.3e}")
    return BranchConfig(metric, gamma0, gamma1, gamma2, tuple(events), tau_total, delta,
                        1 if delta > 0 else -1)


def order_product(scenario: BranchedScenario) -> int:
    """``+1`` for definite order, ``-1`` for indefinite."""
    return scenario.branch_a.s * scenario.branch_b.s


def verdict(scenario):
    return "definite" if order_product(scenario) == 1 else "indefinite"


def transform_branch(branch: BranchConfig, phi: geo.Diffeomorphism, **kw) -> BranchConfig:
    """Push a branch forward along ``phi`` and re-detect its events from scratch."""
    if phi.dim != branch.dim:
        raise ConfigurationError("map and branch dimensions differ")
    return build_branch(
        geo.pushforward_metric(phi, branch.metric),
        geo.pushforward_curve(phi, branch.gamma0),
        geo.pushforward_curve(phi, branch.gamma1),
        geo.pushforward_curve(phi, branch.gamma2),
        **kw,
    )


def apply_quantum_diffeo(scenario, phi_a, phi_b, **kw):
    """Act with ``phi_a`` on branch A and ``phi_b`` on branch B, controlled by the branch label."""
    return replace(
        scenario,
        branch_a=transform_branch(scenario.branch_a, phi_a, **kw),
        branch_b=transform_branch(scenario.branch_b, phi_b, **kw),
    )


def swap_branches(scenario):
    return replace(scenario, branch_a=scenario.branch_b, branch_b=scenario.branch_a,
                   amp_a=scenario.amp_b, amp_b=scenario.amp_a)


def swap_systems(branch: BranchConfig) -> BranchConfig:
    """Relabel the two systems, which exchanges the events and flips ``s``."""
    return build_branch(branch.metric, branch.gamma0, branch.gamma2, branch.gamma1)


def relabel_events(scenario):
    return replace(scenario, branch_a=swap_systems(scenario.branch_a),
                   branch_b=swap_systems(scenario.branch_b))


# --------------------------------------------------------------------------
# alignment


def _plane_rotation(u, w):
    """Rotation taking the direction of ``u`` to the direction of ``w``."""
    dim = u.size
    a = u / np.linalg.norm(u)
    c = w / np.linalg.norm(w)
    cos = float(np.clip(a @ c, -1.0, 1.0))
    b = c - cos * a
    if np.linalg.norm(b) < 1e-12:
        if cos > 0:
            return np.eye(dim)
        # antiparallel: half turn in a plane containing a
        e = np.eye(dim)[int(np.argmin(np.abs(a)))]
        b = e - (e @ a) * a
    b /= np.linalg.norm(b)
    sin = math.sqrt(max(0.0, 1.0 - cos * cos))
    return (np.eye(dim) + sin * (np.outer(b, a) - np.outer(a, b))
            + (cos - 1.0) * (np.outer(a, a) + np.outer(b, b)))


def align_events(scenario, tol=1e-12):
    """Maps ``(phi_a, phi_b)`` sending both branches' event points to branch A's.

    ``phi_a`` is the identity. ``phi_b`` translates ``E1`` onto its target and
    then rotates and rescales about that point to carry ``E2`` onto its target.

    Raises
    ------
    ConstructionError
        If the two events of one branch share a chart point.
    """
    dim = scenario.branch_a.dim
    e1a, e2a = scenario.branch_a.points()
    e1b, e2b = scenario.branch_b.points()
    u, w = e2b - e1b, e2a - e1a
    scale = max(1.0, np.linalg.norm(e1a), np.linalg.norm(e1b))
    if min(np.linalg.norm(u), np.linalg.norm(w)) < 1e-9 * scale:
        raise ConstructionError("the two events of a branch are too close to align")
    phi_a = geo.identity(dim)
    shift = e1a - e1b
    if np.linalg.norm(u - w) <= tol * scale:
        if np.linalg.norm(shift) <= tol * scale:
            return phi_a, geo.identity(dim)
        return phi_a, geo.translation(shift)
    m = (np.linalg.norm(w) / np.linalg.norm(u)) * _plane_rotation(u, w)
    # x -> e1a + M (x + shift - e1a) = e1a + M (x - e1b)
    return phi_a, geo.affine(m, center=e1b, shift=shift, name="align")


def event_mismatch(scenario):
    """Largest chart distance between the two branches' images of the same event."""
    pa, pb = scenario.branch_a.points(), scenario.branch_b.points()
    return max(float(np.linalg.norm(x - y)) for x, y in zip(pa, pb))


# --------------------------------------------------------------------------
# reparametrization


@dataclass(frozen=True)
class NoGoReport:
    delta: float
    tau_star: float
    tau2_a: float
    tau2_b: float
    straddles: bool


def straddle_check(taus_a, taus_b):
    """Offset branch B's clock so both read the same at ``E1``; compare readings at ``E2``."""
    (t1a, t2a), (t1b, t2b) = taus_a, taus_b
    delta = t1a - t1b
    tau_star = t1a
    t2b_shifted = t2b + delta
    straddles = (t2a - tau_star) * (t2b_shifted - tau_star) < 0
    return NoGoReport(delta, tau_star, t2a, t2b_shifted, bool(straddles))


def reparametrization_no_go_check(scenario):
    """Show that aligning the clocks at one event leaves the other in superposition.

    Raises
    ------
    NotApplicableError
        For a scenario with definite order.
    """
    if order_product(scenario) != -1:
        raise NotApplicableError("reparametrization check needs an indefinite scenario")
    return straddle_check(scenario.branch_a.taus, scenario.branch_b.taus)


def reparametrize_branch(branch: BranchConfig, delta: float) -> BranchConfig:
    """Rebuild a branch after shifting the parameter of ``gamma0`` by ``delta``."""
    return build_branch(branch.metric, wl.reparametrize(branch.gamma0, delta),
                        branch.gamma1, branch.gamma2)


# --------------------------------------------------------------------------
# randomized invariance sweep


def random_branch_diffeo(rng, branch, n_bumps=2):
    """Random diffeomorphism with localized pieces anchored at the branch's events."""
    pts = branch.points()
    sep = float(np.linalg.norm(pts[1] - pts[0]))
    spread = max(1.0, *(float(np.ptp(c.samples(32)[1], axis=0).max())
                        for c in (branch.gamma0, branch.gamma1, branch.gamma2)))
    scale = min(spread, max(sep, 0.1 * spread))
    return geo.random_diffeomorphism(rng, branch.dim, anchors=pts, scale=scale, n_bumps=n_bumps)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    s_a: int
    s_b: int
    product: int
    tau_rel_err: float
    delta_tau_rel_err: float
    passed: bool


@dataclass(frozen=True)
class SweepResult:
    trials: tuple[TrialResult, ...]
    reference_product: int

    @property
    def n_passed(self):
        return sum(t.passed for t in self.trials)

    @property
    def all_passed(self):
        return self.n_passed == len(self.trials)

    @property
    def max_tau_rel_err(self):
        return max((t.tau_rel_err for t in self.trials), default=0.0)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def invariance_trial(scenario, rng, trial=0, rel_tol=1e-6):
    """One random quantum diffeomorphism; compare everything to the untransformed data."""
    phi_a = random_branch_diffeo(rng, scenario.branch_a)
    phi_b = random_branch_diffeo(rng, scenario.branch_b)
    out = apply_quantum_diffeo(scenario, phi_a, phi_b)
    tau_err = 0.0
    dtau_err = 0.0
    ok = True
    for old, new in zip(scenario.branches, out.branches):
        for t_old, t_new in zip(old.taus, new.taus):
            tau_err = max(tau_err, _rel(t_new, t_old))
        dtau_err = max(dtau_err, _rel(new.delta_tau, old.delta_tau))
        ok &= new.s == old.s
    ok &= order_product(out) == order_product(scenario)
    ok &= tau_err <= rel_tol and dtau_err <= rel_tol
    return TrialResult(trial, out.branch_a.s, out.branch_b.s, order_product(out),
                       tau_err, dtau_err, bool(ok))


def invariance_sweep(scenario, trials=200, seed=0, rel_tol=1e-6):
    """Run independent randomized trials; each trial owns a spawned RNG stream."""
    streams = np.random.SeedSequence(seed).spawn(trials)
    results = tuple(
        invariance_trial(scenario, np.random.default_rng(ss), k, rel_tol)
        for k, ss in enumerate(streams)
    )
    return SweepResult(results, order_product(scenario))


def to_record(scenario):
    """JSON-ready verdict record."""
    def branch(b):
        return {"tau1": b.events[0].tau, "tau2": b.events[1].tau, "s": b.s}

    return {
        "branches": {"A": branch(scenario.branch_a), "B": branch(scenario.branch_b)},
        "product": order_product(scenario),
        "verdict": verdict(scenario),
    }
