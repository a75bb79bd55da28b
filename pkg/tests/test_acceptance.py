"""Acceptance gate: one test and one PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from icolab import causal_order as co
from icolab import frames
from icolab import geometry as geo
from icolab import quantum as q
from icolab import worldlines as wl

R = 1 / math.sqrt(2)
AMPS = [(1, 0), (R, R), (R, 1j * R)]
TRIALS = 200


@pytest.fixture(scope="module")
def all_scenarios(grav_switch, paths_switch, definite):
    return {"gravitational_switch": grav_switch, "superposed_paths_switch": paths_switch,
            "definite_control": definite}


@pytest.mark.slow
def test_criterion_1_classical_invariance(all_scenarios, record_criterion):
    parts, ok = [], True
    for name, sc in all_scenarios.items():
        t0 = time.perf_counter()
        sweep = co.invariance_sweep(sc, trials=TRIALS, seed=0, rel_tol=1e-6)
        dt = time.perf_counter() - t0
        signs_fixed = all((t.s_a, t.s_b) == (sc.branch_a.s, sc.branch_b.s) for t in sweep.trials)
        good = sweep.all_passed and signs_fixed and sweep.max_tau_rel_err <= 1e-6 and dt <= 60
        ok &= good
        parts.append(f"{name} {sweep.n_passed}/{TRIALS} max rel err {sweep.max_tau_rel_err:.1e} "
                     f"in {dt:.1f}s")
    record_criterion(1, ok, "; ".join(parts))


@pytest.fixture(scope="module")
def quantum_diffeo_trials(grav_switch, paths_switch):
    """200 independent per-branch diffeomorphisms per indefinite scenario (seed 1)."""
    out = {}
    for sc in (grav_switch, paths_switch):
        streams = np.random.SeedSequence(1).spawn(TRIALS)
        moved = []
        for ss in streams:
            rng = np.random.default_rng(ss)
            phis = [co.random_branch_diffeo(rng, b) for b in sc.branches]
            moved.append(co.apply_quantum_diffeo(sc, *phis))
        out[sc.name] = (sc, moved)
    return out


@pytest.mark.slow
def test_criterion_2_quantum_diffeo_no_go(quantum_diffeo_trials, record_criterion):
    parts, ok = [], True
    for name, (sc, moved) in quantum_diffeo_trials.items():
        n = sum(co.order_product(m) == -1 for m in moved)
        ok &= co.order_product(sc) == -1 and n == len(moved) == TRIALS
        parts.append(f"{name} product -1 in {n}/{len(moved)}")
    record_criterion(2, ok, "; ".join(parts))


def test_criterion_3_lightcones_definite_order_indefinite(grav_switch, record_criterion):
    out, reports = frames.make_lightcones_definite(grav_switch)
    worst = max(max(r.deviation_a, r.deviation_b) for r in reports)
    prod = co.order_product(out)
    ok = worst < 1e-8 and all(r.lightcone_definite for r in reports) and prod == -1
    record_criterion(3, ok, f"max |g - eta| {worst:.1e} at both events, product {prod}")


@pytest.mark.slow
def test_criterion_4_reparametrization_no_go(quantum_diffeo_trials, record_criterion):
    rng = np.random.default_rng(4)
    checked, ok = 0, True
    for sc, moved in quantum_diffeo_trials.values():
        for m in [sc, *moved]:
            ok &= co.reparametrization_no_go_check(m).straddles
            # arbitrary clock offsets per branch
            for _ in range(5):
                ca, cb = rng.uniform(-5, 5, size=2)
                ok &= co.straddle_check(np.add(m.branch_a.taus, ca), np.add(m.branch_b.taus, cb)).straddles
            checked += 1
        for d_a, d_b in rng.uniform(-3, 3, size=(5, 2)):
            a = co.reparametrize_branch(sc.branch_a, d_a)
            b = co.reparametrize_branch(sc.branch_b, d_b)
            ok &= co.straddle_check(a.taus, b.taus).straddles
            checked += 1
    record_criterion(4, ok, f"tau2 straddles tau* in all {checked} configurations")


def _template(tau, a, b, spin, mem_a, mem_b, regs=None):
    regs = regs or q.protocol_registers(tau)
    return q.with_factor(regs, [
        (a, {"control": 0, "metric_label": 0, "memory1": mem_a[0], "memory2": mem_a[1]}),
        (b, {"control": 1, "metric_label": 1, "memory1": mem_b[0], "memory2": mem_b[1]}),
    ], "spin", spin).amplitudes


def test_criterion_5_protocol_exactness(grav_switch, paths_switch, record_criterion):
    worst = 0.0
    for sc in (grav_switch, paths_switch):
        for alpha, beta in AMPS:
            run = q.protocol_run(sc.with_amplitudes(alpha, beta))
            t1, t2 = run.tau_star
            omega = math.pi / (t2 - t1)
            b1 = np.array([1, 1]) / math.sqrt(2)
            b2 = expm(-0.5j * omega * (t2 - t1) * q.SIGMA_Z) @ b1
            psi2 = _template(run.tau_star, alpha, beta, b1, (t1, 0.0), (0.0, t1))
            psi3 = _template(run.tau_star, alpha, beta, b2, (t1, t2), (t2, t1))
            ref = q.referee_transform(run.psi3, run.tau_star)
            expect = _template(run.tau_star, alpha, beta, b2, (t2 - t1, t1 + t2), (t1 - t2, t1 + t2),
                               regs=ref.registers)
            worst = max(worst, np.max(np.abs(run.psi2.amplitudes - psi2)),
                        np.max(np.abs(run.psi3.amplitudes - psi3)),
                        np.max(np.abs(ref.amplitudes - expect)))
    record_criterion(5, worst <= 1e-12, f"max entry error {worst:.1e} over 2 scenarios x 3 amplitude pairs")


def test_criterion_6_postselection_bloch_classes(grav_switch, record_criterion):
    amps = AMPS + [(0.6, 0.8j), (math.cos(0.3), math.sin(0.3) * np.exp(2.1j))]
    prob_err = bloch_err = 0.0
    for alpha, beta in amps:
        run = q.protocol_run(grav_switch.with_amplitudes(alpha, beta))
        eq9 = q.order_qubit_state(q.referee_transform(run.psi3, run.tau_star), run.tau_star, run.b2)
        ps = q.postselect_order_qubit(eq9)
        prob_err = max(prob_err, abs(ps.probability - 0.5))
        # expectations of alpha|+1> + beta|-1>: x + iy = 2 conj(alpha) beta
        c = 2 * np.conj(alpha) * beta
        formula = np.array([c.real, c.imag, abs(alpha) ** 2 - abs(beta) ** 2])
        bloch_err = max(bloch_err, np.max(np.abs(q.tomography(ps.rho).as_array() - formula)))
    canon = {(0, 0, 1): q.OrderClass.DEFINITE, (0, 0, 0.3): q.OrderClass.CLASSICAL_MIXTURE,
             (1, 0, 0): q.OrderClass.PURE_INDEFINITE, (0.3, 0, 0.2): q.OrderClass.MIXED_INDEFINITE}
    classes_ok = all(q.classify_order(b) is c for b, c in canon.items())
    ok = prob_err <= 1e-12 and bloch_err <= 1e-10 and classes_ok
    record_criterion(6, ok, f"|p - 0.5| {prob_err:.1e}, Bloch error {bloch_err:.1e}, "
                            f"canonical classes {'ok' if classes_ok else 'wrong'}")


def test_criterion_7_z_insufficient(record_criterion):
    mix = q.DensityMatrix.mixture([np.array([1, 0]), np.array([0, 1])], [0.5, 0.5])
    sup = q.postselect_order_qubit(q.order_state(R, R)).rho
    bm, bs = q.tomography(mix), q.tomography(sup)
    cm, cs = q.classify_order(bm), q.classify_order(bs)
    ok = abs(bm.z - bs.z) < 1e-12 and cm is not cs
    record_criterion(7, ok, f"z {bm.z:.1e} vs {bs.z:.1e}; classes {cm.value} vs {cs.value}")


def test_criterion_8_proper_time_oracles(record_criterion):
    mink = geo.minkowski(2)
    dilation = wl.proper_time(wl.uniform_velocity([0.0], [0.6], (0, 1)), mink)
    worst = abs(dilation - 0.8)
    for phi in (-0.01, -0.05, 0.02):
        g = geo.weak_field(lambda x, p=phi: np.full(np.shape(x)[:-1], p))
        for dt in (1.0, 2.5):
            tau = wl.proper_time(wl.static([0.3], (0, dt)), g)
            worst = max(worst, abs(tau / dt - math.sqrt(1 + 2 * phi)))
    record_criterion(8, worst <= 1e-9, f"v = 0.6 gives {dilation:.12f}; worst oracle deviation {worst:.1e}")


def test_criterion_9_two_perspectives(grav_switch, paths_switch, record_criterion):
    ok = co.order_product(grav_switch) == co.order_product(paths_switch) == -1
    classes = []
    for alpha, beta in AMPS + [(0.6, 0.8j)]:
        cg = q.order_qubit_summary(grav_switch.with_amplitudes(alpha, beta))["class"]
        cp = q.order_qubit_summary(paths_switch.with_amplitudes(alpha, beta))["class"]
        ok &= cg == cp
        classes.append(cg)
    record_criterion(9, ok, f"products {co.order_product(grav_switch)}/{co.order_product(paths_switch)}, "
                            f"classes {classes}")
