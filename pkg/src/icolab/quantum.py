"""Operational encoding of causal order in quantum registers.

Registers have a basis labelled by real numbers (recorded proper times for
the memories), so states are dense tensors with one axis per register. The
protocol runs the test particle's spin clock through both crossings in each
branch, lets each agent record the crossing time in a memory, and a referee
maps the two memories to an order qubit ``|s = +1>, |s = -1>``. The order
qubit is then post-selected and characterized by its Bloch vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .causal_order import order_product
from .errors import InvalidStateError, PostSelectionError, ProtocolError
from .scenarios import check_timing

LABEL_TOL = 1e-9
ROLES = ("control", "metric_label", "spin", "memory1", "memory2", "order")

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PLUS_X = np.array([1, 1], dtype=complex) / math.sqrt(2)
MINUS_X = np.array([1, -1], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class LabeledRegister:
    """A register whose orthonormal basis is indexed by distinct real labels."""

    role: str
    labels: tuple[float, ...]

    def __post_init__(self):
        if self.role not in ROLES:
            raise InvalidStateError(f"unknown register role {self.role!r}")
        labels = tuple(float(x) for x in self.labels)
        srt = sorted(labels)
        if any(b - a <= LABEL_TOL for a, b in zip(srt, srt[1:])):
            raise InvalidStateError(f"register {self.role}: labels not distinct: {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self):
        return len(self.labels)

    def index(self, label):
        for i, x in enumerate(self.labels):
            if abs(x - label) <= LABEL_TOL:
                return i
        raise ProtocolError(f"label {label!r} not in register {self.role} {self.labels}")

    def has(self, label):
        return any(abs(x - label) <= LABEL_TOL for x in self.labels)


def qubit(role):
    """Two-level register; index 0 is the ``+1`` eigenvector of ``sigma_z``."""
    return LabeledRegister(role, (1.0, -1.0) if role in ("spin", "order") else (0.0, 1.0))


@dataclass(frozen=True)
class QuantumState:
    registers: tuple[LabeledRegister, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape([r.dim for r in self.registers])
        n = np.linalg.norm(amp)
        if abs(n - 1.0) > 1e-12:
            raise InvalidStateError(f"state norm {n!r} differs from 1")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def roles(self):
        return tuple(r.role for r in self.registers)

    def axis(self, role):
        try:
            return self.roles.index(role)
        except ValueError:
            raise ProtocolError(f"state has no {role} register") from None

    def register(self, role):
        return self.registers[self.axis(role)]

    def amplitude(self, labels):
        """Amplitude of the basis state with ``labels`` (a dict role -> label)."""
        idx = tuple(r.index(labels[r.role]) for r in self.registers)
        return self.amplitudes[idx]

    def vector(self):
        return self.amplitudes.reshape(-1)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def basis_state(registers, labels):
    amp = np.zeros([r.dim for r in registers], dtype=complex)
    amp[tuple(r.index(labels[r.role]) for r in registers)] = 1.0
    return amp


def superpose(registers, terms):
    """State ``sum_k c_k |labels_k>`` from ``terms = [(c_k, labels_k), ...]``."""
    amp = sum(c * basis_state(registers, lab) for c, lab in terms)
    return QuantumState(tuple(registers), amp)


def with_factor(registers, terms, role, vector):
    """Like `superpose` but the register ``role`` carries the fixed ``vector``."""
    others = [r for r in registers if r.role != role]
    base = sum(c * basis_state(others, lab) for c, lab in terms)
    amp = np.multiply.outer(base, np.asarray(vector, dtype=complex))
    axis = [r.role for r in registers].index(role)
    return QuantumState(tuple(registers), np.moveaxis(amp, -1, axis))


def apply_local(state, role, op, control=None):
    """Apply a matrix to one register, optionally only where ``control`` has a given index."""
    ax = state.axis(role)
    amp = state.amplitudes
    moved = np.moveaxis(amp, ax, -1) @ np.asarray(op, dtype=complex).T
    new = np.moveaxis(moved, -1, ax)
    if control is not None:
        cax = state.axis("control")
        mask = np.zeros(amp.shape[cax], dtype=bool)
        mask[control] = True
        shape = [1] * amp.ndim
        shape[cax] = -1
        new = np.where(mask.reshape(shape), new, amp)
    return QuantumState(state.registers, new)


# --------------------------------------------------------------------------
# spin clock and agents


def precession(delta_tau, omega):
    """``exp(-i omega delta_tau sigma_z / 2)``."""
    th = omega * delta_tau
    return np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)])


def spin_evolve(state, delta_tau, omega, control=None):
    """Precess the spin about z by the proper time ``delta_tau``."""
    return apply_local(state, "spin", precession(delta_tau, omega), control)


def agent_record(state, memory, b1, tau_star, control):
    """An agent measures the spin in ``{b1, b1-perp}`` and writes the crossing time.

    Outcome ``b1`` writes ``tau_star[0]``, the orthogonal outcome
    ``tau_star[1]``. The measurement is kept coherent: it is the isometry
    ``|psi>|0> -> P1 |psi>|tau1> + P2 |psi>|tau2>`` on the branch selected by
    ``control``, so it leaves the spin undisturbed whenever the spin is in
    one of the two basis states.
    """
    mreg = state.register(memory)
    i0 = mreg.index(0.0)
    i1, i2 = mreg.index(tau_star[0]), mreg.index(tau_star[1])
    amp = state.amplitudes.copy()
    cax, max_, sax = state.axis("control"), state.axis(memory), state.axis("spin")
    # view with axes (control, memory, spin, rest)
    view = np.moveaxis(amp, (cax, max_, sax), (0, 1, 2))
    branch = view[control]
    occupied = np.delete(branch, i0, axis=0)
    if np.any(np.abs(occupied) > 1e-14):
        raise ProtocolError(f"{memory} already written in branch {control}")
    p1 = np.outer(b1, b1.conj())
    p2 = np.eye(2) - p1
    src = branch[i0]  # (spin, rest)
    branch[i1] = np.tensordot(p1, src, axes=(1, 0))
    branch[i2] = np.tensordot(p2, src, axes=(1, 0))
    branch[i0] = 0.0
    return QuantumState(state.registers, amp)


# --------------------------------------------------------------------------
# protocol


@dataclass(frozen=True)
class ProtocolRun:
    psi1: QuantumState
    psi2: QuantumState
    psi3: QuantumState
    tau_star: tuple[float, float]
    omega: float
    b0: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    memories: tuple[tuple[float, float], tuple[float, float]]


def tuned_omega(tau_star):
    """Precession rate that turns ``b1`` into the orthogonal ``b2`` between the crossings."""
    return math.pi / (tau_star[1] - tau_star[0])


def protocol_registers(tau_star):
    mem = (0.0, *tau_star)
    return (qubit("control"), qubit("metric_label"), qubit("spin"),
            LabeledRegister("memory1", mem), LabeledRegister("memory2", mem))


def _schedule(branch, tau_star):
    """Per crossing in order of proper time: (snapped time, memory role)."""
    first = int(np.argmin(branch.taus))
    labs = (first + 1, 2 - first)
    return [(tau_star[0], f"memory{labs[0]}"), (tau_star[1], f"memory{labs[1]}")]


def protocol_run(scenario, omega=None):
    """Simulate the crossing-time encoding for both branches.

    Each branch evolves under its own schedule, as the controlled operation
    ``|0><0| U_A + |1><1| U_B``. The returned states are ``psi1`` (initial),
    ``psi2`` (after the first crossing) and ``psi3`` (after the second).

    Raises
    ------
    ProtocolError
        If the branches do not share their crossing times or a memory label
        would coincide with the blank label 0.
    """
    try:
        tau_star = check_timing(scenario)
    except Exception as exc:
        raise ProtocolError(f"timing idealization violated: {exc}") from exc
    if order_product(scenario) not in (1, -1):
        raise ProtocolError("scenario has no order product")
    if tau_star[0] <= LABEL_TOL:
        raise ProtocolError("first crossing at the release point clashes with the blank memory label")
    if omega is None:
        omega = tuned_omega(tau_star)

    regs = protocol_registers(tau_star)
    b1 = PLUS_X
    b0 = precession(tau_star[0], omega).conj().T @ b1
    b2 = precession(tau_star[1] - tau_star[0], omega) @ b1
    a, b = scenario.amp_a, scenario.amp_b
    blank = {"memory1": 0.0, "memory2": 0.0}
    psi1 = with_factor(regs, [(a, {"control": 0, "metric_label": 0, **blank}),
                              (b, {"control": 1, "metric_label": 1, **blank})], "spin", b0)

    schedules = [_schedule(br, tau_star) for br in scenario.branches]
    states = []
    state = psi1
    clock = [0.0, 0.0]
    for step in range(2):
        for ctl, sched in enumerate(schedules):
            t, memory = sched[step]
            state = spin_evolve(state, t - clock[ctl], omega, control=ctl)
            clock[ctl] = t
            state = agent_record(state, memory, b1, tau_star, ctl)
        states.append(state)

    memories = tuple(
        tuple(tau_star[[m for _, m in sched].index(f"memory{k}")] for k in (1, 2))
        for sched in schedules
    )
    return ProtocolRun(psi1, states[0], states[1], tau_star, omega, b0, b1, b2, memories)


def run_switch_protocol(scenario, omega=None):
    """Final state ``psi3`` of the encoding protocol."""
    return protocol_run(scenario, omega).psi3


def referee_transform(state, tau_star):
    """Relabel ``|a>_1 |b>_2 -> |b - a>_1 |a + b>_2``.

    The relabelling is injective on pairs of reals, so it maps the product
    basis one-to-one into the product basis of the output registers and is
    an isometry.

    Raises
    ------
    ProtocolError
        If the state has memory support outside ``tau_star``.
    """
    m1, m2 = state.register("memory1"), state.register("memory2")
    ax1, ax2 = state.axis("memory1"), state.axis("memory2")
    amp = np.moveaxis(state.amplitudes, (ax1, ax2), (0, 1))
    for i, a in enumerate(m1.labels):
        for j, b in enumerate(m2.labels):
            if np.any(np.abs(amp[i, j]) > 1e-14) and not (
                any(abs(a - t) <= LABEL_TOL for t in tau_star)
                and any(abs(b - t) <= LABEL_TOL for t in tau_star)
            ):
                raise ProtocolError(f"memory labels ({a}, {b}) outside {tau_star}")

    pairs = [(i, j, b - a, a + b) for i, a in enumerate(m1.labels) for j, b in enumerate(m2.labels)]
    out1 = _merge_labels(p[2] for p in pairs)
    out2 = _merge_labels(p[3] for p in pairs)
    r1, r2 = LabeledRegister("memory1", out1), LabeledRegister("memory2", out2)
    new = np.zeros((r1.dim, r2.dim) + amp.shape[2:], dtype=complex)
    for i, j, d, s in pairs:
        new[r1.index(d), r2.index(s)] = amp[i, j]
    regs = list(state.registers)
    regs[ax1], regs[ax2] = r1, r2
    return QuantumState(tuple(regs), np.moveaxis(new, (0, 1), (ax1, ax2)))


def _merge_labels(values):
    out = []
    for v in sorted(values):
        if not out or v - out[-1] > LABEL_TOL:
            out.append(v)
    return tuple(out)


def schmidt_rank(state, roles, tol=1e-12):
    """Schmidt rank of the split ``roles | rest``."""
    axes = [state.axis(r) for r in roles]
    rest = [i for i in range(state.amplitudes.ndim) if i not in axes]
    amp = np.transpose(state.amplitudes, axes + rest)
    rows = int(np.prod([state.amplitudes.shape[i] for i in axes]))
    sv = np.linalg.svd(amp.reshape(rows, -1), compute_uv=False)
    return int(np.sum(sv > tol))


def order_qubit_state(state, tau_star, spin_state=None):
    """Extract ``alpha |0>|g_A>|s=+1> + beta |1>|g_B>|s=-1>`` after the referee step.

    ``|s = +/-1>`` is ``|+/-(tau*_2 - tau*_1)>`` of memory 1. The spin and
    memory 2 must factor out. When ``spin_state`` is given it fixes the
    phase of the factored spin; otherwise the phase is chosen so that the
    dominant component of the discarded factor is real and positive.

    Raises
    ------
    ProtocolError
        If spin and memory 2 are entangled with the rest, or memory 1 has
        support outside the two order labels.
    """
    gap = tau_star[1] - tau_star[0]
    keep = ["control", "metric_label", "memory1"]
    drop = ["spin", "memory2"]
    if schmidt_rank(state, keep) != 1:
        raise ProtocolError("spin and memory 2 do not factor out")
    axes = [state.axis(r) for r in keep + drop]
    amp = np.transpose(state.amplitudes, axes)
    shp = amp.shape
    mat = amp.reshape(int(np.prod(shp[:3])), -1)
    u, sv, vh = np.linalg.svd(mat)
    v = vh[0].conj()
    if spin_state is not None:
        m2 = state.register("memory2")
        target = np.zeros(m2.dim, dtype=complex)
        target[m2.index(tau_star[0] + tau_star[1])] = 1.0
        ref = np.kron(np.asarray(spin_state, dtype=complex), target)
        overlap = np.vdot(v, ref)
        if abs(abs(overlap) - 1) > 1e-9:
            raise ProtocolError("discarded factor differs from the given spin state")
        v = ref
    else:
        k = int(np.argmax(np.abs(v)))
        v = v * (abs(v[k]) / v[k])
    reduced = (mat @ v.conj()).reshape(shp[:3])

    m1 = state.register("memory1")
    idx = [m1.index(gap), m1.index(-gap)]
    rest = np.delete(reduced, idx, axis=2)
    if np.any(np.abs(rest) > 1e-12):
        raise ProtocolError("memory 1 holds labels other than +/-(tau*_2 - tau*_1)")
    return QuantumState((qubit("control"), qubit("metric_label"), qubit("order")), reduced[:, :, idx])


def order_state(alpha, beta, branch_orders=(1, -1)):
    """``alpha |0>|g_A>|s_A> + beta |1>|g_B>|s_B>`` directly."""
    regs = (qubit("control"), qubit("metric_label"), qubit("order"))
    return superpose(regs, [(alpha, {"control": 0, "metric_label": 0, "order": branch_orders[0]}),
                            (beta, {"control": 1, "metric_label": 1, "order": branch_orders[1]})])


# --------------------------------------------------------------------------
# post-selection and tomography


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise InvalidStateError("density matrix not Hermitian")
        if abs(np.trace(m).real - 1) > 1e-12:
            raise InvalidStateError(f"trace {np.trace(m).real!r} differs from 1")
        if np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))) < -1e-10:
            raise InvalidStateError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, vec):
        v = np.asarray(vec, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def mixture(cls, states, probs):
        if abs(sum(probs) - 1) > 1e-12 or min(probs) < 0:
            raise InvalidStateError("mixture weights must be a probability vector")
        return cls(sum(p * _as_matrix(s) for s, p in zip(states, probs)))


def _as_matrix(s):
    if isinstance(s, DensityMatrix):
        return s.matrix
    if isinstance(s, QuantumState):
        return np.outer(s.vector(), s.vector().conj())
    s = np.asarray(s, dtype=complex)
    return s if s.ndim == 2 else np.outer(s, s.conj())


@dataclass(frozen=True)
class PostSelection:
    rho: DensityMatrix
    probability: float
    failure_probability: float


PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)  # (|0,g_A> + |1,g_B>)/sqrt2


def postselect_order_qubit(state):
    """Project control and metric label onto ``phi_+`` and keep the order qubit.

    ``state`` is a `QuantumState` over (control, metric_label, order) or an
    8x8 matrix in that ordering. The ``phi_-`` outcome is only reported
    through ``failure_probability``.

    Raises
    ------
    PostSelectionError
        If the ``phi_+`` outcome has zero probability.
    """
    rho = _as_matrix(state)
    if rho.shape != (8, 8):
        raise InvalidStateError("expected a state of control, metric label and order qubit")
    proj = np.kron(np.outer(PHI_PLUS, PHI_PLUS.conj()), np.eye(2))
    post = proj @ rho @ proj
    p = float(np.trace(post).real)
    if p <= 1e-15:
        raise PostSelectionError("post-selection on phi_+ has zero probability")
    red = np.einsum("aiaj->ij", (post / p).reshape(4, 2, 4, 2))
    red = 0.5 * (red + red.conj().T)
    return PostSelection(DensityMatrix(red), p, float(np.trace(rho).real) - p)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-9:
            raise InvalidStateError(f"Bloch vector length {self.norm():.6g} exceeds 1")

    def norm(self):
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)

    def as_array(self):
        return np.array([self.x, self.y, self.z])


def tomography(rho, shots=None, rng=None):
    """Expectations of ``sigma_x, sigma_y, sigma_z`` on a qubit density matrix.

    With ``shots`` each expectation is estimated from that many simulated
    projective measurements.
    """
    m = _as_matrix(rho)
    exact = [float(np.trace(m @ s).real) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    if shots is None:
        return BlochVector(*exact)
    rng = np.random.default_rng() if rng is None else rng
    est = [2.0 * rng.binomial(shots, min(1.0, max(0.0, 0.5 * (1 + e)))) / shots - 1.0 for e in exact]
    # three independent +/-1 estimates can leave the unit ball
    n = math.sqrt(sum(e * e for e in est))
    if n > 1:
        est = [e / n for e in est]
    return BlochVector(*est)


def bloch_from_amplitudes(alpha, beta):
    """Bloch vector of ``alpha |s=+1> + beta |s=-1>`` (unnormalized inputs allowed)."""
    n = abs(alpha) ** 2 + abs(beta) ** 2
    c = np.conj(alpha) * beta / n
    return np.array([2 * c.real, 2 * c.imag, (abs(alpha) ** 2 - abs(beta) ** 2) / n])


class OrderClass(enum.Enum):
    DEFINITE = "DefiniteOrder"
    CLASSICAL_MIXTURE = "ClassicalMixture"
    PURE_INDEFINITE = "PureIndefinite"
    MIXED_INDEFINITE = "MixedIndefinite"


def classify_order(b, eps=1e-6):
    """Place a Bloch vector in one of the four regions of the ball.

    Poles are definite order, the rest of the z axis a classical mixture,
    the rest of the sphere a coherent superposition and everything else a
    mixed indefinite order.
    """
    v = b.as_array() if isinstance(b, BlochVector) else np.asarray(b, dtype=float)
    n = float(np.linalg.norm(v))
    if n > 1 + eps:
        raise InvalidStateError(f"Bloch vector length {n:.6g} exceeds 1")
    zhat = np.array([0.0, 0.0, 1.0])
    if min(np.linalg.norm(v - zhat), np.linalg.norm(v + zhat)) < eps:
        return OrderClass.DEFINITE
    if abs(v[0]) < eps and abs(v[1]) < eps and abs(v[2]) < 1 - eps:
        return OrderClass.CLASSICAL_MIXTURE
    if abs(n - 1) < eps:
        return OrderClass.PURE_INDEFINITE
    return OrderClass.MIXED_INDEFINITE


def order_qubit_summary(scenario, omega=None):
    """Run protocol, referee, post-selection and tomography; JSON-ready result."""
    run = protocol_run(scenario, omega)
    out = referee_transform(run.psi3, run.tau_star)
    eq9 = order_qubit_state(out, run.tau_star, spin_state=run.b2)
    ps = postselect_order_qubit(eq9)
    bloch = tomography(ps.rho)
    return {
        "bloch": bloch.as_array().tolist(),
        "class": classify_order(bloch).value,
        "postselect_prob": ps.probability,
        "tau_star": list(run.tau_star),
        "omega": run.omega,
    }
