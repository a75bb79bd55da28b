"""Timelike worldlines, proper time, coincidence detection and time orientation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.ndimage import minimum_filter

from .errors import ConfigurationError, DegeneracyError, TimelikeViolationError
from .geometry import FD_STEP, MetricField, as_coords
from .quadrature import adaptive_quad

LABELS = ("gamma0", "gamma1", "gamma2")
CROSS_TOL = 1e-8
QUAD_RTOL = 1e-9


@dataclass(frozen=True)
class Worldline:
    """A parametrized curve ``lam -> gamma(lam)`` on ``[lam_i, lam_f]``.

    ``func`` and ``velocity_func`` are vectorized over a 1-D array of
    parameter values. ``breakpoints`` lists parameter values where the
    velocity may jump (waypoints of piecewise-linear curves).
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    lambda_range: tuple[float, float]
    label: str = "gamma0"
    velocity_func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        lo, hi = self.lambda_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ConfigurationError(f"invalid parameter range {self.lambda_range}")
        if self.label not in LABELS:
            raise ConfigurationError(f"unknown worldline label {self.label!r}")

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.func(lam)

    def velocity(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.velocity_func is not None:
            return self.velocity_func(lam)
        return (self.func(lam + FD_STEP) - self.func(lam - FD_STEP)) / (2 * FD_STEP)

    @property
    def initial_point(self):
        return self(self.lambda_range[0])

    @property
    def final_point(self):
        return self(self.lambda_range[1])

    def samples(self, n=256):
        lam = np.linspace(*self.lambda_range, n)
        return lam, self(lam)

    def with_label(self, label):
        return replace(self, label=label)


# --------------------------------------------------------------------------
# families


def static(position, t_range=(0.0, 1.0), label="gamma0"):
    """Worldline at fixed spatial ``position``, parametrized by chart time."""
    x = np.atleast_1d(np.asarray(position, dtype=float))
    return uniform_velocity(x, np.zeros_like(x), t_range, label)


def uniform_velocity(position, velocity, t_range=(0.0, 1.0), label="gamma0", t0=0.0):
    """``(t, position + velocity (t - t0))`` for ``t`` in ``t_range``."""
    x = np.atleast_1d(np.asarray(position, dtype=float))
    v = np.atleast_1d(np.asarray(velocity, dtype=float))
    tangent = np.concatenate([[1.0], v])

    def func(lam):
        lam = np.asarray(lam, dtype=float)
        return np.concatenate([lam[..., None], x + (lam - t0)[..., None] * v], axis=-1)

    def vel(lam):
        return np.broadcast_to(tangent, np.shape(lam) + tangent.shape).copy()

    return Worldline(x.size + 1, func, tuple(map(float, t_range)), label, vel)


def piecewise_linear(waypoints, label="gamma0"):
    """Polygonal worldline through ``waypoints``, parametrized by chart time.

    Each waypoint is ``(t, x, ...)`` with strictly increasing ``t``.
    """
    w = np.asarray(waypoints, dtype=float)
    if w.ndim != 2 or w.shape[0] < 2:
        raise ConfigurationError("need at least two waypoints")
    t = w[:, 0]
    if np.any(np.diff(t) <= 0):
        raise ConfigurationError("waypoint times must increase strictly")
    slopes = np.diff(w[:, 1:], axis=0) / np.diff(t)[:, None]

    def func(lam):
        lam = np.asarray(lam, dtype=float)
        cols = [np.interp(lam, t, w[:, k]) for k in range(1, w.shape[1])]
        # linear extrapolation keeps finite differences valid at the ends
        for k, col in enumerate(cols):
            col = np.where(lam < t[0], w[0, k + 1] + (lam - t[0]) * slopes[0, k], col)
            cols[k] = np.where(lam > t[-1], w[-1, k + 1] + (lam - t[-1]) * slopes[-1, k], col)
        return np.stack([lam, *cols], axis=-1)

    def vel(lam):
        lam = np.asarray(lam, dtype=float)
        seg = np.clip(np.searchsorted(t, lam, side="right") - 1, 0, len(t) - 2)
        return np.concatenate([np.ones(lam.shape + (1,)), slopes[seg]], axis=-1)

    return Worldline(w.shape[1], func, (float(t[0]), float(t[-1])), label, vel, tuple(t[1:-1]))


def sinusoidal(position, amplitude, omega, t_range=(0.0, 1.0), label="gamma0", phase=0.0):
    """``x = position + amplitude sin(omega t + phase)`` along the first spatial axis."""
    x = np.atleast_1d(np.asarray(position, dtype=float))

    def func(lam):
        lam = np.asarray(lam, dtype=float)
        xs = np.broadcast_to(x, lam.shape + x.shape).copy()
        xs[..., 0] += amplitude * np.sin(omega * lam + phase)
        return np.concatenate([lam[..., None], xs], axis=-1)

    def vel(lam):
        lam = np.asarray(lam, dtype=float)
        v = np.zeros(lam.shape + (x.size + 1,))
        v[..., 0] = 1.0
        v[..., 1] = amplitude * omega * np.cos(omega * lam + phase)
        return v

    return Worldline(x.size + 1, func, tuple(map(float, t_range)), label, vel)


# --------------------------------------------------------------------------
# proper time


def interval_density(gamma, g, lam):
    """``-g(gamma(lam))(gamma', gamma')``; positive where the curve is timelike."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    x = gamma(lam)
    v = gamma.velocity(lam)
    return -np.einsum("...i,...ij,...j->...", v, g(x), v)


def check_timelike(gamma, g, n=256):
    """Raise `TimelikeViolationError` unless ``gamma`` is timelike on ``n`` samples."""
    lam = np.linspace(*gamma.lambda_range, n)
    q = interval_density(gamma, g, lam)
    bad = np.nonzero(~(q > 0))[0]
    if bad.size:
        raise TimelikeViolationError(
            f"{gamma.label} is not timelike at lambda = {lam[bad[0]]:.6g}", lam=float(lam[bad[0]])
        )


def proper_time(gamma: Worldline, g: MetricField, lambda_a=None, lambda_b=None, rtol=QUAD_RTOL):
    """Proper time ``int sqrt(-g(gamma', gamma')) dlam`` between two parameter values.

    Defaults to the whole parameter range.

    Raises
    ------
    TimelikeViolationError
        If the integrand is negative anywhere it is evaluated.
    """
    lo, hi = gamma.lambda_range
    a = lo if lambda_a is None else float(lambda_a)
    b = hi if lambda_b is None else float(lambda_b)
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not (lo - slack <= a <= b <= hi + slack):
        raise ConfigurationError(f"need {lo} <= {a} <= {b} <= {hi}")

    def integrand(lam):
        q = interval_density(gamma, g, lam)
        if np.any(q < 0):
            i = int(np.argmin(q))
            raise TimelikeViolationError(
                f"{gamma.label} is spacelike at lambda = {lam[i]:.6g}", lam=float(lam[i])
            )
        return np.sqrt(q)

    return adaptive_quad(integrand, a, b, breakpoints=gamma.breakpoints, rtol=rtol)


# --------------------------------------------------------------------------
# coincidences


@dataclass(frozen=True)
class Coincidence:
    lambda0: float
    lambda_other: float
    point: np.ndarray
    residual: float
    which_system: int


def _refine(gamma0, gamma_i, lam, sig, maxiter=60):
    lo0, hi0 = gamma0.lambda_range
    lo1, hi1 = gamma_i.lambda_range
    for _ in range(maxiter):
        f = gamma0(lam) - gamma_i(sig)
        J = np.stack([gamma0.velocity(lam), -gamma_i.velocity(sig)], axis=-1)
        step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        lam = float(np.clip(lam + step[0], lo0, hi0))
        sig = float(np.clip(sig + step[1], lo1, hi1))
        if np.max(np.abs(step)) < 1e-15 * (1 + abs(lam) + abs(sig)):
            break
    res = float(np.linalg.norm(gamma0(lam) - gamma_i(sig)))
    return lam, sig, res


def detect_coincidences(gamma0: Worldline, gamma_i: Worldline, tol=CROSS_TOL, grid=160):
    """All crossings of ``gamma0`` with ``gamma_i``, sorted by ``lambda0``.

    A coarse ``grid x grid`` scan of the chart-distance table seeds Gauss-Newton
    refinement of ``gamma0(lam) - gamma_i(sig) = 0``. Solutions closer than
    1e-6 in both parameters are merged.
    """
    if gamma0.dim != gamma_i.dim:
        raise ConfigurationError("curves live in different dimensions")
    if not tol > 0:
        raise ConfigurationError("tol must be positive")
    grid = max(int(grid), 128)
    lam = np.linspace(*gamma0.lambda_range, grid)
    sig = np.linspace(*gamma_i.lambda_range, grid)
    p0, pi = gamma0(lam), gamma_i(sig)
    dist = np.linalg.norm(p0[:, None, :] - pi[None, :, :], axis=-1)

    # a true crossing lies within one cell's worth of motion of a grid node
    s0 = np.max(np.linalg.norm(np.diff(p0, axis=0), axis=-1))
    s1 = np.max(np.linalg.norm(np.diff(pi, axis=0), axis=-1))
    reach = 2.0 * (s0 + s1)
    cand = (dist == minimum_filter(dist, size=3, mode="nearest")) & (dist <= reach)

    which = LABELS.index(gamma_i.label) if gamma_i.label in LABELS[1:] else 0
    found = []
    for i, j in zip(*np.nonzero(cand)):
        lam_c, sig_c, res = _refine(gamma0, gamma_i, lam[i], sig[j])
        if res > tol:
            continue
        if any(abs(lam_c - c.lambda0) < 1e-6 and abs(sig_c - c.lambda_other) < 1e-6 for c in found):
            continue
        found.append(Coincidence(lam_c, sig_c, gamma0(lam_c), res, which))
    return sorted(found, key=lambda c: c.lambda0)


# --------------------------------------------------------------------------
# orientation and reparametrization


def orientation_sign(g: MetricField, p, v0, vi) -> bool:
    """True iff ``g(p)(v0, vi) < 0``, i.e. ``vi`` is future pointing relative to ``v0``."""
    x = as_coords(p, g.dim)
    v0 = as_coords(v0, g.dim)
    vi = as_coords(vi, g.dim)
    gp = g(x)
    for v in (v0, vi):
        if np.linalg.norm(v) == 0:
            raise DegeneracyError("zero tangent vector")
        if abs(v @ gp @ v) <= 1e-14 * (v @ v):
            raise DegeneracyError("null tangent vector")
    return bool(v0 @ gp @ vi < 0)


def reparametrize(gamma: Worldline, delta: float) -> Worldline:
    """Shift the parameter: the new curve at ``lam`` is the old one at ``lam - delta``."""
    d = float(delta)
    if d == 0:
        return gamma
    old, oldv = gamma.func, gamma.velocity

    return replace(
        gamma,
        func=lambda lam: old(np.asarray(lam, dtype=float) - d),
        velocity_func=lambda lam: oldv(np.asarray(lam, dtype=float) - d),
        lambda_range=(gamma.lambda_range[0] + d, gamma.lambda_range[1] + d),
        breakpoints=tuple(b + d for b in gamma.breakpoints),
    )
