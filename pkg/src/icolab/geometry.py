"""Points, Lorentzian metric fields and diffeomorphisms on a single chart.

Every manifold is R^D with one global chart, D = 2 (default) or 4, and
geometric units with c = 1. Metric fields and maps are vectorized: they
accept coordinate arrays of shape ``(..., D)`` and return ``(..., D, D)``
or ``(..., D)`` respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ConstructionError, ConvergenceError, DegeneracyError

FD_STEP = 1e-6
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 100


@dataclass(frozen=True)
class SpacetimePoint:
    """A point given by its D chart coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size not in (2, 4) or not np.all(np.isfinite(c)):
            raise ConfigurationError(f"invalid spacetime point {self.coords!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)


def as_coords(p, dim=None):
    """Return a float array from a point or array-like, checking dimension."""
    x = np.asarray(p.coords if isinstance(p, SpacetimePoint) else p, dtype=float)
    if dim is not None and x.shape[-1] != dim:
        raise ConfigurationError(f"expected {dim} coordinates, got shape {x.shape}")
    return x


def minkowski_matrix(dim):
    return np.diag([-1.0] + [1.0] * (dim - 1))


# --------------------------------------------------------------------------
# metric fields


@dataclass(frozen=True)
class MetricField:
    """A Lorentzian metric ``g_{mu nu}(x)`` over the chart.

    ``func`` must be vectorized over leading axes.
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    name: str = "metric"

    def __call__(self, x):
        x = as_coords(x, self.dim)
        return self.func(x)

    def check(self, points, sym_tol=1e-12):
        """Raise `DegeneracyError` unless g is symmetric Lorentzian at ``points``."""
        g = self(np.atleast_2d(as_coords(points, self.dim)))
        asym = np.max(np.abs(g - np.swapaxes(g, -1, -2)))
        if asym > sym_tol * max(1.0, np.max(np.abs(g))):
            raise DegeneracyError(f"{self.name}: metric not symmetric (asymmetry {asym:.2e})")
        eig = np.linalg.eigvalsh(0.5 * (g + np.swapaxes(g, -1, -2)))
        neg = np.sum(eig < 0, axis=-1)
        if np.any(neg != 1) or np.any(np.abs(eig) < 1e-12):
            raise DegeneracyError(f"{self.name}: metric not Lorentzian at some sampled point")


def minkowski(dim=2):
    eta = minkowski_matrix(dim)

    def func(x):
        return np.broadcast_to(eta, x.shape[:-1] + (dim, dim)).copy()

    return MetricField(dim, func, "minkowski")


def constant_metric(matrix, name="constant"):
    m = np.array(matrix, dtype=float)
    dim = m.shape[0]

    def func(x):
        return np.broadcast_to(m, x.shape[:-1] + (dim, dim)).copy()

    return MetricField(dim, func, name)


def point_mass_potential(mass, center, soft=0.05):
    """Softened Newtonian potential ``-m / (|x - center| + soft)``.

    ``center`` holds the spatial coordinates of the source; the returned
    function takes full spacetime coordinates.
    """
    c = np.atleast_1d(np.asarray(center, dtype=float))

    def phi(x):
        r = np.linalg.norm(x[..., 1:] - c, axis=-1)
        return -mass / (r + soft)

    return phi


def weak_field(potential, dim=2, name="weak_field"):
    """Isotropic weak-field metric ``diag(-(1 + 2 Phi), 1 - 2 Phi, ...)``."""

    def func(x):
        p = potential(x)
        g = np.zeros(x.shape[:-1] + (dim, dim))
        g[..., 0, 0] = -(1.0 + 2.0 * p)
        for i in range(1, dim):
            g[..., i, i] = 1.0 - 2.0 * p
        return g

    return MetricField(dim, func, name)


# --------------------------------------------------------------------------
# diffeomorphisms


def fd_jacobian(f, x, step=FD_STEP):
    """Central finite-difference Jacobian ``J[..., i, j] = d f_i / d x_j``."""
    x = np.asarray(x, dtype=float)
    dim = x.shape[-1]
    cols = []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = step
        cols.append((f(x + e) - f(x - e)) / (2.0 * step))
    return np.stack(cols, axis=-1)


def newton_inverse(forward, jacobian, y, x0=None, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER):
    """Solve ``forward(x) = y`` by damped Newton iteration, batched over points."""
    y = np.asarray(y, dtype=float)
    shape = y.shape
    dim = shape[-1]
    yy = y.reshape(-1, dim)
    x = (yy if x0 is None else np.asarray(x0, dtype=float).reshape(-1, dim)).copy()
    r = forward(x) - yy
    rn = np.linalg.norm(r, axis=-1)
    scale = 1.0 + np.linalg.norm(yy, axis=-1)
    for _ in range(maxiter):
        todo = rn > tol * scale
        if not todo.any():
            return x.reshape(shape)
        idx = np.nonzero(todo)[0]
        J = jacobian(x[idx])
        try:
            dx = np.linalg.solve(J, r[idx][..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Jacobian in Newton inverse") from exc
        t = np.ones(idx.size)
        xi = x[idx] - dx
        ri = forward(xi) - yy[idx]
        rni = np.linalg.norm(ri, axis=-1)
        for _ in range(30):
            worse = rni > rn[idx]
            if not worse.any():
                break
            t[worse] *= 0.5
            xi[worse] = x[idx][worse] - t[worse, None] * dx[worse]
            ri[worse] = forward(xi[worse]) - yy[idx][worse]
            rni[worse] = np.linalg.norm(ri[worse], axis=-1)
        x[idx], r[idx], rn[idx] = xi, ri, rni
    if np.any(rn > tol * scale):
        raise ConvergenceError(
            f"Newton inverse did not converge (max residual {rn.max():.2e})"
        )
    return x.reshape(shape)


@dataclass(frozen=True)
class Diffeomorphism:
    """A smooth invertible chart map with its Jacobian ``d x'^mu / d x^nu``."""

    dim: int
    forward: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    inverse: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    jacobian: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    name: str = "diffeo"

    def __call__(self, x):
        return self.forward(as_coords(x, self.dim))

    def check(self, points, tol=1e-9):
        """Verify round trip and Jacobian invertibility on sample points."""
        x = np.atleast_2d(as_coords(points, self.dim))
        back = self.inverse(self.forward(x))
        err = np.max(np.abs(back - x))
        if err > tol:
            raise ConstructionError(f"{self.name}: round-trip error {err:.2e}")
        det = np.linalg.det(self.jacobian(x))
        if np.any(np.abs(det) <= 1e-12):
            raise ConstructionError(f"{self.name}: singular Jacobian at a sample point")


def from_forward(forward, dim, jacobian=None, name="diffeo"):
    """Wrap a forward map; inverse by Newton, Jacobian by central differences if absent."""
    jac = jacobian if jacobian is not None else (lambda x: fd_jacobian(forward, x))

    def inverse(y):
        return newton_inverse(forward, jac, y)

    return Diffeomorphism(dim, forward, inverse, jac, name)


def identity(dim=2):
    eye = np.eye(dim)
    return Diffeomorphism(
        dim,
        lambda x: np.array(x, dtype=float),
        lambda y: np.array(y, dtype=float),
        lambda x: np.broadcast_to(eye, np.shape(x)[:-1] + (dim, dim)).copy(),
        "identity",
    )


def affine(matrix, center=None, shift=None, name="affine"):
    """``x -> center + M (x - center) + shift``."""
    m = np.array(matrix, dtype=float)
    dim = m.shape[0]
    if abs(np.linalg.det(m)) <= 1e-12:
        raise ConstructionError("affine map with singular matrix")
    c = np.zeros(dim) if center is None else as_coords(center, dim)
    s = np.zeros(dim) if shift is None else as_coords(shift, dim)
    minv = np.linalg.inv(m)

    def forward(x):
        return c + (x - c) @ m.T + s

    def inverse(y):
        return c + (y - s - c) @ minv.T

    def jacobian(x):
        return np.broadcast_to(m, np.shape(x)[:-1] + (dim, dim)).copy()

    return Diffeomorphism(dim, forward, inverse, jacobian, name)


def translation(shift):
    s = np.asarray(shift, dtype=float)
    return affine(np.eye(s.size), shift=s, name="translation")


def boost_matrix(v, dim=2, axis=1):
    if not abs(v) < 1:
        raise ConfigurationError(f"boost velocity must satisfy |v| < 1, got {v}")
    gam = 1.0 / np.sqrt(1.0 - v * v)
    m = np.eye(dim)
    m[0, 0] = m[axis, axis] = gam
    m[0, axis] = m[axis, 0] = -gam * v
    return m


def boost(v, dim=2, axis=1, center=None):
    """Lorentz boost with velocity ``v`` along spatial ``axis``."""
    return affine(boost_matrix(v, dim, axis), center=center, name=f"boost({v:g})")


def rotation(angle, dim=2, plane=(0, 1), center=None):
    """Euclidean rotation of the chart in a coordinate plane.

    Not an isometry of any Lorentzian metric; it is just another smooth
    invertible relabelling of points.
    """
    i, j = plane
    m = np.eye(dim)
    c, s = np.cos(angle), np.sin(angle)
    m[i, i], m[i, j], m[j, i], m[j, j] = c, -s, s, c
    return affine(m, center=center, name=f"rotation({angle:g})")


def shear_wave(amplitude, wavenumber=1.0, phase=0.0, dim=2, target=1, source=0):
    """``x_target -> x_target + a sin(k x_source + phase)``; closed-form inverse.

    Invertible for any amplitude because ``x_source`` is left unchanged.
    """
    if target == source:
        raise ConfigurationError("shear_wave needs distinct source and target axes")

    def forward(x):
        y = np.array(x, dtype=float)
        y[..., target] += amplitude * np.sin(wavenumber * x[..., source] + phase)
        return y

    def inverse(y):
        x = np.array(y, dtype=float)
        x[..., target] -= amplitude * np.sin(wavenumber * y[..., source] + phase)
        return x

    def jacobian(x):
        x = np.asarray(x, dtype=float)
        J = np.broadcast_to(np.eye(dim), x.shape[:-1] + (dim, dim)).copy()
        J[..., target, source] = amplitude * wavenumber * np.cos(wavenumber * x[..., source] + phase)
        return J

    return Diffeomorphism(dim, forward, inverse, jacobian, f"shear_wave({amplitude:g})")


def compose(*maps):
    """Mathematical composition: ``compose(f, g)(x) == f(g(x))``."""
    if not maps:
        raise ConfigurationError("compose needs at least one map")
    dim = maps[0].dim
    if any(m.dim != dim for m in maps):
        raise ConfigurationError("cannot compose maps of different dimension")
    if len(maps) == 1:
        return maps[0]
    seq = maps[::-1]  # application order

    def forward(x):
        for m in seq:
            x = m.forward(x)
        return x

    def inverse(y):
        for m in maps:
            y = m.inverse(y)
        return y

    def jacobian(x):
        J = None
        for m in seq:
            Jm = m.jacobian(x)
            J = Jm if J is None else Jm @ J
            x = m.forward(x)
        return J

    return Diffeomorphism(dim, forward, inverse, jacobian, " o ".join(m.name for m in maps))


# --------------------------------------------------------------------------
# localized maps


def bump_weight(rho):
    """``(1 - rho^2)^3`` on ``rho < 1``, zero outside; C^2 at ``rho = 1``."""
    rho = np.asarray(rho, dtype=float)
    return np.where(rho < 1.0, (1.0 - np.minimum(rho, 1.0) ** 2) ** 3, 0.0)


def bump_weight_derivative(rho):
    rho = np.asarray(rho, dtype=float)
    return np.where(rho < 1.0, -6.0 * rho * (1.0 - np.minimum(rho, 1.0) ** 2) ** 2, 0.0)


# max |w'| on [0, 1], attained at rho = 1/sqrt(5)
BUMP_SLOPE = 6.0 / np.sqrt(5.0) * 0.64


def _ball_samples(center, radius, per_axis):
    dim = center.size
    axes = [np.linspace(-1.0, 1.0, per_axis)] * dim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    grid = grid[np.linalg.norm(grid, axis=-1) < 1.0]
    return center + radius * grid


def _certify(phi, center, radius):
    per_axis = 41 if phi.dim == 2 else 9
    pts = _ball_samples(center, radius, per_axis)
    det = np.linalg.det(phi.jacobian(pts))
    if np.any(det <= 1e-12):
        raise ConstructionError(
            f"{phi.name}: localized map loses invertibility inside radius {radius:g}"
        )
    try:
        back = phi.inverse(phi.forward(pts))
    except ConvergenceError as exc:
        raise ConstructionError(f"{phi.name}: inverse failed on sample grid") from exc
    if np.max(np.abs(back - pts)) > 1e-9:
        raise ConstructionError(f"{phi.name}: round trip failed on sample grid")


def make_bump_localized(phi_core, center, radius):
    """Blend ``phi_core`` into the identity outside a coordinate ball.

    ``psi(p) = p + w(|p - center| / radius) (phi_core(p) - p)``. The core must
    fix ``center``; at the center the result agrees with the core to first
    order because ``w'(0) = 0``.

    Raises
    ------
    ConstructionError
        If the blended map is not invertible on a sample grid of the ball.
    """
    c = as_coords(center, phi_core.dim)
    if not radius > 0:
        raise ConfigurationError("radius must be positive")
    if np.max(np.abs(phi_core.forward(c) - c)) > 1e-9:
        raise ConfigurationError("core map must fix the center")
    dim = phi_core.dim
    eye = np.eye(dim)

    def forward(x):
        x = np.asarray(x, dtype=float)
        w = bump_weight(np.linalg.norm(x - c, axis=-1) / radius)
        return x + w[..., None] * (phi_core.forward(x) - x)

    def jacobian(x):
        x = np.asarray(x, dtype=float)
        d = x - c
        r = np.linalg.norm(d, axis=-1)
        rho = r / radius
        w = bump_weight(rho)
        dw = bump_weight_derivative(rho)
        with np.errstate(invalid="ignore", divide="ignore"):
            grad = np.where((r > 0)[..., None], (dw / (radius * r))[..., None] * d, 0.0)
        disp = phi_core.forward(x) - x
        J = eye + w[..., None, None] * (phi_core.jacobian(x) - eye)
        return J + disp[..., :, None] * grad[..., None, :]

    def inverse(y):
        return newton_inverse(forward, jacobian, y)

    phi = Diffeomorphism(dim, forward, inverse, jacobian, f"bump[{phi_core.name}]")
    _certify(phi, c, radius)
    return phi


def bump_shift(center, radius, shift):
    """Move points near ``center`` by ``w(|p - center| / radius) * shift``.

    Invertible when ``|shift| * max|w'| < radius``; checked on construction.
    """
    c = as_coords(center)
    s = as_coords(shift, c.size)
    dim = c.size
    if not radius > 0:
        raise ConfigurationError("radius must be positive")
    if np.linalg.norm(s) * BUMP_SLOPE >= radius:
        raise ConstructionError("bump shift too large for its radius")

    def forward(x):
        x = np.asarray(x, dtype=float)
        w = bump_weight(np.linalg.norm(x - c, axis=-1) / radius)
        return x + w[..., None] * s

    def jacobian(x):
        x = np.asarray(x, dtype=float)
        d = x - c
        r = np.linalg.norm(d, axis=-1)
        dw = bump_weight_derivative(r / radius)
        with np.errstate(invalid="ignore", divide="ignore"):
            grad = np.where((r > 0)[..., None], (dw / (radius * r))[..., None] * d, 0.0)
        return np.eye(dim) + s[:, None] * grad[..., None, :]

    def inverse(y):
        return newton_inverse(forward, jacobian, y)

    return Diffeomorphism(dim, forward, inverse, jacobian, "bump_shift")


# --------------------------------------------------------------------------
# pushforward


def pushforward_metric(phi: Diffeomorphism, g: MetricField) -> MetricField:
    """Metric on the image chart: ``g'(x') = J^-T g(phi^-1(x')) J^-1``."""
    if phi.dim != g.dim:
        raise ConfigurationError(f"dimension mismatch: map {phi.dim}, metric {g.dim}")

    def func(xp):
        x = phi.inverse(xp)
        jinv = np.linalg.inv(phi.jacobian(x))
        return np.einsum("...ma,...mn,...nb->...ab", jinv, g.func(x), jinv)

    return MetricField(g.dim, func, f"{phi.name}_*({g.name})")


def pushforward_curve(phi: Diffeomorphism, gamma):
    """Image worldline ``lam -> phi(gamma(lam))`` with the same parameter values."""
    from .worldlines import Worldline

    if phi.dim != gamma.dim:
        raise ConfigurationError(f"dimension mismatch: map {phi.dim}, curve {gamma.dim}")

    def func(lam):
        return phi.forward(gamma(lam))

    def velocity(lam):
        x = gamma(lam)
        return np.einsum("...ij,...j->...i", phi.jacobian(x), gamma.velocity(lam))

    return Worldline(
        dim=gamma.dim,
        func=func,
        lambda_range=gamma.lambda_range,
        label=gamma.label,
        velocity_func=velocity,
        breakpoints=gamma.breakpoints,
    )


# --------------------------------------------------------------------------
# random maps for invariance sweeps


def random_diffeomorphism(rng, dim=2, anchors=(), scale=1.0, n_bumps=2):
    """Draw a random diffeomorphism from a rich, certifiably invertible family.

    The draw composes a global Lorentz boost or chart rotation, a shear wave,
    localized shifts centered near the ``anchors`` (typically event points)
    and a translation. Every localized piece is certified on construction.
    """
    anchors = [as_coords(a, dim) for a in anchors]
    parts = []
    bumps = []
    if rng.random() < 0.5:
        parts.append(boost(rng.uniform(-0.6, 0.6), dim, axis=int(rng.integers(1, dim))))
    else:
        parts.append(rotation(rng.uniform(-np.pi, np.pi), dim, plane=(0, int(rng.integers(1, dim)))))
    k = rng.uniform(0.5, 3.0) / scale
    target = int(rng.integers(0, dim))
    source = int((target + rng.integers(1, dim)) % dim)
    parts.append(shear_wave(rng.uniform(-0.3, 0.3) * scale, k, rng.uniform(0, 2 * np.pi), dim, target, source))
    for _ in range(n_bumps):
        if anchors:
            base = anchors[int(rng.integers(len(anchors)))]
        else:
            base = np.zeros(dim)
        radius = scale * rng.uniform(0.3, 1.0)
        center = base + rng.normal(size=dim) * 0.3 * radius
        direction = rng.normal(size=dim)
        direction /= np.linalg.norm(direction)
        shift = direction * rng.uniform(0.05, 0.45) * radius / BUMP_SLOPE
        bumps.append(bump_shift(center, radius, shift))
    parts.append(translation(rng.normal(size=dim) * scale))
    rng.shuffle(parts)
    # bumps act first, while the anchors are still where they were drawn
    return compose(*parts, *bumps)
