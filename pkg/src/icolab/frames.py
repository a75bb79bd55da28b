"""Local inertial frames at the event points.

After the events of both branches sit at common chart points, a localized
linear normalizer per branch and per event makes both metrics equal to the
Minkowski metric at those points. The lightcones at the events become
definite; the order of the events does not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .causal_order import align_events, apply_quantum_diffeo, event_mismatch
from .errors import ConstructionError, DegeneracyError, NotApplicableError

MINK_TOL = 1e-8


def minkowski_normalizer_at(g: geo.MetricField, p, first_derivative=False) -> geo.Diffeomorphism:
    """Map fixing ``p`` under which the pushed-forward metric at ``p`` is ``eta``.

    With ``g(p) = Q diag(l0, l1, ...) Q^T`` (``l0 < 0 < l1 <= ...``) the map is
    ``x -> p + L (x - p)`` with ``L = diag(sqrt|l|) Q^T``, since then
    ``L^-T g(p) L^-1 = eta``. Eigenvector signs are fixed so the timelike
    direction keeps a positive time component and ``det L > 0``.

    With ``first_derivative=True`` a quadratic term ``+ Gamma(y, y) / 2`` is
    added in the normalized coordinates ``y``, which also cancels the first
    derivatives of the metric at ``p``.

    Raises
    ------
    DegeneracyError
        If ``g(p)`` has an eigenvalue of magnitude below 1e-12 or is not
        Lorentzian.
    """
    x0 = geo.as_coords(p, g.dim)
    gp = g(x0)
    gp = 0.5 * (gp + gp.T)
    lam, q = np.linalg.eigh(gp)
    if np.any(np.abs(lam) < 1e-12):
        raise DegeneracyError("singular metric at the normalization point")
    if np.sum(lam < 0) != 1:
        raise DegeneracyError("metric is not Lorentzian at the normalization point")
    if q[0, 0] < 0:
        q[:, 0] *= -1
    if np.linalg.det(q) < 0:
        q[:, -1] *= -1
    lin = np.diag(np.sqrt(np.abs(lam))) @ q.T
    if not first_derivative:
        return geo.affine(lin, center=x0, name="normalizer")

    gamma = _christoffel(geo.pushforward_metric(geo.affine(lin, center=x0), g), x0)
    dim = g.dim

    def forward(x):
        y = (np.asarray(x, dtype=float) - x0) @ lin.T
        return x0 + y + 0.5 * np.einsum("mab,...a,...b->...m", gamma, y, y)

    def jacobian(x):
        y = (np.asarray(x, dtype=float) - x0) @ lin.T
        dz_dy = np.eye(dim) + np.einsum("mab,...b->...ma", gamma, y)
        return dz_dy @ lin

    def inverse(z):
        return geo.newton_inverse(forward, jacobian, z)

    return geo.Diffeomorphism(dim, forward, inverse, jacobian, "normal_coordinates")


def _christoffel(g, x0, h=1e-5):
    """``Gamma^m_{ab}`` at ``x0`` from central differences of the metric."""
    dim = g.dim
    dg = np.empty((dim, dim, dim))  # dg[c, a, b] = d_c g_ab
    for c in range(dim):
        e = np.zeros(dim)
        e[c] = h
        dg[c] = (g(x0 + e) - g(x0 - e)) / (2 * h)
    ginv = np.linalg.inv(g(x0))
    # low[c, a, b] = Gamma_{c a b} = (d_a g_cb + d_b g_ca - d_c g_ab) / 2
    low = 0.5 * (np.einsum("acb->cab", dg) + np.einsum("bca->cab", dg) - dg)
    return np.einsum("mc,cab->mab", ginv, low)


@dataclass(frozen=True)
class LightconeReport:
    point: np.ndarray
    metric_at_point_a: np.ndarray
    metric_at_point_b: np.ndarray
    deviation_a: float
    deviation_b: float
    lightcone_definite: bool

    def to_dict(self):
        return {
            "point": self.point.tolist(),
            "metric_a": self.metric_at_point_a.tolist(),
            "metric_b": self.metric_at_point_b.tolist(),
            "deviation_a": self.deviation_a,
            "deviation_b": self.deviation_b,
            "lightcone_definite": self.lightcone_definite,
        }


def lightcone_report(scenario, point, tol=MINK_TOL):
    x = np.asarray(point, dtype=float)
    eta = geo.minkowski_matrix(x.size)
    ga = scenario.branch_a.metric(x)
    gb = scenario.branch_b.metric(x)
    da = float(np.max(np.abs(ga - eta)))
    db = float(np.max(np.abs(gb - eta)))
    return LightconeReport(x, ga, gb, da, db, bool(da < tol and db < tol))


def localized_normalizers(branch, points, radius, first_derivative=False):
    """Composite of bump-localized normalizers of ``branch.metric`` at ``points``."""
    maps = [
        geo.make_bump_localized(minkowski_normalizer_at(branch.metric, p, first_derivative), p, radius)
        for p in points
    ]
    return geo.compose(*maps)


def make_lightcones_definite(scenario, radius=None, first_derivative=False, align_tol=1e-7):
    """Align the events, then normalize both metrics at both event points.

    Already aligned scenarios pass through the alignment step unchanged.

    Returns
    -------
    scenario : BranchedScenario
        The transformed scenario.
    reports : tuple of LightconeReport
        One report per event point.

    Raises
    ------
    ConstructionError
        If the normalizing regions around the two points would overlap.
    """
    if event_mismatch(scenario) > align_tol:
        scenario = apply_quantum_diffeo(scenario, *align_events(scenario))
        if event_mismatch(scenario) > align_tol:
            raise NotApplicableError("events could not be aligned")
    p1, p2 = scenario.branch_a.points()
    sep = float(np.linalg.norm(p2 - p1))
    if radius is None:
        radius = 0.25 * sep
    if not 2 * radius < sep:
        raise ConstructionError(
            f"regions of radius {radius:g} around events {sep:g} apart would overlap"
        )
    phis = [localized_normalizers(b, (p1, p2), radius, first_derivative) for b in scenario.branches]
    out = apply_quantum_diffeo(scenario, *phis)
    reports = tuple(lightcone_report(out, p) for p in out.branch_a.points())
    return out, reports
