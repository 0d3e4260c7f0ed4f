"""Localized virial weight and the variance monitor.

The weight psi_R is |x|^2/2 for |x| <= R. On R < r < 2R its radial slope is
r (2 - r/R)^2, which joins the quadratic cap with matching slope, keeps the
radial second derivative <= 1, and vanishes with zero curvature at r = 2R.
Beyond 2R the gradient is zero and psi stays at the constant 11 R^2 / 12.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .functionals import bundle
from .groundstate import symmetrize
from .model import ProblemParams, derive
from .spectral import Field, Grid, gradient, integrate

__all__ = [
    "VirialWeight", "VarianceReport", "radial_profile", "build_weight",
    "localized_variance", "reflection_asymmetry", "variance_report",
    "variance_report_from_series", "bound_rhs",
]


@dataclass(frozen=True, eq=False)
class VirialWeight:
    R: float
    psi: np.ndarray
    grad_psi: tuple
    lap_psi: np.ndarray
    grid: Grid


def radial_profile(r, R: float, N: int):
    """psi, psi', psi'' and Laplacian of psi_R as functions of r."""
    r = np.asarray(r, dtype=float)
    u = r / R
    inner, band = r <= R, (r > R) & (r < 2 * R)
    psi = np.full(r.shape, 11 * R ** 2 / 12)
    d1, d2 = np.zeros(r.shape), np.zeros(r.shape)
    psi[inner], d1[inner], d2[inner] = r[inner] ** 2 / 2, r[inner], 1.0
    ub = u[band]
    psi[band] = R ** 2 * (2 * ub ** 2 - 4 * ub ** 3 / 3 + ub ** 4 / 4 - 5 / 12)
    d1[band] = r[band] * (2 - ub) ** 2
    d2[band] = (2 - ub) * (2 - 3 * ub)
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = d2 + (N - 1) * np.where(r > 0, d1 / r, 1.0)
    return psi, d1, d2, lap


def build_weight(grid: Grid, R: float) -> VirialWeight:
    if not R > 0:
        raise ValidationError("bad_radius", f"R={R}")
    if 2 * R > 0.9 * grid.L:
        raise ValidationError("support_overflow", f"2R={2 * R} > 0.9 L={0.9 * grid.L}")
    psi, d1, _, lap = radial_profile(grid.r, R, grid.dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        over_r = np.where(grid.r > 0, d1 / grid.r, 1.0)
    grads = tuple(over_r * c for c in grid.coords)
    return VirialWeight(R, psi, grads, lap, grid)


def localized_variance(u: Field, weight: VirialWeight) -> float:
    """M_psi[u] = 2 Im int conj(u) grad(psi) . grad(u) dx."""
    du = gradient(u)
    dens = sum(gp * d for gp, d in zip(weight.grad_psi, du))
    return float(2 * np.imag(integrate(u.grid, np.conj(u.values) * dens)))


def reflection_asymmetry(u: Field) -> float:
    a = np.abs(u.values)
    return float(np.abs(a - symmetrize(a)).max() / max(a.max(), 1e-300))


def bound_rhs(params: ProblemParams, energy, grad_s_sq, R: float, eps_hat: float = 0.01,
              c1: float = 1.0, c2: float = 1.0):
    d = derive(params)
    s, N, b, a, p = params.s, params.N, params.b, params.alpha, params.p
    q = p - 1 - a / N
    rem = (c1 / R ** (2 * s) + c2 / R ** ((N - 1 - eps_hat - 2 * b) * q)
           * np.sqrt(grad_s_sq) ** ((1 + eps_hat) / s * q))
    return 2 * s * d.B * energy - 2 * s * (d.B - 2) * grad_s_sq + rem


@dataclass(frozen=True)
class VarianceReport:
    t: np.ndarray
    m_psi: np.ndarray
    dm_dt: np.ndarray
    bound_rhs: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "m_psi", "dm_dt", "bound_rhs"])
        for row in zip(self.t, self.m_psi, self.dm_dt, self.bound_rhs):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _check(params: ProblemParams, u0: Field | None):
    if params.s <= 0.5:
        raise ValidationError("s_too_small", f"s={params.s} <= 1/2")
    if u0 is not None and reflection_asymmetry(u0) >= 1e-6:
        raise ValidationError("not_radial", f"asymmetry {reflection_asymmetry(u0):.2e}")


def _report(t, m, e, g, params, R, **kw) -> VarianceReport:
    t, m = np.asarray(t, float), np.asarray(m, float)
    dm = np.gradient(m, t) if t.size > 2 else np.full_like(t, math.nan)
    return VarianceReport(t, m, dm, bound_rhs(params, np.asarray(e), np.asarray(g), R, **kw))


def variance_report(samples, params: ProblemParams, weight: VirialWeight,
                    **kw) -> VarianceReport:
    """Table from an iterable of (t, u) pairs; derivatives by centered differences."""
    samples = list(samples)
    _check(params, samples[0][1] if samples else None)
    t, m, e, g = [], [], [], []
    for ti, u in samples:
        fb = bundle(u, params)
        t.append(ti)
        m.append(localized_variance(u, weight))
        e.append(fb.energy)
        g.append(fb.grad_s_sq)
    return _report(t, m, e, g, params, weight.R, **kw)


def variance_report_from_series(series, params: ProblemParams, R: float, u0: Field | None = None,
                                **kw) -> VarianceReport:
    """Same table from a recorded evolution series (m_psi column must be present)."""
    _check(params, u0)
    g = np.asarray(series.grad_s) ** 2
    return _report(series.t, series.m_psi, series.energy, g, params, R, **kw)
