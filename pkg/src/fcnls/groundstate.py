"""Ground states of (-Delta)^s phi + phi = (I_alpha * |.|^b |phi|^p) |x|^b |phi|^(p-2) phi.

Computed by Petviashvili iteration with reflection/permutation symmetrization.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .functionals import gn_quotient, nonlocal_term, potential
from .model import ProblemParams, derive
from .spectral import Field, Grid, fft, homogeneous_norm, ifft, mass

__all__ = [
    "GroundState", "PohozaevReport", "solve", "solve_multistart", "residual",
    "gn_constant_formula", "gn_constant_quotient", "pohozaev", "symmetrize",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundState:
    phi: Field
    residual: float
    mass_phi: float
    grad_s_sq_phi: float
    nonlocal_phi: float
    c_gn_formula: float
    c_gn_quotient: float
    iterations: int


@dataclass(frozen=True)
class PohozaevReport:
    grad_over_mass: float
    grad_over_mass_expected: float
    nonlocal_over_grad: float
    nonlocal_over_grad_expected: float
    constraint_rel: float
    nehari_rel: float

    @property
    def max_rel_error(self) -> float:
        return max(abs(self.grad_over_mass / self.grad_over_mass_expected - 1),
                   abs(self.nonlocal_over_grad / self.nonlocal_over_grad_expected - 1))


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Average over coordinate reflections and axis permutations about the box centre."""
    for axis in range(a.ndim):
        a = 0.5 * (a + np.flip(a, axis))
    perms = list(itertools.permutations(range(a.ndim)))
    return sum(np.transpose(a, q) for q in perms) / len(perms)


def _nonlinear(phi: Field, params: ProblemParams) -> np.ndarray:
    return potential(phi, params) * phi.values


def residual(phi: Field, params: ProblemParams, band: float | None = None) -> float:
    """max |L phi - N(phi)| / max |phi|, optionally restricted to |x| <= band."""
    g = phi.grid
    lin = ifft((g.symbol(2 * params.s) + 1) * fft(phi.values))
    err = np.abs(lin - _nonlinear(phi, params))
    if band is not None:
        err = np.where(g.r <= band, err, 0.0)
    return float(err.max() / np.abs(phi.values).max())


def gn_constant_formula(params: ProblemParams, mass_phi: float) -> float:
    """(2p/A) (A/B)^(B/2) ||phi||^(-2(p-1))."""
    d = derive(params)
    if d.A <= 0 or d.B <= 0:
        raise ValidationError("gn_exponents", f"A={d.A}, B={d.B}")
    if not mass_phi > 0:
        raise ValidationError("zero_mass", f"mass={mass_phi}")
    p = params.p
    return 2 * p / d.A * (d.A / d.B) ** (d.B / 2) * mass_phi ** (-(p - 1))


def gn_constant_quotient(phi: Field, params: ProblemParams) -> float:
    return 1.0 / gn_quotient(phi, params)


def _default_init(grid: Grid, width: float = 1.0) -> np.ndarray:
    u = np.exp(-grid.r ** 2 / (2 * width ** 2))
    return u / math.sqrt(grid.h ** grid.dim * np.sum(u ** 2))


def _iterate(params, grid, u, tol, max_iter, sym):
    s, p = params.s, params.p
    Lsym = grid.symbol(2 * s) + 1.0
    gamma = (2 * p - 1) / (2 * p - 2)
    best, stall, res = math.inf, 0, math.inf
    for it in range(max_iter + 1):
        field = Field(grid, u)
        nu = _nonlinear(field, params)
        lu = ifft(Lsym * fft(u)).real
        res = float(np.abs(lu - nu).max() / np.abs(u).max())
        if not math.isfinite(res):
            raise NumericalError("diverged", f"non-finite residual at iteration {it}")
        if res < tol:
            return u, res, it
        stall = stall + 1 if res >= best else 0
        best = min(best, res)
        if stall >= 50:
            raise NumericalError("diverged", f"no progress for 50 iterations, residual {res:.3e}")
        if it == max_iter:
            break
        denom = float(np.sum(nu * u))
        if not denom > 0:
            raise NumericalError("diverged", "non-positive nonlinear pairing")
        mk = float(np.sum(lu * u)) / denom
        u = mk ** gamma * ifft(fft(nu) / Lsym).real
        if sym:
            u = symmetrize(u)
    raise NumericalError("iteration_cap", f"{max_iter} iterations, residual {res:.3e}")


def solve(params: ProblemParams, grid: Grid, init: Field | None = None, tol: float = 1e-9,
          max_iter: int = 2000, symmetrize_each: bool = True, auto_box: bool = False,
          shell_tol: float = 1e-8, max_doublings: int = 2) -> GroundState:
    """Positive radial ground state on ``grid`` (focusing sign regardless of epsilon).

    With ``auto_box`` the box (and M, keeping h) is doubled while the solution
    exceeds ``shell_tol * max(phi)`` on the shell |x| >= 0.9 L.
    """
    d = derive(params)
    if not d.p_tilde < params.p < d.p_upper:
        raise ValidationError("p_outside_range",
                              f"need {d.p_tilde:.6g} < p < {d.p_upper:.6g}, got {params.p}")
    if grid.dim != params.N:
        raise ValidationError("dimension_mismatch", f"grid dim {grid.dim} vs N={params.N}")
    if init is None:
        u = _default_init(grid)
    else:
        if init.grid != grid:
            raise ValidationError("dimension_mismatch", "init lives on another grid")
        u = np.real(init.values).astype(float)
        if mass(init) < 1e-14:
            raise ValidationError("zero_init")
    u, res, its = _iterate(params, grid, u, tol, max_iter, symmetrize_each)
    phi = Field(grid, u)
    if auto_box and max_doublings > 0:
        shell = np.abs(u[grid.r >= 0.9 * grid.L]).max()
        if shell > shell_tol * np.abs(u).max():
            bigger = Grid(grid.dim, 2 * grid.M, 2 * grid.L, grid.offset)
            log.info("ground state touches the box edge (%.2e); doubling L to %g", shell, bigger.L)
            return solve(params, bigger, None, tol, max_iter, symmetrize_each,
                         True, shell_tol, max_doublings - 1)
    m = mass(phi)
    return GroundState(
        phi=phi, residual=res, mass_phi=m,
        grad_s_sq_phi=homogeneous_norm(phi, params.s) ** 2,
        nonlocal_phi=nonlocal_term(phi, params),
        c_gn_formula=gn_constant_formula(params, m),
        c_gn_quotient=gn_constant_quotient(phi, params),
        iterations=its,
    )


def solve_multistart(params: ProblemParams, grid: Grid, widths=(0.5, 1.0, 2.0),
                     rel_tol: float = 1e-6, **kw):
    """Solve from Gaussians of several widths; the flag is True if the masses disagree."""
    states = [solve(params, grid, Field(grid, _default_init(grid, w)), **kw) for w in widths]
    ms = np.array([g.mass_phi for g in states])
    distinct = bool(np.ptp(ms) > rel_tol * ms.mean())
    if distinct:
        log.warning("distinct fixed points found, masses %s", ms)
    return states, distinct


def pohozaev(gs: GroundState, params: ProblemParams) -> PohozaevReport:
    d = derive(params)
    M, G, P = gs.mass_phi, gs.grad_s_sq_phi, gs.nonlocal_phi
    p = params.p
    K = (4 * params.s / params.N) * (G - d.B / (2 * p) * P)
    return PohozaevReport(
        grad_over_mass=G / M, grad_over_mass_expected=d.B / d.A,
        nonlocal_over_grad=P / G, nonlocal_over_grad_expected=2 * p / d.B,
        constraint_rel=abs(K) / (4 * params.s / params.N * G),
        nehari_rel=abs(G + M - P) / P,
    )
