"""Conserved quantities, the Gagliardo-Nirenberg quotient and threshold indicators."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import ProblemParams, derive
from .spectral import Field, homogeneous_norm, integrate, mass, riesz_convolve, weight_pow

__all__ = [
    "FunctionalBundle", "Indicators", "nonlinear_density", "potential",
    "nonlocal_term", "bundle", "gn_quotient", "indicators",
]


@dataclass(frozen=True)
class FunctionalBundle:
    mass: float
    grad_s_sq: float
    nonlocal_: float
    energy: float
    action: float
    constraint: float
    h_value: float


@dataclass(frozen=True)
class Indicators:
    me: float
    g: float


def nonlinear_density(u: Field, params: ProblemParams) -> Field:
    """f = |x|^b |u|^p (real)."""
    w = weight_pow(u.grid, params.b)
    return Field(u.grid, w * np.abs(u.values) ** params.p)


def potential(u: Field, params: ProblemParams) -> np.ndarray:
    """Real V with (I_alpha * |.|^b |u|^p) |x|^b |u|^(p-2) u = V u."""
    f = nonlinear_density(u, params)
    conv = riesz_convolve(f, params.alpha).values
    w = weight_pow(u.grid, params.b)
    return conv * w * np.abs(u.values) ** (params.p - 2)


def nonlocal_term(u: Field, params: ProblemParams) -> float:
    """P(u) = int (I_alpha * |.|^b |u|^p) |x|^b |u|^p dx."""
    f = nonlinear_density(u, params)
    conv = riesz_convolve(f, params.alpha)
    return float(integrate(u.grid, conv.values * f.values))


def bundle(u: Field, params: ProblemParams) -> FunctionalBundle:
    d = derive(params)
    m = mass(u)
    g = homogeneous_norm(u, params.s) ** 2
    P = nonlocal_term(u, params)
    p = params.p
    return FunctionalBundle(
        mass=m,
        grad_s_sq=g,
        nonlocal_=P,
        energy=g + params.epsilon * P / p,
        action=m + g - P / p,
        constraint=(4 * params.s / params.N) * (g - d.B / (2 * p) * P),
        h_value=m + (d.B - 2) / (2 * p) * P,
    )


def gn_quotient(u: Field, params: ProblemParams, correct: bool = False) -> float:
    """J(u) = ||u||^A ||(-Delta)^(s/2) u||^B / P(u).

    ``correct`` is passed to homogeneous_norm; leave it off when J must be
    consistent with the discrete ground state.
    """
    d = derive(params)
    m = mass(u)
    if m < 1e-14:
        raise ValidationError("zero_field", f"mass={m:.3e}")
    P = nonlocal_term(u, params)
    if not P > 0:
        raise ValidationError("zero_nonlocal", f"P={P:.3e}")
    g = homogeneous_norm(u, params.s, correct)
    return math.sqrt(m) ** d.A * g ** d.B / P


def indicators(u0: Field, phi: Field, params: ProblemParams) -> Indicators:
    """Scale-invariant mass-energy and gradient indicators relative to phi."""
    d = derive(params)
    s, sc = params.s, d.s_c
    b0, bp = bundle(u0, params), bundle(phi, params)
    if bp.mass <= 0 or bp.grad_s_sq <= 0:
        raise ValidationError("zero_ground_state")
    if b0.energy < 0:
        raise ValidationError("negative_energy", f"E(u0)={b0.energy:.6g}")
    if bp.energy <= 0:
        raise ValidationError("zero_ground_state", f"E(phi)={bp.energy:.6g}")
    me = (b0.energy ** sc * b0.mass ** (s - sc)) / (bp.energy ** sc * bp.mass ** (s - sc))
    gi = (math.sqrt(b0.grad_s_sq) ** sc * math.sqrt(b0.mass) ** (s - sc)) / (
        math.sqrt(bp.grad_s_sq) ** sc * math.sqrt(bp.mass) ** (s - sc))
    return Indicators(me=me, g=gi)
