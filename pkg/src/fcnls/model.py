"""Parameters, critical exponents and regime flags.

The equation is

    i u_t - (-Delta)^s u = eps * (I_alpha * |.|^b |u|^p) |x|^b |u|^(p-2) u,

with eps = -1 focusing and eps = +1 defocusing, on R^N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "ProblemParams", "DerivedExponents", "RegimeFlags",
    "validate", "derive", "exponents", "admissible_mask", "riesz_normalization", "regime",
]


@dataclass(frozen=True)
class ProblemParams:
    N: int
    s: float
    b: float
    alpha: float
    p: float
    epsilon: int = -1


@dataclass(frozen=True)
class DerivedExponents:
    s_c: float
    B: float
    A: float
    p_star: float
    p_upper: float
    p_tilde: float
    p_bar: float
    blowup_cap: float


@dataclass(frozen=True)
class RegimeFlags:
    admissible: bool
    intercritical: bool
    lwp_window: bool
    blowup_window: bool
    defocusing_global: bool


# Strictly positive quantities required for admissibility, in check order.
_POSITIVE = (
    ("b_nonnegative", lambda N, s, b, a: -b),
    ("alpha_nonpositive", lambda N, s, b, a: a),
    ("alpha_ge_N", lambda N, s, b, a: N - a),
    ("N_plus_b_le_s", lambda N, s, b, a: N + b - s),
    ("2s_plus_2b_plus_alpha_nonpositive", lambda N, s, b, a: 2 * s + 2 * b + a),
    ("N_plus_alpha_plus_2b_le_2s", lambda N, s, b, a: N + a + 2 * b - 2 * s),
)


def validate(params: ProblemParams) -> ProblemParams:
    """Return ``params`` unchanged or raise ValidationError naming the first violation.

    Boundary values (a quantity equal to zero) are rejected.
    """
    N, s, b, a, p = params.N, params.s, params.b, params.alpha, params.p
    if not isinstance(N, (int, np.integer)) or isinstance(N, bool) or N < 2:
        raise ValidationError("dimension_too_small", f"N={N!r}, need an integer >= 2")
    for name, v in (("s", s), ("b", b), ("alpha", a), ("p", p)):
        if not math.isfinite(v):
            raise ValidationError("nonfinite_parameter", f"{name}={v!r}")
    if not 0.0 < s < 1.0:
        raise ValidationError("s_out_of_range", f"s={s}, need 0 < s < 1")
    if params.epsilon not in (-1, 1):
        raise ValidationError("epsilon_invalid", f"epsilon={params.epsilon!r}")
    if not p > 1.0:
        raise ValidationError("p_le_one", f"p={p}")
    for code, q in _POSITIVE:
        if not q(N, s, b, a) > 0.0:
            raise ValidationError(code, f"value {q(N, s, b, a)!r}")
    return params


def exponents(N, s, b, alpha, p):
    """Critical exponents as a tuple; works elementwise on numpy arrays.

    Order: s_c, B, A, p_star, p_upper, p_tilde, p_bar, blowup_cap.
    """
    g = 2 * s + 2 * b + alpha
    s_c = N / 2 - g / (2 * (p - 1))
    B = (N * p - N - alpha - 2 * b) / s
    A = 2 * p - B
    p_star = 1 + g / N
    p_upper = 1 + g / (N - 2 * s)
    p_tilde = 1 + (2 * b + alpha) / N
    p_bar = 1 + (2 * b + alpha) / (N - 2 * s)
    cap = 1 + alpha / N + 2 * s
    return s_c, B, A, p_star, p_upper, p_tilde, p_bar, cap


def admissible_mask(N, s, b, alpha, p):
    """Elementwise version of ``validate`` for finite numpy inputs."""
    ok = (np.asarray(N) >= 2) & (s > 0) & (s < 1) & (p > 1)
    for _, q in _POSITIVE:
        ok = ok & (q(N, s, b, alpha) > 0)
    return ok


def derive(params: ProblemParams) -> DerivedExponents:
    validate(params)
    return DerivedExponents(*(float(v) for v in exponents(
        params.N, params.s, params.b, params.alpha, params.p)))


def riesz_normalization(N: int, alpha: float) -> float:
    """Constant K with I_alpha(x) = K |x|^(alpha-N), so the symbol is |xi|^(-alpha)."""
    if not 0.0 < alpha < N:
        raise ValidationError("alpha_out_of_range", f"alpha={alpha}, N={N}")
    return math.gamma((N - alpha) / 2) / (
        math.gamma(alpha / 2) * math.pi ** (N / 2) * 2.0 ** alpha)


def regime(params: ProblemParams) -> RegimeFlags:
    try:
        d = derive(params)
    except ValidationError:
        return RegimeFlags(False, False, False, False, False)
    N, s, b, a, p = params.N, params.s, params.b, params.alpha, params.p
    inter = 0.0 < d.s_c < s
    lwp = (max(2.0, d.p_bar) < p < d.p_upper and N < 4 * s + a + 2 * b
           and s >= N / (2 * N - 1))
    blow = inter and p < d.blowup_cap and s > 0.5
    glob = params.epsilon == 1 or p < d.p_star
    return RegimeFlags(True, inter, lwp, blow, glob)
