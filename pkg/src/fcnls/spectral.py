"""Periodic box discretization, Fourier multipliers and the Riesz potential.

Grid nodes sit at x_j = -L + (j + 1/2) h (offset grid, the default) or
x_j = -L + j h, with h = 2L/M. Offset grids never sample the origin, which
keeps the singular weight |x|^b finite at every node.
"""
from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft as sfft
from scipy.integrate import quad
from scipy.special import gammaln, jv

from .errors import ValidationError
from .model import riesz_normalization

__all__ = [
    "Grid", "Field", "Multiplier", "workers", "fft", "ifft", "apply_symbol", "frac_laplacian",
    "gradient", "riesz_multiplier", "riesz_convolve", "radial_kernel_integral",
    "weight_pow", "origin_weight", "integer_lattice_zeta", "integrate", "mass", "homogeneous_norm",
]


# Per-axis resolution cap in three dimensions; the padded Riesz transform
# needs (2M)^3 complex samples.
MAX_M_3D = 128


def workers() -> int:
    """FFT worker count, capped by the FCNLS_THREADS environment variable."""
    try:
        n = int(os.environ.get("FCNLS_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, min(n, os.cpu_count() or 1))


def fft(a):
    return sfft.fftn(a, workers=workers())


def ifft(a):
    return sfft.ifftn(a, workers=workers())


@dataclass(frozen=True)
class Grid:
    dim: int
    M: int
    L: float
    offset: bool = True

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValidationError("bad_dimension", f"dim={self.dim}, need 2 or 3")
        M = self.M
        if not isinstance(M, (int, np.integer)) or M < 16 or M & (M - 1):
            raise ValidationError("bad_resolution", f"M={M}, need a power of two >= 16")
        if self.dim == 3 and M > MAX_M_3D:
            raise ValidationError("grid_too_large", f"M={M} > {MAX_M_3D} in three dimensions")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValidationError("bad_box", f"L={self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.dim

    @functools.cached_property
    def x(self) -> np.ndarray:
        shift = 0.5 if self.offset else 0.0
        return -self.L + (np.arange(self.M) + shift) * self.h

    @functools.cached_property
    def coords(self) -> tuple:
        return tuple(np.meshgrid(*([self.x] * self.dim), indexing="ij", sparse=True))

    @functools.cached_property
    def r(self) -> np.ndarray:
        return np.sqrt(sum(c ** 2 for c in self.coords))

    @functools.cached_property
    def xi(self) -> np.ndarray:
        """Angular wave numbers pi k / L in FFT order."""
        return 2 * np.pi * sfft.fftfreq(self.M, d=self.h)

    @functools.cached_property
    def wavevectors(self) -> tuple:
        return tuple(np.meshgrid(*([self.xi] * self.dim), indexing="ij", sparse=True))

    @functools.cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(sum(k ** 2 for k in self.wavevectors))

    def symbol(self, order: float) -> np.ndarray:
        """|xi|^order on the full spectrum; the zero mode is 0 for order > 0."""
        return _symbol(self, float(order))

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape, dtype=complex))

    def field(self, f: Callable) -> "Field":
        """Sample f(*coords) on the grid."""
        return Field(self, np.broadcast_to(f(*self.coords), self.shape).copy())


@functools.lru_cache(maxsize=8)
def _symbol(grid: Grid, order: float) -> np.ndarray:
    if order == 0.0:
        return np.ones(grid.shape)
    return grid.xi_abs ** order


@dataclass(frozen=True, eq=False)
class Field:
    """Samples of a function on a grid (values indexed [i, j(, k)] = axes x, y(, z))."""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValidationError(
                "shape_mismatch", f"values {self.values.shape} vs grid {self.grid.shape}")

    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def scaled(self, c) -> "Field":
        return Field(self.grid, c * self.values)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)


@dataclass(frozen=True, eq=False)
class Multiplier:
    """Real non-negative Fourier symbol on the grid's frequency lattice."""
    grid: Grid
    symbol: np.ndarray

    def __post_init__(self):
        if self.symbol.shape != self.grid.shape:
            raise ValidationError("shape_mismatch", f"symbol {self.symbol.shape}")
        if not (np.all(np.isfinite(self.symbol)) and np.all(self.symbol >= 0)):
            raise ValidationError("bad_symbol", "symbol must be finite and non-negative")

    def __call__(self, u: Field) -> Field:
        return apply_symbol(u, self.symbol)


def apply_symbol(u: Field, symbol: np.ndarray) -> Field:
    out = ifft(symbol * fft(u.values))
    return Field(u.grid, out.real if u.is_real else out)


def frac_laplacian(u: Field, order: float) -> Field:
    """Multiply the spectrum by |xi|^order, so order = 2s gives (-Delta)^s."""
    if order < 0:
        raise ValidationError("negative_order", f"order={order}")
    return apply_symbol(u, u.grid.symbol(order))


def gradient(u: Field) -> list:
    """Spectral partial derivatives; the Nyquist mode is dropped."""
    g = u.grid
    uh = fft(u.values)
    k1 = g.xi.copy()
    k1[g.M // 2] = 0.0
    out = []
    for axis in range(g.dim):
        shape = [1] * g.dim
        shape[axis] = g.M
        d = ifft(1j * k1.reshape(shape) * uh)
        out.append(d.real if u.is_real else d)
    return out


def integrate(grid: Grid, a: np.ndarray):
    return grid.h ** grid.dim * np.sum(a)


def mass(u: Field) -> float:
    return float(integrate(u.grid, np.abs(u.values) ** 2))


def homogeneous_norm(u: Field, sigma: float, correct: bool = False) -> float:
    """||(-Delta)^(sigma/2) u||_2 evaluated from the discrete spectrum (Parseval).

    The frequency sum is a Riemann sum of |xi|^(2 sigma) |u^|^2, whose
    kink at xi = 0 costs O((pi/L)^(N + 2 sigma)). ``correct=True`` removes
    that term and the next one with Epstein zeta values of the integer
    lattice, using the moments of u; useful when comparing against
    continuum values on a modest box.
    """
    g = u.grid
    uh = fft(u.values)
    w = np.abs(uh) ** 2 * g.symbol(2 * sigma)
    total = float(np.sum(w) * g.h ** g.dim / g.M ** g.dim)
    if correct and sigma > 0:
        N, e, dxi = g.dim, 2 * sigma, math.pi / g.L
        m0 = integrate(g, u.values)
        m1 = [integrate(g, x * u.values) for x in g.coords]
        m2 = integrate(g, g.r ** 2 * u.values)
        # |u^|^2 and its Laplacian at xi = 0
        g0 = abs(m0) ** 2
        lap0 = 2 * sum(abs(m) ** 2 for m in m1) - 2 * (np.conj(m0) * m2).real
        total -= (integer_lattice_zeta(N, e) * g0 * dxi ** (N + e)
                  + integer_lattice_zeta(N, e + 2) * lap0 / (2 * N) * dxi ** (N + e + 2)
                  ) / (2 * math.pi) ** N
    return math.sqrt(max(total, 0.0))


# ---------------------------------------------------------------- Riesz kernel

def radial_kernel_integral(z, N: int, alpha: float, z0: float = 2.0) -> np.ndarray:
    """G(z) = int_0^z t^(alpha - N/2) J_(N/2-1)(t) dt.

    Power series below z0, above it cumulative 20-point Gauss-Legendre over
    unit panels merged with the requested abscissae.
    """
    mu, nu = alpha - N / 2, N / 2 - 1
    z = np.asarray(z, dtype=float)
    u, inv = np.unique(z.ravel(), return_inverse=True)
    res = np.empty_like(u)

    def series(zz):
        acc = np.zeros_like(zz)
        for k in range(40):
            c = (-1) ** k * np.exp(-gammaln(k + 1) - gammaln(k + nu + 1)) / 2.0 ** (2 * k + nu)
            e = 2 * k + mu + nu + 1
            acc += c * zz ** e / e
        return acc

    small = u <= z0
    res[small] = series(u[small])
    big = u[~small]
    if big.size:
        base = series(np.array([z0]))[0]
        pts = np.unique(np.concatenate(
            [[z0], big, np.arange(math.ceil(z0), big.max(), 1.0)]))
        gx, gw = np.polynomial.legendre.leggauss(20)
        lo, hi = pts[:-1], pts[1:]
        half = 0.5 * (hi - lo)
        t = half[:, None] * gx[None, :] + 0.5 * (lo + hi)[:, None]
        seg = half * ((t ** mu * jv(nu, t)) @ gw)
        cum = base + np.concatenate([[0.0], np.cumsum(seg)])
        res[~small] = cum[np.searchsorted(pts, big)]
    return res[inv].reshape(z.shape)


def riesz_multiplier(grid: Grid, alpha: float, half: bool = False) -> np.ndarray:
    """Fourier coefficients of I_alpha restricted to |x| < 2L on the doubled grid.

    The field is zero-padded to (2M)^dim cells of period 4L. Periodic images
    then sit at least 2L away from every point of the box, beyond the cutoff,
    so the circular convolution reproduces the truncated kernel on the box.
    ``half`` returns the rfftn layout.
    """
    return _riesz_multiplier(grid, float(alpha), bool(half))


@functools.lru_cache(maxsize=4)
def _riesz_multiplier(grid: Grid, alpha: float, half: bool) -> np.ndarray:
    N, n = grid.dim, 2 * grid.M
    P, R = 4.0 * grid.L, 2.0 * grid.L
    k1 = 2 * np.pi * sfft.fftfreq(n, d=P / n)
    axes = [k1] * N
    if half:
        axes[-1] = 2 * np.pi * sfft.rfftfreq(n, d=P / n)
    ks = np.meshgrid(*axes, indexing="ij", sparse=True)
    k = np.sqrt(sum(q ** 2 for q in ks))
    K = riesz_normalization(N, alpha)
    m = np.empty(k.shape)
    nz = k > 0
    m[nz] = K * (2 * np.pi) ** (N / 2) * k[nz] ** (-alpha) * radial_kernel_integral(
        k[nz] * R, N, alpha)
    sphere = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    m[~nz] = K * sphere * R ** alpha / alpha
    return m


def riesz_convolve(f: Field, alpha: float) -> Field:
    """I_alpha * f for f supported in the box, with the kernel cut at radius 2L."""
    g = f.grid
    n = 2 * g.M
    crop = (slice(0, g.M),) * g.dim
    if f.is_real:
        spec = sfft.rfftn(f.values, s=(n,) * g.dim, workers=workers())
        out = sfft.irfftn(riesz_multiplier(g, alpha, half=True) * spec,
                          s=(n,) * g.dim, workers=workers())
    else:
        spec = sfft.fftn(f.values, s=(n,) * g.dim, workers=workers())
        out = sfft.ifftn(riesz_multiplier(g, alpha) * spec, workers=workers())
    return Field(g, np.ascontiguousarray(out[crop]))


# ------------------------------------------------------------ singular weights

def _theta(t: float) -> float:
    """sum over j in Z of exp(-t (j + 1/2)^2)."""
    if t < 1.0:
        k = np.arange(1, 8)
        return math.sqrt(math.pi / t) * (1 + 2 * np.sum((-1.0) ** k * np.exp(-np.pi ** 2 * k ** 2 / t)))
    j = np.arange(0, 40)
    return 2 * float(np.sum(np.exp(-t * (j + 0.5) ** 2)))


@functools.lru_cache(maxsize=None)
def _lattice_zeta(N: int, e: float) -> float:
    """Finite part of sum over the half-integer lattice of |x|^e, for -N < e < 0."""
    def f(t):
        return t ** (-e / 2 - 1) * (_theta(t) ** N - (math.pi / t) ** (N / 2))
    v = (quad(f, 0, 1, limit=200, epsabs=1e-15)[0]
         + quad(f, 1, np.inf, limit=200, epsabs=1e-15)[0])
    return v / math.gamma(-e / 2)


def _theta3(t: float) -> float:
    """sum over j in Z of exp(-t j^2)."""
    if t < 1.0:
        k = np.arange(1, 8)
        return math.sqrt(math.pi / t) * (1 + 2 * np.sum(np.exp(-np.pi ** 2 * k ** 2 / t)))
    j = np.arange(1, 40)
    return 1 + 2 * float(np.sum(np.exp(-t * j ** 2)))


@functools.lru_cache(maxsize=None)
def integer_lattice_zeta(N: int, e: float) -> float:
    """Continued value of sum over nonzero k in Z^N of |k|^e, for e > 0.

    It is the leading error coefficient of the Riemann sum of |x|^e g(x)
    on a lattice through the origin: sum - integral ~ Z g(0) h^(N+e).
    """
    if e <= 0:
        raise ValidationError("bad_exponent", f"e={e} must be positive")
    if float(e / 2).is_integer():
        return 0.0

    def f(t):
        return t ** (-e / 2 - 1) * (_theta3(t) ** N - 1)

    def g(t):
        # theta3^N - (pi/t)^(N/2) without cancellation
        k = np.arange(1, 8)
        tail = 2 * np.sum(np.exp(-np.pi ** 2 * k ** 2 / t))
        return t ** (-e / 2 - 1) * (math.pi / t) ** (N / 2) * math.expm1(N * math.log1p(tail))

    v = (quad(f, 1, np.inf, limit=200, epsabs=1e-15)[0]
         + quad(g, 0, 1, limit=200, epsabs=1e-15)[0]
         - math.pi ** (N / 2) / ((e + N) / 2) + 2 / e)
    return v / math.gamma(-e / 2)


@functools.lru_cache(maxsize=None)
def _unit_cell_average(N: int, e: float) -> float:
    """Mean of |x|^e over [0,1]^N via the pyramid decomposition."""
    gx, gw = np.polynomial.legendre.leggauss(120)
    gx, gw = 0.5 * (gx + 1), 0.5 * gw
    if N == 2:
        inner = np.sum(gw * (1 + gx ** 2) ** (e / 2))
    else:
        v0, v1 = np.meshgrid(gx, gx, indexing="ij")
        inner = np.sum(np.outer(gw, gw) * (1 + v0 ** 2 + v1 ** 2) ** (e / 2))
    return N / (e + N) * float(inner)


def origin_weight(N: int, e: float, h: float, rule: str = "zeta") -> float:
    """Weight at each of the 2^N nodes touching the origin on an offset grid.

    ``"zeta"`` picks the value that makes the midpoint rule for |x|^e g(x)
    consistent to high order for smooth g; ``"cell"`` uses the cell average.
    """
    if rule == "cell":
        return h ** e * _unit_cell_average(N, e)
    if rule == "zeta":
        return h ** e * ((N / 4) ** (e / 2) - _lattice_zeta(N, e) / 2 ** N)
    raise ValidationError("unknown_rule", rule)


def weight_pow(grid: Grid, exponent: float, rule: str = "zeta") -> np.ndarray:
    """Samples of |x|^exponent with a corrected value next to the origin."""
    return _weight_pow(grid, float(exponent), rule)


@functools.lru_cache(maxsize=8)
def _weight_pow(grid: Grid, e: float, rule: str) -> np.ndarray:
    if e >= 0:
        return grid.r ** e
    if not grid.offset:
        raise ValidationError("singular_node", "negative exponent needs an offset grid")
    if e <= -grid.dim:
        raise ValidationError("not_integrable", f"exponent {e} <= -{grid.dim}")
    w = grid.r ** e
    c = grid.M // 2
    w[(slice(c - 1, c + 1),) * grid.dim] = origin_weight(grid.dim, e, grid.h, rule)
    w.setflags(write=False)
    return w
