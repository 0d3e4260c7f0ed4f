"""Strang-split time stepping with energy-controlled step halving and collapse detection."""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .functionals import nonlocal_term, potential
from .model import ProblemParams, regime, validate
from .spectral import Field, fft, homogeneous_norm, ifft, mass
from .virial import build_weight, localized_variance

__all__ = [
    "EvolutionConfig", "TimeSeries", "Status", "RunOutcome",
    "linear_step", "nonlinear_step", "strang_step", "energy", "default_dt", "evolve",
]

log = logging.getLogger(__name__)

CSV_HEADER = ["t", "mass", "energy", "grad_s", "linf", "m_psi", "dt"]


@dataclass(frozen=True)
class EvolutionConfig:
    t_end: float = 1.0
    dt0: float | None = None
    dt_min: float = 1e-8
    blowup_grad_factor: float = 10.0
    blowup_linf_factor: float = 20.0
    record_every: int = 1
    virial_R: float | None = None
    energy_tol: float = 1e-6
    adaptive: bool = True
    dealias: bool = False


@dataclass
class TimeSeries:
    t: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    grad_s: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    m_psi: list = field(default_factory=list)
    dt: list = field(default_factory=list)

    def append(self, **row):
        for k in CSV_HEADER:
            getattr(self, k).append(float(row[k]))

    def __len__(self):
        return len(self.t)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(*(getattr(self, k) for k in CSV_HEADER)):
            w.writerow([repr(v) for v in row])
        return buf.getvalue()


class Status(str, enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUpDetected"
    UNDERFLOW = "StepUnderflow"


@dataclass
class RunOutcome:
    status: Status
    t: float
    final: Field
    series: TimeSeries
    theorem_window: bool
    steps: int = 0
    rejected: int = 0
    metadata: dict = field(default_factory=dict)


def default_dt(params: ProblemParams, grid) -> float:
    """0.1 h^(2s) / pi^(2s): a tenth of the inverse top linear frequency."""
    return 0.1 * grid.h ** (2 * params.s) / math.pi ** (2 * params.s)


def linear_step(u: Field, dt: float, params: ProblemParams) -> Field:
    """Exact flow of i u_t = (-Delta)^s u over dt."""
    g = u.grid
    return Field(g, ifft(np.exp(-1j * dt * g.symbol(2 * params.s)) * fft(u.values)))


def nonlinear_step(u: Field, dt: float, params: ProblemParams) -> Field:
    """Exact flow of i u_t = eps V(|u|) u; |u| and hence V are frozen along it."""
    V = potential(u, params)
    return Field(u.grid, u.values * np.exp(-1j * params.epsilon * dt * V))


def _dealias(u: Field) -> Field:
    g = u.grid
    keep = np.abs(np.fft.fftfreq(g.M) * g.M) <= g.M / 3
    mask = np.ones(g.shape, dtype=bool)
    for axis in range(g.dim):
        shape = [1] * g.dim
        shape[axis] = g.M
        mask = mask & keep.reshape(shape)
    return Field(g, ifft(mask * fft(u.values)))


def strang_step(u: Field, dt: float, params: ProblemParams, dealias: bool = False) -> Field:
    v = linear_step(nonlinear_step(linear_step(u, dt / 2, params), dt, params), dt / 2, params)
    return _dealias(v) if dealias else v


def energy(u: Field, params: ProblemParams) -> tuple:
    """(E, ||(-Delta)^(s/2) u||) for the current sign convention."""
    g = homogeneous_norm(u, params.s)
    return g * g + params.epsilon * nonlocal_term(u, params) / params.p, g


def evolve(u0: Field, params: ProblemParams, cfg: EvolutionConfig) -> RunOutcome:
    validate(params)
    if u0.grid.dim != params.N:
        raise ValidationError("dimension_mismatch", f"grid dim {u0.grid.dim} vs N={params.N}")
    if not cfg.t_end > 0:
        raise ValidationError("bad_t_end", f"t_end={cfg.t_end}")
    grid = u0.grid
    weight = build_weight(grid, cfg.virial_R) if cfg.virial_R else None
    flags = regime(params)
    series = TimeSeries()

    u = Field(grid, u0.values.astype(complex))
    E, gnorm = energy(u, params)
    g0, sup0 = gnorm, float(np.abs(u.values).max())
    if g0 <= 0 or sup0 <= 0:
        raise ValidationError("zero_field")
    dt = cfg.dt0 if cfg.dt0 else default_dt(params, grid)
    t, steps, rejected = 0.0, 0, 0

    def record(step_dt):
        series.append(t=t, mass=mass(u), energy=E, grad_s=gnorm,
                      linf=np.abs(u.values).max(),
                      m_psi=localized_variance(u, weight) if weight else math.nan,
                      dt=step_dt)

    def outcome(status):
        if not series.t or series.t[-1] != t:
            record(dt)
        meta = {"theorem_window": flags.lwp_window, "blowup_window": flags.blowup_window,
                "grad0": g0, "linf0": sup0}
        log.info("%s at t=%.6g after %d steps (%d rejected)", status.value, t, steps, rejected)
        return RunOutcome(status, t, u, series, flags.lwp_window, steps, rejected, meta)

    record(0.0)
    while t < cfg.t_end * (1 - 1e-14):
        step = min(dt, cfg.t_end - t)
        v = strang_step(u, step, params, cfg.dealias)
        if not np.all(np.isfinite(v.values)):
            if gnorm >= cfg.blowup_grad_factor * g0:
                return outcome(Status.BLOWUP)
            raise NumericalError("nonfinite_field", f"t={t:.6g}, dt={step:.3e}")
        E_new, g_new = energy(v, params)
        if cfg.adaptive and abs(E_new - E) > cfg.energy_tol * (1 + abs(E)):
            rejected += 1
            dt = step / 2
            if dt < cfg.dt_min:
                grad_hit = gnorm >= cfg.blowup_grad_factor * g0
                return outcome(Status.BLOWUP if grad_hit else Status.UNDERFLOW)
            continue
        u, E, gnorm = v, E_new, g_new
        t += step
        steps += 1
        if steps % cfg.record_every == 0:
            record(step)
        if (gnorm >= cfg.blowup_grad_factor * g0
                and np.abs(u.values).max() >= cfg.blowup_linf_factor * sup0):
            return outcome(Status.BLOWUP)
    return outcome(Status.COMPLETED)
