"""Threshold classifier and experiment drivers."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FCNLSError, ValidationError
from .evolution import EvolutionConfig, Status, evolve
from .functionals import bundle, indicators, nonlocal_term
from .groundstate import GroundState
from .model import ProblemParams, derive, regime
from .spectral import Field, Grid, homogeneous_norm, mass

__all__ = [
    "Verdict", "DichotomyRow", "DichotomyReport", "classify", "dichotomy_sweep",
    "gn_sweep", "random_fields", "running_median_bounded", "energy_convergence",
]

log = logging.getLogger(__name__)

GLOBAL, BLOWUP, UNDETERMINED = "Global", "BlowUp", "Undetermined"


@dataclass(frozen=True)
class Verdict:
    label: str
    me: float | None = None
    g: float | None = None
    reason: str = ""


def classify(u0: Field, gs: GroundState, params: ProblemParams, tol: float = 1e-9) -> Verdict:
    flags = regime(params)
    if not flags.admissible:
        return Verdict(UNDETERMINED, reason="inadmissible parameters")
    if flags.defocusing_global:
        return Verdict(GLOBAL, reason="defocusing or mass-subcritical")
    if bundle(u0, params).energy < 0:
        if flags.blowup_window:
            return Verdict(BLOWUP, reason="negative energy")
        return Verdict(UNDETERMINED, reason="negative energy outside blow-up window")
    if not flags.intercritical:
        return Verdict(UNDETERMINED, reason="not intercritical")
    ind = indicators(u0, gs.phi, params)
    me, g = ind.me, ind.g
    if abs(me - 1) <= tol:
        return Verdict(UNDETERMINED, me, g, "ME=1 boundary")
    if me > 1:
        return Verdict(UNDETERMINED, me, g, "ME>=1 outside theorem hypotheses")
    if abs(g - 1) <= tol:
        return Verdict(UNDETERMINED, me, g, "G=1 boundary")
    if g < 1:
        return Verdict(GLOBAL, me, g, "ME<1 and G<1")
    if flags.blowup_window:
        return Verdict(BLOWUP, me, g, "ME<1 and G>1")
    return Verdict(UNDETERMINED, me, g, "G>1 outside blow-up window")


def running_median_bounded(values, factor: float = 2.0) -> bool:
    """True if every entry is at most ``factor`` times the median of the entries so far."""
    v = np.asarray(values, dtype=float)
    return all(v[i] <= factor * np.median(v[:i + 1]) for i in range(v.size))


@dataclass
class DichotomyRow:
    scale: float
    me: float | None
    g: float | None
    predicted: Verdict
    observed: str
    max_grad_s: float
    t_final: float
    bounded: bool = True
    error: str = ""

    @property
    def mismatch(self) -> bool:
        if self.error:
            return False
        if self.predicted.label == GLOBAL:
            return not (self.observed == Status.COMPLETED.value and self.bounded)
        if self.predicted.label == BLOWUP:
            return self.observed != Status.BLOWUP.value
        return False

    @property
    def flag(self) -> str:
        if self.error:
            return "ERROR"
        if self.mismatch:
            return "MISMATCH"
        return "ok" if self.predicted.label != UNDETERMINED else "info"


@dataclass
class DichotomyReport:
    rows: list = field(default_factory=list)

    @property
    def mismatches(self) -> int:
        return sum(r.mismatch for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale", "me", "g", "predicted", "reason", "observed",
                    "max_grad_s", "t_final", "flag"])
        fmt = lambda v: "" if v is None else repr(float(v))
        for r in self.rows:
            w.writerow([fmt(r.scale), fmt(r.me), fmt(r.g), r.predicted.label, r.predicted.reason,
                        r.observed, fmt(r.max_grad_s), fmt(r.t_final), r.flag])
        return buf.getvalue()


def dichotomy_sweep(params: ProblemParams, scales, cfg: EvolutionConfig,
                    gs: GroundState) -> DichotomyReport:
    """Classify and evolve u0 = lambda * phi for each scale; mismatches are flagged."""
    if params.epsilon != -1:
        raise ValidationError("not_focusing", "the sweep is defined for the focusing sign")
    report = DichotomyReport()
    for lam in scales:
        u0 = gs.phi.scaled(float(lam))
        try:
            v = classify(u0, gs, params)
            out = evolve(u0, params, cfg)
            g = out.series.array("grad_s")
            row = DichotomyRow(float(lam), v.me, v.g, v, out.status.value, float(g.max()),
                               out.t, running_median_bounded(g))
        except FCNLSError as exc:
            log.warning("scale %g failed: %s", lam, exc)
            row = DichotomyRow(float(lam), None, None, Verdict(UNDETERMINED, reason="error"),
                               "", math.nan, math.nan, False, exc.code)
        log.info("scale %g: predicted %s, observed %s, %s", lam, row.predicted.label,
                 row.observed, row.flag)
        report.rows.append(row)
    return report


def random_fields(grid: Grid, n: int, seed: int):
    """Seeded Gaussian envelopes times random low-order modulations."""
    rng = np.random.default_rng(seed)
    k0 = np.pi / grid.L
    X = grid.coords
    for _ in range(n):
        width = rng.uniform(0.3, 2.0)
        centre = rng.uniform(-0.15, 0.15, grid.dim) * grid.L
        r2 = sum((x - c) ** 2 for x, c in zip(X, centre))
        env = np.exp(-r2 / (2 * width ** 2))
        mod = np.ones(grid.shape, dtype=complex)
        for _ in range(rng.integers(0, 4)):
            k = rng.integers(-4, 5, grid.dim) * k0
            phase = sum(kk * x for kk, x in zip(k, X)) + rng.uniform(0, 2 * np.pi)
            mod = mod + rng.uniform(0, 0.5) * np.exp(1j * phase)
        yield Field(grid, rng.uniform(0.5, 2.0) * env * mod)


def gn_sweep(params: ProblemParams, n_samples: int, seed: int, gs: GroundState,
             constant: str = "quotient") -> float:
    """Max over random fields of P(u) / (C ||u||^A ||(-Delta)^(s/2) u||^B)."""
    if n_samples <= 0:
        return 0.0
    d = derive(params)
    C = gs.c_gn_quotient if constant == "quotient" else gs.c_gn_formula
    worst = 0.0
    for u in random_fields(gs.phi.grid, n_samples, seed):
        P = nonlocal_term(u, params)
        denom = C * math.sqrt(mass(u)) ** d.A * homogeneous_norm(u, params.s) ** d.B
        worst = max(worst, P / denom)
    return worst


def energy_convergence(u0: Field, params: ProblemParams, t_end: float, steps):
    """Fixed-step runs; returns (dt, max relative mass drift, max energy drift) per step count."""
    out = []
    for n in steps:
        cfg = EvolutionConfig(t_end=t_end, dt0=t_end / n, adaptive=False,
                              blowup_grad_factor=math.inf, record_every=1)
        run = evolve(u0, params, cfg)
        m, e = run.series.array("mass"), run.series.array("energy")
        out.append((t_end / n, float(np.abs(m - m[0]).max() / m[0]), float(np.abs(e - e[0]).max())))
    return out
