"""
Localized virial along a collapsing run
=======================================

Negative-energy radial data: the localized variance decreases, and its
rate stays under the right-hand side of the virial inequality while the
grid resolves the solution.
"""
import numpy as np

from fcnls.evolution import EvolutionConfig, evolve
from fcnls.functionals import bundle
from fcnls.groundstate import solve
from fcnls.model import ProblemParams
from fcnls.spectral import Grid
from fcnls.virial import variance_report_from_series

ref = ProblemParams(N=2, s=0.8, b=-0.1, alpha=1.0, p=3.0)
gs = solve(ref, Grid(2, 256, 8.0))
u0 = gs.phi.scaled(1.3)
print(f"E(u0) = {bundle(u0, ref).energy:.4f}")

cfg = EvolutionConfig(t_end=2.0, dt0=5e-3, dt_min=1e-6, blowup_grad_factor=1.5,
                      blowup_linf_factor=1.0, virial_R=3.0, record_every=1)
run = evolve(u0, ref, cfg)
rep = variance_report_from_series(run.series, ref, 3.0, u0=u0)
print(f"{run.status.value} at t={run.t:.4f} after {run.steps} steps")

for i in np.linspace(0, rep.t.size - 1, 8).astype(int):
    print(f"t={rep.t[i]:.4f}  M={rep.m_psi[i]:+.4f}  dM/dt={rep.dm_dt[i]:+9.3f}  "
          f"bound={rep.bound_rhs[i]:+9.3f}")
