"""
Threshold dichotomy along the ground-state ray
==============================================

Classify u0 = lambda * phi with the mass-energy and gradient indicators and
check the prediction against an evolution.
"""
from fcnls.evolution import EvolutionConfig
from fcnls.experiments import classify, dichotomy_sweep
from fcnls.groundstate import solve
from fcnls.model import ProblemParams
from fcnls.spectral import Grid

ref = ProblemParams(N=2, s=0.8, b=-0.1, alpha=1.0, p=3.0)
gs = solve(ref, Grid(2, 128, 8.0))

for lam in (0.5, 0.9, 1.0, 1.1, 1.3):
    v = classify(gs.phi.scaled(lam), gs, ref)
    me = "-" if v.me is None else f"{v.me:.4f}"
    g = "-" if v.g is None else f"{v.g:.4f}"
    print(f"lambda={lam:.1f}: {v.label:12s} ME={me:7s} G={g:7s} ({v.reason})")

# Collapse is declared once the gradient norm triples and the peak grows by
# 1.8; past that the 128^2 grid no longer resolves the core.
cfg = EvolutionConfig(t_end=2.0, dt0=5e-3, dt_min=1e-6, blowup_grad_factor=3.0,
                      blowup_linf_factor=1.8)
report = dichotomy_sweep(ref, [0.5, 0.9, 1.3, 1.5], cfg, gs)
print()
print(report.to_csv())
