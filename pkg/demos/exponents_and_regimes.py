"""
Critical exponents and regime flags
===================================

Derived exponents for the reference model, then a scan over p showing
where the intercritical and blow-up windows open and close.
"""
import numpy as np

from fcnls.model import ProblemParams, derive, exponents, regime

ref = ProblemParams(N=2, s=0.8, b=-0.1, alpha=1.0, p=3.0)
d = derive(ref)
for name, value in vars(d).items():
    print(f"{name:>10s} = {value:.6g}")

# the flags only change at the derived thresholds
print("\n    p   s_c   inter  lwp  blowup")
for p in np.linspace(1.5, 7.5, 13):
    q = ProblemParams(2, 0.8, -0.1, 1.0, float(p))
    f = regime(q)
    sc = exponents(2, 0.8, -0.1, 1.0, p)[0]
    print(f"{p:5.2f} {sc:5.2f}  {f.intercritical!s:5}  {f.lwp_window!s:5} {f.blowup_window!s:5}")

# exponents() is elementwise, so whole parameter planes cost one call
s, p = np.meshgrid(np.linspace(0.55, 0.95, 5), np.linspace(2, 4, 5))
print("\ns_c over (s, p):")
print(np.round(exponents(2, s, -0.1, 1.0, p)[0], 3))
