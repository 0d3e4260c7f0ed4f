"""
Scale-invariant quantities on a finite box
==========================================

The Gagliardo-Nirenberg quotient and the critical Sobolev norm are exactly
invariant under the equation's scalings. On a periodic box the plain
Parseval sum breaks that at low frequency; the corrected sum restores it.
"""
import numpy as np

from fcnls.functionals import gn_quotient
from fcnls.model import ProblemParams, derive
from fcnls.spectral import Field, Grid, homogeneous_norm

ref = ProblemParams(N=2, s=0.8, b=-0.1, alpha=1.0, p=3.0)
sc = derive(ref).s_c
k = (2 * ref.s + 2 * ref.b + ref.alpha) / (2 * (ref.p - 1))


def family(grid, amp, mu):
    return Field(grid, amp * np.exp(-(mu * grid.r) ** 2))


for L in (6.0, 8.0, 12.0, 16.0):
    g = Grid(2, 256, L)
    row = []
    for correct in (False, True):
        base = homogeneous_norm(family(g, 1, 1), sc, correct)
        other = homogeneous_norm(family(g, 0.8 ** k, 0.8), sc, correct)
        row.append(abs(other / base - 1))
    print(f"L={L:4.0f}: critical norm drift raw {row[0]:.1e}, corrected {row[1]:.1e}")

g = Grid(2, 1024, 10.0)
J0 = gn_quotient(family(g, 1, 1), ref, correct=True)
for amp, mu in [(1.3, 0.8), (0.7, 1.25), (2.0, 1.1)]:
    J = gn_quotient(family(g, amp, mu), ref, correct=True)
    print(f"amp={amp}, mu={mu}: J/J0 - 1 = {J / J0 - 1:+.1e}")
