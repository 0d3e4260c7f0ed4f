import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcnls.errors import ValidationError
from fcnls.evolution import EvolutionConfig, Status
from fcnls.experiments import (
    DichotomyRow, Verdict, classify, dichotomy_sweep, gn_sweep, random_fields,
    running_median_bounded,
)
from fcnls.functionals import nonlocal_term
from fcnls.model import ProblemParams
from fcnls.spectral import Field, homogeneous_norm, mass

CALIBRATED = EvolutionConfig(t_end=2.0, dt0=5e-3, dt_min=1e-6, blowup_grad_factor=3.0,
                             blowup_linf_factor=1.8)


@pytest.mark.parametrize("lam,label,reason", [
    (0.5, "Global", "ME<1 and G<1"),
    (0.9, "Global", "ME<1 and G<1"),
    (1.0, "Undetermined", "ME=1 boundary"),
    (1.1, "BlowUp", "ME<1 and G>1"),
    (1.3, "BlowUp", "negative energy"),
])
def test_classify_along_the_ground_state_ray(ref, gs128, lam, label, reason):
    v = classify(gs128.phi.scaled(lam), gs128, ref)
    assert (v.label, v.reason) == (label, reason)


def test_classify_other_branches(ref, gs128):
    defoc = ProblemParams(2, 0.8, -0.1, 1.0, 3.0, epsilon=1)
    assert classify(gs128.phi, gs128, defoc).label == "Global"
    bad = ProblemParams(2, 0.8, 0.1, 1.0, 3.0)
    assert classify(gs128.phi, gs128, bad).reason == "inadmissible parameters"
    # a faint wide bump sits well inside the global region
    g = gs128.phi.grid
    wide = Field(g, 0.05 * np.exp(-g.r ** 2 / 8))
    v = classify(wide, gs128, ref)
    assert v.label == "Global"
    assert v.me < 1 and v.g < 1


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 1.6), st.floats(0, 2 * math.pi))
def test_classify_is_phase_invariant(ref, gs128, lam, theta):
    a = classify(gs128.phi.scaled(lam), gs128, ref)
    b = classify(gs128.phi.scaled(lam * np.exp(1j * theta)), gs128, ref)
    assert a.label == b.label


def test_labels_are_monotone_along_the_ray(ref, gs128):
    order = {"Global": 0, "Undetermined": 1, "BlowUp": 2}
    labels = [classify(gs128.phi.scaled(l), gs128, ref).label
              for l in np.linspace(0.2, 1.6, 15)]
    ranks = [order[x] for x in labels]
    assert ranks == sorted(ranks)


def test_running_median_bounded():
    assert running_median_bounded([1, 1.1, 1.2, 1.3])
    assert not running_median_bounded([1, 1, 1, 5])
    assert running_median_bounded([])


def test_row_flags():
    glob = Verdict("Global")
    assert DichotomyRow(1, 0.5, 0.5, glob, "Completed", 1.0, 2.0).flag == "ok"
    assert DichotomyRow(1, 0.5, 0.5, glob, "BlowUpDetected", 1.0, 2.0).flag == "MISMATCH"
    assert DichotomyRow(1, 0.5, 0.5, glob, "Completed", 1.0, 2.0, bounded=False).mismatch
    assert DichotomyRow(1, 0.5, 1.5, Verdict("BlowUp"), "Completed", 1.0, 2.0).mismatch
    assert DichotomyRow(1, 1, 1, Verdict("Undetermined"), "Completed", 1, 2).flag == "info"
    assert DichotomyRow(1, None, None, glob, "", math.nan, math.nan, False, "x").flag == "ERROR"


def test_dichotomy_sweep_small(ref, gs128):
    rep = dichotomy_sweep(ref, [0.9, 1.3], CALIBRATED, gs128)
    assert [r.observed for r in rep.rows] == [Status.COMPLETED.value, Status.BLOWUP.value]
    assert rep.mismatches == 0
    lines = rep.to_csv().splitlines()
    assert lines[0] == "scale,me,g,predicted,reason,observed,max_grad_s,t_final,flag"
    assert len(lines) == 3
    with pytest.raises(ValidationError) as e:
        dichotomy_sweep(ProblemParams(2, 0.8, -0.1, 1.0, 3.0, epsilon=1), [0.5], CALIBRATED, gs128)
    assert e.value.code == "not_focusing"


def test_random_fields_are_seeded(gs128):
    g = gs128.phi.grid
    a = [f.values for f in random_fields(g, 3, 11)]
    b = [f.values for f in random_fields(g, 3, 11)]
    c = [f.values for f in random_fields(g, 3, 12)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], c[0])


def test_gn_sweep(ref, gs128):
    assert gn_sweep(ref, 0, 7, gs128) == 0.0
    worst = gn_sweep(ref, 20, 7, gs128)
    assert 0 < worst <= 1 + 1e-4
    # the ground state attains the constant
    phi = gs128.phi
    ratio = nonlocal_term(phi, ref) / (
        gs128.c_gn_quotient * math.sqrt(mass(phi)) ** 2 * homogeneous_norm(phi, ref.s) ** 4)
    assert ratio == pytest.approx(1.0, rel=1e-12)
