import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcnls.errors import ValidationError
from fcnls.model import (
    ProblemParams, admissible_mask, derive, exponents, regime, riesz_normalization, validate,
)


def test_reference_exponents(ref):
    d = derive(ref)
    assert d.s_c == pytest.approx(0.4, abs=1e-14)
    assert d.B == pytest.approx(4.0, abs=1e-14)
    assert d.A == pytest.approx(2.0, abs=1e-14)
    assert d.p_star == pytest.approx(2.2, abs=1e-14)
    assert d.p_upper == pytest.approx(7.0, abs=1e-14)
    assert d.p_tilde == pytest.approx(1.4, abs=1e-14)
    assert d.p_bar == pytest.approx(3.0, abs=1e-14)
    assert d.blowup_cap == pytest.approx(3.1, abs=1e-14)


def test_reference_regime(ref):
    f = regime(ref)
    assert f.admissible and f.intercritical
    assert not f.lwp_window
    assert f.blowup_window
    assert not f.defocusing_global


def test_both_windows_slightly_above_three(ref):
    f = regime(ProblemParams(2, 0.8, -0.1, 1.0, 3.05))
    assert f.lwp_window and f.blowup_window


def test_defocusing_is_global(ref):
    assert regime(ProblemParams(2, 0.8, -0.1, 1.0, 3.0, epsilon=1)).defocusing_global


@pytest.mark.parametrize("kw, code", [
    (dict(b=0.1), "b_nonnegative"),
    (dict(b=0.0), "b_nonnegative"),
    (dict(alpha=2.0), "alpha_ge_N"),
    (dict(alpha=0.0), "alpha_nonpositive"),
    (dict(s=1.0), "s_out_of_range"),
    (dict(p=1.0), "p_le_one"),
    (dict(epsilon=0), "epsilon_invalid"),
    (dict(N=1), "dimension_too_small"),
    (dict(b=-1.2, alpha=0.3, s=0.5), "2s_plus_2b_plus_alpha_nonpositive"),
])
def test_validation_codes(ref, kw, code):
    bad = ProblemParams(**{**ref.__dict__, **kw})
    with pytest.raises(ValidationError) as err:
        validate(bad)
    assert err.value.code == code


def test_riesz_normalization_values():
    assert riesz_normalization(3, 2.0) == pytest.approx(1 / (4 * math.pi), rel=1e-14)
    assert riesz_normalization(2, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    with pytest.raises(ValidationError):
        riesz_normalization(2, 2.0)


admissible = st.builds(
    lambda N, s, fb, fa, fp: (N, s, fb, fa, fp),
    st.integers(2, 3), st.floats(0.05, 0.95), st.floats(0.01, 0.99),
    st.floats(0.01, 0.99), st.floats(0.01, 3.0))


def _tuple(N, s, fb, fa, fp):
    a = fa * N
    b = -fb * min(N - s, s + a / 2, (N + a - 2 * s) / 2)
    return ProblemParams(N, s, b, a, 1 + fp)


@settings(max_examples=300, deadline=None)
@given(admissible)
def test_admissible_identities(t):
    params = _tuple(*t)
    validate(params)
    d = derive(params)
    assert d.A + d.B == pytest.approx(2 * params.p, abs=1e-12)
    assert np.sign(d.s_c) == np.sign(params.p - d.p_star) or abs(params.p - d.p_star) < 1e-12
    at_star = ProblemParams(params.N, params.s, params.b, params.alpha, d.p_star)
    assert derive(at_star).B == pytest.approx(2.0, abs=1e-12)
    assert d.p_tilde < d.p_star < d.p_upper


def test_exponents_vectorized_matches_scalar(ref):
    vec = exponents(np.array([2.0]), np.array([0.8]), np.array([-0.1]), np.array([1.0]),
                    np.array([3.0]))
    d = derive(ref)
    assert [float(v[0]) for v in vec] == pytest.approx(
        [d.s_c, d.B, d.A, d.p_star, d.p_upper, d.p_tilde, d.p_bar, d.blowup_cap], abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 4), st.floats(0.01, 0.99), st.floats(-2.0, 0.5), st.floats(-0.5, 4.5),
       st.floats(0.5, 6.0))
def test_admissible_mask_agrees_with_validate(N, s, b, alpha, p):
    try:
        validate(ProblemParams(N, s, b, alpha, p))
        ok = True
    except ValidationError:
        ok = False
    assert bool(admissible_mask(N, s, b, alpha, p)) == ok
