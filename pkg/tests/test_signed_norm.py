import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contdiag.errors import ConfigError, UnsortedZeros, ZeroNotOnTrack
from contdiag.signed_norm import VectorTrack, build_signed_norm, mu_derivative_check
from contdiag.tracks import Grid, ScalarTrack


def vtrack(*sources, a=-1.0, b=1.0):
    return VectorTrack(tuple(ScalarTrack.from_expr(s, a, b) for s in sources))


def test_linear_track_flips_sign_at_zero():
    m = build_signed_norm(vtrack("t"), [0.0])
    ts = np.linspace(-1, 1, 11)
    np.testing.assert_array_equal(np.abs(m.eval_many(ts)), np.abs(ts))
    # first segment carries sign -1, so mu(t) = t here
    np.testing.assert_array_equal(m.eval_many(ts), ts)
    check = mu_derivative_check(m, 1e-5)
    assert check.max_jump <= 1e-6
    lim = check.per_zero[0]
    assert lim.left == pytest.approx(1.0, abs=1e-9) and lim.right == pytest.approx(1.0, abs=1e-9)
    assert lim.expected == pytest.approx(1.0)


def test_nonvanishing_track_keeps_positive_sign():
    m = build_signed_norm(vtrack("1+t^2"), [])
    ts = np.linspace(-1, 1, 11)
    np.testing.assert_array_equal(m.eval_many(ts), 1 + ts ** 2)


def test_two_component_track_endpoint_values():
    m = build_signed_norm(vtrack("t", "t^3"), [0.0])
    assert m(-1.0) == pytest.approx(-math.sqrt(2))
    assert m(1.0) == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("sources, zeros, slope", [
    (("t^2",), [0.0], 0.0),
    (("sin(t)",), [0.0], 1.0),
    (("(t-0.1)^2*(t+2)", "0.5*(t-0.1)^2"), [0.1], 0.0),
])
def test_one_sided_limits_agree(sources, zeros, slope):
    m = build_signed_norm(vtrack(*sources), zeros)
    check = mu_derivative_check(m, 1e-5)
    assert check.max_jump <= 1e-6
    assert abs(check.per_zero[0].left - slope) <= 1e-6


def test_jump_halves_to_rounding_floor_for_irrational_zeros():
    # the zeros at +-pi/3 are exact only to rounding of 3*t inside sin, which
    # adds an error of order eps / dt on top of the O(dt^2) truncation
    m = build_signed_norm(vtrack("sin(3*t)", "sin(3*t)*cos(t)", "0.5*sin(3*t)^2", a=-1.5, b=1.5),
                          [-math.pi / 3, 0.0, math.pi / 3])
    dts = [1e-3 / 2 ** k for k in range(7)]
    jumps = [mu_derivative_check(m, dt).max_jump for dt in dts]
    floor = [64 * np.finfo(float).eps / dt for dt in dts]
    for j0, j1, fl in zip(jumps, jumps[1:], floor[1:]):
        assert j1 <= j0 or j1 <= fl
    assert mu_derivative_check(m, 1e-5).max_jump <= 1e-6


def test_sign_changes_only_at_zeros():
    zeros = [-0.5, 0.25]
    m = build_signed_norm(vtrack("(t+0.5)*(t-0.25)", "0.2*(t+0.5)*(t-0.25)"), zeros)
    ts = Grid(-1, 1, 401).points
    sign = m.sign(ts)
    flips = ts[1:][np.diff(sign) != 0]
    assert len(flips) == 2
    assert m.segment_signs == (-1, 1, -1)
    # a zero belongs to the segment on its left
    assert m.sign([-0.5])[0] == -1 and m.sign([0.25])[0] == 1


def test_errors():
    v = vtrack("t-0.5", "t+0.5")
    with pytest.raises(UnsortedZeros):
        build_signed_norm(vtrack("t"), [0.3, 0.1])
    with pytest.raises(ZeroNotOnTrack):
        build_signed_norm(v, [0.5])
    with pytest.raises(ConfigError):
        build_signed_norm(vtrack("t+1"), [-1.0])
    with pytest.raises(ConfigError):
        mu_derivative_check(build_signed_norm(vtrack("t"), [0.0]), 0.0)


@given(st.floats(-0.9, 0.9), st.floats(0.1, 5.0), st.floats(-3.0, 3.0))
@settings(max_examples=100, deadline=None)
def test_squared_magnitude_matches_norm(z, c, d):
    m = build_signed_norm(vtrack(f"{c!r}*(t-({z!r}))", f"{d!r}*(t-({z!r}))^2"), [z])
    ts = Grid(-1, 1, 257).points
    mu = m.eval_many(ts)
    sq = np.sum(m.base.eval_many(ts) ** 2, axis=-1)
    assert np.all(np.abs(mu * mu - sq) <= 4 * np.spacing(np.maximum(sq, np.finfo(float).tiny)))
