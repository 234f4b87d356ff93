import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contdiag import gallery
from contdiag.errors import DegeneratePoint, NotFinitelyMany, OutOfDomain
from contdiag.spectral import (
    PointClass,
    classify_point,
    discriminant_track,
    eigenvalues_at,
    find_coalescence,
    golden_minimize,
    spectrum,
)
from contdiag.tracks import Grid, HermitianField

mpmath.mp.dps = 50


def _mp_eigs(f, g, hr, hc):
    f, g, hr, hc = (mpmath.mpf(float(x)) for x in (f, g, hr, hc))
    s = (f + g) / 2
    r = mpmath.sqrt(((f - g) / 2) ** 2 + hr * hr + hc * hc)
    return float(s + r), float(s - r), float(2 * r)


def test_eigenvalues_against_high_precision_oracle():
    rng = np.random.default_rng(1234)
    n = 1000
    # mix of scales, including nearly degenerate and nearly diagonal inputs
    f = rng.normal(size=n) * 10.0 ** rng.integers(-3, 4, n)
    g = f + rng.normal(size=n) * 10.0 ** rng.integers(-8, 2, n)
    hr = rng.normal(size=n) * 10.0 ** rng.integers(-8, 2, n)
    hc = rng.normal(size=n) * 10.0 ** rng.integers(-8, 2, n)
    lp, lm, _, _, gap = spectrum(f, g, hr, hc)
    for i in range(n):
        ep, em, eg = _mp_eigs(f[i], g[i], hr[i], hc[i])
        scale = abs(f[i]) + abs(g[i]) + math.hypot(hr[i], hc[i])
        assert abs(lp[i] - ep) <= 1e-12 * scale
        assert abs(lm[i] - em) <= 1e-12 * scale
        # the gap is formed directly, so it stays accurate relative to itself
        assert abs(gap[i] - eg) <= 1e-14 * eg
    assert np.all(lp >= lm)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
@settings(max_examples=500)
def test_trace_and_determinant_identities(f, g, hr, hc):
    lp, lm, p, q, gap = (x[0] for x in spectrum(*[np.array([x]) for x in (f, g, hr, hc)]))
    assert lp >= lm
    ulp = np.spacing(max(abs(f), abs(g), abs(hr), abs(hc), 1e-300))
    assert abs((lp + lm) - (f + g)) <= 4 * ulp
    det = f * g - (hr * hr + hc * hc)
    scale = max(abs(f), abs(g), math.hypot(hr, hc)) ** 2
    assert abs(lp * lm - det) <= 1e-12 * scale + 1e-300
    # the two denominators recombine into the gap and |h|^2
    assert abs(p + q - gap) <= 1e-12 * (gap + 1e-300) + 4 * ulp
    assert abs(p * q - (hr * hr + hc * hc)) <= 1e-12 * scale + 1e-300


@pytest.mark.parametrize("f, g, h, expected", [
    (0.0, 0.0, 1.0, (1.0, -1.0)),
    (1.0, 2.0, 0.0, (2.0, 1.0)),
    (0.5, 0.5, 0.5, (1.0, 0.0)),
])
def test_eigenvalue_examples(f, g, h, expected):
    fld = HermitianField.from_exprs(str(f), str(g), str(h), "0", 0, 1)
    pair = eigenvalues_at(fld, 0.5)
    assert (pair.lambda_plus, pair.lambda_minus) == pytest.approx(expected, abs=1e-15)


def test_rank_one_example_at_half():
    fld = gallery.get("paper-ex-2.1").field()
    pair = eigenvalues_at(fld, 0.5)
    assert pair.lambda_plus == pytest.approx(1.0, abs=1e-15)
    assert pair.lambda_minus == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(OutOfDomain):
        eigenvalues_at(fld, 2.0)


@pytest.mark.parametrize("f, g, hr, expected", [
    ("1", "1", "0", lambda t: 0 * t),
    ("t", "-t", "0", lambda t: 4 * t * t),
    ("0", "0", "t", lambda t: 4 * t * t),
])
def test_discriminant_track(f, g, hr, expected):
    d = discriminant_track(HermitianField.from_exprs(f, g, hr, "0", -1, 1))
    ts = np.linspace(-1, 1, 21)
    np.testing.assert_allclose(d.eval_many(ts), expected(ts), atol=1e-15)


def test_coalescence_examples():
    grid = Grid(-1, 1, 1001)
    rep = find_coalescence(HermitianField.from_exprs("t", "-t", "0", "0", -1, 1), grid)
    assert len(rep.points) == 1 and abs(rep.points[0]) < 1e-9 and rep.is_isolated == (True,)
    rep = find_coalescence(HermitianField.from_exprs("1", "2", "0", "0", -1, 1), grid)
    assert rep.points == ()
    with pytest.raises(NotFinitelyMany):
        find_coalescence(HermitianField.from_exprs("0", "0", "0", "0", -1, 1), grid)
    rep = find_coalescence(HermitianField.from_exprs("0", "0", "0", "0", -1, 1), grid, strict=False)
    assert rep.is_isolated == (False,)


def test_coalescence_between_grid_points_and_at_endpoint():
    fld = HermitianField.from_exprs("t-0.3001", "0.3001-t", "0", "0", 0, 1)
    rep = find_coalescence(fld, Grid(0, 1, 11))
    assert rep.points[0] == pytest.approx(0.3001, abs=1e-9)
    for z in rep.points:
        assert rep.discriminant[rep.points.index(z)] <= 1e-20
    rep = find_coalescence(gallery.get("endpoint-coalescence").field(), Grid(0, 1, 101))
    assert rep.points == (0.0,) and rep.endpoint_flags == (True,) and rep.interior == ()


def test_multiple_coalescence_points_are_sorted():
    rep = find_coalescence(gallery.get("c1-multi").field(), Grid(-1.5, 1.5, 2001))
    np.testing.assert_allclose(rep.points, [-math.pi / 3, 0.0, math.pi / 3], atol=1e-9)
    assert all(b > a for a, b in zip(rep.points, rep.points[1:]))


def test_flat_zero_is_isolated():
    rep = find_coalescence(gallery.get("paper-ex-smooth").field(), Grid(-1, 1, 2000))
    assert len(rep.points) == 1 and abs(rep.points[0]) < 1e-3 and rep.is_isolated == (True,)
    assert rep.notes


def test_classify_examples():
    fld = HermitianField.from_exprs("1", "2", "0", "0", 0, 1)
    assert classify_point(fld, 0.5, 1.0) is PointClass.H_ZERO_F_MATCHES
    assert classify_point(fld, 0.5, 2.0) is PointClass.H_ZERO_G_MATCHES
    assert classify_point(HermitianField.from_exprs("0", "0", "1", "0", 0, 1), 0.5, 1.0) is PointClass.H_NONZERO
    with pytest.raises(DegeneratePoint):
        classify_point(HermitianField.from_exprs("1", "1", "0", "0", 0, 1), 0.5, 1.0)


def test_golden_section_finds_boundary_minimum_exactly():
    x, fx = golden_minimize(lambda x: (x - 2.0) ** 2, np.array([0.0]), np.array([2.0]))
    assert x[0] == 2.0 and fx[0] == 0.0
    x, _ = golden_minimize(lambda x: np.cos(x), np.array([3.0]), np.array([3.3]))
    assert x[0] == pytest.approx(math.pi, abs=1e-7)


@pytest.mark.parametrize("f, g, hr, hc", [
    (0.0, 0.0, 0.0, 9e-283),
    (1e-200, 1e-200, 0.0, 0.0),
    (3e200, -1e200, 2e200, 0.0),
    (1.0, 1.0, 1e-170, 0.0),
])
def test_extreme_scales_do_not_underflow_or_overflow(f, g, hr, hc):
    lp, lm, p, q, gap = (x[0] for x in spectrum(*[np.array([x]) for x in (f, g, hr, hc)]))
    ep, em, eg = _mp_eigs(f, g, hr, hc)
    scale = max(abs(f), abs(g), abs(hr), abs(hc))
    assert abs(lp - ep) <= 1e-15 * scale and abs(lm - em) <= 1e-15 * scale
    assert gap == pytest.approx(eg, rel=1e-15)
    assert np.isfinite([p, q]).all()
