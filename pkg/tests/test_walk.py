import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from contdiag.errors import BadInitialVector, GapTooSmall, MaxSwitchesExceeded, NoValidHandoff
from contdiag.oracle import aligned_oracle, column_alignment
from contdiag.tracks import Grid, HermitianField
from contdiag.walk import (
    Branch,
    Form,
    WalkOptions,
    branch_terms,
    count_match_events,
    find_next_crossing,
    handoff_alpha,
    walk,
)

# f crosses lambda_minus once on [-1, 1]
CROSSING = ("-2*t", "0", "t-0.5", "0", -1.0, 1.0)


def field(*exprs):
    return HermitianField.from_exprs(*exprs)


def test_constant_field_never_crosses():
    fld = field("0", "0", "1", "0", 0, 1)
    grid = Grid(0, 1, 101)
    assert find_next_crossing(fld, Branch.PLUS, 0.0, grid) == 1.0
    assert find_next_crossing(fld, Branch.PLUS, 1.0, grid) == 1.0


def test_crossing_matches_bracketing_root():
    fld = field("t", "-t", "0.001", "0", -1, 1)
    grid = Grid(-1, 1, 2001)
    opt = WalkOptions()

    def band(t):
        comps = fld.components([t])
        _, d_f, d_g, gap = branch_terms(*comps, Branch.MINUS)
        return abs(d_g[0]) - (opt.handoff_ratio * gap[0] + opt.tol_match)

    # at t = -1 the second form is the well conditioned one for this branch
    t_cross = find_next_crossing(fld, Branch.MINUS, -1.0, grid, form=Form.SECOND)
    root = brentq(band, -1.0, 1.0, xtol=1e-14)
    assert abs(t_cross - root) <= 1e-10


def test_single_form_when_nothing_crosses():
    tr = walk(field("1", "2", "0.1", "0", 0, 1), Branch.PLUS, grid=Grid(0, 1, 101))
    assert tr.switch_count == 0 and len(tr.segments) == 1


def test_two_segments_for_one_crossing():
    fld = field(*CROSSING)
    grid = Grid(-1, 1, 4001)
    tr = walk(fld, Branch.MINUS, grid=grid)
    assert len(tr.segments) == 2 and tr.switch_count == 1
    assert count_match_events(fld, Branch.MINUS, grid, "f") == 1
    # continuity at the handoff and against the aligned pointwise oracle
    u = tr.normalized()
    k = tr.handoffs[0].alpha_index
    assert np.linalg.norm(u[k + 1] - u[k]) <= 10 * grid.spacing
    orc = aligned_oracle(fld, grid.points)
    U = np.stack([np.zeros_like(u), u], axis=-1)
    assert column_alignment(U, orc.frames)[:, 1].min() >= 1 - 1e-8
    seg = tr.segments
    assert seg[0].min_abs_denominator > 0 and seg[1].min_abs_denominator > 0


def test_handoff_alpha_examples():
    fld = field("0", "0", "1", "0", 0, 1)
    grid = Grid(0, 1, 11)
    assert handoff_alpha(fld, Branch.PLUS, 1.0, 0.0, grid) == grid.points[-2]

    fld = field(*CROSSING)
    grid = Grid(-1, 1, 2001)
    tr = walk(fld, Branch.MINUS, grid=grid)
    h = tr.handoffs[0]
    alpha = handoff_alpha(fld, Branch.MINUS, h.t_cross, -1.0, grid, form=h.from_form)
    assert alpha == h.alpha
    assert 0 < h.t_cross - alpha <= 10 * grid.spacing

    with pytest.raises(NoValidHandoff):
        handoff_alpha(fld, Branch.MINUS, h.t_cross, -1.0, Grid(-1, 1, 2), form=h.from_form)


def test_reflection_matches_closed_form_eigenvector():
    fld = field("cos(t)", "-cos(t)", "sin(t)", "0", 0, 2 * np.pi)
    grid = Grid(0, 2 * np.pi, 4001)
    tr = walk(fld, Branch.PLUS, grid=grid)
    t = grid.points
    exact = np.stack([np.cos(t / 2), np.sin(t / 2)], axis=-1)
    u = tr.normalized()
    ratio = np.sum(u * exact, axis=-1)
    # one global constant: u = c * exact with |c| = 1
    assert np.abs(np.abs(ratio) - 1).max() <= 1e-8
    assert np.ptp(ratio) <= 1e-8
    assert tr.switch_count >= 1 and tr.real


def test_real_fields_stay_real_and_complex_v0_makes_complex():
    fld = field("cos(t)", "-cos(t)", "sin(t)", "0", 0, 2 * np.pi)
    grid = Grid(0, 2 * np.pi, 1001)
    tr = walk(fld, Branch.MINUS, grid=grid)
    assert tr.real and np.isrealobj(tr.vectors)
    v0 = tr.vectors[0] * 1j
    tr2 = walk(fld, Branch.MINUS, v0=v0, grid=grid)
    assert not tr2.real
    np.testing.assert_allclose(tr2.vectors, 1j * tr.vectors, atol=1e-12)


def test_initial_vector_checks():
    fld = field("1", "2", "0.1", "0", 0, 1)
    with pytest.raises(BadInitialVector):
        walk(fld, Branch.PLUS, v0=[0, 0])
    with pytest.raises(BadInitialVector):
        walk(fld, Branch.PLUS, v0=[1, 0])


def test_gap_and_switch_cap():
    with pytest.raises(GapTooSmall):
        walk(field("t", "-t", "0", "0", -1, 1), Branch.PLUS, grid=Grid(-1, 1, 101))
    fld = field("cos(t)", "-cos(t)", "sin(t)", "0", 0, 2 * np.pi)
    with pytest.raises(MaxSwitchesExceeded):
        walk(fld, Branch.PLUS, grid=Grid(0, 2 * np.pi, 1001), options=WalkOptions(max_switches=0))


def test_both_rows_of_the_eigen_equation_vanish():
    fld = field("sin(2*t)", "t^2", "cos(t)", "0.3*sin(5*t)", -1, 1)
    tr = walk(fld, Branch.PLUS, grid=Grid(-1, 1, 1001))
    A = fld.matrices(tr.t)
    lam = branch_terms(*fld.components(tr.t), Branch.PLUS)[0]
    r = np.einsum("nij,nj->ni", A, tr.vectors) - lam[:, None] * tr.vectors
    scale = np.linalg.norm(tr.vectors, axis=-1)
    assert (np.abs(r[:, 0]) / scale).max() <= 1e-12
    assert (np.abs(r[:, 1]) / scale).max() <= 1e-12


def test_step_jump_shrinks_under_refinement():
    fld = field("cos(t)", "-cos(t)", "sin(t)", "0", 0, 2 * np.pi)
    jumps = []
    for n in (1001, 4001):
        u = walk(fld, Branch.PLUS, grid=Grid(0, 2 * np.pi, n)).normalized()
        jumps.append(np.linalg.norm(np.diff(u, axis=0), axis=-1).max())
    assert 3.5 <= jumps[0] / jumps[1] <= 4.5


coef = st.floats(-2, 2, allow_nan=False)


@given(st.tuples(coef, coef, coef), st.tuples(coef, coef, coef), st.floats(0.2, 2), coef,
       st.sampled_from(list(Branch)))
@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_switches_bounded_by_match_events(pf, pg, h0, w, branch):
    # |h| = h0 keeps the gap open
    f = f"{pf[0]!r}+{pf[1]!r}*t+{pf[2]!r}*t^2"
    g = f"{pg[0]!r}+{pg[1]!r}*t+{pg[2]!r}*t^2"
    hr = f"{h0!r}*cos({w!r}*t)"
    hc = f"{h0!r}*sin({w!r}*t)"
    fld = field(f, g, hr, hc, -1, 1)
    grid = Grid(-1, 1, 1001)
    tr = walk(fld, branch, grid=grid)
    assert tr.switch_count <= count_match_events(fld, branch, grid, "f") + 1
    assert tr.max_residual <= 1e-10
