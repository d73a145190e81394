import numpy as np
import pytest
from hypothesis import given, strategies as st

from dipolar_sle.errors import BadStep
from dipolar_sle.loewner import (
    LEFT, RIGHT, UNDECIDED, CurveSample, DrivingPath, LoewnerState, brownian_increments,
    classify_side, loewner_oracle_suite, run_flow, slit_tip, step, step_jet, strip_arccosh,
    trace_curve,
)
from dipolar_sle.numdiff import cauchy_derivative

interior = st.builds(complex, st.floats(-3, 3), st.floats(0.3, np.pi - 0.3))


# steps short enough that the one-step slit (height 2 arccos e^{-delta/2}) stays below the points
@given(interior, st.floats(1e-4, 0.01))
def test_step_solves_cosh_relation(w, delta):
    u, *_ = step_jet(np.array([w]), delta)
    assert abs(np.cosh(u[0] / 2) - np.exp(delta / 2) * np.cosh(w / 2)) < 1e-12 * abs(np.cosh(w / 2))
    assert 0 < u[0].imag <= np.pi + 1e-12


@given(interior, st.floats(1e-3, 0.01))
def test_step_jet_matches_contour_derivatives(w, delta):
    _, f1, f2, f3, _ = step_jet(np.array([w]), delta)
    g = lambda v: step_jet(np.array([v]), delta)[0][0]
    r = 0.2 * min(w.imag, np.pi - w.imag)
    for n, d in ((1, f1[0]), (2, f2[0]), (3, f3[0])):
        assert abs(cauchy_derivative(g, w, n, r) - d) < 1e-9 * max(1, abs(d))


def test_step_is_the_flow_of_coth():
    from scipy.integrate import solve_ivp

    w0, T = 0.4 + 1.1j, 0.3

    def rhs(t, y):
        w = y[0] + 1j * y[1]
        v = 1 / np.tanh(w / 2)
        return [v.real, v.imag]

    sol = solve_ivp(rhs, (0, T), [w0.real, w0.imag], rtol=1e-12, atol=1e-12)
    u, *_ = step_jet(np.array([w0]), T)
    assert abs(u[0] - (sol.y[0, -1] + 1j * sol.y[1, -1])) < 1e-9


def test_strip_arccosh_branch():
    s, real = strip_arccosh(np.array([2.0, 0.5 + 0j, -3.0]), np.array([-1.0, 1.0, 1.0]))
    assert real[0] and s[0].real < 0 and s[0].imag == 0
    assert not real[1] and s[1].imag > 0
    assert s[2].imag == pytest.approx(2 * np.pi)


def test_bad_step():
    with pytest.raises(BadStep):
        step(LoewnerState.initial([1j]), 0.0, 0.0)


def test_increments_are_chunk_independent():
    whole = brownian_increments(4.0, 1e-3, 50, seed=3, path_ids=range(6))
    part = brownian_increments(4.0, 1e-3, 50, seed=3, path_ids=[4, 5])
    assert np.array_equal(whole[4:], part)
    assert not np.array_equal(whole[0], brownian_increments(4.0, 1e-3, 50, 4, [0])[0])
    assert np.std(brownian_increments(4.0, 1e-2, 4000, 0, [0])) == pytest.approx(0.2, rel=0.05)


def test_zero_driving_cosh_identity_and_symmetry():
    pts = np.array([0.3 + 1.2j, -0.3 + 1.2j, 2j])
    st_ = run_flow(LoewnerState.initial(pts), np.zeros((1, 1000)), 1e-3)
    target = np.exp(0.5) * np.cosh(pts / 2)
    assert np.max(np.abs(np.cosh(st_.w[0] / 2) - target)) < 1e-12
    # mirror symmetry about the imaginary axis without driving
    assert abs(st_.w[0, 0] + np.conj(st_.w[0, 1])) < 1e-12
    assert abs(st_.w[0, 2].real) < 1e-15


def test_jets_track_composed_map():
    [cosh, jets, trace] = loewner_oracle_suite(n_steps=2000, dt=5e-4)
    assert cosh.passed and jets.passed and trace.passed


def test_log_derivative_is_continuous():
    drive = DrivingPath.brownian(4.0, 1e-3, 800, seed=1)
    st_ = run_flow(LoewnerState.initial([0.3 + 1.2j, -1 + 0.8j]), drive.increments[None, :], drive.dt)
    live = st_.alive[0]
    assert np.allclose(np.exp(st_.logd1[0][live]), st_.d1[0][live], rtol=1e-10)


def test_swallowed_points_freeze_and_keep_side():
    # a driving jump past a boundary point swallows it
    st_ = LoewnerState.initial([-0.05 + 0j, 0.05 + 0j, 1j])
    st_ = step(st_, 0.2, 1e-3)
    assert st_.alive[0, 0] and not st_.alive[0, 1] and st_.alive[0, 2]
    frozen, tau = st_.w[0, 1], st_.tau[0, 1]
    st2 = step(st_, 0.0, 1e-3)
    assert st2.w[0, 1] == frozen and st2.tau[0, 1] == tau == pytest.approx(1e-3)
    sides = classify_side(st2)
    assert sides[0, 1] == RIGHT and sides[0, 0] == LEFT


def test_classify_side_bands():
    st_ = LoewnerState.initial([1j, 2 + 1j, -2 + 1j])
    sides = classify_side(st_, eps=0.05)
    assert list(sides[0]) == [UNDECIDED, RIGHT, LEFT]


def test_localization_radius_stops_points():
    pts = [0.3 + 1.2j, 2.5j]
    st_ = LoewnerState.initial(pts, stop_radius=1.5)
    assert np.all(st_.conformal_radius > 1.5)
    for _ in range(300):
        st_ = step(st_, 0.0, 1e-3)
    assert st_.localized[0, 0] and not st_.alive[0, 0]
    assert st_.conformal_radius[0, 1] > 1.5 or st_.localized[0, 1]


def test_zero_driving_curve_is_vertical():
    sample = trace_curve(DrivingPath(0.0, 1e-3, np.zeros(500)))
    assert np.all(sample.tips.real == 0)
    # the tip i h maps to 0 at time t: e^{t/2} cos(h/2) = 1
    h = sample.tips[-1].imag
    assert h == pytest.approx(2 * np.arccos(np.exp(-0.25)), rel=1e-9)
    assert sample.tips[1] == pytest.approx(slit_tip(1e-3))


def test_trace_tips_are_where_points_get_swallowed():
    drive = DrivingPath.brownian(4.0, 1e-3, 300, seed=2)
    tips = trace_curve(drive, sample_every=100).tips
    # the tip at time t maps to (approximately) 0 under w_t
    for k, tip in zip((100, 200, 300), tips[1:]):
        st_ = run_flow(LoewnerState.initial([tip + 1e-9j]), drive.increments[None, :k], drive.dt)
        assert abs(st_.w[0, 0]) < 0.15


def test_curve_csv(tmp_path):
    sample = CurveSample(np.array([0.0, 0.5]), np.array([0j, 0.1 + 0.2j]))
    path = tmp_path / "c.csv"
    sample.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,re,im" and lines[2] == "0.5,0.10000000000000001,0.20000000000000001"


def test_driving_horizon():
    d = DrivingPath(4.0, 0.01, np.zeros(100))
    assert d.horizon == pytest.approx(1.0) and d.steps_until(0.5) == 50
    with pytest.raises(ValueError):
        d.steps_until(2.0)
