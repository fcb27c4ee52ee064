import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attraos import chaos
from attraos.errors import DimensionMismatchError, NonFiniteError


def rk4_reference(rhs, x0, dt, steps):
    """Plain-loop RK4 used as the fine-step oracle."""
    x = np.asarray(x0, dtype=float).copy()
    out = [x.copy()]
    for _ in range(steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(x.copy())
    return np.asarray(out)


class TestLorenz63:
    def test_origin_is_fixed_point(self):
        traj = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [0, 0, 0], 0.013, 500)
        assert np.all(traj.states == 0.0)

    def test_attractor_bounds(self):
        traj = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.01, 10000)
        assert np.all(np.isfinite(traj.states))
        assert np.all(np.abs(traj.states[:, 2]) < 60)

    def test_one_step_matches_fine_oracle(self):
        # frozen oracle: 1000 steps of dt=1e-5 RK4 compose one dt=0.01 step
        p = chaos.Lorenz63Params()
        fine = rk4_reference(lambda s: chaos.lorenz63_rhs(s, p), [1.0, 1.0, 1.0], 1e-5, 1000)
        coarse = chaos.simulate_lorenz63(p, [1.0, 1.0, 1.0], 0.01, 1)
        assert np.allclose(coarse.states[1], fine[-1], atol=1e-6)

    def test_rk4_fourth_order_convergence(self):
        p = chaos.Lorenz63Params()
        ref = rk4_reference(lambda s: chaos.lorenz63_rhs(s, p), [1.0, 1.0, 1.0], 1e-6 * 50, 20000)[-1]
        # 1 time unit at dt and dt/2 (5e-5 reference step keeps runtime sane)
        e = []
        for dt in (0.02, 0.01):
            traj = chaos.simulate_lorenz63(p, [1.0, 1.0, 1.0], dt, int(round(1.0 / dt)))
            e.append(np.linalg.norm(traj.states[-1] - ref))
        assert e[0] / e[1] >= 8.0

    def test_determinism(self):
        a = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.01, 200)
        b = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.01, 200)
        assert np.array_equal(a.states, b.states)

    def test_blowup_raises(self):
        with pytest.raises(NonFiniteError):
            chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1e150, 1e150, 1e150], 10.0, 50)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], -0.1, 10)
        with pytest.raises(ValueError):
            chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.1, 0)


class TestLorenz96:
    def test_zero_forcing_zero_state(self):
        p = chaos.Lorenz96Params(forcing_f=0.0, dim=8)
        traj = chaos.simulate_lorenz96(p, np.zeros(8), 0.05, 100)
        assert np.all(traj.states == 0.0)

    def test_constant_state_is_equilibrium(self):
        p = chaos.Lorenz96Params(forcing_f=8.0, dim=12)
        traj = chaos.simulate_lorenz96(p, np.full(12, 8.0), 0.01, 1000)
        assert np.all(traj.states == 8.0)

    def test_perturbed_f8_bounded_nonperiodic(self):
        p = chaos.Lorenz96Params(forcing_f=8.0, dim=40)
        traj = chaos.simulate_lorenz96(p, chaos.default_lorenz96_x0(p), 0.01, 30000)
        settled = traj.states[1000:]
        assert np.all(np.isfinite(settled))
        assert settled.min() >= -15 and settled.max() <= 20
        # trajectory never revisits its start exactly (non-periodic)
        d = np.linalg.norm(settled[1:] - settled[0], axis=1)
        assert d.min() > 1e-6

    def test_dim_validation(self):
        with pytest.raises(ValueError):
            chaos.simulate_lorenz96(chaos.Lorenz96Params(dim=3), np.zeros(3), 0.01, 10)

    def test_coupling_wraps_cyclically(self):
        p = chaos.Lorenz96Params(forcing_f=0.0, dim=5)
        x = np.arange(5, dtype=float)
        rhs = chaos.lorenz96_rhs(x, p)
        for i in range(5):
            expect = (x[(i + 1) % 5] - x[(i - 2) % 5]) * x[(i - 1) % 5] - x[i]
            assert rhs[i] == pytest.approx(expect)


class TestObserve:
    def test_identity_map(self):
        traj = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.01, 50)
        out = chaos.observe(traj, chaos.ObservationMap.identity(3))
        assert np.array_equal(out, traj.states)

    def test_zero_weights(self):
        traj = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.01, 50)
        out = chaos.observe(traj, chaos.ObservationMap(weights=np.zeros((2, 3))))
        assert np.all(out == 0.0)

    def test_seeded_map_is_reproducible(self):
        p = chaos.Lorenz96Params(dim=40)
        traj = chaos.simulate_lorenz96(p, chaos.default_lorenz96_x0(p), 0.01, 100)
        a = chaos.observe(traj, chaos.ObservationMap.random(3, 40, seed=99))
        b = chaos.observe(traj, chaos.ObservationMap.random(3, 40, seed=99))
        assert np.array_equal(a, b)

    def test_dimension_checks(self):
        traj = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.01, 10)
        with pytest.raises(DimensionMismatchError):
            chaos.observe(traj, chaos.ObservationMap(weights=np.zeros((2, 5))))
        with pytest.raises(DimensionMismatchError):
            chaos.ObservationMap.random(5, 3, seed=0)


@settings(max_examples=20, deadline=None)
@given(
    sigma=st.floats(1.0, 20.0),
    rho=st.floats(1.0, 40.0),
    beta=st.floats(0.5, 5.0),
)
def test_equilibria_preserved_for_any_params(sigma, rho, beta):
    # zero vector field => bitwise-constant trajectory
    p = chaos.Lorenz63Params(sigma=sigma, rho=rho, beta=beta)
    traj = chaos.simulate_lorenz63(p, [0.0, 0.0, 0.0], 0.02, 64)
    assert np.all(traj.states == 0.0)


def test_drop_transient():
    traj = chaos.simulate_lorenz63(chaos.Lorenz63Params(), [1, 1, 1], 0.01, 100)
    cut = chaos.drop_transient(traj, 40)
    assert cut.states.shape[0] == 61
    assert np.array_equal(cut.states[0], traj.states[40])
