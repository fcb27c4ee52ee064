import numpy as np
import pytest

from attraos import chaos
from attraos.embedding import EmbeddingParams
from attraos.errors import DegenerateSeriesError, TooShortError
from attraos.lyapunov import estimate_mle, mle_table


def lorenz63_jacobian(s, p):
    x, y, z = s
    return np.array(
        [
            [-p.sigma, p.sigma, 0.0],
            [p.rho - z, -1.0, -x],
            [y, x, -p.beta],
        ]
    )


def benettin_mle(params, x0, dt, steps, discard=1000):
    """Tangent-space oracle: integrate state + deviation vector, renormalize
    each step, average the log growth."""
    x = np.asarray(x0, dtype=float).copy()
    v = np.array([1.0, 0.0, 0.0])
    total, count = 0.0, 0
    for k in range(steps):
        k1 = chaos.lorenz63_rhs(x, params)
        j1 = lorenz63_jacobian(x, params) @ v
        k2 = chaos.lorenz63_rhs(x + 0.5 * dt * k1, params)
        j2 = lorenz63_jacobian(x + 0.5 * dt * k1, params) @ (v + 0.5 * dt * j1)
        k3 = chaos.lorenz63_rhs(x + 0.5 * dt * k2, params)
        j3 = lorenz63_jacobian(x + 0.5 * dt * k2, params) @ (v + 0.5 * dt * j2)
        k4 = chaos.lorenz63_rhs(x + dt * k3, params)
        j4 = lorenz63_jacobian(x + dt * k3, params) @ (v + dt * j3)
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        v = v + (dt / 6.0) * (j1 + 2 * j2 + 2 * j3 + j4)
        growth = np.linalg.norm(v)
        v /= growth
        if k >= discard:
            total += np.log(growth)
            count += 1
    return total / (count * dt)


@pytest.fixture(scope="module")
def benettin_value():
    return benettin_mle(chaos.Lorenz63Params(), [1.0, 1.0, 1.0], 0.01, 31000)


class TestEstimateMle:
    def test_lorenz63_against_benettin(self, lorenz63_x, benettin_value):
        dt = 0.01
        est = estimate_mle(
            lorenz63_x,
            EmbeddingParams(3, 16),
            horizon=400,
            fit_range=(75, 275),  # linear region between transient and saturation
        )
        per_tu = est.mle / dt
        assert 0.75 <= per_tu <= 1.05
        assert abs(per_tu - benettin_value) <= 0.15
        assert 0.85 <= benettin_value <= 0.95  # literature value ~0.906

    def test_contracting_map_negative(self):
        rng = np.random.default_rng(0)
        x = np.empty(200)
        x[0] = 1.0
        for i in range(1, 200):
            x[i] = 0.9 * x[i - 1] + 1e-12 * rng.standard_normal()
        est = estimate_mle(x, EmbeddingParams(2, 1), horizon=40, theiler=2, fit_range=(1, 20))
        assert est.mle < 0
        assert est.mle == pytest.approx(np.log(0.9), abs=0.01)

    def test_sine_wave_near_zero(self):
        t = np.arange(4000)
        s = np.sin(2 * np.pi * t / 33.7)
        est = estimate_mle(s, EmbeddingParams(3, 8), horizon=100, fit_range=(1, 50))
        assert abs(est.mle) <= 0.01

    def test_curve_shape_and_determinism(self, lorenz63_x):
        a = estimate_mle(lorenz63_x[:8000], EmbeddingParams(3, 16), horizon=100)
        b = estimate_mle(lorenz63_x[:8000], EmbeddingParams(3, 16), horizon=100)
        assert np.array_equal(a.divergence_curve, b.divergence_curve)
        assert a.mle == b.mle
        assert a.divergence_curve.shape == (101,)
        assert a.fit_range == (1, 50)

    def test_constant_series_rejected(self):
        with pytest.raises(DegenerateSeriesError):
            estimate_mle(np.ones(1000), EmbeddingParams(2, 1), horizon=10)

    def test_too_short(self):
        with pytest.raises(TooShortError):
            estimate_mle(np.sin(np.arange(50.0)), EmbeddingParams(3, 5), horizon=100)

    def test_subsampling_monotonicity(self, lorenz63_x):
        # halving the sampling rate scales the per-step exponent up; assert
        # sign invariance and the monotone relation, not the exact factor
        fine = estimate_mle(lorenz63_x, EmbeddingParams(3, 16), horizon=300, fit_range=(60, 200))
        coarse = estimate_mle(
            lorenz63_x[::2], EmbeddingParams(3, 8), horizon=150, fit_range=(30, 100)
        )
        assert fine.mle > 0 and coarse.mle > 0
        assert coarse.mle > fine.mle


class TestMleTable:
    def test_single_channel_mean_identity(self, lorenz63_x):
        t = mle_table(lorenz63_x[:6000], EmbeddingParams(3, 16), horizon=80)
        assert t["mean"] == t["per_channel"][0]

    def test_identical_channels(self, lorenz63_x):
        x = lorenz63_x[:6000]
        t = mle_table(np.stack([x, x], axis=1), EmbeddingParams(3, 16), horizon=80)
        assert t["per_channel"][0] == t["per_channel"][1]
        assert t["mean"] == pytest.approx(t["per_channel"].mean())

    def test_per_channel_params(self, lorenz63_x):
        x = lorenz63_x[:6000]
        t = mle_table(
            np.stack([x, x[::-1]], axis=1),
            [EmbeddingParams(3, 16), EmbeddingParams(3, 16)],
            horizon=60,
        )
        assert t["per_channel"].shape == (2,)


def test_positive_mle_on_lorenz96(lorenz96_3d):
    est = estimate_mle(
        lorenz96_3d[:20000, 0], EmbeddingParams(5, 12), horizon=300, fit_range=(50, 200)
    )
    assert est.mle > 0
