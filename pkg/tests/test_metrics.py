import numpy as np
import pytest

from holomux.errors import (
    DegenerateGainError,
    EmptyAccumulatorError,
    InvalidParameterError,
    ShapeMismatchError,
)
from holomux.hologen import BINARY, DeviceSpec, Hologram, generate_ospr, generate_sttm, symmetrize_target
from holomux.metrics import (
    ReplayAccumulator,
    accumulate,
    averaged_replay,
    convergence_series,
    mse,
    optimal_gain,
    perceived_amplitude,
    run_seed,
    simulate_replay,
)


def random_hologram(rng, shape, m=2):
    return Hologram(rng.integers(0, m, shape), DeviceSpec(m))


class TestReplay:
    def test_uniform_hologram_is_impulse(self):
        out = simulate_replay(Hologram(np.zeros((8, 4), int), BINARY))
        expected = np.zeros((8, 4))
        expected[0, 0] = 32
        np.testing.assert_allclose(out, expected, atol=1e-12)

    @pytest.mark.parametrize("m", [2, 3, 8])
    def test_energy(self, rng, m):
        h = random_hologram(rng, (32, 16), m)
        assert abs(simulate_replay(h).sum() - 512) <= 1e-9 * 512

    def test_negation_invariant(self, rng):
        h = random_hologram(rng, (16, 16))
        neg = Hologram(1 - h.levels, BINARY)
        np.testing.assert_array_equal(h.values, -neg.values)
        np.testing.assert_allclose(simulate_replay(h), simulate_replay(neg), rtol=0, atol=1e-12)


class TestAccumulator:
    def test_zero_grid(self, rng):
        acc = ReplayAccumulator((3, 3))
        accumulate(acc, rng.random((3, 3)))
        before = acc.intensity_sum.copy()
        accumulate(acc, np.zeros((3, 3)))
        np.testing.assert_array_equal(acc.intensity_sum, before)
        assert acc.count == 2

    def test_order_independent(self, rng):
        grids = [rng.random((8, 8)) * 10 ** rng.uniform(-3, 3) for _ in range(10)]
        a, b = ReplayAccumulator((8, 8)), ReplayAccumulator((8, 8))
        for g in grids:
            a.add(g)
        for g in reversed(grids):
            b.add(g)
        np.testing.assert_allclose(a.intensity_sum, b.intensity_sum, rtol=1e-12)

    def test_identical_mean(self, rng):
        g = rng.random((4, 4))
        acc = ReplayAccumulator((4, 4)).add(g).add(g)
        np.testing.assert_allclose(acc.mean(), g, rtol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ReplayAccumulator((2, 2)).add(np.zeros((2, 3)))

    def test_merge(self, rng):
        grids = [rng.random((4, 4)) for _ in range(5)]
        a, b, whole = ReplayAccumulator((4, 4)), ReplayAccumulator((4, 4)), ReplayAccumulator((4, 4))
        for g in grids[:2]:
            a.add(g)
        for g in grids[2:]:
            b.add(g)
        for g in grids:
            whole.add(g)
        merged = a.merge(b)
        assert merged.count == 5
        np.testing.assert_allclose(merged.intensity_sum, whole.intensity_sum, rtol=1e-14)


class TestPerceived:
    def test_single(self, rng):
        g = rng.random((5, 5))
        np.testing.assert_array_equal(perceived_amplitude(ReplayAccumulator((5, 5)).add(g)), np.sqrt(g))

    def test_zeros(self):
        acc = ReplayAccumulator((2, 2)).add(np.zeros((2, 2)))
        np.testing.assert_array_equal(perceived_amplitude(acc), 0)

    def test_by_hand(self):
        acc = ReplayAccumulator((2, 2)).add(np.array([[4.0, 1.0], [0.0, 9.0]]))
        np.testing.assert_array_equal(perceived_amplitude(acc), [[2, 1], [0, 3]])

    def test_empty(self):
        with pytest.raises(EmptyAccumulatorError):
            perceived_amplitude(ReplayAccumulator((2, 2)))
        with pytest.raises(EmptyAccumulatorError):
            averaged_replay([])


class TestGainAndMSE:
    def test_gain_identity(self, rng):
        t = rng.random((8, 8))
        assert optimal_gain(t, t) == pytest.approx(1.0, rel=1e-15)

    def test_gain_proportional(self, rng):
        t = rng.random((8, 8))
        assert optimal_gain(2 * t, t) == pytest.approx(0.5, rel=1e-15)

    def test_gain_beats_scan(self, rng):
        t, r = rng.random((8, 8)), rng.random((8, 8))
        g = optimal_gain(r, t)
        best = mse(t, g * r, apply_gain=False).mse
        scan = np.linspace(0, 3, 30001)
        scanned = [np.mean((t - s * r) ** 2) for s in scan]
        assert best <= min(scanned) + 1e-15

    def test_gain_degenerate(self):
        with pytest.raises(DegenerateGainError):
            optimal_gain(np.zeros((2, 2)), np.ones((2, 2)))

    def test_gain_perturbation_never_helps(self, rng):
        for _ in range(20):
            t, r = rng.random((16, 16)), rng.random((16, 16))
            rep = mse(t, r)
            for f in (0.99, 1.01):
                assert mse(t, f * rep.gain * r, apply_gain=False).mse >= rep.mse

    def test_mse_identity(self, rng):
        t = rng.random((6, 6))
        assert mse(t, t).mse == pytest.approx(0.0, abs=1e-30)
        assert mse(t, t, apply_gain=False).mse == 0.0

    def test_mse_zero_target(self, rng):
        r = rng.random((6, 6))
        assert mse(np.zeros((6, 6)), r, apply_gain=False).mse == pytest.approx(np.mean(r**2), rel=1e-15)

    def test_mse_by_hand(self):
        t = np.array([[1.0, 0.0], [1.0, 0.0]])
        r = np.array([[0.0, 1.0], [0.0, 1.0]])
        rep = mse(t, r, apply_gain=False)
        assert rep.mse == 1.0 and rep.gain == 1.0

    def test_mse_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            mse(np.zeros((2, 2)), np.zeros((3, 2)))


@pytest.fixture(scope="module")
def small_target():
    rng = np.random.default_rng(5)
    return symmetrize_target(rng.random((32, 32)))


class TestConvergence:
    def test_single_run_std_zero(self, small_target):
        cs = convergence_series(small_target, BINARY, "ospr", 4, runs=1, seed=1)
        assert [p.std_mse for p in cs.points] == [0.0] * 4
        assert [p.n for p in cs.points] == [1, 2, 3, 4]

    def test_ospr_prefix_property(self, small_target):
        cs = convergence_series(small_target, BINARY, "ospr", 6, runs=3, seed=2)
        for r in range(3):
            subs = generate_ospr(small_target, BINARY, 6, run_seed(2, r))
            for j, n in enumerate(range(1, 7)):
                fresh = mse(small_target, averaged_replay(subs.subframes[:n])).mse
                assert cs.samples[r, j] == fresh

    def test_sttm_points_are_full_runs(self, small_target):
        cs = convergence_series(small_target, BINARY, "sttm", 6, runs=2, seed=2, n_values=[1, 3, 6])
        for r in range(2):
            for j, n in enumerate([1, 3, 6]):
                subs = generate_sttm(small_target, BINARY, n, run_seed(2, r))
                assert cs.samples[r, j] == mse(small_target, averaged_replay(subs)).mse

    def test_sttm_ospr_coincide_at_one(self, small_target):
        a = convergence_series(small_target, BINARY, "ospr", 3, runs=4, seed=9)
        b = convergence_series(small_target, BINARY, "sttm", 3, runs=4, seed=9)
        assert a.point(1) == b.point(1)

    def test_hybrid_divisibility(self, small_target):
        with pytest.raises(InvalidParameterError):
            convergence_series(small_target, BINARY, "hybrid", 10, runs=2, sets=3)
        cs = convergence_series(small_target, BINARY, "hybrid", 12, runs=2, sets=3, n_values=[12])
        assert cs.point(12).runs == 2

    @pytest.mark.parametrize("kwargs", [dict(runs=0), dict(n_max=0), dict(n_values=[5])])
    def test_invalid(self, small_target, kwargs):
        args = dict(n_max=4, runs=2)
        args.update(kwargs)
        with pytest.raises(InvalidParameterError):
            convergence_series(small_target, BINARY, "ospr", **args)

    def test_ospr_mean_non_increasing(self, photo256):
        ns = [1, 2, 4, 8, 16, 24]
        cs = convergence_series(photo256, BINARY, "ospr", 24, runs=20, seed=4, n_values=ns)
        for a, b in zip(cs.points, cs.points[1:]):
            pooled = np.sqrt((a.std_mse**2 + b.std_mse**2) / 2)
            assert b.mean_mse <= a.mean_mse + pooled

    def test_no_gain_flag(self, small_target):
        with_gain = convergence_series(small_target, BINARY, "ospr", 2, runs=2, seed=1)
        raw = convergence_series(small_target, BINARY, "ospr", 2, runs=2, seed=1, apply_gain=False)
        assert raw.mean(2) > with_gain.mean(2)


def test_run_seed_deterministic_and_distinct():
    assert run_seed(1, 0) == run_seed(1, 0)
    assert len({run_seed(1, r) for r in range(100)}) == 100
    assert 0 <= run_seed(-5, 3) < 2**64
