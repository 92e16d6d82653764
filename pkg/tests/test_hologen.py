import math

import numpy as np
import pytest

from holomux.errors import InvalidPlanError, InvalidTargetError, UnsupportedSizeError
from holomux.field import ComplexField, RandomStream, count_transforms, rotate_field
from holomux.hologen import (
    BINARY,
    Algorithm,
    DeviceSpec,
    GenerationPlan,
    Hologram,
    _sector_levels,
    generate,
    generate_hybrid,
    generate_ospr,
    generate_sttm,
    quantize,
    randomize_phase,
    sttm_angles,
    symmetrize_target,
    union_constellation,
)
from holomux.metrics import averaged_replay, mse, simulate_replay


def nearest_level_oracle(values, m):
    """Brute-force nearest level by Euclidean distance on the unit circle."""
    levels = np.exp(2j * np.pi * np.arange(m) / m)
    return np.argmin(np.abs(values[..., None] / np.abs(values[..., None]) - levels), axis=-1)


class TestDeviceSpec:
    def test_binary_levels_exact(self):
        np.testing.assert_array_equal(BINARY.level_values, [1, -1])

    @pytest.mark.parametrize("m", [2, 3, 4, 6, 8, 256, 300])
    def test_levels_equally_spaced(self, m):
        d = DeviceSpec(m)
        ph = d.level_phases
        assert len(np.unique(ph)) == m
        np.testing.assert_allclose(np.diff(ph), 2 * np.pi / m, atol=1e-12)
        np.testing.assert_allclose(np.abs(d.level_values), 1.0, atol=1e-15)
        assert np.iinfo(d.index_dtype).max >= m - 1

    @pytest.mark.parametrize("m", [0, 1, 2.5])
    def test_invalid(self, m):
        with pytest.raises(InvalidPlanError):
            DeviceSpec(m)


class TestSymmetrize:
    def test_symmetric_input_unchanged(self, rng):
        t = symmetrize_target(rng.random((8, 6)))
        np.testing.assert_array_equal(symmetrize_target(t), t)

    def test_single_bright_pixel(self):
        t = np.zeros((4, 4))
        t[1, 1] = 1.0
        out = symmetrize_target(t)
        expected = np.zeros((4, 4))
        expected[1, 1] = expected[3, 3] = 1.0
        np.testing.assert_array_equal(out, expected)

    def test_odd_size_rejected(self):
        with pytest.raises(UnsupportedSizeError):
            symmetrize_target(np.ones((4, 5)))

    def test_top_half_preserved(self, rng):
        img = rng.random((16, 10))
        out = symmetrize_target(img)
        np.testing.assert_array_equal(out[1:8], img[1:8])
        np.testing.assert_array_equal(out[8, :6], img[8, :6])
        np.testing.assert_array_equal(out[0, :6], img[0, :6])

    def test_photo_exhaustive_symmetry(self, photo512):
        t = photo512
        ny, nx = t.shape
        v, u = np.mgrid[0:ny, 0:nx]
        assert np.count_nonzero(t - t[(-v) % ny, (-u) % nx]) == 0


class TestRandomizePhase:
    def test_zero_target(self):
        out = randomize_phase(np.zeros((4, 6)), RandomStream(5, 1))
        assert np.all(out.values == 0)

    def test_modulus_preserved(self, rng):
        t = rng.random((32, 32))
        out = randomize_phase(t, RandomStream(5, 1))
        np.testing.assert_allclose(np.abs(out.values), t, rtol=1e-15, atol=0)

    def test_negative_rejected(self):
        t = np.ones((2, 2))
        t[0, 1] = -0.1
        with pytest.raises(InvalidTargetError):
            randomize_phase(t, RandomStream(0, 1))

    def test_phase_histogram_uniform(self):
        out = randomize_phase(np.ones((512, 512)), RandomStream(11, 1))
        phases = np.mod(np.angle(out.values), 2 * np.pi).ravel()
        counts, _ = np.histogram(phases, bins=16, range=(0, 2 * np.pi))
        expected = phases.size / 16
        # 3 sigma of a binomial count with p = 1/16 is ~1.4% of expected; 5% is generous
        assert np.all(np.abs(counts - expected) <= 0.05 * expected)

    def test_deterministic(self, rng):
        t = rng.random((8, 8))
        assert randomize_phase(t, RandomStream(3, 2)) == randomize_phase(t, RandomStream(3, 2))


class TestQuantize:
    @pytest.mark.parametrize("phase,level", [(math.pi / 4, 0), (3 * math.pi / 4, 1),
                                             (-3 * math.pi / 4, 1), (-math.pi / 4, 0)])
    def test_binary_nearest(self, phase, level):
        h = quantize(np.array([[np.exp(1j * phase)]]))
        assert h.levels[0, 0] == level

    def test_binary_tie_goes_to_higher_level(self):
        # exact pi/2 -> level 1; exact -pi/2 (= 3pi/2) -> level 0 (sector start)
        h = quantize(np.array([[1j, -1j, -0.0 + 1j]]))
        np.testing.assert_array_equal(h.levels, [[1, 0, 1]])

    @pytest.mark.parametrize("zero", [0j, complex(-0.0, 0.0), complex(0.0, -0.0), complex(-0.0, -0.0)])
    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_zero_amplitude_level_zero(self, zero, m):
        assert quantize(np.array([[zero]]), DeviceSpec(m)).levels[0, 0] == 0

    def test_amplitude_ignored(self):
        v = np.array([[0.001 * np.exp(0.4j), 1000 * np.exp(0.4j)]])
        h = quantize(v, DeviceSpec(8))
        assert h.levels[0, 0] == h.levels[0, 1]

    def test_output_on_levels(self, rng):
        v = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        for m in (2, 3, 5):
            vals = quantize(v, DeviceSpec(m)).values
            assert np.all(np.isin(vals, DeviceSpec(m).level_values))

    @pytest.mark.parametrize("m", [2, 3, 4, 7, 16])
    def test_matches_nearest_level_oracle(self, rng, m):
        v = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        np.testing.assert_array_equal(quantize(v, DeviceSpec(m)).levels, nearest_level_oracle(v, m))

    def test_binary_fast_path_matches_sector_rule(self, rng):
        v = rng.standard_normal(10000) + 1j * rng.standard_normal(10000)
        v = np.concatenate([v, [1j, -1j, 1, -1, 0, complex(-0.0, 1)]])[None, :]
        fast = quantize(v, BINARY).levels
        general = _sector_levels(v.real, v.imag, 2)
        np.testing.assert_array_equal(fast, general)


class TestSttmAngles:
    def test_binary_three(self):
        np.testing.assert_allclose(np.degrees(sttm_angles(BINARY, 3)), [0, 60, 120], atol=1e-12)

    @pytest.mark.parametrize("m", [2, 3, 8])
    def test_single(self, m):
        np.testing.assert_array_equal(sttm_angles(DeviceSpec(m), 1), [0.0])

    def test_binary_two(self):
        np.testing.assert_allclose(np.degrees(sttm_angles(BINARY, 2)), [0, 90], atol=1e-12)

    @pytest.mark.parametrize("n", [0, -1])
    def test_invalid(self, n):
        with pytest.raises(InvalidPlanError):
            sttm_angles(BINARY, n)

    @pytest.mark.parametrize("m,n", [(2, 1), (2, 2), (2, 3), (2, 12), (3, 4), (4, 5), (8, 3)])
    def test_union_constellation(self, m, n):
        u = union_constellation(DeviceSpec(m), n)
        assert len(u) == m * n
        gaps = np.diff(np.concatenate([u, [u[0] + 2 * np.pi]]))
        assert np.max(np.abs(gaps - 2 * np.pi / (m * n))) <= 1e-12


class TestPlans:
    def test_total(self):
        assert GenerationPlan(Algorithm.HYBRID, 4, 3, 1).total == 12
        assert GenerationPlan("ospr", 5).total == 5

    @pytest.mark.parametrize("kwargs", [dict(subframes=0), dict(subframes=2, sets=0),
                                        dict(subframes=2, sets=2, algorithm="sttm"),
                                        dict(subframes=2, seed=2**64)])
    def test_invalid(self, kwargs):
        args = dict(algorithm="hybrid", subframes=1, sets=1, seed=0)
        args.update(kwargs)
        with pytest.raises(InvalidPlanError):
            GenerationPlan(**args)


@pytest.fixture(scope="module")
def target32():
    rng = np.random.default_rng(0)
    return symmetrize_target(rng.random((32, 32)))


class TestGenerators:
    def test_ospr_sttm_coincide_at_one(self, target32):
        a = generate_ospr(target32, BINARY, 1, seed=42)
        b = generate_sttm(target32, BINARY, 1, seed=42)
        assert a.subframes == b.subframes

    @pytest.mark.parametrize("gen", [generate_ospr, generate_sttm])
    def test_deterministic(self, target32, gen):
        a = gen(target32, BINARY, 5, seed=7)
        b = gen(target32, BINARY, 5, seed=7)
        assert a.subframes == b.subframes
        c = gen(target32, BINARY, 5, seed=8)
        assert a.subframes != c.subframes

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_sttm_rederivation(self, target32, m):
        dev = DeviceSpec(m)
        s = generate_sttm(target32, dev, 6, seed=3, keep_apertures=True)
        (ap,) = s.apertures
        for holo, angle in zip(s, s.rotation_angles):
            assert quantize(rotate_field(ap, angle), dev) == holo

    def test_ospr_rederivation(self, target32):
        s = generate_ospr(target32, BINARY, 3, seed=3, keep_apertures=True)
        for holo, ap in zip(s, s.apertures):
            assert quantize(ap) == holo

    def test_hybrid_one_set_is_sttm(self, target32):
        assert generate_hybrid(target32, BINARY, 1, 5, seed=9).subframes == \
            generate_sttm(target32, BINARY, 5, seed=9).subframes

    def test_hybrid_singletons_are_ospr(self, target32):
        assert generate_hybrid(target32, BINARY, 6, 1, seed=9).subframes == \
            generate_ospr(target32, BINARY, 6, seed=9).subframes

    def test_hybrid_layout(self, target32):
        s = generate_hybrid(target32, DeviceSpec(3), 3, 4, seed=1)
        assert len(s) == 12
        assert s.rotation_angles == tuple(sttm_angles(DeviceSpec(3), 4)) * 3

    @pytest.mark.parametrize("m", [2, 4])
    def test_pixels_on_levels(self, target32, m):
        dev = DeviceSpec(m)
        for s in (generate_ospr(target32, dev, 3, 1), generate_sttm(target32, dev, 3, 1),
                  generate_hybrid(target32, dev, 2, 2, 1)):
            for h in s:
                assert np.all(np.isin(h.values, dev.level_values))

    def test_transform_counts(self, target32):
        with count_transforms() as c:
            generate_ospr(target32, BINARY, 7, 0)
        assert c == {"forward": 0, "inverse": 7}
        with count_transforms() as c:
            generate_sttm(target32, BINARY, 7, 0)
        assert c == {"forward": 0, "inverse": 1}
        with count_transforms() as c:
            generate_hybrid(target32, BINARY, 3, 4, 0)
        assert c == {"forward": 0, "inverse": 3}

    @pytest.mark.parametrize("plan", [GenerationPlan("ospr", 8, 1, 5), GenerationPlan("sttm", 8, 1, 5),
                                      GenerationPlan("hybrid", 2, 4, 5)])
    def test_thread_count_independent(self, target32, plan):
        one = generate(plan, target32, BINARY, workers=1)
        many = generate(plan, target32, BINARY, workers=4)
        assert one.subframes == many.subframes
        assert one.plan == plan

    def test_target_validation(self):
        with pytest.raises(InvalidTargetError):
            generate_sttm(-np.ones((4, 4)), BINARY, 2, 0)

    def test_averaging_beats_single_subframes(self, photo256):
        # averaging 24 OSPR sub-frames must beat each of its own sub-frames
        for seed in range(20):
            s = generate_ospr(photo256, BINARY, 24, seed)
            avg = mse(photo256, averaged_replay(s)).mse
            singles = [mse(photo256, np.sqrt(simulate_replay(h))).mse for h in s]
            assert avg < min(singles), seed


def test_hologram_validation():
    with pytest.raises(ValueError):
        Hologram(np.array([[0, 2]]), BINARY)
    with pytest.raises(ValueError):
        Hologram(np.array([0, 1]), BINARY)
    h = Hologram(np.array([[0, 1]]), BINARY)
    assert isinstance(h.field, ComplexField)
    np.testing.assert_array_equal(h.values, [[1, -1]])
