"""Replay simulation, eye-style intensity averaging and error metrics."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateGainError,
    EmptyAccumulatorError,
    InvalidParameterError,
    ShapeMismatchError,
)
from .field import forward_transform
from .hologen import (
    Algorithm,
    BINARY,
    DeviceSpec,
    Hologram,
    _aperture,
    _check_target,
    _sttm_from_aperture,
    generate_hybrid,
    generate_ospr,
    sttm_angles,
)

__all__ = [
    "simulate_replay",
    "ReplayAccumulator",
    "accumulate",
    "perceived_amplitude",
    "averaged_replay",
    "optimal_gain",
    "ErrorReport",
    "mse",
    "ConvergencePoint",
    "ConvergenceSeries",
    "convergence_series",
    "run_seed",
]


def simulate_replay(hologram: Hologram) -> np.ndarray:
    """Far-field intensity ``|F{h}|**2`` of a quantized hologram."""
    r = forward_transform(hologram.field).values
    return r.real * r.real + r.imag * r.imag


class ReplayAccumulator:
    """Running equal-weight sum of replay intensities.

    Accumulators from different threads can be combined with :meth:`merge`.
    """

    def __init__(self, shape):
        self.intensity_sum = np.zeros(tuple(shape), dtype=np.float64)
        self.count = 0

    @property
    def shape(self):
        return self.intensity_sum.shape

    def add(self, intensity) -> "ReplayAccumulator":
        intensity = np.asarray(intensity, dtype=np.float64)
        if intensity.shape != self.shape:
            raise ShapeMismatchError(f"expected shape {self.shape}, got {intensity.shape}")
        if np.any(intensity < 0):
            raise ValueError("intensities must be non-negative")
        self.intensity_sum += intensity
        self.count += 1
        return self

    def merge(self, other: "ReplayAccumulator") -> "ReplayAccumulator":
        if other.shape != self.shape:
            raise ShapeMismatchError("cannot merge accumulators of different shape")
        out = ReplayAccumulator(self.shape)
        out.intensity_sum = self.intensity_sum + other.intensity_sum
        out.count = self.count + other.count
        return out

    def mean(self) -> np.ndarray:
        if self.count == 0:
            raise EmptyAccumulatorError("no sub-frames accumulated")
        return self.intensity_sum / self.count


def accumulate(acc: ReplayAccumulator, intensity) -> ReplayAccumulator:
    return acc.add(intensity)


def perceived_amplitude(acc: ReplayAccumulator) -> np.ndarray:
    """``sqrt(intensity_sum / count)``: what an intensity-integrating eye sees."""
    return np.sqrt(acc.mean())


def averaged_replay(holograms: Sequence[Hologram]) -> np.ndarray:
    """Perceived amplitude of a sequence of sub-frames shown in one frame."""
    holograms = list(holograms)
    if not holograms:
        raise EmptyAccumulatorError("no sub-frames given")
    acc = ReplayAccumulator(holograms[0].shape)
    for h in holograms:
        acc.add(simulate_replay(h))
    return perceived_amplitude(acc)


def _pair(target, replay_amp):
    t = np.asarray(target, dtype=np.float64)
    r = np.asarray(replay_amp, dtype=np.float64)
    if t.shape != r.shape:
        raise ShapeMismatchError(f"target shape {t.shape} != replay shape {r.shape}")
    return t, r


def optimal_gain(replay_amp, target) -> float:
    """Least-squares scale ``g`` minimizing ``sum((|T| - g*|R|)**2)``."""
    t, r = _pair(target, replay_amp)
    t, r = np.abs(t), np.abs(r)
    denom = float(np.sum(r * r))
    if denom == 0.0:
        raise DegenerateGainError("replay is identically zero")
    return float(np.sum(t * r)) / denom


@dataclass(frozen=True)
class ErrorReport:
    mse: float
    gain: float
    n_subframes: int = 0


def mse(target, replay_amp, apply_gain: bool = True, n_subframes: int = 0) -> ErrorReport:
    """Phase-insensitive mean squared error ``mean((|T| - g*|R|)**2)``.

    With ``apply_gain`` the replay is first scaled by :func:`optimal_gain`,
    which removes overall brightness mismatch between target and simulation.
    """
    t, r = _pair(target, replay_amp)
    t, r = np.abs(t), np.abs(r)
    g = optimal_gain(r, t) if apply_gain else 1.0
    d = t - g * r
    return ErrorReport(float(np.mean(d * d)), g, n_subframes)


# -- convergence experiments -------------------------------------------------

def run_seed(seed: int, run: int) -> int:
    """Deterministic 64-bit seed for repetition ``run`` of an experiment."""
    ss = np.random.SeedSequence(entropy=[int(seed) % 2**64, int(run)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ConvergencePoint:
    n: int
    mean_mse: float
    std_mse: float
    runs: int


@dataclass(frozen=True)
class ConvergenceSeries:
    algorithm: Algorithm
    seed: int
    points: tuple[ConvergencePoint, ...]
    samples: np.ndarray = dc_field(repr=False, compare=False)

    def point(self, n: int) -> ConvergencePoint:
        for p in self.points:
            if p.n == n:
                return p
        raise KeyError(n)

    def mean(self, n: int) -> float:
        return self.point(n).mean_mse


def _score(target, acc: ReplayAccumulator, apply_gain: bool) -> float:
    return mse(target, perceived_amplitude(acc), apply_gain).mse


def _prefix_scores(target, holograms, ns, apply_gain):
    wanted = set(ns)
    acc = ReplayAccumulator(target.shape)
    scores = {}
    for k, h in enumerate(holograms, start=1):
        acc.add(simulate_replay(h))
        if k in wanted:
            scores[k] = _score(target, acc, apply_gain)
    return [scores[n] for n in ns]


def convergence_series(
    target,
    device: DeviceSpec = BINARY,
    algorithm="sttm",
    n_max: int = 24,
    runs: int = 20,
    seed: int = 0,
    *,
    n_values: Sequence[int] | None = None,
    sets: int = 3,
    apply_gain: bool = True,
) -> ConvergenceSeries:
    """Mean/std of the averaged-replay MSE versus sub-frame count.

    Each run ``r`` uses the seed ``run_seed(seed, r)``.  Scores are computed
    for every ``N`` in ``n_values`` (default ``1..n_max``).

    * OSPR: the score at ``N`` uses the first ``N`` sub-frames of a single
      ``n_max`` sub-frame generation.
    * HYBRID: same prefix scheme on one run of ``sets`` restarts of
      ``n_max // sets`` sub-frames (``n_max`` must be divisible by ``sets``).
    * STTM: the rotation angles depend on ``N``, so a prefix of a longer run
      is not an N-frame STTM hologram.  Each ``N`` is a full
      ``generate_sttm(N)`` on the run's single shared aperture (stream 1),
      which is exactly what separate calls with the run seed produce.
    """
    algorithm = Algorithm(algorithm)
    if runs < 1:
        raise InvalidParameterError("runs must be >= 1")
    if n_max < 1:
        raise InvalidParameterError("n_max must be >= 1")
    ns = sorted(set(n_values)) if n_values is not None else list(range(1, n_max + 1))
    if not ns or ns[0] < 1 or ns[-1] > n_max:
        raise InvalidParameterError(f"n_values must lie in 1..{n_max}")
    if algorithm is Algorithm.HYBRID and n_max % sets:
        raise InvalidParameterError(f"n_max={n_max} is not divisible by sets={sets}")
    t = _check_target(target)

    samples = np.empty((runs, len(ns)))
    for r in range(runs):
        s = run_seed(seed, r)
        if algorithm is Algorithm.OSPR:
            holos = generate_ospr(t, device, n_max, s).subframes
            samples[r] = _prefix_scores(t, holos, ns, apply_gain)
        elif algorithm is Algorithm.HYBRID:
            holos = generate_hybrid(t, device, sets, n_max // sets, s).subframes
            samples[r] = _prefix_scores(t, holos, ns, apply_gain)
        else:
            ap = _aperture(t, s, 1)
            for j, n in enumerate(ns):
                holos = _sttm_from_aperture(ap, device, sttm_angles(device, n))
                samples[r, j] = _prefix_scores(t, holos, [n], apply_gain)[0]

    means = samples.mean(axis=0)
    stds = samples.std(axis=0, ddof=1) if runs > 1 else np.zeros(len(ns))
    points = tuple(
        ConvergencePoint(n, float(m), float(sd), runs) for n, m, sd in zip(ns, means, stds)
    )
    return ConvergenceSeries(algorithm, seed, points, samples)
