"""Hologram generation for quantized phase modulators.

Three time-multiplexed generators are provided:

* :func:`generate_ospr` -- one-step phase retrieval.  Every sub-frame gets a
  fresh random target phase and its own inverse transform.
* :func:`generate_sttm` -- single-transform time multiplexing.  One random
  phase, one inverse transform; sub-frame ``n`` quantizes the aperture after
  rotating it by ``2*pi*(n-1)/(M*N)``.
* :func:`generate_hybrid` -- STTM restarted ``M_sets`` times with fresh phases.

Substreams: OSPR sub-frame ``n`` (1-based) draws from stream ``n``; STTM uses
stream 1; hybrid set ``m`` (1-based) uses stream ``m``.  With this convention
OSPR(N=1), STTM(N=1) and hybrid(M_sets=N, N_per=1) vs OSPR(N) coincide
bit-for-bit.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .errors import InvalidPlanError, InvalidTargetError, UnsupportedSizeError
from .field import (
    ComplexField,
    RandomStream,
    _rotated_parts,
    as_field,
    inverse_transform,
    rotation_factors,
    uniform_phase_samples,
)

__all__ = [
    "Algorithm",
    "DeviceSpec",
    "BINARY",
    "Hologram",
    "GenerationPlan",
    "SubframeSet",
    "symmetrize_target",
    "randomize_phase",
    "quantize",
    "sttm_angles",
    "union_constellation",
    "generate_ospr",
    "generate_sttm",
    "generate_hybrid",
    "generate",
]

TWO_PI = 2.0 * math.pi


class Algorithm(str, enum.Enum):
    OSPR = "ospr"
    STTM = "sttm"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class DeviceSpec:
    """Phase modulator with ``level_count`` equally spaced unit-magnitude levels."""

    level_count: int = 2

    def __post_init__(self):
        if int(self.level_count) != self.level_count or self.level_count < 2:
            raise InvalidPlanError(f"level_count must be an integer >= 2, got {self.level_count}")

    @property
    def level_phases(self) -> np.ndarray:
        return TWO_PI * np.arange(self.level_count) / self.level_count

    @cached_property
    def level_values(self) -> np.ndarray:
        """Complex level constants; exact at quarter turns (so binary is +-1)."""
        vals = np.empty(self.level_count, dtype=np.complex128)
        for k, ph in enumerate(self.level_phases):
            c, s = rotation_factors(ph)
            vals[k] = complex(c, s)
        vals.flags.writeable = False
        return vals

    @property
    def index_dtype(self):
        return np.min_scalar_type(self.level_count - 1)


BINARY = DeviceSpec(2)


class Hologram:
    """A quantized aperture: one device level index per pixel."""

    __slots__ = ("levels", "device")

    def __init__(self, levels: np.ndarray, device: DeviceSpec):
        levels = np.asarray(levels)
        if levels.ndim != 2:
            raise ValueError("levels must be 2-D")
        if levels.size and (levels.min() < 0 or levels.max() >= device.level_count):
            raise ValueError("level index out of range for device")
        levels = levels.astype(device.index_dtype, copy=False)
        levels.flags.writeable = False
        self.levels = levels
        self.device = device

    @property
    def shape(self) -> tuple[int, int]:
        return self.levels.shape

    @property
    def values(self) -> np.ndarray:
        return self.device.level_values[self.levels]

    @property
    def field(self) -> ComplexField:
        return ComplexField._wrap(self.values)

    def __eq__(self, other):
        if not isinstance(other, Hologram):
            return NotImplemented
        return self.device == other.device and np.array_equal(self.levels, other.levels)

    __hash__ = None

    def __repr__(self):
        h, w = self.shape
        return f"Hologram({w}x{h}, levels={self.device.level_count})"


@dataclass(frozen=True)
class GenerationPlan:
    """What to generate.

    For ``HYBRID`` the run consists of ``sets`` restarts of ``subframes``
    STTM sub-frames each; for the other algorithms ``sets`` must be 1.
    """

    algorithm: Algorithm
    subframes: int
    sets: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.subframes < 1:
            raise InvalidPlanError("subframes must be >= 1")
        if self.sets < 1:
            raise InvalidPlanError("sets must be >= 1")
        if self.algorithm is not Algorithm.HYBRID and self.sets != 1:
            raise InvalidPlanError("sets > 1 is only meaningful for HYBRID")
        if not -(2**63) <= int(self.seed) < 2**64:
            raise InvalidPlanError("seed must fit in 64 bits")

    @property
    def total(self) -> int:
        return self.subframes * self.sets


@dataclass(frozen=True)
class SubframeSet:
    subframes: tuple[Hologram, ...]
    plan: GenerationPlan
    rotation_angles: tuple[float, ...]
    elapsed: float
    apertures: tuple[ComplexField, ...] = dc_field(default=(), repr=False)

    def __post_init__(self):
        if len(self.subframes) != self.plan.total:
            raise ValueError("subframe count does not match plan")
        if len(self.rotation_angles) != len(self.subframes):
            raise ValueError("one rotation angle per subframe required")

    def __len__(self):
        return len(self.subframes)

    def __iter__(self):
        return iter(self.subframes)

    def __getitem__(self, i):
        return self.subframes[i]


# -- target preparation -------------------------------------------------------

def symmetrize_target(image) -> np.ndarray:
    """Force point symmetry ``T[v, u] == T[-v mod Ny, -u mod Nx]``.

    Rows ``1 .. Ny/2 - 1`` keep the input; the rows below are the 180 degree
    rotated copy.  The two self-conjugate rows (0 and ``Ny/2``) keep their
    left half, columns ``0 .. Nx/2``, and mirror it to the right.  Binary
    phase holograms can only produce such point-symmetric replay intensities.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise UnsupportedSizeError(f"target must be 2-D, got shape {img.shape}")
    ny, nx = img.shape
    if ny % 2 or nx % 2:
        raise UnsupportedSizeError(f"symmetrization needs even dimensions, got {nx}x{ny}")
    flipped = np.roll(img[::-1, ::-1], (1, 1), axis=(0, 1))
    out = img.copy()
    out[ny // 2 + 1:] = flipped[ny // 2 + 1:]
    for row in (0, ny // 2):
        out[row, nx // 2 + 1:] = flipped[row, nx // 2 + 1:]
    return out


def _check_target(target) -> np.ndarray:
    t = np.asarray(target, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
        raise InvalidTargetError(f"target must be a non-empty 2-D grid, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise InvalidTargetError("target contains NaN or Inf")
    if np.any(t < 0):
        raise InvalidTargetError("target amplitudes must be non-negative")
    return t


def randomize_phase(target, stream: RandomStream) -> ComplexField:
    """Attach i.i.d. uniform phases to a non-negative amplitude grid."""
    t = _check_target(target)
    phi = uniform_phase_samples(stream, t.size).reshape(t.shape)
    return ComplexField._wrap(t * np.exp(1j * phi))


# -- quantization -------------------------------------------------------------

def _binary_levels(re: np.ndarray, im: np.ndarray | None) -> np.ndarray:
    # Sector rule for M=2: level 1 covers phases [pi/2, 3*pi/2).  Phase pi/2
    # (re == 0, im > 0) is level 1; -pi/2 and the zero value are level 0.
    # im is only read when some re == 0.
    lv = re < 0
    zero = re == 0
    if zero.any():
        lv |= zero & (im > 0)
    return lv.view(np.uint8)


def _sector_levels(re: np.ndarray, im: np.ndarray, m: int) -> np.ndarray:
    # Level k owns [2*pi*k/m - pi/m, 2*pi*k/m + pi/m).
    phase = np.arctan2(im, re)
    phase[phase < 0] += TWO_PI
    k = np.floor((phase + math.pi / m) / (TWO_PI / m)).astype(np.int64) % m
    k[(re == 0) & (im == 0)] = 0
    return k


def _levels(re: np.ndarray, im: np.ndarray, device: DeviceSpec) -> np.ndarray:
    if device.level_count == 2:
        return _binary_levels(re, im)
    return _sector_levels(re, im, device.level_count)


def quantize(field, device: DeviceSpec = BINARY) -> Hologram:
    """Map each pixel to the device level of nearest phase (amplitude ignored)."""
    f = as_field(field)
    v = f.values
    return Hologram(_levels(v.real, v.imag, device), device)


def _quantize_rotated(re, im, angle: float, device: DeviceSpec) -> Hologram:
    # Equivalent to quantize(rotate_field(field, angle)), without building
    # the rotated complex array.
    c, s = rotation_factors(angle)
    if device.level_count == 2:
        rre = re * c - im * s
        rim = _rotated_parts(re, im, c, s)[1] if (rre == 0).any() else None
        return Hologram(_binary_levels(rre, rim), device)
    rre, rim = _rotated_parts(re, im, c, s)
    return Hologram(_sector_levels(rre, rim, device.level_count), device)


def sttm_angles(device: DeviceSpec, n: int) -> np.ndarray:
    """Rotation angles ``2*pi*(k-1)/(M*N)`` for ``k = 1..N``."""
    if int(n) != n or n < 1:
        raise InvalidPlanError(f"number of sub-frames must be >= 1, got {n}")
    return TWO_PI * np.arange(n) / (device.level_count * n)


def union_constellation(device: DeviceSpec, n: int) -> np.ndarray:
    """Sorted effective level phases in [0, 2*pi) over N STTM sub-frames.

    Sub-frame ``k`` displays ``level * exp(-i*alpha_k)`` relative to the
    un-rotated aperture, so the union is the level set shifted by each angle.
    """
    shifted = np.mod(device.level_phases[None, :] - sttm_angles(device, n)[:, None], TWO_PI)
    return np.sort(shifted.ravel())


# -- generators ---------------------------------------------------------------

def _aperture(target: np.ndarray, seed: int, stream_index: int) -> ComplexField:
    return inverse_transform(randomize_phase(target, RandomStream(seed, stream_index)))


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _sttm_from_aperture(aperture: ComplexField, device: DeviceSpec, angles, workers=1):
    v = aperture.values
    re = np.ascontiguousarray(v.real)
    im = np.ascontiguousarray(v.imag)
    return _map(lambda a: _quantize_rotated(re, im, a, device), angles, workers)


def generate_ospr(target, device: DeviceSpec = BINARY, n: int = 1, seed: int = 0,
                  *, workers: int = 1, keep_apertures: bool = False) -> SubframeSet:
    """N independent randomize -> inverse transform -> quantize passes.

    ``target`` should already be symmetrized when the device is binary.
    """
    plan = GenerationPlan(Algorithm.OSPR, n, 1, seed)
    t = _check_target(target)
    start = time.perf_counter()

    def one(k):
        ap = _aperture(t, seed, k)
        v = ap.values
        holo = _quantize_rotated(v.real, v.imag, 0.0, device)
        return holo, ap

    results = _map(one, range(1, n + 1), workers)
    elapsed = time.perf_counter() - start
    return SubframeSet(
        subframes=tuple(h for h, _ in results),
        plan=plan,
        rotation_angles=(0.0,) * n,
        elapsed=elapsed,
        apertures=tuple(a for _, a in results) if keep_apertures else (),
    )


def generate_sttm(target, device: DeviceSpec = BINARY, n: int = 1, seed: int = 0,
                  *, workers: int = 1, keep_apertures: bool = False) -> SubframeSet:
    """One randomize + inverse transform, then N rotated quantizations."""
    plan = GenerationPlan(Algorithm.STTM, n, 1, seed)
    t = _check_target(target)
    start = time.perf_counter()
    ap = _aperture(t, seed, 1)
    angles = sttm_angles(device, n)
    holos = _sttm_from_aperture(ap, device, angles, workers)
    elapsed = time.perf_counter() - start
    return SubframeSet(
        subframes=tuple(holos),
        plan=plan,
        rotation_angles=tuple(float(a) for a in angles),
        elapsed=elapsed,
        apertures=(ap,) if keep_apertures else (),
    )


def generate_hybrid(target, device: DeviceSpec = BINARY, sets: int = 1, n_per: int = 1,
                    seed: int = 0, *, workers: int = 1,
                    keep_apertures: bool = False) -> SubframeSet:
    """``sets`` independent STTM runs of ``n_per`` sub-frames, in set order."""
    plan = GenerationPlan(Algorithm.HYBRID, n_per, sets, seed)
    t = _check_target(target)
    start = time.perf_counter()
    angles = sttm_angles(device, n_per)

    def one_set(m):
        ap = _aperture(t, seed, m)
        # parallelism is across sets; each set runs its rotations serially
        return _sttm_from_aperture(ap, device, angles), ap

    results = _map(one_set, range(1, sets + 1), workers)
    elapsed = time.perf_counter() - start
    return SubframeSet(
        subframes=tuple(h for holos, _ in results for h in holos),
        plan=plan,
        rotation_angles=tuple(float(a) for a in angles) * sets,
        elapsed=elapsed,
        apertures=tuple(a for _, a in results) if keep_apertures else (),
    )


def generate(plan: GenerationPlan, target, device: DeviceSpec = BINARY, **kwargs) -> SubframeSet:
    """Dispatch on ``plan.algorithm``."""
    if plan.algorithm is Algorithm.OSPR:
        return generate_ospr(target, device, plan.subframes, plan.seed, **kwargs)
    if plan.algorithm is Algorithm.STTM:
        return generate_sttm(target, device, plan.subframes, plan.seed, **kwargs)
    return generate_hybrid(target, device, plan.sets, plan.subframes, plan.seed, **kwargs)
