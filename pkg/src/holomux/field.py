"""Complex fields, unitary 2-D DFTs and seeded random phase streams.

Conventions
-----------
Arrays are indexed ``values[y, x]`` (rows first), so ``width`` is the number of
columns and ``height`` the number of rows.  The forward transform is

    F[v, u] = 1/sqrt(Nx*Ny) * sum_{y,x} f[y, x] * exp(-2*pi*i*(u*x/Nx + v*y/Ny))

and the inverse uses ``+2*pi*i`` with the same normalization, so the pair is
unitary.  The kernel sign is the standard one; the printed version of this
formula that circulates with the OSPR literature drops the ``-2*pi*i`` factor,
which is read here as a typographical omission.

Random numbers come from numpy's PCG64 seeded through
``SeedSequence(entropy=seed mod 2**64, spawn_key=(stream_index,))``.  Each
``(seed, stream_index)`` pair is an independent, platform-stable substream, so
work split across threads by stream index is schedule independent.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .errors import InvalidFieldError, OracleSizeError

__all__ = [
    "ComplexField",
    "RandomStream",
    "as_field",
    "forward_transform",
    "inverse_transform",
    "reference_dft",
    "rotate_field",
    "rotation_factors",
    "uniform_phase_samples",
    "count_transforms",
    "ORACLE_MAX_POINTS",
]

ORACLE_MAX_POINTS = 4096
TWO_PI = 2.0 * math.pi


class ComplexField:
    """Immutable rectangular grid of complex amplitudes.

    Parameters
    ----------
    values : array_like
        2-D array of shape ``(height, width)``.  It is copied to ``complex128``
        and marked read-only.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=np.complex128, copy=True)
        _check_grid(arr)
        arr.flags.writeable = False
        self._values = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "ComplexField":
        # Internal fast path: arr is a fresh complex128 array produced by
        # library code and already known to be finite.
        obj = cls.__new__(cls)
        arr.flags.writeable = False
        obj._values = arr
        return obj

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def width(self) -> int:
        return self._values.shape[1]

    @property
    def height(self) -> int:
        return self._values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._values.shape

    @property
    def size(self) -> int:
        return self._values.size

    def energy(self) -> float:
        """Sum of squared magnitudes."""
        v = self._values
        return float(np.sum(v.real * v.real + v.imag * v.imag))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, ComplexField):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    __hash__ = None

    def __repr__(self):
        return f"ComplexField(width={self.width}, height={self.height})"


def _check_grid(arr: np.ndarray) -> None:
    if arr.ndim != 2:
        raise InvalidFieldError(f"field must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidFieldError(f"field dimensions must be >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidFieldError("field contains NaN or Inf")


def as_field(field) -> ComplexField:
    """Return ``field`` as a :class:`ComplexField`, validating array input."""
    if isinstance(field, ComplexField):
        return field
    return ComplexField(field)


# -- transform instrumentation ------------------------------------------------

_counter_lock = threading.Lock()
_active_counters: list[dict] = []


@contextmanager
def count_transforms():
    """Count forward/inverse transform calls made inside the ``with`` block.

    Calls from worker threads are included.  Yields a dict with keys
    ``"forward"`` and ``"inverse"``.

    >>> with count_transforms() as calls:
    ...     _ = forward_transform(np.ones((2, 2)))
    >>> calls["forward"]
    1
    """
    counts = {"forward": 0, "inverse": 0}
    with _counter_lock:
        _active_counters.append(counts)
    try:
        yield counts
    finally:
        with _counter_lock:
            _active_counters.remove(counts)


def _record(kind: str) -> None:
    if _active_counters:
        with _counter_lock:
            for c in _active_counters:
                c[kind] += 1


# -- transforms ---------------------------------------------------------------

def forward_transform(field) -> ComplexField:
    """Unitary forward 2-D DFT (kernel ``exp(-2*pi*i*(ux/Nx + vy/Ny))``)."""
    f = as_field(field)
    _record("forward")
    return ComplexField._wrap(np.fft.fft2(f.values, norm="ortho"))


def inverse_transform(field) -> ComplexField:
    """Unitary inverse 2-D DFT, the adjoint of :func:`forward_transform`."""
    f = as_field(field)
    _record("inverse")
    return ComplexField._wrap(np.fft.ifft2(f.values, norm="ortho"))


def reference_dft(field, direction: str = "forward") -> ComplexField:
    """Direct double-sum evaluation of the unitary DFT, for testing.

    Deliberately avoids any FFT: each output sample is an explicit sum of
    ``Nx*Ny`` terms whose twiddle factors are computed from ``(u*x) mod Nx``
    so that the phase argument stays small and exact in integers.
    """
    f = as_field(field)
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    ny, nx = f.shape
    if nx * ny > ORACLE_MAX_POINTS:
        raise OracleSizeError(
            f"reference_dft limited to {ORACLE_MAX_POINTS} points, got {nx * ny}"
        )
    sign = -1.0 if direction == "forward" else 1.0
    src = f.values
    out = np.zeros((ny, nx), dtype=np.complex128)
    xs = range(nx)
    ys = range(ny)
    for v in ys:
        for u in xs:
            acc = 0j
            for y in ys:
                for x in xs:
                    # phase in units of full turns, reduced exactly in integers
                    turns = ((u * x) % nx) / nx + ((v * y) % ny) / ny
                    ang = sign * TWO_PI * turns
                    acc += src[y, x] * complex(math.cos(ang), math.sin(ang))
            out[v, u] = acc
    out /= math.sqrt(nx * ny)
    return ComplexField._wrap(out)


# -- rotation -----------------------------------------------------------------

_QUARTER_TURNS = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


def rotation_factors(angle: float) -> tuple[float, float]:
    """Return ``(cos(angle), sin(angle))``, exact for multiples of pi/2."""
    angle = float(angle)
    if not math.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    k = angle / (0.5 * math.pi)
    if k.is_integer():
        return _QUARTER_TURNS[int(k) % 4]
    return math.cos(angle), math.sin(angle)


def _rotated_parts(re: np.ndarray, im: np.ndarray, c: float, s: float):
    # Shared by rotate_field and the fused rotate+quantize path in hologen so
    # both produce bit-identical components.
    return re * c - im * s, re * s + im * c


def rotate_field(field, angle: float) -> ComplexField:
    """Multiply every value by ``exp(i*angle)``."""
    f = as_field(field)
    c, s = rotation_factors(angle)
    v = f.values
    re, im = _rotated_parts(v.real, v.imag, c, s)
    out = np.empty(v.shape, dtype=np.complex128)
    out.real = re
    out.imag = im
    return ComplexField._wrap(out)


# -- random streams -----------------------------------------------------------

@dataclass(frozen=True)
class RandomStream:
    """Identifies one independent substream of a seeded generator."""

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.seed) % 2**64, spawn_key=(int(self.stream_index),)
        )
        return np.random.Generator(np.random.PCG64(ss))


def uniform_phase_samples(stream: RandomStream, count: int) -> np.ndarray:
    """``count`` i.i.d. phases uniform on ``[0, 2*pi)``."""
    if count < 0:
        raise ValueError("count must be >= 0")
    phases = stream.generator().random(count)
    phases *= TWO_PI
    return phases
