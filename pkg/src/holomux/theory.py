"""Statistical error model for time-multiplexed quantized holograms.

The chain of reasoning implemented here:

1. Diffraction values of a phase-randomized target are approximately complex
   Gaussian, so their magnitudes (normalized to unit mean square) follow the
   Rayleigh density ``2 r exp(-r**2)`` and their phases are uniform.
2. Moving one aperture pixel by ``dH`` changes the replay MSE by roughly
   ``C * |dH|**2 / (Nx*Ny)`` for some constant ``C`` in ``[0, 1)``.
3. N rotated binary sub-frames act like one frame on a ``2N`` level device,
   so a pixel sits within ``+-pi/(2N)`` of its nearest virtual level and
   ``|dH|**2 = 1 - 2 r cos(theta) + r**2``.

Averaging (3) over (1) gives the expected error versus N.  Three evaluations
are exposed:

* :func:`expected_mse_formula` -- the published closed form
  ``(C/P) * (2 pi - 2 N sqrt(pi) sin(pi/(2N)))``.
* :func:`expected_mse_direct` -- the integral with density ``1/(2 pi)`` over
  ``theta in [-pi/(2N), pi/(2N)]`` evaluated literally,
  ``(C/P) * (1/N - sin(pi/(2N))/sqrt(pi))``.  It equals the published form
  divided by ``2 pi N``.
* :func:`sector_mean_error` -- the mean of ``|dH|**2`` with ``theta`` uniform
  over the sector; equal to the published form divided by ``pi``.  This is
  what :func:`monte_carlo_quant_error` estimates.

The published form and the sector mean share every ratio ``E(N)/E(1)`` and the
limit ``(pi - pi**1.5 / 2) / (pi - sqrt(pi)) ~= 0.2611``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidParameterError, InvalidTargetError
from .field import ComplexField, RandomStream, as_field, forward_transform, inverse_transform
from .hologen import BINARY, DeviceSpec, _check_target, quantize, randomize_phase

__all__ = [
    "QuantErrorModel",
    "DistributionTestResult",
    "rayleigh_pdf",
    "rayleigh_cdf",
    "diffraction_stats",
    "delta_mse_pixel",
    "QuantizationScatter",
    "quantization_scatter",
    "fit_c_mse",
    "binned_means",
    "expected_mse_formula",
    "expected_mse_direct",
    "sector_mean_error",
    "asymptotic_ratio",
    "monte_carlo_quant_error",
]

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class QuantErrorModel:
    levels: int
    subframes: int
    c_mse: float

    def __post_init__(self):
        if not 0.0 <= self.c_mse < 1.0:
            raise InvalidParameterError(f"c_mse must lie in [0, 1), got {self.c_mse}")

    def expected_mse(self, pixels: int) -> float:
        """Closed-form expected error for ``levels * subframes / 2`` virtual binary pairs.

        A binary device shown for N sub-frames behaves like ``2N`` levels;
        generally M levels over N sub-frames behave like ``M*N`` levels, i.e.
        a binary device with ``M*N/2`` sub-frames.
        """
        return expected_mse_formula(self.levels * self.subframes / 2, self.c_mse, pixels)


@dataclass(frozen=True)
class DistributionTestResult:
    ks_statistic: float
    bin_edges: np.ndarray
    counts: np.ndarray
    sample_count: int


# -- diffraction statistics ---------------------------------------------------

def rayleigh_pdf(r):
    """Unit mean-square Rayleigh density ``2 r exp(-r**2)``."""
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr < 0):
        raise InvalidParameterError("Rayleigh density is defined for r >= 0")
    out = 2.0 * r_arr * np.exp(-r_arr * r_arr)
    return float(out) if out.ndim == 0 else out


def rayleigh_cdf(r):
    r_arr = np.maximum(np.asarray(r, dtype=np.float64), 0.0)
    return -np.expm1(-r_arr * r_arr)


def _unit_uniform_phase_cdf(x):
    return np.clip(np.asarray(x) / (2.0 * math.pi), 0.0, 1.0)


def _normalized_target(target) -> np.ndarray:
    t = _check_target(target)
    ms = float(np.mean(t * t))
    if ms == 0.0:
        raise InvalidTargetError("target has zero energy")
    return t / math.sqrt(ms)


def diffraction_stats(target, seed: int = 0, *, bins: int = 64):
    """KS tests of a phase-randomized target's diffraction field.

    The target is phase randomized (stream 1 of ``seed``), inverse
    transformed and rescaled to unit mean-square magnitude.  Returns
    ``(magnitudes, phases)`` as :class:`DistributionTestResult`, tested
    against the Rayleigh CDF ``1 - exp(-r**2)`` and the uniform CDF on
    ``[0, 2 pi)``.
    """
    t = _normalized_target(target)
    ap = inverse_transform(randomize_phase(t, RandomStream(seed, 1))).values.ravel()
    mags = np.abs(ap)
    mags /= math.sqrt(np.mean(mags * mags))
    phases = np.mod(np.angle(ap), 2.0 * math.pi)

    mag_ks = stats.kstest(mags, rayleigh_cdf).statistic
    ph_ks = stats.kstest(phases, _unit_uniform_phase_cdf).statistic
    mag_edges = np.linspace(0.0, max(4.0, float(mags.max())), bins + 1)
    ph_edges = np.linspace(0.0, 2.0 * math.pi, bins + 1)
    return (
        DistributionTestResult(float(mag_ks), mag_edges, np.histogram(mags, mag_edges)[0], mags.size),
        DistributionTestResult(float(ph_ks), ph_edges, np.histogram(phases, ph_edges)[0], phases.size),
    )


# -- single pixel quantization error -----------------------------------------

def _replay_mse(aperture: ComplexField, target: np.ndarray) -> float:
    r = np.abs(forward_transform(aperture).values)
    d = target - r
    return float(np.mean(d * d))


def delta_mse_pixel(aperture, target, pixel, new_value):
    """Replace one aperture pixel and measure the replay MSE change exactly.

    ``pixel`` is ``(x, y)``.  Both replays are full transforms; the MSE is the
    ungained phase-insensitive error against ``target``.  Returns
    ``(|dH|**2, dE)``.
    """
    ap = as_field(aperture)
    t = np.asarray(target, dtype=np.float64)
    x, y = pixel
    ny, nx = ap.shape
    if not (0 <= x < nx and 0 <= y < ny):
        raise IndexError(f"pixel {pixel} outside {nx}x{ny} aperture")
    old = ap.values[y, x]
    dh = complex(new_value) - old
    if dh == 0:
        return 0.0, 0.0
    changed = ap.values.copy()
    changed[y, x] = new_value
    before = _replay_mse(ap, t)
    after = _replay_mse(ComplexField(changed), t)
    return abs(dh) ** 2, after - before


@dataclass(frozen=True)
class QuantizationScatter:
    x: np.ndarray
    y: np.ndarray
    dh_sq: np.ndarray
    delta_e: np.ndarray
    aperture: ComplexField
    target: np.ndarray

    @property
    def pixels(self) -> int:
        return self.dh_sq.size

    def c_mse(self) -> float:
        return fit_c_mse(self.dh_sq, self.delta_e, self.pixels)


def quantization_scatter(target, seed: int = 0, device: DeviceSpec = BINARY) -> QuantizationScatter:
    """Per-pixel error change for quantizing a continuous hologram.

    The target is scaled to unit mean square and given random phases, so the
    continuous aperture ``a`` reproduces it exactly (baseline error zero).
    For every pixel, ``dH = quantize(a) - a`` is applied on its own and the
    resulting MSE change is evaluated to second order in the replay
    perturbation.  With ``R = T' exp(i phi)`` the baseline replay, ``P`` the
    pixel count and ``n0`` the number of zero target pixels::

        dE(x, y) = |dH|**2 (n0 + n1/2) / P**2
                   + Re(dH**2 * G[2y, 2x]) / (2 P**1.5)

    where ``G = forward(mask * exp(-2 i phi))`` over the ``n1`` nonzero target
    pixels.  Everything needs two FFTs instead of one per pixel; the exact
    per-pixel value is available from :func:`delta_mse_pixel`.
    """
    t = _normalized_target(target)
    ny, nx = t.shape
    p = t.size
    replay0 = randomize_phase(t, RandomStream(seed, 1))
    ap = inverse_transform(replay0)
    dh = quantize(ap, device).values - ap.values
    dh_sq = dh.real ** 2 + dh.imag ** 2

    nonzero = t > 0
    n0 = p - int(nonzero.sum())
    unit = np.zeros_like(replay0.values)
    unit[nonzero] = replay0.values[nonzero] / t[nonzero]
    g = forward_transform(np.conj(unit) ** 2).values
    yy, xx = np.mgrid[0:ny, 0:nx]
    g2 = g[(2 * yy) % ny, (2 * xx) % nx]
    delta_e = dh_sq * ((n0 + 0.5 * (p - n0)) / p**2) + np.real(dh * dh * g2) / (2.0 * p**1.5)
    return QuantizationScatter(xx.ravel(), yy.ravel(), dh_sq.ravel(), delta_e.ravel(), ap, t)


def fit_c_mse(dh_sq, delta_e, pixels: int) -> float:
    """Least-squares slope (through the origin) of ``dE`` against ``|dH|**2 / P``."""
    xv = np.asarray(dh_sq, dtype=np.float64) / pixels
    yv = np.asarray(delta_e, dtype=np.float64)
    return float(np.dot(xv, yv) / np.dot(xv, xv))


def binned_means(dh_sq, delta_e, bins: int = 8):
    """Equal-population bins over ``|dH|**2``; returns ``(bin_mean_dh_sq, bin_mean_de)``."""
    order = np.argsort(dh_sq, kind="stable")
    xs = np.array_split(np.asarray(dh_sq)[order], bins)
    ys = np.array_split(np.asarray(delta_e)[order], bins)
    return np.array([a.mean() for a in xs]), np.array([b.mean() for b in ys])


# -- expected error versus sub-frame count -----------------------------------

def _check_formula_args(n, c, pixels):
    if n < 1:
        raise InvalidParameterError("N must be >= 1")
    if not 0.0 <= c <= 1.0:
        raise InvalidParameterError("c must lie in [0, 1]")
    if pixels < 1:
        raise InvalidParameterError("pixels must be >= 1")


def expected_mse_formula(n, c: float = 1.0, pixels: int = 1) -> float:
    """Published closed form ``(c/pixels) * (2 pi - 2 N sqrt(pi) sin(pi/(2N)))``."""
    _check_formula_args(n, c, pixels)
    return c / pixels * (2.0 * math.pi - 2.0 * n * SQRT_PI * math.sin(math.pi / (2.0 * n)))


def expected_mse_direct(n, c: float = 1.0, pixels: int = 1) -> float:
    """Literal evaluation of the sector integral with ``1/(2 pi)`` angular density."""
    _check_formula_args(n, c, pixels)
    return c / pixels * (1.0 / n - math.sin(math.pi / (2.0 * n)) / SQRT_PI)


def sector_mean_error(n) -> float:
    """``E[1 - 2 r cos(theta) + r**2]`` for Rayleigh ``r`` and ``theta`` uniform on the sector."""
    if n < 1:
        raise InvalidParameterError("N must be >= 1")
    return 2.0 - 2.0 * n / SQRT_PI * math.sin(math.pi / (2.0 * n))


def asymptotic_ratio() -> float:
    """Limit of ``E(N)/E(1)`` as N grows: ``(pi - pi**1.5/2) / (pi - sqrt(pi))``."""
    return (math.pi - 0.5 * math.pi**1.5) / (math.pi - SQRT_PI)


_MC_CHUNK = 1 << 20


def monte_carlo_quant_error(n, samples: int = 1_000_000, seed: int = 0):
    """Monte-Carlo mean of ``|dH|**2`` and its standard error.

    ``r`` is drawn by inverse CDF, ``r = sqrt(-ln u)``, and ``theta`` uniformly
    on ``[-pi/(2N), pi/(2N))``.  Samples are drawn in chunks of 2**20, chunk
    ``i`` from substream ``i``; sums are merged in chunk order.
    """
    if n < 1:
        raise InvalidParameterError("N must be >= 1")
    if samples < 1000:
        raise InvalidParameterError("at least 1000 samples are required")
    half = math.pi / (2.0 * n)
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk_index = 0
    while done < samples:
        k = min(_MC_CHUNK, samples - done)
        rng = RandomStream(seed, chunk_index).generator()
        u = 1.0 - rng.random(k)  # (0, 1]
        r = np.sqrt(-np.log(u))
        theta = (rng.random(k) * 2.0 - 1.0) * half
        e = 1.0 - 2.0 * r * np.cos(theta) + r * r
        total += float(e.sum())
        total_sq += float(np.dot(e, e))
        done += k
        chunk_index += 1
    mean = total / samples
    var = (total_sq - samples * mean * mean) / (samples - 1)
    return mean, math.sqrt(max(var, 0.0) / samples)
