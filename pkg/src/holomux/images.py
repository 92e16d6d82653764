"""Image input/output and built-in targets.

Images are 8-bit grayscale.  Pixel value ``v`` maps to amplitude ``v/255``.
Output is binary PGM (P5, maxval 255); PNG is accepted on input only.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError, InvalidParameterError
from .hologen import Hologram

__all__ = [
    "load_image",
    "resize_area",
    "save_intensity",
    "save_hologram",
    "bundled_photo",
    "synthetic_texture",
    "BUNDLED_PHOTO",
]

BUNDLED_PHOTO = "coffee_512.pgm"
_CONVERTIBLE = {"1", "P", "RGB", "RGBA", "LA", "CMYK", "YCbCr"}


def resize_area(grid: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize by area averaging.

    Integer shrink factors average whole blocks and integer growth factors
    replicate pixels, both exactly in float64.  Other ratios fall back to
    Pillow's box filter.
    """
    g = np.asarray(grid, dtype=np.float64)
    h, w = g.shape
    if width < 1 or height < 1:
        raise InvalidParameterError("target size must be positive")
    if (w, h) == (width, height):
        return g.copy()
    if w % width == 0 and h % height == 0:
        fy, fx = h // height, w // width
        return g.reshape(height, fy, width, fx).mean(axis=(1, 3))
    if width % w == 0 and height % h == 0:
        return np.repeat(np.repeat(g, height // h, axis=0), width // w, axis=1)
    img = Image.fromarray(g.astype(np.float32), mode="F")
    return np.asarray(img.resize((width, height), Image.Resampling.BOX), dtype=np.float64)


def _open_gray(source) -> np.ndarray:
    try:
        with Image.open(source) as img:
            fmt = img.format
            if fmt not in ("PPM", "PNG"):
                raise ImageFormatError(f"unsupported image format {fmt!r}; use PGM or PNG")
            if img.mode in _CONVERTIBLE:
                img = img.convert("L")
            if img.mode != "L":
                raise ImageFormatError(f"expected 8-bit grayscale, got mode {img.mode!r}")
            return np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(str(exc)) from exc


def load_image(path, size: tuple[int, int] | None = None) -> np.ndarray:
    """Load an 8-bit grayscale PGM/PNG as amplitudes in ``[0, 1]``.

    ``size`` is ``(width, height)``; when given, the image is resized with
    :func:`resize_area`.
    """
    path = Path(path)
    amp = _open_gray(path).astype(np.float64) / 255.0
    if size is not None:
        amp = resize_area(amp, *size)
    return amp


def bundled_photo(size: tuple[int, int] | None = None) -> np.ndarray:
    """The bundled 512x512 grayscale photograph (CC0 "coffee" from scikit-image)."""
    ref = resources.files("holomux") / "data" / BUNDLED_PHOTO
    with ref.open("rb") as fh:
        amp = _open_gray(fh).astype(np.float64) / 255.0
    if size is not None:
        amp = resize_area(amp, *size)
    return amp


def synthetic_texture(width: int = 512, height: int = 512, seed: int = 0,
                      exponent: float = 1.0) -> np.ndarray:
    """Seeded ``1/f**exponent`` noise texture scaled to ``[0, 1]``.

    Broad spectral content with no licensing strings attached.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) % 2**64)))
    noise = rng.standard_normal((height, width))
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    f = np.hypot(fx, fy)
    f[0, 0] = 1.0
    spec = np.fft.fft2(noise) / f**exponent
    spec[0, 0] = 0.0
    tex = np.fft.ifft2(spec).real
    lo, hi = tex.min(), tex.max()
    if hi == lo:
        return np.zeros_like(tex)
    return (tex - lo) / (hi - lo)


def _write_pgm(path, pixels: np.ndarray) -> None:
    Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8), mode="L").save(
        Path(path), format="PPM"
    )


def save_intensity(path, grid, scaling: str = "linear") -> None:
    """Write a non-negative grid as an 8-bit PGM.

    The display maximum ignores the zero-order pixel at ``(0, 0)``, which
    otherwise dominates the range; that pixel is clipped to 255.
    """
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 2:
        raise InvalidParameterError("grid must be 2-D")
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise InvalidParameterError("grid must be finite and non-negative")
    if scaling not in ("linear", "sqrt"):
        raise InvalidParameterError(f"scaling must be 'linear' or 'sqrt', got {scaling!r}")
    rest = g.ravel()[1:]
    peak = float(rest.max()) if rest.size else float(g.max())
    if peak == 0.0:
        peak = float(g.max())
    if peak == 0.0:
        scaled = np.zeros_like(g)
    else:
        scaled = g / peak
        if scaling == "sqrt":
            scaled = np.sqrt(scaled)
        scaled = scaled * 255.0
    _write_pgm(path, np.clip(np.rint(scaled), 0, 255))


def save_hologram(path, hologram: Hologram) -> None:
    """Write level indices spread over 0..255 (binary: 0 and 255)."""
    m = hologram.device.level_count
    pixels = np.rint(hologram.levels.astype(np.float64) * (255.0 / (m - 1)))
    _write_pgm(path, pixels)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and math.log2(n).is_integer()
