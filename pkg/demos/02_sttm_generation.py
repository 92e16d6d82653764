# %% [markdown]
# Generating sub-frames
# =====================
#
# A binary phase device can only show +1 or -1 per pixel.  To get a usable
# image the projector shows several binary sub-frames quickly and the eye
# averages their intensities.  Three generators are available:
#
# * ``generate_ospr`` draws fresh random phases for every sub-frame, one
#   inverse FFT each.
# * ``generate_sttm`` draws once, then quantizes rotated copies of the same
#   aperture.  One FFT for the whole set.
# * ``generate_hybrid`` restarts STTM a few times.

# %%
import tempfile
import time
from pathlib import Path

import numpy as np

from holomux import (
    BINARY,
    averaged_replay,
    bundled_photo,
    count_transforms,
    generate_hybrid,
    generate_ospr,
    generate_sttm,
    mse,
    save_hologram,
    save_intensity,
    symmetrize_target,
    union_constellation,
)

# %% [markdown]
# Binary holograms always produce a conjugate twin image, so the target is
# made point-symmetric first.

# %%
target = symmetrize_target(bundled_photo((256, 256)))
print(target.shape, target.min(), target.max())

# %%
for name, run in [
    ("ospr", lambda: generate_ospr(target, BINARY, 12, seed=1)),
    ("sttm", lambda: generate_sttm(target, BINARY, 12, seed=1)),
    ("hybrid", lambda: generate_hybrid(target, BINARY, 3, 4, seed=1)),
]:
    with count_transforms() as calls:
        t0 = time.perf_counter()
        frames = run()
        dt = time.perf_counter() - t0
    err = mse(target, averaged_replay(frames)).mse
    print(f"{name:6s} frames={len(frames)} inverse FFTs={calls['inverse']:2d} "
          f"time={dt * 1e3:6.1f} ms mse={err:.5f}")

# %% [markdown]
# Why STTM works: sub-frame k is quantized after rotating the field by
# ``2*pi*(k-1)/(2N)``, so across all sub-frames the effective level set is
# 2N evenly spaced phases.

# %%
print(np.degrees(union_constellation(BINARY, 4)))

# %%
out = Path(tempfile.mkdtemp())
frames = generate_sttm(target, BINARY, 4, seed=1)
for k, h in enumerate(frames, start=1):
    save_hologram(out / f"subframe_{k}.pgm", h)
save_intensity(out / "replay.pgm", averaged_replay(frames) ** 2, scaling="sqrt")
print("wrote", sorted(p.name for p in out.iterdir()), "to", out)
