# %% [markdown]
# Where the plateau comes from
# ============================
#
# Three ingredients:
#
# 1. With random replay phases the diffraction field is complex Gaussian, so
#    its magnitudes are Rayleigh distributed.
# 2. Changing a single hologram pixel by ``dH`` changes the replay error by
#    about ``C * |dH|**2 / P``.
# 3. N rotated binary sub-frames act like a single 2N-level device, which
#    shrinks the phase sector each pixel is rounded within.

# %%
import numpy as np

from holomux import (
    asymptotic_ratio,
    bundled_photo,
    diffraction_stats,
    expected_mse_direct,
    expected_mse_formula,
    monte_carlo_quant_error,
    quantization_scatter,
    rayleigh_pdf,
    sector_mean_error,
    symmetrize_target,
)
from holomux.theory import binned_means

target = symmetrize_target(bundled_photo((256, 256)))

# %%
mag, phase = diffraction_stats(target, seed=0, bins=16)
centers = 0.5 * (mag.bin_edges[1:] + mag.bin_edges[:-1])
width = np.diff(mag.bin_edges)
density = mag.counts / (mag.sample_count * width)
for c, d in zip(centers, density):
    print(f"r={c:5.2f}  empirical={d:5.3f}  rayleigh={rayleigh_pdf(c):5.3f}")
print("KS:", mag.ks_statistic, phase.ks_statistic)

# %% [markdown]
# Quantizing a continuous aperture, one pixel at a time.  The per-pixel
# error change grows with ``|dH|**2``; the fitted constant sits near 1/2.

# %%
sc = quantization_scatter(target, seed=0)
centers, means = binned_means(sc.dh_sq, sc.delta_e, bins=8)
for c, m in zip(centers, means):
    print(f"|dH|^2 ~ {c:5.3f}   mean dE * P = {m * sc.pixels:7.4f}")
print("C_MSE:", sc.c_mse())

# %% [markdown]
# The closed form, a literal evaluation of the same double integral (which
# differs by the constant factor ``2*pi*N``) and a Monte-Carlo estimate of
# the per-pixel error.  Ratios to N=1 are what matter.

# %%
print(" N   closed   direct  sector-mean  monte-carlo")
for n in (1, 2, 4, 8, 16, 64):
    mc, se = monte_carlo_quant_error(n, 200_000, seed=n)
    print(f"{n:2d}  {expected_mse_formula(n):7.4f}  {expected_mse_direct(n):7.4f}  "
          f"{sector_mean_error(n):10.5f}  {mc:8.5f} +- {se:.5f}")
print("large-N ratio:", asymptotic_ratio())
