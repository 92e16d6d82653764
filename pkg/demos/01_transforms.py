# %% [markdown]
# Transforms and fields
# =====================
#
# Everything in holomux runs through one unitary 2-D DFT.  Values are indexed
# ``[y, x]`` and the forward kernel is ``exp(-2*pi*i*(ux/Nx + vy/Ny))``.

# %%
import numpy as np

from holomux import ComplexField, forward_transform, inverse_transform, reference_dft

rng = np.random.default_rng(0)
f = ComplexField(rng.standard_normal((6, 8)) + 1j * rng.standard_normal((6, 8)))
print(f)

# %% [markdown]
# The fast path is numpy's FFT.  ``reference_dft`` is a slow, literal double
# sum kept around as an oracle (it refuses grids above 4096 points).

# %%
fast = forward_transform(f).values
slow = reference_dft(f, "forward").values
print("max deviation:", np.abs(fast - slow).max())

# %% [markdown]
# Unitary means energy is preserved and the inverse undoes the forward
# transform without extra scaling.

# %%
F = forward_transform(f)
print("energy before/after:", f.energy(), F.energy())
print("round trip error:", np.abs(inverse_transform(F).values - f.values).max())

# %%
# a single bright pixel spreads into a perfectly flat wave
impulse = np.zeros((64, 64), complex)
impulse[5, 9] = 2.0
spread = np.abs(forward_transform(impulse).values)
print("flat magnitude:", spread.min(), spread.max(), "expected", 2.0 / 64)
