# %% [markdown]
# Error versus number of sub-frames
# =================================
#
# ``convergence_series`` repeats a generator with per-run seeds and reports
# the mean and spread of the averaged-replay error.  The error uses the
# least-squares gain so brightness mismatches do not count.

# %%
import numpy as np

from holomux import BINARY, bundled_photo, convergence_series, symmetrize_target

target = symmetrize_target(bundled_photo((128, 128)))
ns = [1, 2, 3, 4, 6, 8, 12, 16, 24]
runs = 8

series = {
    alg: convergence_series(target, BINARY, alg, 24, runs, seed=5, n_values=ns)
    for alg in ("ospr", "sttm", "hybrid")
}

# %%
print(f"{'N':>3}  " + "  ".join(f"{a:>16s}" for a in series))
for n in ns:
    cells = [f"{s.point(n).mean_mse:.5f}+-{s.point(n).std_mse:.5f}" for s in series.values()]
    print(f"{n:>3}  " + "  ".join(f"{c:>16s}" for c in cells))

# %% [markdown]
# STTM is ahead for the first few sub-frames, then flattens out: its
# sub-frames share one random phase draw, so the speckle of that draw never
# averages away.  OSPR keeps improving roughly like 1/N.

# %%
sttm = series["sttm"]
print("STTM plateau MSE(16)/MSE(1):", sttm.mean(16) / sttm.mean(1))
crossing = next((n for n in ns if series["ospr"].mean(n) < sttm.mean(n)), None)
print("first N where OSPR wins:", crossing)
