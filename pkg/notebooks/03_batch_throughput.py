"""
Latency and throughput of a batch
=================================

M devices drawn uniformly out of 64 (u=6) are resolved from scratch; the
sample range is compared with the bounds and the mean of M/y is tracked.
The acceptance suite uses 10^4 trials per point, here 2000 keeps it quick.
"""

# %%
import numpy as np

from sicqta.simulator import BatchConfig, sweep

stats = sweep(BatchConfig(6, 2, trials=2000, seed=1), range(2, 65))
print(" M   min  mean   max   [lo, hi]   mean M/y  violations")
for st in stats:
    y = st.latency
    print(f"{st.config.M:2d}  {y.min():4d} {y.mean():6.1f} {y.max():4d}   [{st.lower:2d}, {st.upper:3d}]"
          f"   {st.throughput.mean():.3f}   {st.violations}")

# %% the plain query tree for comparison
qta = sweep(BatchConfig(6, 2, trials=2000, seed=1, algorithm="qta"), [4, 16, 32, 64])
print([(st.config.M, round(float(np.mean(st.throughput)), 3)) for st in qta])
