"""
Latency bounds against exhaustive search
========================================

Closed forms for the worst and best case next to the extreme values found by
enumerating every id set at u=4.
"""

# %%
from sicqta.bounds import best_case_oracle, bounds_row, worst_case_oracle

u = 4
print(" M  qta[lo  worst  hi]   sic[lo  worst  hi]  skipped(idle+cancel)")
for M in range(2, 2**u + 1):
    r = bounds_row(M, u)
    wq = worst_case_oracle("qta", M, u).latency
    ws = worst_case_oracle("sicqta", M, u).latency
    print(f"{M:2d}  {r.qta_lower:5d} {wq:5d} {r.qta_upper:4d}   {r.sic_lower:5d} {ws:5d} {r.sic_upper:4d}"
          f"   {r.skip_total:3d} ({r.skip_idle}+{r.skip_cancel})")

# %% the upper bound is met exactly when M is a power of two
for M in (2, 4, 8, 16):
    w = worst_case_oracle("sicqta", M, u)
    print(M, w.latency, bounds_row(M, u).sic_upper, [format(d, "04b") for d in w.witness])

# %% best cases
print([best_case_oracle("sicqta", M, u).latency for M in range(2, 17)])
