"""
How many devices fit a latency budget
=====================================

Largest N = 2^u whose worst case for M active devices stays within L slots,
from the closed form and from exhaustive search.
"""

# %%
from sicqta.codebook import max_supported_devices, table1_rows

for mode in ("formula", "oracle"):
    print(mode)
    for r in table1_rows(mode):
        flag = "  <- differs from published value" if r["mismatch"] else ""
        print(f"  {r['algorithm']:8s} M={r['M']} L={r['L']}  N={r['N_supported']:3d}"
              f"  published={r['paper_reference_value']}{flag}")

# %% the closed form is loose for M between powers of two, the search is not.
# Search stops where enumeration would exceed 10^6 id sets (M=3 beyond N=128).
for M in range(2, 9):
    print(M, [max_supported_devices(M, L) for L in range(4, 12)],
          [max_supported_devices(M, L, mode="oracle") for L in range(4, 12)])
