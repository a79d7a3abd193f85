"""
Gated arrivals: delay against offered load
==========================================

Poisson traffic spread uniformly over the 2^u devices, each device with its
own FIFO.  Arrivals during a resolution wait for the next one.  Short
horizons here; the stability estimates in the tests use 2*10^5 slots.
"""

# %%
from sicqta.simulator import ArrivalConfig, sweep

for u in (4, 6, 10):
    rows = sweep(ArrivalConfig(u, 0.0, horizon=20_000, seed=3), [0.3, 0.5, 0.7, 0.8, 0.9, 0.95])
    print(f"u={u}")
    for st in rows:
        r = st.row()
        print(f"  lambda={r['lambda']:.2f} delay={r['mean_delay']:8.1f} tp={r['throughput']:.3f}"
              f" cri={r['mean_cri']:6.1f} stable={r['stable_flag']}")

# %% queue length grows with the horizon beyond the knee
for h in (20_000, 80_000):
    st = sweep(ArrivalConfig(4, 0.0, horizon=h, seed=3), [1.05])[0]
    print(h, round(st.mean_delay, 1), st.backlog_max, st.stable)
