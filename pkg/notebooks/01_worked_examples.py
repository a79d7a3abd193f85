"""
Worked example: four devices, three address bits
================================================

Devices A=000, B=001, C=100, D=101 are resolved once with the plain query
tree and once with cancellation.  Run with ``python notebooks/01_worked_examples.py``.
"""

# %%
from sicqta import TreeParams, run_qta, run_sicqta
from sicqta.codebook import trace_to_codebook

p = TreeParams(3)
devices = [0b000, 0b001, 0b100, 0b101]

# %% plain query tree, one pass over the pending queue
qta = run_qta(devices, p)
for s in qta.slots:
    print(f"{s.index:2d}  query={s.query or '-':4s} {s.outcome.kind.value}  tx={sorted(p.bits(d) for d in s.transmitters)}")
print("latency", qta.latency)

# %% with cancellation the gateway keeps every collision and peels clean packets off them
sic = run_sicqta(devices, p)
for s in sic.slots:
    extra = f"  cancelled {[p.bits(d) for d in s.cancelled]}" if s.cancelled else ""
    print(f"{s.index:2d}  query={s.query or '-':4s} {s.outcome.kind.value}{extra}")
print("latency", sic.latency)

# %% the access decisions as a codebook, one row per device
cb = trace_to_codebook(sic)
for label, row in zip(cb.labels, cb.row_strings()):
    print(label, row)
