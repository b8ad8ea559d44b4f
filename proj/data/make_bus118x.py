#!/usr/bin/env python3
"""Regenerates data/bus118x.case.

Synthetic 118-bus-class fixture: 118 buses, 186 lines, 54 dispatchable
generators, 11 wind farms in 3 forecast regions (5/4/2 farms, sigma
0.02/0.04/0.06, forecast = 25% of nameplate). Topology, impedances, costs
and loads are drawn from the deterministic PRNG below; line ratings are set
from the uncongested merit-order DC flows so that a handful of corridors sit
close to their limit and bind once forecast errors move the wind infeed.

Run from the repository root:  python3 data/make_bus118x.py
"""

import numpy as np

SEED = 20240118
N_BUS = 118
N_LINE = 186
N_GEN = 54
WIND = [  # (bus, capacity_mw, region)
    (10, 140, 1), (25, 120, 1), (37, 160, 1), (59, 100, 1), (90, 120, 1),
    (16, 110, 2), (48, 130, 2), (66, 90, 2), (100, 120, 2),
    (31, 100, 3), (77, 110, 3),
]
SIGMAS = {1: 0.02, 2: 0.04, 3: 0.06}

rng = np.random.default_rng(SEED)

# ring backbone + deterministic chords, no duplicates or self-loops
lines = [(i, i + 1) for i in range(1, N_BUS)] + [(N_BUS, 1)]
seen = {tuple(sorted(l)) for l in lines}
step = 7
i = 1
while len(lines) < N_LINE:
    a = i
    b = i + step
    if b > N_BUS:
        step += 4
        i = 1 + (step % 5)
        continue
    key = tuple(sorted((a, b)))
    if key not in seen:
        lines.append((a, b))
        seen.add(key)
    i += 3

reactance = np.round(0.03 + 0.12 * rng.random(N_LINE), 4)

gen_buses = sorted(rng.choice(np.arange(1, N_BUS + 1), size=N_GEN, replace=False))
gen_cap = np.round(60 + 340 * rng.random(N_GEN), 1)
gen_cost = np.round(8 + 38 * rng.random(N_GEN), 2)

wind_bus = [w[0] for w in WIND]
wind_cap = np.array([w[1] for w in WIND], dtype=float)
wind_fc = 0.25 * wind_cap

# loads at ~70% of buses, scaled so net load uses ~55% of generation capacity
load_buses = sorted(rng.choice(np.arange(1, N_BUS + 1), size=82, replace=False))
raw = 20 + 60 * rng.random(len(load_buses))
target_net = 0.55 * gen_cap.sum()
scale = (target_net + wind_fc.sum()) / raw.sum()
load_mw = np.round(raw * scale, 1)

# merit-order dispatch ignoring the network
net_load = load_mw.sum() - wind_fc.sum()
order = np.argsort(gen_cost)
dispatch = np.zeros(N_GEN)
remaining = net_load
for g in order:
    take = min(gen_cap[g], remaining)
    dispatch[g] = take
    remaining -= take
    if remaining <= 0:
        break
assert remaining <= 1e-6

# DC flows for that dispatch
B = np.zeros((N_BUS, N_BUS))
for (a, b), x in zip(lines, reactance):
    y = 1.0 / x
    B[a - 1, a - 1] += y
    B[b - 1, b - 1] += y
    B[a - 1, b - 1] -= y
    B[b - 1, a - 1] -= y
inj = np.zeros(N_BUS)
for g, bus in enumerate(gen_buses):
    inj[bus - 1] += dispatch[g]
for bus, mw in zip(load_buses, load_mw):
    inj[bus - 1] -= mw
for bus, fc in zip(wind_bus, wind_fc):
    inj[bus - 1] += fc
slack = 0
keep = [b for b in range(N_BUS) if b != slack]
theta = np.zeros(N_BUS)
theta[keep] = np.linalg.solve(B[np.ix_(keep, keep)], inj[keep])
flows = np.array([(theta[a - 1] - theta[b - 1]) / x for (a, b), x in zip(lines, reactance)])

# ratings: most lines comfortable, the 8 most-loaded corridors tight
absf = np.abs(flows)
ranked = np.argsort(-absf)
cap = np.maximum(1.45 * absf, 30.0)
for j in ranked[:8]:
    cap[j] = max(1.06 * absf[j], 25.0)
cap = np.round(cap, 1)

out = []
out.append("# Synthetic 118-bus-class fixture (bus118x). Not the IEEE 118-bus data:")
out.append("# topology, impedances, costs and loads are generated by")
out.append(f"# data/make_bus118x.py with seed {SEED}; line ratings are derived from")
out.append("# the fixture's own uncongested merit-order flows (eight corridors at")
out.append("# ~1.06x their nominal loading, the rest at >=1.45x). 118 buses,")
out.append("# 186 lines, 54 generators, 11 wind farms in 3 forecast regions.")
out.append("")
out.append("[meta]")
out.append("name = bus118x")
out.append("")
out.append("[buses]")
for b in range(1, N_BUS + 1):
    out.append(f"{b} {1 if b == 1 else 0}")
out.append("")
out.append("[lines]")
for (a, b), x, c in zip(lines, reactance, cap):
    out.append(f"{a} {b} {x:.4f} {c:.1f}")
out.append("")
out.append("[generators]")
for g in range(N_GEN):
    rd = -round(0.4 * gen_cap[g], 1)
    ru = round(0.4 * gen_cap[g], 1)
    out.append(f"{gen_buses[g]} 0 {gen_cap[g]:.1f} {rd:.1f} {ru:.1f} {gen_cost[g]:.2f}")
out.append("")
out.append("[loads]")
for bus, mw in zip(load_buses, load_mw):
    out.append(f"{bus} {mw:.1f}")
out.append("")
out.append("[regions]")
for r, s in sorted(SIGMAS.items()):
    out.append(f"{r} {s}")
out.append("")
out.append("[wind]")
for (bus, capw, region), fc in zip(WIND, wind_fc):
    out.append(f"{bus} {fc:.1f} {capw:.1f} {region}")
out.append("")

with open("data/bus118x.case", "w") as f:
    f.write("\n".join(out))

print(f"lines={len(lines)} gens={N_GEN} load={load_mw.sum():.1f} "
      f"wind={wind_fc.sum():.1f} net={net_load:.1f} cost~{np.dot(dispatch, gen_cost):.0f}")
print("tight corridors:", [(lines[j], round(absf[j], 1), cap[j]) for j in ranked[:8]])
