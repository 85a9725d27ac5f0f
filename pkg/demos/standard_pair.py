"""Position/momentum on a discretized line: the product dq·dp stays at 1/2.

Run with ``python3 demos/standard_pair.py``.
"""

import numpy as np

from phasespace_ur import MetricSpec, Scenario, line, sweep_tradeoff

s = Scenario(line(512, 12.0), MetricSpec("abs", 2), MetricSpec("abs", 2))
region = sweep_tradeoff(s, np.logspace(-2, 2, 9))

print(f"{'t':>10} {'dq':>10} {'dp':>10} {'dq*dp':>10}")
for p in region.points:
    print(f"{p.t:10.4g} {p.dq:10.5f} {p.dp:10.5f} {p.dq * p.dp:10.6f}")

# Legendre envelope: lower bound on dp² for a given dq²
for delta in (0.25, 1.0, 4.0):
    print(f"dq² = {delta:4}: dp² >= {region.bound(delta):.4f} (exact {0.25 / delta:.4f})")
