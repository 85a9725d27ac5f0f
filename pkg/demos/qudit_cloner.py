"""Qudit tradeoff curve and the cloner-based joint measurements that reach it.

The optimal curve comes from ground states of ``Q + tP`` (discrete metrics).
Cloners with real ``(a, b)`` trace an ellipse that touches the curve only at
its two ends.
"""

import numpy as np

from phasespace_ur import MetricSpec, Scenario, cyclic, sweep_tradeoff
from phasespace_ur.analytic import qudit_boundary, qudit_boundary_residual, qudit_radius
from phasespace_ur.cloning import cloner_sweep

n = 3
D = qudit_radius(n)
region = sweep_tradeoff(Scenario(cyclic(n), MetricSpec("discrete"), MetricSpec("discrete")),
                        np.logspace(-3, 3, 13))
print(f"n = {n}, Δ = {D:.4f}")
print(f"{'dq':>8} {'dp':>8} {'residual':>10}")
for p in region.points:
    print(f"{p.dq:8.4f} {p.dp:8.4f} {qudit_boundary_residual(n, p.dp, p.dq):10.2e}")

print("\ncloner ellipse against the optimal curve")
rows = cloner_sweep(n, 0.125)
for th, a, b, dq, dp in rows:
    print(f"θ={th:5.3f}  a={a:+.3f} b={b:+.3f}  dq={dq:.4f} dp={dp:.4f}  "
          f"above curve by {dp - qudit_boundary(n, min(dq, D)):.4f}")
