"""Number and angle: integers against the circle.

The computed boundary follows ``(1 - dq)² + (1 - dp²/2)² = 1``. The residual of
``dq² + dp²(4 - dp²) = 1`` is shown alongside for comparison.
"""

import numpy as np

from phasespace_ur import MetricSpec, Scenario, sweep_tradeoff, zint
from phasespace_ur.analytic import number_angle_exact_residual, number_angle_residual

s = Scenario(zint(100, 256), MetricSpec("discrete"), MetricSpec("chordal", 2))
region = sweep_tradeoff(s, np.logspace(-3, 3, 13))
print(f"{'t':>9} {'dq':>8} {'dp':>8} {'circle':>10} {'quartic':>10}")
for p in region.points:
    print(f"{p.t:9.3g} {p.dq:8.4f} {p.dp:8.4f} "
          f"{number_angle_exact_residual(p.dq, p.dp):10.2e} {number_angle_residual(p.dq, p.dp):10.2e}")
