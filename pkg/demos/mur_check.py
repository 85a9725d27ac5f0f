"""Measurement uncertainty of covariant observables equals the spread of their noise."""

import numpy as np

from phasespace_ur import MetricSpec, Scenario, cyclic
from phasespace_ur.covariant import mur_equals_pur_check

for d, metric in [(3, MetricSpec("discrete")), (5, MetricSpec("cyclic-abs", 2))]:
    s = Scenario(cyclic(d), metric, metric)
    report = mur_equals_pur_check(s, samples=40, rng=np.random.default_rng(1))
    mu_p, mu_q, sp, sq = report.pairs[0]
    print(f"cyclic({d}), {metric.kind}: {report.samples} observables, "
          f"max |MU - spread| = {report.max_abs_deviation:.1e}, passed = {report.passed}")
    print(f"  first sample: MU_Q = {mu_q:.4f} spread = {sq:.4f}, MU_P = {mu_p:.4f} spread = {sp:.4f}")
