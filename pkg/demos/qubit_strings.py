"""Strings of n qubits with per-site Hamming metrics approach a mean-field curve."""

import numpy as np

from phasespace_ur import MetricSpec, Scenario, bits, sweep_tradeoff
from phasespace_ur.analytic import meanfield_gap

ts = np.logspace(-2, 2, 21)
for alpha in (1, 2):
    print(f"α = β = {alpha}")
    for n in range(2, 9):
        s = Scenario(bits(n), MetricSpec("hamming", alpha), MetricSpec("hamming", alpha))
        R = sweep_tradeoff(s, ts)
        print(f"  n = {n}: gap to the limit curve {meanfield_gap(R.ts, R.energies, alpha, alpha):.4f}")
