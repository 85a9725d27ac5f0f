"""Covariant phase-space observables and their measurement uncertainties.

A covariant observable on a finite phase space is fixed by a density operator
``ρ_F`` (its generator). Its effect for the outcome ``(q, p)`` is
``dξ · α_{(q,-p)}(ρ_F)``.

The momentum label is negated because ``α_ξ(A) = W(ξ)* A W(ξ)`` with
``(W(q,p)ψ)(x) = ⟨p|x⟩ψ(x+q)`` moves position distributions by ``+q`` but
momentum distributions by ``-p``. With this labelling both output marginals
are the ideal marginals convolved with the noise ``(Πρ_FΠ)^Q``, ``(Πρ_FΠ)^P``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .groundstate import Scenario
from .lca import GroupSpec, parity_matrix, weyl_matrix
from .metrics import (
    Distribution,
    MetricSpec,
    convolve_distributions,
    deviation,
    spread,
    transport_distance,
)
from .operators import (
    as_density,
    momentum_marginal,
    position_marginal,
    random_density,
    random_pure_state,
    pure,
)

__all__ = [
    "CovariantObservable",
    "MurReport",
    "povm_from_generator",
    "noise_distributions",
    "output_marginals",
    "measurement_uncertainty",
    "center_observable",
    "mur_equals_pur_check",
]


@dataclass(frozen=True, eq=False)
class CovariantObservable:
    group: GroupSpec
    generator: np.ndarray = field(repr=False)

    @cached_property
    def effects(self) -> np.ndarray:
        """Effects indexed ``[q_idx, p_idx, :, :]``."""
        g = self.group
        nq, np_ = g.position.size, g.momentum.size
        neg_p, _ = g.momentum.neg_indices()
        out = np.empty((nq, np_, g.dim, g.dim), dtype=complex)
        for i in range(nq):
            for j in range(np_):
                W = weyl_matrix(g, (g.position.label(i), g.momentum.label(neg_p[j])))
                out[i, j] = np.conj(W).T @ self.generator @ W
        return out * g.phase_space_weight

    def expectation(self, f) -> np.ndarray:
        """``F[f] = Σ_ξ f(ξ) F({ξ})`` for a phase-space function array."""
        return np.einsum("ij,ijkl->kl", np.asarray(f), self.effects)

    def outcome_probabilities(self, rho) -> np.ndarray:
        rho = as_density(rho, tol=1e-9)
        return np.real(np.einsum("ijkl,lk->ij", self.effects, rho))


def povm_from_generator(g: GroupSpec, rho_F, tol: float = 1e-10) -> CovariantObservable:
    """Covariant observable generated by the density operator ``ρ_F``."""
    if not g.is_square:
        raise ValueError("covariant observables need a square phase space")
    rho_F = as_density(rho_F, tol=1e-9)
    F = CovariantObservable(g, np.array(rho_F, dtype=complex))
    total = F.effects.sum(axis=(0, 1))
    err = np.max(np.abs(total - np.eye(g.dim)))
    if err > tol:
        raise ValueError(f"effects do not sum to the identity (error {err:.3g})")
    return F


def noise_distributions(F: CovariantObservable):
    """``((Πρ_FΠ)^Q, (Πρ_FΠ)^P)``: noise added to ideal position and momentum."""
    g = F.group
    P = parity_matrix(g)
    beta = P @ F.generator @ P
    return position_marginal(g, beta), momentum_marginal(g, beta)


def output_marginals(F: CovariantObservable, rho, *, check: bool = True, tol: float = 1e-10):
    """Position and momentum output distributions of ``F`` in the state ``ρ``.

    Computed from the effects; with ``check`` the result is compared against
    ``ρ^Q ∗ (Πρ_FΠ)^Q`` (and likewise for momentum).
    """
    g = F.group
    probs = F.outcome_probabilities(rho)
    mq = Distribution(g.position, np.clip(probs.sum(axis=1), 0, None))
    mp = Distribution(g.momentum, np.clip(probs.sum(axis=0), 0, None))
    if check:
        nq, np_ = noise_distributions(F)
        cq = convolve_distributions(position_marginal(g, rho), nq)
        cp = convolve_distributions(momentum_marginal(g, rho), np_)
        err = max(np.max(np.abs(cq.probs - mq.probs)), np.max(np.abs(cp.probs - mp.probs)))
        if err > tol:
            raise AssertionError(f"marginal does not match noise convolution (error {err:.3g})")
    return mq, mp


def _point_states(g: GroupSpec, side: str):
    if side == "Q":
        return np.eye(g.dim, dtype=complex)
    return np.conj(g.fourier_matrix).T  # columns: momentum eigenvectors


def measurement_uncertainty(F: CovariantObservable, side: str, m: MetricSpec,
                            tol: float = 1e-9) -> float:
    """Worst-case transport distance between the output and ideal marginal.

    The supremum over input states is taken over the eigenstates of the
    ideal observable. The result is checked against the deviation of the
    noise distribution from the origin, which is its spread when ``F`` is
    centered.
    """
    g = F.group
    side = side.upper()
    states = _point_states(g, side)
    worst = 0.0
    for k in range(g.dim):
        psi = states[:, k]
        mq, mp = output_marginals(F, pure(psi), check=False)
        if side == "Q":
            out, ideal = mq, Distribution.point(g.position, g.position.label(k))
        else:
            out, ideal = mp, Distribution.point(g.momentum, g.momentum.label(k))
        worst = max(worst, transport_distance(out, ideal, m))
    nq, np_ = noise_distributions(F)
    noise = nq if side == "Q" else np_
    zero = noise.side.label(noise.side.zero_index)
    ref = deviation(noise, zero, m)
    if abs(worst - ref) > tol:
        raise AssertionError(f"sup over point states {worst} != noise deviation {ref}")
    return worst


def center_observable(F: CovariantObservable, m_q: MetricSpec, m_p: MetricSpec) -> CovariantObservable:
    """Relabel outcomes so both noise distributions have their spread minimizer at 0."""
    g = F.group
    nq, np_ = noise_distributions(F)
    iq = spread(nq, m_q, refine=False).index
    ip = spread(np_, m_p, refine=False).index
    if iq == g.position.zero_index and ip == g.momentum.zero_index:
        return F
    mq_label = np.asarray(g.position.label(iq))
    mp_label = np.asarray(g.momentum.label(ip))
    W = weyl_matrix(g, (mq_label, -mp_label))
    gen = np.conj(W).T @ F.generator @ W
    return CovariantObservable(g, gen)


@dataclass
class MurReport:
    samples: int
    max_abs_deviation: float
    passed: bool
    pairs: np.ndarray = field(repr=False)  # rows: (mu_P, mu_Q, spread_P, spread_Q)
    mixed_state_violation: float = 0.0

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_abs_deviation": self.max_abs_deviation,
            "mixed_state_violation": self.mixed_state_violation,
            "pass": self.passed,
        }


def mur_equals_pur_check(s: Scenario, samples: int = 100, rng=None, *, mixed: bool = False,
                         generators=None, tol: float = 1e-8, sanity_states: int = 3) -> MurReport:
    """Compare measurement uncertainties of random covariant observables with
    the preparation uncertainties (spreads) of their noise states.

    ``generators`` overrides the random sampling with explicit ``ρ_F``.
    """
    rng = np.random.default_rng(rng)
    g = s.group
    if generators is None:
        if mixed:
            generators = [random_density(g.dim, rng) for _ in range(samples)]
        else:
            generators = [pure(random_pure_state(g.dim, rng)) for _ in range(samples)]
    rows = []
    violation = 0.0
    for rho_F in generators:
        F = center_observable(povm_from_generator(g, rho_F), s.metric_q, s.metric_p)
        mu_q = measurement_uncertainty(F, "Q", s.metric_q)
        mu_p = measurement_uncertainty(F, "P", s.metric_p)
        nq, np_ = noise_distributions(F)
        sq = spread(nq, s.metric_q).value
        sp = spread(np_, s.metric_p).value
        rows.append((mu_p, mu_q, sp, sq))
        for _ in range(sanity_states):
            rho = random_density(g.dim, rng)
            oq, op = output_marginals(F, rho, check=False)
            dq = transport_distance(oq, position_marginal(g, rho), s.metric_q)
            dp = transport_distance(op, momentum_marginal(g, rho), s.metric_p)
            violation = max(violation, dq - mu_q, dp - mu_p)
    pairs = np.array(rows)
    dev = float(np.max(np.abs(pairs[:, :2] - pairs[:, 2:]))) if len(rows) else 0.0
    return MurReport(len(rows), dev, dev <= tol and violation <= 1e-9, pairs, float(violation))
