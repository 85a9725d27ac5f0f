"""Uncertainty tradeoff curves from ground states of ``d(P,0)^β + t d(Q,0)^α``.

For a scenario (group model, metric on ``X`` with exponent ``α``, metric on
``X̂`` with exponent ``β``) the smallest eigenvalue ``E(t)`` bounds every state
via ``d(ρ^P)^β ≥ E(t) − t d(ρ^Q)^α``. Sweeping ``t`` and taking the supremum
gives the convex lower envelope of the uncertainty region.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .lca import GroupSpec
from .metrics import MetricSpec, spread
from .operators import momentum_marginal, position_marginal

__all__ = [
    "Scenario",
    "UncertaintyPoint",
    "UncertaintyRegion",
    "SolverError",
    "position_cost",
    "momentum_cost",
    "build_hamiltonian",
    "ground_state",
    "sweep_tradeoff",
    "constrained_ground_state",
    "sweep_radius",
    "default_t_grid",
    "state_spreads",
]

log = logging.getLogger(__name__)

DENSE_LIMIT = 1024
DEGENERACY_GAP = 1e-10


class SolverError(RuntimeError):
    """The eigensolver failed to converge."""


@dataclass(frozen=True)
class Scenario:
    group: GroupSpec
    metric_q: MetricSpec
    metric_p: MetricSpec

    def __post_init__(self):
        self.metric_q.check(self.group.position)
        self.metric_p.check(self.group.momentum)

    @property
    def alpha(self) -> float:
        return self.metric_q.exponent

    @property
    def beta(self) -> float:
        return self.metric_p.exponent


@dataclass
class UncertaintyPoint:
    """One ground-state solve of the sweep.

    ``dq``/``dp`` are spreads of the ground state's marginals (centered
    values); ``moment_q``/``moment_p`` are ``⟨d(Q,0)^α⟩`` and ``⟨d(P,0)^β⟩``,
    which satisfy ``energy = moment_p + t·moment_q``.
    """

    t: float
    energy: float
    dq: float
    dp: float
    state: np.ndarray = field(repr=False)
    moment_q: float = math.nan
    moment_p: float = math.nan
    gap: float = math.inf
    segment: tuple | None = None

    @property
    def degenerate(self) -> bool:
        return self.gap < DEGENERACY_GAP


@dataclass
class UncertaintyRegion:
    """Sweep results plus the Legendre lower envelope.

    ``bound(Δ)`` is ``sup_t {E(t) − tΔ}`` over the sampled ``t``; it bounds
    ``d(ρ^P)^β`` from below for every state with ``d(ρ^Q)^α = Δ``.
    """

    scenario: Scenario
    points: list

    @property
    def ts(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.points])

    @property
    def dq(self) -> np.ndarray:
        return np.array([p.dq for p in self.points])

    @property
    def dp(self) -> np.ndarray:
        return np.array([p.dp for p in self.points])

    def bound(self, delta):
        delta = np.asarray(delta, dtype=float)
        vals = self.energies[None, :] - np.multiply.outer(np.atleast_1d(delta), self.ts)
        out = vals.max(axis=1)
        return out if delta.ndim else float(out[0])

    def envelope(self, num: int = 200, dmax: float | None = None):
        """Sample the envelope on ``num`` values of ``Δ = d(ρ^Q)^α``."""
        if dmax is None:
            dmax = float(np.max(self.dq ** self.scenario.alpha)) if self.points else 1.0
        deltas = np.linspace(0.0, dmax, num)
        return deltas, self.bound(deltas)


def default_t_grid(num: int = 64, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), num)


def position_cost(s: Scenario) -> np.ndarray:
    """Diagonal of ``d(Q,0)^α`` in the position basis."""
    if math.isinf(s.alpha):
        raise ValueError("α = ∞ has no cost operator; use constrained_ground_state")
    return s.metric_q.distance_from_zero(s.group.position) ** s.alpha


def momentum_cost(s: Scenario) -> np.ndarray:
    """``d(P,0)^β = F* diag(d(p,0)^β) F`` in the position basis."""
    if math.isinf(s.beta):
        raise ValueError("β = ∞ has no cost operator; use constrained_ground_state")
    U = s.group.fourier_matrix
    w = s.metric_p.distance_from_zero(s.group.momentum) ** s.beta
    DP = (np.conj(U).T * w) @ U
    return 0.5 * (DP + np.conj(DP).T)


def build_hamiltonian(s: Scenario, t: float) -> np.ndarray:
    """``H(t) = d(P,0)^β + t·d(Q,0)^α`` as a dense Hermitian matrix."""
    if not t > 0:
        raise ValueError("t must be positive")
    H = momentum_cost(s)
    H[np.diag_indices_from(H)] += t * position_cost(s)
    return H


def _lowest(H: np.ndarray, k: int = 2):
    n = H.shape[0]
    k = min(k, n)
    if n <= DENSE_LIMIT:
        vals, vecs = scipy.linalg.eigh(H, subset_by_index=[0, k - 1])
        return vals, vecs
    try:
        vals, vecs = scipy.sparse.linalg.eigsh(H, k=k, which="SA", tol=1e-12, maxiter=20 * n)
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise SolverError(f"Lanczos did not converge after {20 * n} iterations") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def ground_state(H) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a normalized eigenvector of a Hermitian matrix."""
    H = np.asarray(H)
    vals, vecs = _lowest(H, 1)
    E, psi = float(vals[0]), vecs[:, 0]
    psi = psi / np.linalg.norm(psi)
    scale = max(np.linalg.norm(H, 2) if H.shape[0] <= DENSE_LIMIT else np.abs(H).sum(1).max(), 1.0)
    resid = np.linalg.norm(H @ psi - E * psi)
    if resid > 1e-9 * scale:
        raise SolverError(f"ground state residual {resid:.3g} too large")
    return E, psi


def state_spreads(s: Scenario, psi):
    """``(d(ρ^Q), d(ρ^P))`` of a pure state, both minimized over centers."""
    sq = spread(position_marginal(s.group, psi), s.metric_q)
    sp = spread(momentum_marginal(s.group, psi), s.metric_p)
    return sq.value, sp.value


def _moments(s: Scenario, psi, DP, dQ):
    mq = float(np.real(np.vdot(psi, dQ * psi)))
    mp = float(np.real(np.vdot(psi, DP @ psi)))
    return mq, mp


def sweep_tradeoff(s: Scenario, t_grid=None) -> UncertaintyRegion:
    """Solve the ground-state problem for every ``t`` and collect the region.

    Failed solves are logged and skipped. Degenerate ground spaces record the
    extreme moment pairs within the ground space in ``segment``.
    """
    if math.isinf(s.alpha) or math.isinf(s.beta):
        raise ValueError("infinite exponents are swept with sweep_radius")
    ts = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if ts.size == 0:
        raise ValueError("empty t grid")
    DP = momentum_cost(s)
    dQ = position_cost(s)
    points = []
    for t in np.sort(ts):
        H = DP.copy()
        H[np.diag_indices_from(H)] += t * dQ
        try:
            vals, vecs = _lowest(H, 3)
        except SolverError as exc:
            log.warning("solver failed at t=%g: %s", t, exc)
            continue
        E, psi = float(vals[0]), vecs[:, 0]
        gap = float(vals[1] - vals[0]) if len(vals) > 1 else math.inf
        mq, mp = _moments(s, psi, DP, dQ)
        dq, dp = state_spreads(s, psi)
        pt = UncertaintyPoint(float(t), E, dq, dp, psi, mq, mp, gap)
        if pt.degenerate:
            pt.segment = _degenerate_segment(H, E, DP, dQ)
        points.append(pt)
    return UncertaintyRegion(s, points)


def _degenerate_segment(H, E, DP, dQ):
    vals, vecs = np.linalg.eigh(H)
    V = vecs[:, np.abs(vals - E) < DEGENERACY_GAP * 10]
    w, c = np.linalg.eigh(np.conj(V).T @ (dQ[:, None] * V))
    ends = []
    for col in (c[:, 0], c[:, -1]):
        psi = V @ col
        ends.append((float(np.real(np.vdot(psi, dQ * psi))), float(np.real(np.vdot(psi, DP @ psi)))))
    return tuple(ends)


def constrained_ground_state(s: Scenario, hard_side: str, radius: float):
    """Ground state with the ``hard_side`` distribution confined to a ball.

    Only points strictly inside ``radius`` are kept (Dirichlet condition on
    the boundary); the other side's moment operator is minimized there.
    Returns ``(E, ψ)`` with ``ψ`` in the position basis.
    """
    g = s.group
    if hard_side.upper() == "Q":
        keep = s.metric_q.distance_from_zero(g.position) < radius * (1 - 1e-12)
        if not keep.any():
            raise ValueError("empty restriction")
        U = g.fourier_matrix
        w = s.metric_p.distance_from_zero(g.momentum) ** s.beta
        Uk = U[:, keep]
        H = (np.conj(Uk).T * w) @ Uk
        E, phi = ground_state(0.5 * (H + np.conj(H).T))
        psi = np.zeros(g.dim, dtype=complex)
        psi[keep] = phi
        return E, psi
    if hard_side.upper() == "P":
        keep = s.metric_p.distance_from_zero(g.momentum) < radius * (1 - 1e-12)
        if not keep.any():
            raise ValueError("empty restriction")
        U = g.fourier_matrix
        w = s.metric_q.distance_from_zero(g.position) ** s.alpha
        Uk = np.conj(U[keep, :]).T  # momentum points -> position coords
        H = (np.conj(Uk).T * w) @ Uk
        E, phi = ground_state(0.5 * (H + np.conj(H).T))
        return E, Uk @ phi
    raise ValueError("hard_side must be 'Q' or 'P'")


def sweep_radius(s: Scenario, radii, hard_side: str | None = None) -> UncertaintyRegion:
    """Tradeoff for an infinite exponent: confine one side, minimize the other.

    Points carry ``t = radius`` and ``energy`` = the minimized moment.
    """
    if hard_side is None:
        hard_side = "Q" if math.isinf(s.alpha) else "P"
    points = []
    for r in np.sort(np.asarray(radii, dtype=float)):
        try:
            E, psi = constrained_ground_state(s, hard_side, r)
        except (SolverError, ValueError) as exc:
            log.warning("constrained solve failed at radius %g: %s", r, exc)
            continue
        dq, dp = state_spreads(s, psi)
        points.append(UncertaintyPoint(float(r), E, dq, dp, psi))
    return UncertaintyRegion(s, points)
