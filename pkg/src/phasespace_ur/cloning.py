"""Joint measurements built from asymmetric universal cloners.

A cloner ``V: H → H⊗H⊗H`` sends ``φ`` to ``a·φ⊗Ω + b·Ω⊗φ``, with
``Ω = n^{-1/2} Σ_j |jj⟩`` the maximally entangled unit vector. Measuring
position on the first output and momentum on the third gives a joint
measurement whose marginals are noisy versions of the ideal ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import qudit_radius
from .covariant import CovariantObservable, povm_from_generator
from .lca import GroupSpec, cyclic, weyl_matrix
from .metrics import Distribution, MetricSpec, transport_distance
from .operators import as_density

__all__ = [
    "ClonerParams",
    "cloner_isometry",
    "projector_basis",
    "joint_povm_from_cloner",
    "joint_marginals",
    "cloner_uncertainty_pair",
    "sweep_params",
    "cloner_sweep",
    "covariant_from_cloner",
    "phase_space_isometry",
    "phase_space_joint",
    "phase_space_cloner",
    "generator_from_u",
    "u_from_state",
    "PhaseSpaceCloner",
]

MAX_DIM = 8


@dataclass(frozen=True)
class ClonerParams:
    n: int
    a: complex
    b: complex

    def __post_init__(self):
        if not 2 <= self.n <= MAX_DIM:
            raise ValueError(f"dimension must be in 2..{MAX_DIM}")
        err = abs(self.norm() - 1.0)
        if err > 1e-12:
            raise ValueError(f"cloner parameters not normalized (error {err:.3g})")

    def norm(self) -> float:
        a, b = complex(self.a), complex(self.b)
        return abs(a) ** 2 + abs(b) ** 2 + 2 * (np.conj(a) * b).real / self.n

    @classmethod
    def from_angle(cls, n: int, theta: float) -> "ClonerParams":
        """Real ``a = r cos θ``, ``b = r sin θ`` with ``r`` fixed by normalization."""
        r = 1.0 / math.sqrt(1.0 + math.sin(2 * theta) / n)
        return cls(n, r * math.cos(theta), r * math.sin(theta))


def _omega(n):
    return np.eye(n).reshape(n * n) / math.sqrt(n)


def cloner_isometry(p: ClonerParams) -> np.ndarray:
    """Matrix of ``V`` with shape ``(n³, n)``; output slots ordered (copy 1, anti-copy, copy 2)."""
    n = p.n
    om = _omega(n)
    I = np.eye(n)
    V = p.a * np.kron(I, om[:, None]) + p.b * np.kron(om[:, None], I)
    V = np.asarray(V, dtype=complex)
    err = np.max(np.abs(np.conj(V).T @ V - np.eye(n)))
    if err > 1e-10:
        raise ValueError(f"cloner is not an isometry (error {err:.3g})")
    return V


def projector_basis(vectors) -> np.ndarray:
    """Rank-one projectors onto the columns of a unitary matrix, shape ``(n, n, n)``."""
    U = np.asarray(vectors)
    return np.einsum("ik,jk->kij", U, np.conj(U))


def _check_complete(P):
    n = P.shape[1]
    err = np.max(np.abs(P.sum(axis=0) - np.eye(n)))
    if err > 1e-10:
        raise ValueError("projector family does not sum to the identity")


def joint_povm_from_cloner(p: ClonerParams, F=None, E=None) -> np.ndarray:
    """``G[x, y] = V*(F_x ⊗ 𝟙 ⊗ E_y)V``.

    ``F`` and ``E`` default to the position and momentum bases of ``Z_n``.
    """
    n = p.n
    g = cyclic(n)
    F = projector_basis(np.eye(n)) if F is None else np.asarray(F)
    E = projector_basis(np.conj(g.fourier_matrix).T) if E is None else np.asarray(E)
    _check_complete(F)
    _check_complete(E)
    V = cloner_isometry(p).reshape(n, n, n, n)  # (j, k, l, i)
    # G[x,y]_{i,i'} = Σ conj(V_{jkl,i}) F_x[j,j'] E_y[l,l'] V_{j'kl',i'}
    G = np.einsum("jkli,xjm,ylo,mkop->xyip", np.conj(V), F, E, V, optimize=True)
    return G


def joint_marginals(G):
    """``(Σ_y G[x,y], Σ_x G[x,y])``."""
    return G.sum(axis=1), G.sum(axis=0)


def _marginal_distance(Gm, states, m):
    """Largest transport distance between marginal and ideal over basis states."""
    n = Gm.shape[0]
    side = cyclic(n).position
    worst = 0.0
    for k in range(n):
        psi = states[:, k]
        probs = np.real(np.einsum("i,xij,j->x", np.conj(psi), Gm, psi))
        out = Distribution(side, np.clip(probs, 0, None))
        worst = max(worst, transport_distance(out, Distribution.point(side, k), m))
    return worst


def cloner_uncertainty_pair(p: ClonerParams, m: MetricSpec | None = None):
    """``(dp, dq)``: worst marginal errors of the cloner joint measurement.

    Distances are measured against the ideal outcome, without relabelling,
    and evaluate to ``(Δ|a|², Δ|b|²)`` for the discrete metric.
    """
    m = MetricSpec("discrete") if m is None else m
    g = cyclic(p.n)
    G = joint_povm_from_cloner(p)
    GQ, GP = joint_marginals(G)
    dq = _marginal_distance(GQ, np.eye(p.n), m)
    # momentum outcome y, ideal state: momentum eigenvector y
    dp = _marginal_distance(GP, np.conj(g.fourier_matrix).T, m)
    return dp, dq


def sweep_params(n: int, step: float = 1e-2, both_signs: bool = True):
    """Real parameter family ``θ ↦ (a, b)``; ``θ ∈ [0, π/2]`` or the full circle."""
    hi = 2 * np.pi if both_signs else 0.5 * np.pi
    thetas = np.arange(0.0, hi + 1e-12, step)
    if not both_signs and thetas[-1] < 0.5 * np.pi:
        thetas = np.append(thetas, 0.5 * np.pi)
    return [ClonerParams.from_angle(n, th) for th in thetas]


def cloner_sweep(n: int, step: float = 1e-2, both_signs: bool = False):
    """Rows ``(θ, a, b, dq, dp)`` from the closed forms ``dq = Δ|b|²``, ``dp = Δ|a|²``."""
    D = qudit_radius(n)
    rows = []
    for p in sweep_params(n, step, both_signs):
        th = math.atan2(float(np.real(p.b)), float(np.real(p.a)))
        rows.append((th, float(np.real(p.a)), float(np.real(p.b)), D * abs(p.b) ** 2, D * abs(p.a) ** 2))
    return np.array(rows)


def covariant_from_cloner(p: ClonerParams, purity_tol: float = 1e-10) -> CovariantObservable:
    """Covariant observable with generator ``ρ_F = n·V*(|0⟩⟨0| ⊗ 𝟙 ⊗ |φ⟩⟨φ|)V``.

    ``φ`` is the zero-momentum vector. The generator is checked to be a state.
    """
    n = p.n
    G = joint_povm_from_cloner(p)
    rho_F = n * G[0, 0]
    rho_F = 0.5 * (rho_F + np.conj(rho_F).T)
    as_density(rho_F, tol=1e-9)
    return povm_from_generator(cyclic(n), rho_F)


# -- phase-space covariant cloners --------------------------------------------

def phase_space_isometry(g: GroupSpec, u) -> np.ndarray:
    """``V̂ = Σ u(q,p) W(q,p) ⊗ W(−q,−p)`` as a matrix on ``H⊗H``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (g.position.size, g.momentum.size):
        raise ValueError("coefficient array has the wrong shape")
    d = g.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for i, j in zip(*np.nonzero(u)):
        q = np.asarray(g.position.label(i))
        pp = np.asarray(g.momentum.label(j))
        out += u[i, j] * np.kron(weyl_matrix(g, (q, pp)), weyl_matrix(g, (-q, -pp)))
    return out


def _partial_trace_first(A, d):
    return np.einsum("kikj->ij", A.reshape(d, d, d, d))


def phase_space_joint(g: GroupSpec, Vh) -> np.ndarray:
    """``G[x, y] = tr₁ V̂*(F_x ⊗ E_y)V̂`` with position/momentum projectors."""
    d = g.dim
    F = projector_basis(np.eye(d))
    E = projector_basis(np.conj(g.fourier_matrix).T)
    Vh4 = np.asarray(Vh).reshape(d, d, d, d)  # (j, l, k, i)
    return np.einsum("jlki,xjm,ylo,mokp->xyip", np.conj(Vh4), F, E, Vh4, optimize=True)


def _characters(g: GroupSpec) -> np.ndarray:
    """``⟨p|q⟩`` indexed ``[q_idx, p_idx]``."""
    return g.character_table.T


def generator_from_u(g: GroupSpec, u) -> np.ndarray:
    """``Σ_q |ψ_q⟩⟨ψ_q|`` with ``ψ_q = Σ_p conj(u(q,p))·⟨p|q⟩·|p⟩``, trace-normalized.

    The character factor ``⟨p|q⟩`` comes from the ordering in
    ``(W(q,p)ψ)(x) = ⟨p|x⟩ψ(x+q)``; it is a phase per term and drops out for
    ``u`` supported on ``q = 0``.
    """
    u = np.asarray(u, dtype=complex)
    Pk = np.conj(g.fourier_matrix).T  # columns: momentum eigenvectors
    psi = Pk @ (np.conj(u) * _characters(g)).T  # column q is ψ_q
    rho = psi @ np.conj(psi).T
    return rho / np.trace(rho).real


def u_from_state(g: GroupSpec, rho) -> np.ndarray:
    """Coefficients ``u`` with ``generator_from_u(g, u) = ρ``.

    Uses the eigendecomposition ``ρ = Σ_k λ_k |v_k⟩⟨v_k|`` and sets
    ``ψ_k = √λ_k v_k`` (one eigenvector per position label).
    """
    rho = as_density(rho, tol=1e-9)
    lam, vecs = np.linalg.eigh(rho)
    lam = np.clip(lam, 0, None)
    psi = vecs * np.sqrt(lam)
    coeff = (g.fourier_matrix @ psi).T  # ⟨p|ψ_k⟩ indexed [k, p]
    return np.conj(coeff) * _characters(g)


@dataclass
class PhaseSpaceCloner:
    u: np.ndarray
    isometry: np.ndarray
    joint: np.ndarray
    generator: np.ndarray
    observable: CovariantObservable
    normalization_error: float


def phase_space_cloner(g: GroupSpec, u, tol: float = 1e-10) -> PhaseSpaceCloner:
    """Covariant observable realized by the phase-space cloner with coefficients ``u``.

    ``u`` is rescaled so that ``tr₁(V̂*V̂) = 𝟙``. The generator is read off as
    ``n·G[0,0]`` and compared with :func:`generator_from_u`.
    """
    u = np.asarray(u, dtype=complex)
    if not np.any(np.abs(u) > 0):
        raise ValueError("u must not vanish")
    d = g.dim
    Vh = phase_space_isometry(g, u)
    T = _partial_trace_first(np.conj(Vh).T @ Vh, d)
    s = np.trace(T).real / d
    u = u / math.sqrt(s)
    Vh = Vh / math.sqrt(s)
    T = _partial_trace_first(np.conj(Vh).T @ Vh, d)
    norm_err = float(np.max(np.abs(T - np.eye(d))))
    if norm_err > tol:
        raise ValueError(f"tr₁(V̂*V̂) is not the identity after rescaling (error {norm_err:.3g})")
    G = phase_space_joint(g, Vh)
    rho_F = d * G[0, 0]
    rho_F = 0.5 * (rho_F + np.conj(rho_F).T)
    expected = generator_from_u(g, u)
    err = np.max(np.abs(rho_F / np.trace(rho_F).real - expected))
    if err > tol:
        raise AssertionError(f"generator mismatch {err:.3g}")
    F = povm_from_generator(g, rho_F)
    err = np.max(np.abs(F.effects - G))
    if err > tol:
        raise AssertionError(f"cloner joint measurement is not covariant (error {err:.3g})")
    return PhaseSpaceCloner(u, Vh, G, rho_F, F, norm_err)
