"""Density operators, position/momentum marginals and phase-space convolutions.

Phase-space functions on a finite model are arrays of shape ``(|X|, |X̂|)``
indexed by (position index, momentum index). Every phase-space point carries
Haar measure ``dξ = 1/|X|``.
"""

from __future__ import annotations

import numpy as np

from .lca import GroupSpec, parity_matrix, weyl_matrix
from .metrics import Distribution

__all__ = [
    "as_density",
    "pure",
    "random_pure_state",
    "random_density",
    "position_marginal",
    "momentum_marginal",
    "translate_function",
    "convolve_function_operator",
    "convolve_operator_operator",
    "momentum_average",
]

PSD_TOL = 1e-10


def as_density(rho, *, tol: float = 1e-12) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD, unit trace) and return it.

    A 1-d array is taken as a state vector and turned into its projector.
    """
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return pure(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density operator must be square")
    if np.max(np.abs(rho - np.conj(rho).T)) > tol:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError(f"density operator has trace {np.trace(rho).real:.6g}")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise ValueError("density operator is not positive")
    return rho


def pure(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, np.conj(psi))


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state ``G G*/tr`` from a complex Ginibre matrix."""
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ np.conj(G).T
    return rho / np.trace(rho).real


def _diag_probs(rho) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.ndim == 1:
        p = np.abs(rho) ** 2
    else:
        p = np.real(np.diag(rho))
    return np.clip(p, 0.0, None)


def position_marginal(g: GroupSpec, rho) -> Distribution:
    """Position distribution ``ρ^Q`` of a state (vector or density matrix)."""
    p = _diag_probs(rho)
    return Distribution(g.position, p / p.sum())


def momentum_marginal(g: GroupSpec, rho) -> Distribution:
    """Momentum distribution ``ρ^P``, the diagonal of ``F ρ F*``."""
    U = g.fourier_matrix
    rho = np.asarray(rho)
    if rho.ndim == 1:
        p = np.abs(U @ rho) ** 2
    else:
        p = np.real(np.einsum("ij,jk,ik->i", U, rho, np.conj(U)))
    p = np.clip(p, 0.0, None)
    return Distribution(g.momentum, p / p.sum())


def translate_function(g: GroupSpec, f, xi) -> np.ndarray:
    """``(α_ξ f)(η) = f(η − ξ)`` for a phase-space function array."""
    q, p = xi
    tq, vq = g.position.shift_indices(-np.asarray(q))
    tp, vp = g.momentum.shift_indices(-np.asarray(p))
    if not (vq.all() and vp.all()):
        raise ValueError("phase-space translation leaves the stored range")
    f = np.asarray(f)
    return f[np.ix_(tq, tp)]


def _weyl_stack(g: GroupSpec):
    """All Weyl matrices, indexed ``[q_idx, p_idx]``."""
    return [[weyl_matrix(g, (g.position.label(i), g.momentum.label(j)))
             for j in range(g.momentum.size)] for i in range(g.position.size)]


def convolve_function_operator(g: GroupSpec, f, A) -> np.ndarray:
    """``f ∗ A = Σ_η dξ f(η) α_η(A)``; positive for positive factors."""
    f = np.asarray(f)
    A = np.asarray(A)
    if f.shape != (g.position.size, g.momentum.size):
        raise ValueError("phase-space function has the wrong shape")
    out = np.zeros(A.shape, dtype=complex)
    for i, j in zip(*np.nonzero(f)):
        W = weyl_matrix(g, (g.position.label(i), g.momentum.label(j)))
        out += f[i, j] * (np.conj(W).T @ A @ W)
    return out * g.phase_space_weight


def convolve_operator_operator(g: GroupSpec, A, B) -> np.ndarray:
    """Phase-space function ``(A∗B)(ξ) = tr(A α_ξ(Π B Π))``."""
    A = np.asarray(A)
    P = parity_matrix(g)
    Bp = P @ np.asarray(B) @ P
    out = np.empty((g.position.size, g.momentum.size), dtype=complex)
    for i in range(g.position.size):
        for j in range(g.momentum.size):
            W = weyl_matrix(g, (g.position.label(i), g.momentum.label(j)))
            out[i, j] = np.sum(A.T * (np.conj(W).T @ Bp @ W))
    return out


def momentum_average(g: GroupSpec, rho) -> np.ndarray:
    """``Σ_p dp α_{(0,p)}(ρ)``; equals the operator ``ρ^Q(Q)`` (position density)."""
    zero_q = g.position.label(g.position.zero_index)
    out = np.zeros(np.shape(rho), dtype=complex)
    for j in range(g.momentum.size):
        W = weyl_matrix(g, (zero_q, g.momentum.label(j)))
        out += np.conj(W).T @ rho @ W
    return out * g.momentum.weight
