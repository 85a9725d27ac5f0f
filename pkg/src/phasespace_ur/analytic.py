"""Closed-form reference results and the numerical routines that back them.

Covers the qudit ellipse, Bessel zeros for confined position with quadratic
momentum cost, a radial eigenvalue solver, dilation scaling of ground-state
energies, the qubit-string mean-field curve and the number/angle relation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

__all__ = [
    "qudit_radius",
    "qudit_boundary_residual",
    "qudit_boundary",
    "qudit_forbidden",
    "bessel_j",
    "bessel_first_zero",
    "c_inf2",
    "c_inf2_expansion",
    "radial_solver",
    "RadialResult",
    "ConvergenceError",
    "scaling_exponents",
    "energy_to_constant",
    "constant_to_energy",
    "meanfield_curve",
    "meanfield_boundary",
    "meanfield_energy",
    "meanfield_limit_constant",
    "meanfield_limit_numeric",
    "limit_ratio",
    "meanfield_gap",
    "number_angle_residual",
    "number_angle_exact_residual",
    "ConstantTable",
    "best_constant",
]


class ConvergenceError(RuntimeError):
    """A numerical routine did not reach its stated accuracy."""


# -- qudits ------------------------------------------------------------------

def qudit_radius(n: int) -> float:
    """Spread ``1 − 1/n`` of the uniform distribution on ``n`` points (discrete metric)."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    return 1.0 - 1.0 / n


def _check_unit(n, *vals):
    D = qudit_radius(n)
    for v in vals:
        if not (-1e-12 <= v <= D + 1e-12):
            raise ValueError(f"value {v} outside [0, {D}]")
    return D


def qudit_boundary_residual(n: int, dp: float, dq: float) -> float:
    """``(dp−Δ)² + (dq−Δ)² + (2−4/n)·dp·dq − Δ²``.

    Zero on the ellipse whose lower-left arc is the optimal tradeoff curve for
    the discrete metric on ``Z_n``. Points on that arc's concave side (toward
    the origin) have positive residual and are forbidden; see
    :func:`qudit_forbidden` for the membership test.
    """
    D = _check_unit(n, dp, dq)
    k = 2.0 - 4.0 / n
    return (dp - D) ** 2 + (dq - D) ** 2 + k * dp * dq - D**2


def qudit_boundary(n: int, dq):
    """Smallest achievable ``dp`` for a given ``dq`` on ``Z_n`` (discrete metric)."""
    D = qudit_radius(n)
    dq = np.asarray(dq, dtype=float)
    if np.any(dq < -1e-12) or np.any(dq > D + 1e-12):
        raise ValueError(f"dq outside [0, {D}]")
    k = 2.0 - 4.0 / n
    b = 2 * D - k * dq
    disc = np.clip(b**2 - 4 * (dq - D) ** 2, 0.0, None)
    out = np.clip((b - np.sqrt(disc)) / 2, 0.0, None)
    return out if out.ndim else float(out)


def qudit_forbidden(n: int, dp: float, dq: float, tol: float = 1e-12) -> bool:
    """True if ``(dp, dq)`` lies strictly below the optimal tradeoff curve."""
    D = qudit_radius(n)
    if dq >= D or dp >= D:
        return False
    return dp < qudit_boundary(n, dq) - tol


# -- Bessel functions --------------------------------------------------------

def _log_norm_coeffs(mu, jmax):
    # (x/2)^μ = Σ_j c_j J_{μ+2j}, c_0 = Γ(μ+1), c_j = (μ+2j)Γ(μ+j)/j!
    j = np.arange(1, jmax + 1)
    c = np.empty(jmax + 1)
    c[0] = math.gamma(mu + 1)
    c[1:] = (mu + 2 * j) * np.exp([math.lgamma(mu + k) - math.lgamma(k + 1) for k in j])
    return c


def bessel_j(nu: float, x: float) -> float:
    """Bessel function ``J_ν(x)`` for ``ν ≥ −1`` and ``x > 0``.

    Miller's backward recurrence, normalized with the Neumann-type sum
    ``(x/2)^μ = Σ_j c_j J_{μ+2j}``, where ``μ`` is the fractional part of ``ν``.
    """
    if nu < -1:
        raise ValueError("order must be >= -1")
    if x <= 0:
        if x == 0:
            return 1.0 if nu == 0 else 0.0
        raise ValueError("argument must be positive")
    mu = nu - math.floor(nu)
    k_target = int(round(nu - mu))
    top = int(max(x, nu)) + 30 + int(10 * math.sqrt(max(x, nu, 1.0)))
    top += top % 2
    vals = np.zeros(top + 2)
    vals[top] = 1e-30
    for k in range(top, 0, -1):
        vals[k - 1] = 2 * (mu + k) / x * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1:] *= 1e-250
    c = _log_norm_coeffs(mu, top // 2)
    total = float(np.dot(c, vals[0:top + 1:2]))
    scale = (x / 2) ** mu / total
    if k_target >= 0:
        return float(vals[k_target] * scale)
    # one step below μ: J_{μ−1} = (2μ/x) J_μ − J_{μ+1}
    return float((2 * mu / x * vals[0] - vals[1]) * scale)


def bessel_first_zero(nu: float, tol: float = 1e-12) -> float:
    """First positive zero ``j_{ν,1}`` by scanning for a sign change, then bisection."""
    if nu < -0.5:
        raise ValueError("order must be >= -1/2")
    x = math.sqrt(nu * (nu + 2)) if nu > 0 else 1.0  # lower bound for j_{ν,1}
    x = max(x, 1e-3)
    f0 = bessel_j(nu, x)
    step = 0.1
    for _ in range(100000):
        x1 = x + step
        f1 = bessel_j(nu, x1)
        if f0 == 0:
            return x
        if f0 * f1 < 0:
            break
        x, f0 = x1, f1
    else:
        raise ConvergenceError("no sign change found")
    lo, hi, flo = x, x1, f0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        fm = bessel_j(nu, mid)
        if fm == 0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def c_inf2(n: int) -> float:
    """Constant for confined position (``α=∞``) and quadratic momentum (``β=2``) in ``ℝ^n``."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return bessel_first_zero(n / 2 - 1)


def c_inf2_expansion(n) -> float:
    """Large-``n`` expansion ``n/2 + 1.47292·n^{1/3} − 1``."""
    return n / 2 + 1.47292 * n ** (1 / 3) - 1


@dataclass
class RadialResult:
    energy: float
    error: float
    grid: int


def _radial_energy(n, lam, grid, radius):
    h = radius / grid
    r_face = h * np.arange(1, grid + 1)  # outer faces of cells 0..grid-1
    w_face = r_face ** (n - 1)
    lo = h * np.arange(grid)
    vol = (r_face**n - lo**n) / n  # ∫ r^{n-1} dr per cell
    r_c = h * (np.arange(grid) + 0.5)
    diag = np.zeros(grid)
    diag[:-1] += w_face[:-1] / h**2
    diag[1:] += w_face[:-1] / h**2
    diag[-1] += 2 * w_face[-1] / h**2  # ghost value −u at the wall
    diag = diag * h  # flux differences integrate over a cell of width h
    if lam:
        diag += lam * vol / r_c**2
    off = -w_face[:-1] / h
    s = 1 / np.sqrt(vol)
    d = diag * s**2
    e = off * s[:-1] * s[1:]
    return float(eigh_tridiagonal(d, e, select="i", select_range=(0, 0), eigvals_only=True)[0])


def radial_solver(n: int, lam: float = 0.0, grid: int = 4096, radius: float = 1.0,
                  rtol: float = 1e-4) -> RadialResult:
    """Lowest Dirichlet eigenvalue of ``−d²/dr² + (4λ+(n−1)(n−3))/(4r²)`` on ``(0, radius)``.

    The substitution ``φ = r^{(n−1)/2} u`` turns the problem into the radial
    Laplacian of ``ℝ^n`` acting on ``u``, which is discretized by finite
    volumes on a cell-centered grid (no flux through ``r=0``, ``u=0`` at the
    wall). The answer is compared with the result on half the grid; the
    Richardson estimate of the error is returned and must be below ``rtol``.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if grid < 16:
        raise ValueError("grid too small")
    if n == 1 and lam:
        raise ValueError("λ must vanish in one dimension")
    E = _radial_energy(n, lam, grid, radius)
    E2 = _radial_energy(n, lam, grid // 2, radius)
    err = abs(E - E2) / 3
    if err > rtol * abs(E):
        raise ConvergenceError(f"radial eigenvalue not converged: {E} vs {E2} on half grid")
    return RadialResult(E, err, grid)


# -- dilation scaling --------------------------------------------------------

def _scaling_constant(alpha, beta):
    s = alpha + beta
    return s * alpha ** (-alpha / s) * beta ** (-beta / s)


def scaling_exponents(alpha: float, beta: float, a: float = 1.0, b: float = 1.0):
    """``(E(a,b)/E(1,1), K)`` for ``H = a|Q|^α + b|P|^β``.

    ``E(a,b) = a^{β/(α+β)} b^{α/(α+β)} E(1,1)`` from homogeneity and dilations;
    ``K = (α+β) α^{−α/(α+β)} β^{−β/(α+β)}`` links ``E`` to the best constant
    through ``E = K c^{αβ/(α+β)}``.
    """
    if math.isinf(alpha) or math.isinf(beta):
        raise ValueError("infinite exponents have no dilation scaling; use the constrained solver")
    if alpha < 1 or beta < 1:
        raise ValueError("exponents must be >= 1")
    s = alpha + beta
    return a ** (beta / s) * b ** (alpha / s), _scaling_constant(alpha, beta)


def energy_to_constant(E: float, alpha: float, beta: float) -> float:
    """Best constant ``c`` in ``d(ρ^Q)d(ρ^P) ≥ c`` from the ground energy ``E(1,1)``."""
    _, K = scaling_exponents(alpha, beta)
    return (E / K) ** ((alpha + beta) / (alpha * beta))


def constant_to_energy(c: float, alpha: float, beta: float) -> float:
    _, K = scaling_exponents(alpha, beta)
    return K * c ** (alpha * beta / (alpha + beta))


# -- qubit strings and mean field -------------------------------------------

def meanfield_curve(alpha: float, beta: float, t):
    """``((½(1+cos t))^α, (½(1+sin t))^β)``, taken literally for any ``t``."""
    t = np.asarray(t, dtype=float)
    return (0.5 * (1 + np.cos(t))) ** alpha, (0.5 * (1 + np.sin(t))) ** beta


def meanfield_boundary(alpha: float, beta: float, num: int = 201):
    """Lower-left arc of the asymptotic qubit-string region.

    Samples the curve for ``t ∈ [π, 3π/2]``, running from ``(0, (½)^β)`` to
    ``((½)^α, 0)``. Coordinates are ``(d(ρ^Q)^α, d(ρ^P)^β)``.
    """
    t = np.linspace(np.pi, 1.5 * np.pi, num)
    return meanfield_curve(alpha, beta, t)


def meanfield_energy(alpha: float, beta: float, t: float, num: int = 4001) -> float:
    """``min_θ [(½(1−cos θ))^β + t(½(1−sin θ))^α]`` over the Bloch circle.

    Limit of the per-site ground energy of ``d(P,0)^β + t·d(Q,0)^α`` on qubit
    strings with the per-site Hamming metric.
    """
    def f(th):
        return (0.5 * (1 - math.cos(th))) ** beta + t * (0.5 * (1 - math.sin(th))) ** alpha

    grid = np.linspace(0, 0.5 * np.pi, num)
    vals = np.array([f(x) for x in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, num - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return float(min(res.fun, vals[i]))


def meanfield_limit_constant(alpha: float, beta: float) -> float:
    """``min_v (v^{α/2} + (4v)^{−β/2}) = (α+β) 2^{−αβ/(α+β)} α^{−α/(α+β)} β^{−β/(α+β)}``."""
    if math.isinf(alpha) or math.isinf(beta):
        raise ValueError("finite exponents required")
    s = alpha + beta
    return s * 2 ** (-alpha * beta / s) * alpha ** (-alpha / s) * beta ** (-beta / s)


def meanfield_limit_numeric(alpha: float, beta: float) -> float:
    """Direct minimization of ``v^{α/2} + (4v)^{−β/2}`` over ``v > 0``."""
    def f(logv):
        v = math.exp(logv)
        return v ** (alpha / 2) + (4 * v) ** (-beta / 2)

    res = minimize_scalar(f, bracket=(-5.0, 0.0, 5.0), tol=1e-14)
    return float(res.fun)


def limit_ratio(alpha: float, beta: float) -> float:
    """``lim 2c_{αβ}(n)/n`` implied by the mean-field energy and dilation scaling.

    With ``E_n = n^{−αβ/(α+β)} K c^{αβ/(α+β)}`` tending to the mean-field
    minimum ``M``, ``c(n)/n → (M/K)^{(α+β)/(αβ)}``.
    """
    M = meanfield_limit_constant(alpha, beta)
    K = _scaling_constant(alpha, beta)
    return 2 * (M / K) ** ((alpha + beta) / (alpha * beta))


def meanfield_gap(ts, energies, alpha: float, beta: float) -> float:
    """Largest support-function distance between a finite region and the mean-field one.

    Both regions are upward closed and convex, so each is fixed by its ground
    energies ``E(t)``. The distance in the direction ``(t, 1)/√(1+t²)`` is
    ``|E_n(t) − E_∞(t)|/√(1+t²)``; the maximum over the sampled ``t`` is returned.
    """
    ts = np.asarray(ts, dtype=float)
    E_inf = np.array([meanfield_energy(alpha, beta, t) for t in ts])
    return float(np.max(np.abs(np.asarray(energies) - E_inf) / np.sqrt(1 + ts**2)))


# -- number and angle --------------------------------------------------------

def number_angle_residual(dq: float, dp: float) -> float:
    """``dq² + dp²(4 − dp²) − 1`` (discrete metric on ℤ, chordal metric squared on the circle)."""
    return dq**2 + dp**2 * (4 - dp**2) - 1


def number_angle_exact_residual(dq: float, dp: float) -> float:
    """``(1−dq)² − dp²(4−dp²)/4``; zero on the exact tradeoff curve, ≤ 0 above it.

    The optimal states are ``ψ(k) ∝ r^{|k|}``, giving ``dq = 2r²/(1+r²)`` and
    ``dp² = 2(1−r)²/(1+r²)``, which lie on the circle
    ``(1−dq)² + (1−dp²/2)² = 1``.
    """
    return (1 - dq) ** 2 - dp**2 * (4 - dp**2) / 4


# -- table of constants ------------------------------------------------------

@dataclass
class ConstantTable:
    """Best constants ``c_{αβ}(n)`` keyed by ``(α, β, n)``."""

    entries: dict = field(default_factory=dict)

    def add(self, alpha, beta, n, value, method: str, error: float = 0.0):
        if not (math.isinf(alpha) or math.isinf(beta)) and not value > 0:
            raise ValueError("constants must be positive for finite exponents")
        self.entries[(alpha, beta, n)] = (float(value), method, float(error))

    def __getitem__(self, key):
        return self.entries[key][0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta", "n", "c", "method", "error"])
        for (a, b, n), (v, m, e) in sorted(self.entries.items(), key=lambda kv: str(kv[0])):
            w.writerow([_fmt(a), _fmt(b), n, repr(v), m, repr(e)])
        return buf.getvalue()


def _fmt(x):
    return "inf" if math.isinf(x) else repr(float(x))


def best_constant(alpha: float, beta: float, n: int, *, numeric: bool = False):
    """``(value, method, error)`` for the supported branches.

    ``(2, 2, n)``: ``n/2``. ``(∞, 2, n)``: first Bessel zero of order ``n/2−1``
    (or the radial solver with ``numeric``). ``(∞, ∞, n)``: infinite.
    Anything else raises ``NotImplementedError``.
    """
    ia, ib = math.isinf(alpha), math.isinf(beta)
    if ia and ib:
        return math.inf, "closed-form", 0.0
    if ia and beta == 2:
        if numeric:
            r = radial_solver(n)
            return math.sqrt(r.energy), "numeric", r.error / (2 * math.sqrt(r.energy))
        return c_inf2(n), "closed-form", 1e-10
    if ib and alpha == 2:
        # dual problem, by Fourier symmetry of ℝ^n
        return best_constant(beta, alpha, n, numeric=numeric)
    if alpha == 2 and beta == 2:
        return n / 2, "closed-form", 0.0
    raise NotImplementedError(f"no solver for (α, β) = ({alpha}, {beta})")
