"""Translation-invariant metrics, deviations, spreads and transport distances."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .lca import Side

__all__ = [
    "MetricSpec",
    "Distribution",
    "Spread",
    "parse_metric",
    "deviation",
    "spread",
    "transport_distance",
    "shift_distribution",
    "convolve_distributions",
]

METRIC_KINDS = ("discrete", "abs", "cyclic-abs", "arc", "chordal", "hamming", "euclidean")
# masses below this count as outside the support for infinite exponents
SUPPORT_TOL = 1e-12

_ALIASES = {"cyclic_absolute": "cyclic-abs", "absolute": "abs", "hamming_per_site": "hamming"}


@dataclass(frozen=True)
class MetricSpec:
    """A translation-invariant metric together with an error exponent.

    ``exponent`` may be ``math.inf`` (maximal deviation over the support).
    """

    kind: str = "discrete"
    exponent: float = 1.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric {self.kind!r}")
        if not self.exponent >= 1:
            raise ValueError("error exponent must be >= 1")

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.exponent)

    @property
    def is_discrete(self) -> bool:
        return self.kind in ("discrete", "hamming")

    def check(self, side: Side) -> None:
        kinds = {a.kind for a in side.axes}
        if self.kind in ("arc", "chordal") and kinds != {"angle"}:
            raise ValueError(f"{self.kind} metric needs angle axes, got {sorted(kinds)}")
        if self.kind == "cyclic-abs" and kinds != {"cyclic"}:
            raise ValueError("cyclic-abs metric needs cyclic axes")

    def from_differences(self, side: Side, diff: np.ndarray) -> np.ndarray:
        """Distance for coordinate differences ``diff`` of shape ``(..., n_axes)``.

        Differences are in physical coordinates.
        """
        acc = None
        for k, a in enumerate(side.axes):
            dk = np.abs(diff[..., k])
            if a.kind == "cyclic":
                r = np.mod(dk, a.modulus)
                nat = np.minimum(r, a.modulus - r)
            elif a.kind == "angle":
                if self.kind == "chordal":
                    nat = 2.0 * np.abs(np.sin(dk / 2.0))
                else:
                    r = np.mod(dk, 2 * np.pi)
                    nat = np.minimum(r, 2 * np.pi - r)
            else:
                nat = dk
            if self.kind in ("discrete", "hamming"):
                term = (nat > 1e-12).astype(float)
            elif self.kind in ("euclidean", "chordal"):
                term = nat**2
            else:
                term = nat
            if acc is None:
                acc = term
            elif self.kind == "discrete":
                acc = np.maximum(acc, term)
            else:
                acc = acc + term
        if self.kind == "hamming":
            return acc / len(side.axes)
        if self.kind in ("euclidean", "chordal"):
            return np.sqrt(acc)
        return acc

    def distance_matrix(self, side: Side) -> np.ndarray:
        return _distance_matrix(self.kind, side)

    def distance_to(self, side: Side, center) -> np.ndarray:
        """Distances from a (possibly off-grid) point to every stored point."""
        c = np.atleast_1d(np.asarray(center, dtype=float))
        return self.from_differences(side, side.values - c)

    def distance_from_zero(self, side: Side) -> np.ndarray:
        return self.distance_to(side, np.zeros(len(side.axes)))


@lru_cache(maxsize=32)
def _distance_matrix(kind: str, side: Side) -> np.ndarray:
    m = MetricSpec(kind, 1.0)
    v = side.values
    out = np.empty((side.size, side.size))
    step = max(1, 2**22 // max(1, side.size * len(side.axes)))
    for i in range(0, side.size, step):
        out[i:i + step] = m.from_differences(side, v[i:i + step, None, :] - v[None, :, :])
    out.setflags(write=False)
    return out


def parse_metric(name: str, exponent="1") -> MetricSpec:
    """Metric from CLI-style tokens, e.g. ``("chordal", "2")`` or ``("abs", "inf")``."""
    if isinstance(exponent, str):
        exponent = math.inf if exponent.strip().lower() in ("inf", "infinity") else float(exponent)
    return MetricSpec(name, float(exponent))


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability masses on the points of one side of a group model."""

    side: Side
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (self.side.size,):
            raise ValueError("probability vector does not match the side")
        if np.any(probs < -1e-12):
            raise ValueError("negative probability")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError(f"distribution not normalized (sum {probs.sum():.3g})")
        probs = np.clip(probs, 0.0, None)
        object.__setattr__(self, "probs", probs)

    @property
    def density(self) -> np.ndarray:
        """Density with respect to the Haar measure of the side."""
        return self.probs / self.side.weight

    @classmethod
    def point(cls, side: Side, label) -> "Distribution":
        p = np.zeros(side.size)
        p[side.index(label)] = 1.0
        return cls(side, p)

    @classmethod
    def uniform(cls, side: Side) -> "Distribution":
        return cls(side, np.full(side.size, 1.0 / side.size))


class Spread(NamedTuple):
    value: float
    center: object
    index: int


def _power_mean(probs, dist, alpha):
    if math.isinf(alpha):
        support = probs > SUPPORT_TOL
        return float(dist[support].max()) if support.any() else 0.0
    return float(np.dot(probs, dist**alpha)) ** (1.0 / alpha)


def deviation(mu: Distribution, x, m: MetricSpec, *, by_value: bool = False) -> float:
    """Deviation ``(Σ μ(y) d(x,y)^α)^{1/α}`` of ``μ`` from the point ``x``.

    ``x`` is a group label, or physical coordinates when ``by_value`` is set.
    """
    side = mu.side
    if by_value:
        dist = m.distance_to(side, x)
    else:
        dist = m.distance_to(side, side.values[side.index(x)])
    return _power_mean(mu.probs, dist, m.exponent)


def spread(mu: Distribution, m: MetricSpec, *, refine: bool = True) -> Spread:
    """Smallest deviation of ``μ`` from any point, with its minimizer.

    Candidate centers are all stored points; the origin wins ties. On models
    of ℝ or the circle the minimizer is refined between grid points.
    """
    side = mu.side
    m.check(side)
    alpha = m.exponent
    support = np.flatnonzero(mu.probs > (SUPPORT_TOL if math.isinf(alpha) else 0.0))
    D = m.distance_matrix(side)[:, support]
    w = mu.probs[support]
    if math.isinf(alpha):
        devs = D.max(axis=1) if support.size else np.zeros(side.size)
    else:
        devs = (D**alpha @ w) ** (1.0 / alpha)
    best = int(np.argmin(devs))
    z = side.zero_index
    if devs[z] <= devs[best] + 1e-13:
        best = z
    value = float(devs[best])
    center = side.values[best].copy()
    continuous = [k for k, a in enumerate(side.axes) if a.kind in ("real", "angle")]
    if refine and continuous and not m.is_discrete:
        center, value = _refine_center(mu, m, center, value, continuous)
    out_center = float(center[0]) if len(side.axes) == 1 else tuple(float(c) for c in center)
    return Spread(value, out_center, best)


def _refine_center(mu, m, center, value, axes, rounds=4):
    side = mu.side
    for _ in range(rounds if len(axes) > 1 else 1):
        for k in axes:
            h = side.axes[k].scale

            def f(c, k=k):
                cc = center.copy()
                cc[k] = c
                return deviation(mu, cc, m, by_value=True)

            res = minimize_scalar(
                f, bounds=(center[k] - h, center[k] + h), method="bounded",
                options={"xatol": 1e-12 * max(1.0, h)},
            )
            if res.fun < value:
                center[k], value = res.x, float(res.fun)
    return center, value


def _is_point(probs):
    nz = np.flatnonzero(probs > 0)
    return nz[0] if nz.size == 1 and abs(probs[nz[0]] - 1.0) < 1e-15 else None


_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _coupling_lp(a, b, cost):
    na, nb = cost.shape
    A_eq = np.zeros((na + nb, na * nb))
    for i in range(na):
        A_eq[i, i * nb:(i + 1) * nb] = 1.0
    for j in range(nb):
        A_eq[na + j, j::nb] = 1.0
    b_eq = np.concatenate([a, b])
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                  options=_HIGHS)
    return res


def transport_distance(nu: Distribution, mu: Distribution, m: MetricSpec) -> float:
    """Transport (Wasserstein) distance of order ``α`` between two distributions.

    Solved exactly as a linear program over couplings; ``α = ∞`` is solved as a
    bottleneck problem by bisection over distance thresholds.
    """
    if nu.side != mu.side:
        raise ValueError("distributions live on different sides")
    side = nu.side
    m.check(side)
    i0 = _is_point(nu.probs)
    if i0 is not None:
        return deviation(mu, side.label(i0), m)
    j0 = _is_point(mu.probs)
    if j0 is not None:
        return deviation(nu, side.label(j0), m)
    cut = SUPPORT_TOL if m.is_inf else 0.0
    sa = np.flatnonzero(nu.probs > cut)
    sb = np.flatnonzero(mu.probs > cut)
    a, b = nu.probs[sa], mu.probs[sb]
    a, b = a / a.sum(), b / b.sum()
    D = m.distance_matrix(side)[np.ix_(sa, sb)]
    if m.is_inf:
        return _bottleneck(a, b, D)
    res = _coupling_lp(a, b, D**m.exponent)
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return max(float(res.fun), 0.0) ** (1.0 / m.exponent)


def _bottleneck(a, b, D):
    levels = np.unique(D)
    lo, hi = 0, len(levels) - 1

    def feasible(tau):
        big = np.where(D <= tau + 1e-12, 0.0, 1.0)
        res = _coupling_lp(a, b, big)
        return res.status == 0 and res.fun < 1e-9

    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def shift_distribution(mu: Distribution, a) -> Distribution:
    """Translate ``μ`` by ``a``: mass at ``x`` moves to ``x + a``."""
    from .lca import RangeError

    target, valid = mu.side.shift_indices(a)
    lost = mu.probs[~valid].sum()
    if lost > 0:
        raise RangeError(f"shift by {a} moves mass {lost:.3g} out of range")
    out = np.zeros_like(mu.probs)
    np.add.at(out, target[valid], mu.probs[valid])
    return Distribution(mu.side, out)


def convolve_distributions(mu: Distribution, nu: Distribution) -> Distribution:
    """Group convolution ``μ∗ν`` (distribution of the sum of independent draws).

    On truncated models mass landing outside the stored range is dropped and
    the result renormalized, with a warning when that mass is not negligible.
    """
    if mu.side != nu.side:
        raise ValueError("distributions live on different sides")
    side = mu.side
    out = np.zeros(side.size)
    lost = 0.0
    for j in np.flatnonzero(nu.probs > 0):
        target, valid = side.shift_indices(side.labels[j])
        np.add.at(out, target[valid], nu.probs[j] * mu.probs[valid])
        lost += nu.probs[j] * mu.probs[~valid].sum()
    if lost > 1e-12:
        warnings.warn(f"convolution dropped mass {lost:.3g} outside the stored range")
    return Distribution(side, out / out.sum())
