"""Finite models of locally compact abelian groups and their phase spaces.

A group model has two *sides*: the position side ``X`` and the momentum side
``X̂``. Each side is a product of one-dimensional axes. Points on an axis are
integer labels; the character pairing of a position label ``x`` and a momentum
label ``p`` on the same axis is ``exp(2πi·x·p/modulus)``.

State vectors and operators are stored as coefficient arrays in the
orthonormal point basis ``|x⟩`` (Haar weights absorbed), so the Fourier
transform is a plain unitary (or isometric) matrix. Haar weights are kept as
metadata for converting probabilities to densities.

Conventions
-----------
* ``cyclic(d)``: ``X = X̂ = Z_d``; weight 1 on ``X``, ``1/d`` on ``X̂``.
* ``line(N, L)``: grid ``x = j·h`` with ``h = 2L/N``, ``j = -N/2 .. N/2-1``;
  momenta ``p = k·π/L``; weights ``h`` and ``1/(2L)``.
* ``zint(N, M)``: integers ``-N..N`` (weight 1) with dual circle grid of ``M``
  angles (weight ``1/M``). ``M >= 2N+1``; for ``M > 2N+1`` the Fourier map is
  an isometry rather than a unitary.
* ``circle(M)``: angles ``2πk/M`` (weight ``1/M``) with dual integers
  (weight 1).

The product of the two weights times the number of points is 1, so every
phase-space point carries measure ``1/|X|``.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Axis",
    "Side",
    "GroupSpec",
    "RangeError",
    "cyclic",
    "line",
    "zint",
    "circle",
    "bits",
    "product",
    "parse_group",
    "character",
    "fourier",
    "fourier_inverse",
    "weyl",
    "weyl_matrix",
    "parity",
    "parity_matrix",
    "translate_operator",
]


class RangeError(ValueError):
    """Group addition left the stored range of a truncated model."""


PERIODIC_KINDS = ("cyclic", "angle")


@dataclass(frozen=True)
class Axis:
    """One factor of one side of a group model.

    ``kind`` is ``"cyclic"`` (labels mod ``modulus``), ``"angle"`` (grid on the
    circle), ``"integer"`` (truncated ℤ) or ``"real"`` (truncated grid on ℝ).
    Physical coordinate of a label is ``label * scale``.
    """

    kind: str
    lo: int
    count: int
    modulus: int
    scale: float
    weight: float

    @property
    def periodic(self) -> bool:
        return self.kind in PERIODIC_KINDS

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + self.count)

    @property
    def values(self) -> np.ndarray:
        return self.labels * self.scale

    def wrap(self, labels):
        """Map labels into the stored range; returns (labels, in_range)."""
        labels = np.asarray(labels)
        if self.periodic:
            return (labels - self.lo) % self.modulus + self.lo, np.ones(labels.shape, bool)
        ok = (labels >= self.lo) & (labels < self.lo + self.count)
        return labels, ok


class Side:
    """Position or momentum side of a group model: a product of axes."""

    def __init__(self, axes):
        self.axes = tuple(axes)
        self.shape = tuple(a.count for a in self.axes)
        self.size = int(np.prod(self.shape))
        self.weight = float(np.prod([a.weight for a in self.axes]))

    def __repr__(self):
        kinds = ",".join(f"{a.kind}[{a.count}]" for a in self.axes)
        return f"Side({kinds})"

    def __eq__(self, other):
        return isinstance(other, Side) and self.axes == other.axes

    def __hash__(self):
        return hash(self.axes)

    @cached_property
    def labels(self) -> np.ndarray:
        """Integer labels, shape ``(size, n_axes)`` in C order."""
        grids = np.meshgrid(*[a.labels for a in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @cached_property
    def values(self) -> np.ndarray:
        """Physical coordinates, shape ``(size, n_axes)``."""
        scales = np.array([a.scale for a in self.axes])
        return self.labels * scales

    @property
    def zero_index(self) -> int:
        return self.index(0 if len(self.axes) == 1 else (0,) * len(self.axes))

    def _as_label_array(self, label) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(label, dtype=int))
        if arr.shape != (len(self.axes),):
            raise ValueError(f"label {label!r} does not match {len(self.axes)} axes")
        return arr

    def index(self, label) -> int:
        """Flat index of a group element given by its label(s)."""
        arr = self._as_label_array(label)
        idx = 0
        for a, lab in zip(self.axes, arr):
            w, ok = a.wrap(lab)
            if not ok:
                raise RangeError(f"label {int(lab)} outside {a.kind} axis range")
            idx = idx * a.count + int(w - a.lo)
        return idx

    def label(self, index: int):
        lab = self.labels[index]
        return int(lab[0]) if len(self.axes) == 1 else tuple(int(v) for v in lab)

    def _flat(self, labels: np.ndarray) -> np.ndarray:
        idx = np.zeros(labels.shape[0], dtype=int)
        for k, a in enumerate(self.axes):
            idx = idx * a.count + (labels[:, k] - a.lo)
        return idx

    def shift_indices(self, shift):
        """Indices of ``x + shift`` for every stored ``x``.

        Returns ``(target, valid)``; ``target`` is -1 where the sum leaves a
        truncated axis.
        """
        s = self._as_label_array(shift)
        labels = self.labels + s
        valid = np.ones(self.size, bool)
        for k, a in enumerate(self.axes):
            labels[:, k], ok = a.wrap(labels[:, k])
            valid &= ok
        target = np.full(self.size, -1)
        target[valid] = self._flat(labels[valid])
        return target, valid

    def neg_indices(self):
        """Indices of ``-x`` for every stored ``x`` (``-1`` where undefined)."""
        labels = -self.labels
        valid = np.ones(self.size, bool)
        for k, a in enumerate(self.axes):
            labels[:, k], ok = a.wrap(labels[:, k])
            valid &= ok
        target = np.full(self.size, -1)
        target[valid] = self._flat(labels[valid])
        return target, valid

    def add_table(self):
        """Table ``T[i, j] = index(x_i + x_j)`` (``-1`` if out of range)."""
        table = np.empty((self.size, self.size), dtype=int)
        for j in range(self.size):
            table[:, j], _ = self.shift_indices(self.labels[j])
        return table


class GroupSpec:
    """Finite model of an LCA group ``X`` together with its dual ``X̂``."""

    def __init__(self, position: Side, momentum: Side, name: str = "group"):
        if len(position.axes) != len(momentum.axes):
            raise ValueError("position and momentum sides need matching axes")
        for a, b in zip(position.axes, momentum.axes):
            if a.modulus != b.modulus:
                raise ValueError("paired axes must share a modulus")
        self.position = position
        self.momentum = momentum
        self.name = name

    def __repr__(self):
        return f"GroupSpec({self.name})"

    def __eq__(self, other):
        return (
            isinstance(other, GroupSpec)
            and self.position == other.position
            and self.momentum == other.momentum
        )

    def __hash__(self):
        return hash((self.position, self.momentum))

    @property
    def dim(self) -> int:
        """Hilbert space dimension (number of position points)."""
        return self.position.size

    @property
    def is_square(self) -> bool:
        return self.position.size == self.momentum.size

    @property
    def phase_space_weight(self) -> float:
        """Haar measure of a single phase-space point (``dq·dp``)."""
        return self.position.weight * self.momentum.weight

    def dual(self) -> "GroupSpec":
        return GroupSpec(self.momentum, self.position, name=f"dual({self.name})")

    @cached_property
    def fourier_matrix(self) -> np.ndarray:
        """Matrix of the Fourier transform in orthonormal point bases.

        Shape ``(|X̂|, |X|)``; unitary for square models.
        """
        mats = []
        for a, b in zip(self.position.axes, self.momentum.axes):
            phase = np.outer(b.labels, a.labels) % a.modulus
            mats.append(np.exp(-2j * np.pi * phase / a.modulus) / np.sqrt(a.modulus))
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        if np.allclose(out.imag, 0.0, atol=1e-15):
            # Hadamard-type transforms (e.g. qubit strings) stay real.
            out = np.ascontiguousarray(out.real)
        return out

    @cached_property
    def character_table(self) -> np.ndarray:
        """``C[k, j] = ⟨p_k | x_j⟩``."""
        scale = np.sqrt(float(np.prod([a.modulus for a in self.position.axes])))
        return np.conj(self.fourier_matrix) * scale


def _pair(name, x_axis, p_axis):
    return GroupSpec(Side([x_axis]), Side([p_axis]), name=name)


def cyclic(d: int) -> GroupSpec:
    """The cyclic group ``Z_d`` with counting measure."""
    d = int(d)
    if d < 1:
        raise ValueError("cyclic group needs d >= 1")
    return _pair(
        f"cyclic:{d}",
        Axis("cyclic", 0, d, d, 1.0, 1.0),
        Axis("cyclic", 0, d, d, 1.0, 1.0 / d),
    )


def line(N: int, L: float) -> GroupSpec:
    """Discretized real line: ``N`` grid points on ``[-L, L)``."""
    N = int(N)
    if N < 2 or N % 2:
        raise ValueError("line model needs an even number of points")
    if L <= 0:
        raise ValueError("line half-width must be positive")
    h = 2.0 * L / N
    lo = -N // 2
    return _pair(
        f"zline:{N},{L:g}",
        Axis("real", lo, N, N, h, h),
        Axis("real", lo, N, N, np.pi / L, 1.0 / (2.0 * L)),
    )


def zint(N: int, M: int | None = None) -> GroupSpec:
    """Integers ``-N..N`` with a dual grid of ``M`` angles on the circle."""
    N = int(N)
    M = 2 * N + 1 if M is None else int(M)
    if N < 0 or M < 2 * N + 1:
        raise ValueError("zint needs N >= 0 and M >= 2N+1")
    return _pair(
        f"zint:{N},{M}",
        Axis("integer", -N, 2 * N + 1, M, 1.0, 1.0),
        Axis("angle", 0, M, M, 2 * np.pi / M, 1.0 / M),
    )


def circle(M: int) -> GroupSpec:
    """Grid of ``M`` angles on the circle with dual truncated integers."""
    M = int(M)
    if M < 1:
        raise ValueError("circle model needs M >= 1")
    return _pair(
        f"circle:{M}",
        Axis("angle", 0, M, M, 2 * np.pi / M, 1.0 / M),
        Axis("integer", -(M // 2), M, M, 1.0, 1.0),
    )


def product(*groups: GroupSpec) -> GroupSpec:
    if not groups:
        raise ValueError("empty product")
    xs = [a for g in groups for a in g.position.axes]
    ps = [a for g in groups for a in g.momentum.axes]
    name = "product:[" + ",".join(g.name for g in groups) + "]"
    return GroupSpec(Side(xs), Side(ps), name=name)


def bits(n: int) -> GroupSpec:
    """Strings of ``n`` bits, the product of ``n`` copies of ``Z_2``."""
    if n < 1:
        raise ValueError("bits needs n >= 1")
    g = product(*[cyclic(2)] * int(n))
    g.name = f"bits:{int(n)}"
    return g


def _split_top(s: str):
    parts, depth, cur = [], 0, ""
    for ch in s:
        if ch in "[{(":
            depth += 1
        elif ch in "]})":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur.strip())
    return parts


def _parse_args(arg: str, names):
    arg = arg.strip()
    if arg.startswith("{"):
        body = arg[1:-1]
        out = {}
        for item in _split_top(body):
            key, _, val = re.split(r"\s*([:=])\s*", item, maxsplit=1)
            out[key.strip().strip('"').strip("'")] = json.loads(val)
        return out
    vals = [json.loads(v) for v in _split_top(arg)] if arg else []
    return dict(zip(names, vals))


def parse_group(spec: str) -> GroupSpec:
    """Build a group from a config string.

    Accepted forms: ``cyclic:d``, ``bits:n`` or ``bits:{n}``, ``zint:{N}`` or
    ``zint:{N,M}``, ``circle:{M}``, ``zline:{N,L}`` (also ``zline:{N=512,L=12}``)
    and ``product:[g1, g2, ...]``.
    """
    if not isinstance(spec, str) or ":" not in spec:
        raise ValueError(f"malformed group spec {spec!r}")
    kind, _, arg = spec.strip().partition(":")
    kind = kind.strip()
    try:
        if kind == "product":
            arg = arg.strip()
            if not (arg.startswith("[") and arg.endswith("]")):
                raise ValueError("product needs [...]")
            items = [s.strip().strip('"').strip("'") for s in _split_top(arg[1:-1])]
            return product(*[parse_group(s) for s in items])
        if kind == "cyclic":
            kw = _parse_args(arg, ["d"])
            return cyclic(kw["d"])
        if kind == "bits":
            kw = _parse_args(arg, ["n"])
            return bits(kw["n"])
        if kind == "zint":
            kw = _parse_args(arg, ["N", "M"])
            return zint(kw["N"], kw.get("M"))
        if kind == "circle":
            kw = _parse_args(arg, ["M"])
            return circle(kw["M"])
        if kind in ("zline", "line"):
            kw = _parse_args(arg, ["N", "L"])
            return line(kw["N"], kw["L"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed group spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# characters, Fourier transform, Weyl operators


def character(g: GroupSpec, p, x) -> complex:
    """The pairing ``⟨p|x⟩`` of a momentum label and a position label."""
    pi = g.momentum._as_label_array(p)
    xi = g.position._as_label_array(x)
    # out-of-range labels on truncated axes are an error
    g.momentum.index(pi)
    g.position.index(xi)
    phase = 0.0
    for a, pv, xv in zip(g.position.axes, pi, xi):
        phase += (int(pv) * int(xv) % a.modulus) / a.modulus
    return complex(np.exp(2j * np.pi * phase))


def fourier(g: GroupSpec, psi) -> np.ndarray:
    return g.fourier_matrix @ np.asarray(psi)


def fourier_inverse(g: GroupSpec, phi) -> np.ndarray:
    return np.conj(g.fourier_matrix).T @ np.asarray(phi)


def weyl(g: GroupSpec, xi, psi, tail_tol: float = 1e-12) -> np.ndarray:
    """Apply ``(W(q,p)ψ)(x) = ⟨p|x⟩ ψ(x+q)``.

    On truncated axes amplitude that would be shifted in from outside the
    stored range is lost; more than ``tail_tol`` of lost squared norm raises
    :class:`RangeError`.
    """
    q, p = xi
    psi = np.asarray(psi)
    target, valid = g.position.shift_indices(q)
    out = np.zeros(psi.shape, dtype=complex)
    out[valid] = psi[target[valid]]
    if not np.all(valid):
        # mass of psi that never gets read is pushed out of range
        lost_idx = np.setdiff1d(np.arange(g.dim), target[valid])
        lost = float(np.sum(np.abs(psi[lost_idx]) ** 2))
        if lost > tail_tol:
            raise RangeError(f"Weyl shift by {q} leaves the stored range (lost norm² {lost:.3g})")
    chars = g.character_table[g.momentum.index(p)]
    return chars * out


def weyl_matrix(g: GroupSpec, xi) -> np.ndarray:
    """Dense matrix of ``W(q,p)``; truncated axes only allow ``q = 0``."""
    q, p = xi
    target, valid = g.position.shift_indices(q)
    if not np.all(valid):
        raise RangeError(f"Weyl shift by {q} leaves the stored range")
    n = g.dim
    W = np.zeros((n, n), dtype=complex)
    W[np.arange(n), target] = g.character_table[g.momentum.index(p)]
    return W


def parity(g: GroupSpec, psi) -> np.ndarray:
    return parity_matrix(g) @ np.asarray(psi)


def parity_matrix(g: GroupSpec) -> np.ndarray:
    target, valid = g.position.neg_indices()
    if not np.all(valid):
        raise RangeError("parity is undefined on an asymmetric truncated range")
    n = g.dim
    P = np.zeros((n, n))
    P[np.arange(n), target] = 1.0
    return P


def translate_operator(g: GroupSpec, xi, A) -> np.ndarray:
    """Phase-space translate ``α_ξ(A) = W(ξ)* A W(ξ)``."""
    W = weyl_matrix(g, xi)
    return np.conj(W).T @ np.asarray(A) @ W


def phase_points(g: GroupSpec):
    """Iterate over ``(q_label, p_label)`` for every phase-space point."""
    for i, j in itertools.product(range(g.position.size), range(g.momentum.size)):
        yield g.position.label(i), g.momentum.label(j)
