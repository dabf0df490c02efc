"""Exact operator algebra over finite sums of coherent-state dyads.

An operator is stored as ``sum_i w_i |alpha_i><beta_i|`` where every
``alpha_i``/``beta_i`` is a tuple of complex amplitudes, one per mode.
Products, adjoints and traces only need the coherent overlap, so all
results are exact up to floating point rounding.

Conventions: ``a = (q + i p)/sqrt(2)``, ``hbar = 1`` and
``|z> = D(z)|0>`` with ``D(z) = exp(z a^+ - z^* a)``.
"""

from __future__ import annotations

import numpy as np

MERGE_ATOL = 1e-12


def _as_points(points, modes=None):
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if pts.ndim == 1:
        pts = pts[:, None] if modes in (None, 1) else pts.reshape(-1, modes)
    if not np.all(np.isfinite(pts)):
        raise ValueError("coherent amplitudes must be finite")
    return pts


def overlap_array(alpha, beta):
    """Vectorised ``<alpha|beta>``; the last axis indexes modes."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    expo = -0.5 * np.abs(alpha) ** 2 - 0.5 * np.abs(beta) ** 2 + np.conj(alpha) * beta
    return np.exp(np.sum(expo, axis=-1))


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Return ``<alpha|beta> = exp(-|a|^2/2 - |b|^2/2 + a^* b)``."""
    return complex(overlap_array(np.atleast_1d(alpha), np.atleast_1d(beta)))


def coherent_weyl_expectation(z: complex, k: float, mu: float, nu: float) -> complex:
    """``<z| exp(-i k (mu q + nu p)) |z>`` for the displacement ``a = k(nu - i mu)/sqrt(2)``."""
    a = k * (nu - 1j * mu) / np.sqrt(2.0)
    return complex(np.exp(np.conj(z) * a - np.conj(a) * z - 0.5 * abs(a) ** 2))


class CoherentSpan:
    """Immutable finite sum of weighted coherent dyads on one or more modes."""

    __slots__ = ("weights", "left", "right")
    __array_ufunc__ = None

    def __init__(self, weights, left, right, modes=None):
        w = np.atleast_1d(np.asarray(weights, dtype=complex)).copy()
        left = _as_points(left, modes).copy()
        right = _as_points(right, modes).copy()
        if w.ndim != 1 or left.shape != right.shape or left.shape[0] != w.shape[0]:
            raise ValueError("weights, left and right must describe the same dyads")
        if not np.all(np.isfinite(w)):
            raise ValueError("dyad weights must be finite")
        for arr in (w, left, right):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __setattr__(self, name, value):
        raise AttributeError("CoherentSpan is immutable")

    # constructors

    @classmethod
    def zero(cls, modes=1):
        empty = np.zeros((0, modes), dtype=complex)
        return cls(np.zeros(0), empty, empty)

    @classmethod
    def dyad(cls, weight, alpha, beta):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        beta = np.atleast_1d(np.asarray(beta, dtype=complex))
        return cls([weight], alpha[None, :], beta[None, :])

    @classmethod
    def projector(cls, alpha):
        """``|alpha><alpha|``; ``alpha`` may be a tuple for several modes."""
        return cls.dyad(1.0, alpha, alpha)

    @classmethod
    def mixture(cls, probs, points):
        """Convex mixture ``sum_i p_i |z_i><z_i|`` of coherent projectors."""
        pts = _as_points(points)
        return cls(probs, pts, pts)

    # structure

    @property
    def modes(self) -> int:
        return self.left.shape[1]

    def __len__(self):
        return self.weights.shape[0]

    def __iter__(self):
        for w, a, b in zip(self.weights, self.left, self.right):
            yield complex(w), tuple(a), tuple(b)

    def __repr__(self):
        return f"CoherentSpan({len(self)} dyads, modes={self.modes})"

    def is_diagonal(self, atol=MERGE_ATOL) -> bool:
        return bool(np.all(np.abs(self.left - self.right) <= atol))

    def radius(self) -> float:
        """Largest single-mode coherent amplitude appearing in any dyad."""
        if len(self) == 0:
            return 0.0
        return float(max(np.abs(self.left).max(), np.abs(self.right).max()))

    # algebra

    def __add__(self, other):
        if not isinstance(other, CoherentSpan):
            return NotImplemented
        if len(self) and len(other) and self.modes != other.modes:
            raise ValueError("mode count mismatch")
        modes = self.modes if len(self) else other.modes
        return CoherentSpan(
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.left.reshape(-1, modes), other.left.reshape(-1, modes)]),
            np.concatenate([self.right.reshape(-1, modes), other.right.reshape(-1, modes)]),
        ).merged()

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if isinstance(scalar, CoherentSpan):
            return NotImplemented
        return CoherentSpan(self.weights * complex(scalar), self.left, self.right)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return span_multiply(self, other)

    def adjoint(self):
        return span_adjoint(self)

    def trace(self) -> complex:
        return span_trace(self)

    def tensor(self, other):
        """Tensor product, concatenating the mode axes."""
        i, j = np.meshgrid(np.arange(len(self)), np.arange(len(other)), indexing="ij")
        i, j = i.ravel(), j.ravel()
        return CoherentSpan(
            self.weights[i] * other.weights[j],
            np.concatenate([self.left[i], other.left[j]], axis=1),
            np.concatenate([self.right[i], other.right[j]], axis=1),
        ).merged()

    def merged(self, atol=MERGE_ATOL):
        """Merge dyads whose endpoints coincide within ``atol``; drop exact zeros.

        Dyads come out in lexicographic order of their endpoints.
        """
        modes = self.modes
        if len(self) == 0:
            return CoherentSpan.zero(modes)
        keys = np.concatenate([self.left, self.right], axis=1)
        # exact duplicates first (products copy endpoints verbatim), then tolerance groups
        keys, inverse = np.unique(keys, axis=0, return_inverse=True)
        w = np.zeros(keys.shape[0], dtype=complex)
        np.add.at(w, inverse.ravel(), self.weights)
        assigned = np.zeros(keys.shape[0], dtype=bool)
        out_keys, out_w = [], []
        for i in range(keys.shape[0]):
            if assigned[i]:
                continue
            close = ~assigned & np.all(np.abs(keys - keys[i]) <= atol, axis=1)
            assigned |= close
            out_keys.append(keys[i])
            out_w.append(w[close].sum())
        keys = np.array(out_keys).reshape(-1, 2 * modes)
        w = np.array(out_w, dtype=complex)
        keep = w != 0
        return CoherentSpan(w[keep], keys[keep, :modes], keys[keep, modes:])

    def to_dict(self):
        return {
            "dyads": [
                {
                    "w": [w.real, w.imag],
                    "left": [[z.real, z.imag] for z in a],
                    "right": [[z.real, z.imag] for z in b],
                }
                for w, a, b in self
            ]
        }


def span_multiply(a: CoherentSpan, b: CoherentSpan) -> CoherentSpan:
    """Operator product; ``(w1|a><b|)(w2|c><d|) = w1 w2 <b|c> |a><d|``."""
    if len(a) == 0 or len(b) == 0:
        return CoherentSpan.zero(a.modes if len(a) else b.modes)
    if a.modes != b.modes:
        raise ValueError("mode count mismatch")
    ov = overlap_array(a.right[:, None, :], b.left[None, :, :])
    w = a.weights[:, None] * b.weights[None, :] * ov
    n, m = w.shape
    left = np.repeat(a.left, m, axis=0)
    right = np.tile(b.right, (n, 1))
    return CoherentSpan(w.ravel(), left, right).merged()


def span_trace(a: CoherentSpan) -> complex:
    """``sum_i w_i <beta_i|alpha_i>``."""
    if len(a) == 0:
        return 0j
    return complex(np.sum(a.weights * overlap_array(a.right, a.left)))


def span_adjoint(a: CoherentSpan) -> CoherentSpan:
    return CoherentSpan(np.conj(a.weights), a.right, a.left)


def span_allclose(a: CoherentSpan, b: CoherentSpan, atol=1e-12, rtol=0.0) -> bool:
    """Dyad-wise comparison after merging; missing dyads count as zero weight."""
    diff = (a - b).merged()
    scale = max(np.abs(a.weights).max(initial=0.0), np.abs(b.weights).max(initial=0.0))
    return bool(np.all(np.abs(diff.weights) <= atol + rtol * scale))


class CoherentKet:
    """Finite superposition ``sum_i c_i |z_i>`` of coherent states."""

    __array_ufunc__ = None

    def __init__(self, coeffs, points, modes=None):
        self.coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        self.points = _as_points(points, modes)
        if self.coeffs.shape[0] != self.points.shape[0]:
            raise ValueError("one coefficient per coherent point")

    @classmethod
    def coherent(cls, alpha):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        return cls([1.0], alpha[None, :])

    @property
    def modes(self):
        return self.points.shape[1]

    def inner(self, other) -> complex:
        """``<self|other>``."""
        ov = overlap_array(self.points[:, None, :], other.points[None, :, :])
        return complex(np.conj(self.coeffs) @ ov @ other.coeffs)

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def normalized(self):
        return CoherentKet(self.coeffs / self.norm(), self.points)

    def __add__(self, other):
        pts, coeffs = [], []
        for c, p in zip(np.concatenate([self.coeffs, other.coeffs]),
                        np.concatenate([self.points, other.points])):
            for i, q in enumerate(pts):
                if np.all(np.abs(q - p) <= MERGE_ATOL):
                    coeffs[i] += c
                    break
            else:
                pts.append(p)
                coeffs.append(c)
        return CoherentKet(coeffs, np.array(pts).reshape(-1, self.modes))

    def __mul__(self, scalar):
        return CoherentKet(self.coeffs * complex(scalar), self.points)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other

    def outer(self, other) -> CoherentSpan:
        """``|self><other|`` as a dyad span."""
        w = self.coeffs[:, None] * np.conj(other.coeffs)[None, :]
        n, m = w.shape
        return CoherentSpan(
            w.ravel(), np.repeat(self.points, m, axis=0), np.tile(other.points, (n, 1))
        ).merged()

    def projector(self) -> CoherentSpan:
        return self.outer(self)


def cat_ket(alpha: complex, phase: float = 0.0) -> CoherentKet:
    """Normalised ``|alpha> + e^{i phase}|-alpha>``."""
    ket = CoherentKet([1.0, np.exp(1j * phase)], [alpha, -alpha])
    return ket.normalized()


def gram_schmidt(kets):
    """Orthonormalise a list of :class:`CoherentKet` in order.

    Each vector is projected twice; coherent Gram matrices are badly
    conditioned and a single pass leaves overlaps near 1e-8.
    """
    out = []
    for ket in kets:
        v = ket
        for _ in range(2):
            for u in out:
                v = v - u.inner(v) * u
        out.append(v.normalized())
    return out
