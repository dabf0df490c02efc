"""Diagonal (P) weight functions and their maps.

A :class:`PhaseWeight` is ``phi(z) = sum_i w_i delta^2(z - z_i) +
sum_j g_j exp(-|z - c_j|^2 / v_j) / (pi v_j)`` with measure ``dRe z dIm z``,
so ``rho = int phi(z) |z><z| d^2z`` has trace ``sum w + sum g``.

The dequantizer and the inverse maps (Q -> P, tomogram -> P) are
generalized functions; they are evaluated only on this closed class.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .coherent import CoherentSpan, overlap_array
from .errors import OutOfClassError
from .fock import (DEFAULT_POLICY, FockOperator, TruncationPolicy, coherent_vector,
                   displacement_matrix, fock_dim, span_to_fock, thermal_dim, thermal_operator,
                   validate_density)
from .tomography import GaussianTomogram, as_ray

WIDTH_EPS = 1e-9
SUM_TOL = 1e-10


class PhaseWeight:
    """Atoms plus isotropic Gaussians; ``var`` is ``E|z - c|^2`` of a component."""

    def __init__(self, atoms=(), gaussians=(), classical=True, modes=None):
        atoms = list(atoms)
        gaussians = list(gaussians)
        if modes is None:
            modes = len(np.atleast_1d(atoms[0][1])) if atoms else 1
        self.atom_weights = np.array([float(w) for w, _ in atoms])
        self.atom_locs = np.array([np.atleast_1d(np.asarray(z, dtype=complex)) for _, z in atoms],
                                  dtype=complex).reshape(-1, modes)
        self.gauss_weights = np.array([float(g[0]) for g in gaussians])
        self.gauss_centers = np.array([complex(g[1]) for g in gaussians], dtype=complex)
        self.gauss_vars = np.array([float(g[2]) for g in gaussians])
        self.classical = classical
        if gaussians and modes != 1:
            raise ValueError("Gaussian components are single-mode only")
        if np.any(self.gauss_vars <= 0):
            raise ValueError("Gaussian variances must be positive")
        if classical and (np.any(self.atom_weights < 0) or np.any(self.gauss_weights < 0)):
            raise ValueError("negative weights need classical=False")
        for arr in (self.atom_weights, self.gauss_weights, self.gauss_vars):
            if not np.all(np.isfinite(arr)):
                raise ValueError("weights and variances must be finite")
        if not np.all(np.isfinite(self.atom_locs)) or not np.all(np.isfinite(self.gauss_centers)):
            raise ValueError("locations must be finite")

    @classmethod
    def atom(cls, z, weight=1.0):
        return cls(atoms=[(weight, z)])

    @classmethod
    def vacuum(cls):
        return cls.atom(0.0)

    @classmethod
    def thermal(cls, nbar, center=0.0):
        if nbar == 0:
            return cls.atom(center)
        return cls(gaussians=[(1.0, center, nbar)])

    @property
    def modes(self) -> int:
        return self.atom_locs.shape[1]

    @property
    def atoms(self):
        return [(float(w), tuple(z) if self.modes > 1 else complex(z[0]))
                for w, z in zip(self.atom_weights, self.atom_locs)]

    @property
    def gaussians(self):
        return [(float(w), complex(c), float(v))
                for w, c, v in zip(self.gauss_weights, self.gauss_centers, self.gauss_vars)]

    def is_atomic(self) -> bool:
        return self.gauss_weights.size == 0

    def total_weight(self) -> float:
        return float(self.atom_weights.sum() + self.gauss_weights.sum())

    def check_density_mode(self, tol=SUM_TOL):
        total = self.total_weight()
        if abs(total - 1) > tol:
            raise ValueError(f"weights sum to {total:.12g}, not 1")
        return self

    def __repr__(self):
        return f"PhaseWeight(atoms={self.atoms}, gaussians={self.gaussians})"

    def to_dict(self):
        atoms = []
        for w, z in zip(self.atom_weights, self.atom_locs):
            entry = {"w": float(w), "x": float(z[0].real), "y": float(z[0].imag)}
            if self.modes == 2:
                entry.update(x2=float(z[1].real), y2=float(z[1].imag))
            atoms.append(entry)
        return {
            "atoms": atoms,
            "gaussians": [{"w": w, "x": c.real, "y": c.imag, "var": v} for w, c, v in self.gaussians],
        }

    @classmethod
    def from_dict(cls, data, classical=True):
        atoms = []
        for a in data.get("atoms", []):
            z = complex(a["x"], a["y"])
            if "x2" in a:
                z = (z, complex(a["x2"], a["y2"]))
            atoms.append((a["w"], z))
        gaussians = [(g["w"], complex(g["x"], g["y"]), g["var"]) for g in data.get("gaussians", [])]
        return cls(atoms, gaussians, classical=classical)


# ---------------------------------------------------------------- to operators


def weight_to_span(phi: PhaseWeight) -> CoherentSpan:
    """Exact operator of an atoms-only weight."""
    if not phi.is_atomic():
        raise OutOfClassError("Gaussian components have no finite dyad form",
                              rule="span form requires atoms only")
    return CoherentSpan(phi.atom_weights, phi.atom_locs, phi.atom_locs)


def _gaussian_reach(center, var, policy):
    # radius holding all but target_tail of the component's mass
    return abs(center) + np.sqrt(var * np.log(1 / policy.target_tail))


def weight_dim(phi: PhaseWeight, policy: TruncationPolicy = DEFAULT_POLICY) -> int:
    radius = float(np.abs(phi.atom_locs).max(initial=0.0))
    for _, c, v in phi.gaussians:
        radius = max(radius, _gaussian_reach(c, v, policy))
    return fock_dim(radius, policy)


def displaced_thermal(center, nbar, dim, policy: TruncationPolicy = DEFAULT_POLICY) -> FockOperator:
    """``D(c) rho_th(nbar) D(c)^+`` cropped to ``dim`` (computed in a larger basis)."""
    big = dim + thermal_dim(nbar, policy)
    d = displacement_matrix(center, big).mat
    mat = d @ thermal_operator(nbar, big).mat @ d.conj().T
    return FockOperator(mat[:dim, :dim])


def weight_to_operator(phi: PhaseWeight, policy: TruncationPolicy = DEFAULT_POLICY,
                       dim=None, validate=True) -> FockOperator:
    """``rho = int phi(z) |z><z| d^2z`` in the truncated number basis."""
    if phi.modes != 1:
        raise ValueError("single-mode weight expected; see bipartite for two modes")
    dim = weight_dim(phi, policy) if dim is None else dim
    mat = np.zeros((dim, dim), dtype=complex)
    if phi.atom_weights.size:
        atoms = CoherentSpan.mixture(phi.atom_weights, phi.atom_locs)
        mat += span_to_fock(atoms, policy, dim=dim).mat
    for w, c, v in phi.gaussians:
        mat += w * displaced_thermal(c, v, dim, policy).mat
    rho = FockOperator(mat)
    if validate:
        validate_density(rho)
    return rho


def weight_tomogram(phi: PhaseWeight) -> GaussianTomogram:
    """Closed-form tomogram: atoms give variance ``s/2``, Gaussians ``s(1/2 + var)``."""
    if phi.modes != 1:
        raise ValueError("single-mode weight expected")
    locs = np.concatenate([phi.atom_locs[:, 0], phi.gauss_centers])
    weights = np.concatenate([phi.atom_weights, phi.gauss_weights])
    scale = np.concatenate([np.full(phi.atom_weights.size, 0.5), 0.5 + phi.gauss_vars])
    return GaussianTomogram(weights, np.sqrt(2) * locs.real, np.sqrt(2) * locs.imag, scale,
                            hermitian=True)


def weight_to_tomogram(phi: PhaseWeight, ray, X):
    """``w(X, mu, nu) = int phi(z) <z|delta(X - mu q - nu p)|z> d^2z``."""
    return weight_tomogram(phi).values(as_ray(ray), np.asarray(X, dtype=float))


def tomogram_to_weight_gaussian(w: GaussianTomogram, eps=WIDTH_EPS) -> PhaseWeight:
    """Invert the Gaussian-mixture tomogram map component by component.

    A component of variance scale ``t`` and mean ``a mu + b nu`` maps to the
    weight centred at ``(a + ib)/sqrt(2)`` with variance ``t - 1/2``; at the
    vacuum width (``t = 1/2``) it is an atom.
    """
    if not isinstance(w, GaussianTomogram) or not w.is_real_mixture():
        raise OutOfClassError("tomogram is not a real Gaussian mixture",
                              rule="tomogram -> P requires a tagged real Gaussian mixture")
    atoms, gaussians = [], []
    for c, a, b, t in zip(w.weights.real, w.mean_mu.real, w.mean_nu.real, w.var_scale):
        z = complex(a, b) / np.sqrt(2)
        excess = t - 0.5
        if abs(excess) <= eps * 0.5:
            atoms.append((c, z))
        elif excess < 0:
            raise OutOfClassError(
                f"component narrower than vacuum (variance scale {t:.6g} < 1/2)",
                rule="tomogram -> P diverges below vacuum width",
            )
        else:
            gaussians.append((c, z, excess))
    return PhaseWeight(atoms, gaussians, classical=bool(np.all(w.weights.real >= 0)))


def dequantize_span(span: CoherentSpan, allow_negative=False, atol=1e-12) -> PhaseWeight:
    """Weight of a diagonal-dyad mixture: one atom per ``|z><z|``."""
    if not span.is_diagonal(atol):
        raise OutOfClassError("span has off-diagonal dyads",
                              rule="dequantizer realised on diagonal dyad mixtures only")
    if np.any(np.abs(span.weights.imag) > atol):
        raise OutOfClassError("complex dyad weights", rule="diagonal weights must be real")
    weights = span.weights.real
    if np.any(weights < 0) and not allow_negative:
        raise OutOfClassError("negative dyad weights",
                              rule="dequantizer input must be a nonnegative mixture")
    locs = span.left if span.modes > 1 else span.left[:, 0]
    atoms = [(w, tuple(z) if span.modes > 1 else complex(z)) for w, z in zip(weights, locs)]
    return PhaseWeight(atoms, classical=bool(np.all(weights >= 0)), modes=span.modes)


# ---------------------------------------------------------------- Husimi


class HusimiFunction:
    """``Q(z) = <z|rho|z>``; optionally tagged as a Gaussian mixture.

    Tagged form: ``Q(z) = sum_j w_j exp(-|z - c_j|^2 / t_j) / t_j`` where
    ``t_j = 1`` is the vacuum width.
    """

    def __init__(self, evaluate=None, weights=None, centers=None, widths=None):
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        self.centers = None if centers is None else np.asarray(centers, dtype=complex)
        self.widths = None if widths is None else np.asarray(widths, dtype=float)
        if evaluate is None and self.weights is None:
            raise ValueError("need an evaluator or Gaussian components")
        self._evaluate = evaluate

    @classmethod
    def gaussian(cls, weights, centers, widths):
        return cls(weights=weights, centers=centers, widths=widths)

    @property
    def is_gaussian(self) -> bool:
        return self.weights is not None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_gaussian:
            d = np.abs(z[..., None] - self.centers) ** 2
            return np.sum(self.weights * np.exp(-d / self.widths) / self.widths, axis=-1)
        return self._evaluate(z)

    def grid_csv(self, extent=5.0, steps=101) -> str:
        axis = np.linspace(-extent, extent, steps)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        q = self(xx + 1j * yy)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "Q"])
        for x, y, v in zip(xx.ravel(), yy.ravel(), q.ravel()):
            writer.writerow([f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])
        return buf.getvalue()


def husimi(state, z):
    """``<z|rho|z>`` for a Fock operator, dyad span or weight (vectorised in ``z``)."""
    z = np.asarray(z, dtype=complex)
    if isinstance(state, PhaseWeight):
        return p_to_q(state, z)
    if isinstance(state, CoherentSpan):
        zz = z[..., None, None]
        left = overlap_array(zz, state.left)
        right = overlap_array(state.right, zz)
        return np.real(np.sum(state.weights * left * right, axis=-1))
    if isinstance(state, FockOperator):
        flat = z.ravel()
        vecs = np.array([coherent_vector(complex(v), state.dim).amps for v in flat])
        vals = np.real(np.einsum("km,mn,kn->k", vecs.conj(), state.mat, vecs))
        return vals.reshape(z.shape) if z.ndim else float(vals[0])
    raise TypeError(f"unsupported state {type(state).__name__}")


def husimi_function(state) -> HusimiFunction:
    if isinstance(state, PhaseWeight):
        return husimi_of_weight(state)
    return HusimiFunction(lambda z: husimi(state, z))


def husimi_of_weight(phi: PhaseWeight) -> HusimiFunction:
    """Gaussian-tagged ``Q = phi convolved with exp(-|z|^2)``."""
    if phi.modes != 1:
        raise ValueError("single-mode weight expected")
    return HusimiFunction.gaussian(
        np.concatenate([phi.atom_weights, phi.gauss_weights]),
        np.concatenate([phi.atom_locs[:, 0], phi.gauss_centers]),
        np.concatenate([np.ones(phi.atom_weights.size), 1 + phi.gauss_vars]),
    )


def p_to_q(phi: PhaseWeight, z):
    """``Q(z) = int phi(z1) exp(-|z1 - z|^2) d^2 z1``."""
    return husimi_of_weight(phi)(z)


def q_to_p_gaussian(q: HusimiFunction, eps=WIDTH_EPS) -> PhaseWeight:
    """Deconvolve a Gaussian-tagged Husimi function back to its weight."""
    if not isinstance(q, HusimiFunction) or not q.is_gaussian:
        raise OutOfClassError("Q is not tagged as a Gaussian mixture",
                              rule="Q -> P requires a tagged Gaussian mixture")
    atoms, gaussians = [], []
    for w, c, t in zip(q.weights, q.centers, q.widths):
        if abs(t - 1) <= eps:
            atoms.append((w, complex(c)))
        elif t < 1:
            raise OutOfClassError(f"component width {t:.6g} below vacuum width 1",
                                  rule="Q -> P diverges at or below vacuum width")
        else:
            gaussians.append((w, complex(c), t - 1))
    return PhaseWeight(atoms, gaussians, classical=bool(np.all(q.weights >= 0)))


# ---------------------------------------------------------------- characteristic function


def normally_ordered_charfn(state, u):
    """``Tr[rho D(u)] exp(|u|^2/2)``, the Fourier dual of the weight."""
    u = complex(u)
    if isinstance(state, PhaseWeight):
        phase_a = np.exp(np.conj(state.atom_locs[:, 0]) * u - state.atom_locs[:, 0] * np.conj(u))
        c = state.gauss_centers
        phase_g = np.exp(np.conj(c) * u - c * np.conj(u) - state.gauss_vars * abs(u) ** 2)
        return complex(np.sum(state.atom_weights * phase_a) + np.sum(state.gauss_weights * phase_g))
    if isinstance(state, CoherentSpan):
        a, b = state.left[:, 0], state.right[:, 0]
        # <b|D(u)|a> = exp((u a^* - u^* a)/2) <b|a + u>
        elem = np.exp(0.5 * (u * np.conj(a) - np.conj(u) * a)) * overlap_array(b[:, None], (a + u)[:, None])
        return complex(np.sum(state.weights * elem) * np.exp(0.5 * abs(u) ** 2))
    if isinstance(state, FockOperator):
        d = displacement_matrix(u, state.dim).mat
        return complex(np.trace(state.mat @ d) * np.exp(0.5 * abs(u) ** 2))
    raise TypeError(f"unsupported state {type(state).__name__}")
