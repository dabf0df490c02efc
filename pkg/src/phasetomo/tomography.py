"""Symplectic tomograms ``w(X, mu, nu) = Tr rho delta(X - mu q - nu p)``.

Two backends share one interface (``values``, ``charfn``, ``moments``):

* :class:`GaussianTomogram` -- closed form for coherent-dyad spans and
  diagonal weights built from atoms and isotropic Gaussians.
* :class:`FockTomogram` -- any truncated operator, inverted from its
  characteristic function by trapezoidal Fourier quadrature.

The characteristic function is ``chi(k) = int w(X) exp(i k X) dX``, which
equals ``Tr[rho D(alpha(-k))]`` with ``alpha(k) = k (nu - i mu)/sqrt(2)``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .coherent import CoherentSpan, span_allclose
from .errors import QuadratureError
from .fock import FockOperator, FockVector, displacement_stack, ray_moments, validate_density

NEG_TOL = 1e-9
NORM_TOL = 1e-6


@dataclass(frozen=True)
class Ray:
    mu: float
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "nu", float(self.nu))
        if not (np.isfinite(self.mu) and np.isfinite(self.nu)):
            raise ValueError("ray coefficients must be finite")
        if self.mu**2 + self.nu**2 <= 0:
            raise ValueError("ray needs mu^2 + nu^2 > 0")

    @property
    def scale(self) -> float:
        """``mu^2 + nu^2``."""
        return self.mu**2 + self.nu**2

    def displacement(self, k):
        """``alpha(k) = k (nu - i mu) / sqrt(2)``."""
        return np.asarray(k) * (self.nu - 1j * self.mu) / np.sqrt(2)

    def scaled(self, lam):
        return Ray(lam * self.mu, lam * self.nu)


def as_ray(ray) -> Ray:
    if isinstance(ray, Ray):
        return ray
    return Ray(*ray)


def vacuum_tomogram(X, mu, nu):
    """``exp(-X^2/(mu^2+nu^2)) / sqrt(pi (mu^2+nu^2))``."""
    s = mu**2 + nu**2
    return np.exp(-np.asarray(X, dtype=float) ** 2 / s) / np.sqrt(np.pi * s)


def _trapz(values, xs, axis=-1):
    return np.trapezoid(values, xs, axis=axis)


class _TomogramBase:
    """Shared conveniences; subclasses implement ``values``, ``charfn`` and ``moments``."""

    def __call__(self, X, mu, nu):
        return self.values(Ray(mu, nu), np.atleast_1d(X))

    def default_xs(self, ray, n=201, sigmas=6.0):
        """``mean +- sigmas * std`` of the ray distribution."""
        mean, var = self.moments(as_ray(ray))
        half = sigmas * np.sqrt(var)
        return np.linspace(mean - half, mean + half, n)

    def normalization(self, ray, n=401, sigmas=8.0) -> float:
        xs = self.default_xs(ray, n, sigmas)
        return float(np.real(_trapz(self.values(ray, xs), xs)))

    def grid(self, rays, xs=None, n=201):
        rays = [as_ray(r) for r in rays]
        xs_rows = [self.default_xs(r, n) if xs is None else np.asarray(xs, dtype=float) for r in rays]
        vals = [np.real(self.values(r, x)) for r, x in zip(rays, xs_rows)]
        return TomogramGrid(rays, np.array(xs_rows), np.array(vals))


class GaussianTomogram(_TomogramBase):
    """``w(X) = sum_j c_j N(X; a_j mu + b_j nu, t_j (mu^2 + nu^2))``.

    ``c_j``, ``a_j``, ``b_j`` may be complex (off-diagonal dyads); a mixture
    with real data and ``t_j >= 1/2`` is a genuine Gaussian-mixture tomogram.
    """

    def __init__(self, weights, mean_mu, mean_nu, var_scale, hermitian=None):
        self.weights = np.atleast_1d(np.asarray(weights, dtype=complex))
        self.mean_mu = np.atleast_1d(np.asarray(mean_mu, dtype=complex))
        self.mean_nu = np.atleast_1d(np.asarray(mean_nu, dtype=complex))
        self.var_scale = np.atleast_1d(np.asarray(var_scale, dtype=float))
        n = self.weights.shape[0]
        if not (self.mean_mu.shape[0] == self.mean_nu.shape[0] == self.var_scale.shape[0] == n):
            raise ValueError("component arrays must have equal length")
        if np.any(self.var_scale <= 0):
            raise ValueError("variance scales must be positive")
        if hermitian is None:
            hermitian = self.is_real_mixture()
        self.hermitian = hermitian

    @classmethod
    def vacuum(cls):
        return cls([1.0], [0.0], [0.0], [0.5])

    @classmethod
    def from_span(cls, span: CoherentSpan):
        """Exact tomogram of a single-mode dyad span.

        ``|alpha><beta|`` contributes ``<beta|alpha>`` times a Gaussian of
        variance ``(mu^2+nu^2)/2`` centred at the complex mean
        ``(beta^*(mu + i nu) + alpha(mu - i nu))/sqrt(2)``.
        """
        if span.modes != 1:
            raise ValueError("single-mode span required")
        alpha, beta = span.left[:, 0], span.right[:, 0]
        ov = np.exp(-0.5 * np.abs(alpha) ** 2 - 0.5 * np.abs(beta) ** 2 + np.conj(beta) * alpha)
        bc = np.conj(beta)
        hermitian = span_allclose(span, span.adjoint(), atol=1e-14, rtol=1e-12)
        return cls(span.weights * ov, (alpha + bc) / np.sqrt(2), 1j * (bc - alpha) / np.sqrt(2),
                   np.full(len(span), 0.5), hermitian=hermitian)

    def __len__(self):
        return self.weights.shape[0]

    def is_real_mixture(self, atol=1e-14) -> bool:
        return bool(
            np.all(np.abs(self.weights.imag) <= atol)
            and np.all(np.abs(self.mean_mu.imag) <= atol)
            and np.all(np.abs(self.mean_nu.imag) <= atol)
        )

    def _means(self, ray):
        return self.mean_mu * ray.mu + self.mean_nu * ray.nu

    def values(self, ray, xs):
        ray = as_ray(ray)
        xs = np.asarray(xs, dtype=float)
        var = self.var_scale * ray.scale
        d = xs[..., None] - self._means(ray)
        out = np.sum(self.weights * np.exp(-0.5 * d**2 / var) / np.sqrt(2 * np.pi * var), axis=-1)
        return out.real if self.hermitian else out

    def charfn(self, ray, k):
        ray = as_ray(ray)
        k = np.asarray(k, dtype=float)
        var = self.var_scale * ray.scale
        kk = k[..., None]
        return np.sum(self.weights * np.exp(1j * kk * self._means(ray) - 0.5 * kk**2 * var), axis=-1)

    def moments(self, ray):
        ray = as_ray(ray)
        m = self._means(ray)
        var = self.var_scale * ray.scale
        total = np.sum(self.weights)
        mean = np.sum(self.weights * m) / total
        second = np.sum(self.weights * (m**2 + var)) / total
        mean, second = float(np.real(mean)), float(np.real(second))
        return mean, max(second - mean**2, 0.0)

    def to_dict(self):
        if not self.is_real_mixture():
            raise ValueError("only real Gaussian mixtures serialise")
        return {
            "kind": "gaussian-tomogram",
            "components": [
                {"w": float(w.real), "mean_mu": float(a.real), "mean_nu": float(b.real), "var_scale": float(t)}
                for w, a, b, t in zip(self.weights, self.mean_mu, self.mean_nu, self.var_scale)
            ],
        }


@dataclass(frozen=True)
class QuadratureSettings:
    """Trapezoidal Fourier inversion on ``k in [-K, K]``.

    ``K`` starts at ``k_sigmas / sigma_vac`` (``sigma_vac^2 = (mu^2+nu^2)/2``)
    and doubles until the characteristic function is provably below
    ``edge_tol`` at the edges.
    """

    min_points: int = 2048
    k_sigmas: float = 8.0
    edge_tol: float = 1e-13
    max_doublings: int = 6
    support_margin: float = 8.0
    chunk: int = 256

    def __post_init__(self):
        if self.min_points < 2 or self.chunk < 1 or self.max_doublings < 0:
            raise ValueError("quadrature point counts must be positive")
        if not (self.k_sigmas > 0 and self.edge_tol > 0 and self.support_margin >= 0):
            raise ValueError("k_sigmas and edge_tol must be positive")


DEFAULT_QUADRATURE = QuadratureSettings()


def effective_dim(mat, rel=1e-30) -> int:
    """One past the last basis index carrying non-negligible matrix weight."""
    mag = np.abs(mat)
    scale = mag.max(initial=0.0)
    if scale == 0:
        return 1
    rows = np.maximum(mag.max(axis=1), mag.max(axis=0)) > rel * scale
    return int(np.nonzero(rows)[0].max()) + 1


def k_range(mat, ray: Ray, settings: QuadratureSettings = DEFAULT_QUADRATURE):
    """Cut-off ``K`` such that ``|Tr[M D(alpha(k))]| <= edge_tol`` for ``|k| >= K``.

    Bound: ``|Tr M D| <= sum|M_ij| max|D_ij|`` on the occupied block; ``K``
    also clears the last Laguerre zero (``|alpha|^2 > 6 n_eff + 2``) so the
    bound decays monotonically beyond it.
    """
    n_eff = effective_dim(mat)
    block = mat[:n_eff, :n_eff]
    bound = np.abs(block).sum()
    c = abs(ray.displacement(1.0))
    K = max(settings.k_sigmas / np.sqrt(ray.scale / 2), np.sqrt(6 * n_eff + 2) / c)
    for _ in range(settings.max_doublings + 1):
        edge = np.abs(displacement_stack([ray.displacement(K)], n_eff)[0]).max() * bound
        if edge <= settings.edge_tol:
            return K, n_eff
        K *= 2
    raise QuadratureError(
        f"characteristic function not decayed on ray (mu={ray.mu:g}, nu={ray.nu:g})",
        ray=(ray.mu, ray.nu), K=K, edge_bound=edge, n_eff=n_eff,
    )


def operator_charfn(mat, ray: Ray, k, n_eff=None, chunk=256):
    """``Tr[M D(alpha(-k))]`` for an array of ``k``."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    n = mat.shape[0] if n_eff is None else n_eff
    block = mat[:n, :n]
    out = np.empty(k.shape[0], dtype=complex)
    for start in range(0, k.shape[0], chunk):
        ds = displacement_stack(ray.displacement(-k[start:start + chunk]), n)
        out[start:start + chunk] = np.einsum("mn,knm->k", block, ds)
    return out


def fourier_grid(K, support, points):
    """Uniform symmetric ``k`` grid with trapezoid weights and alias period ``>= support``."""
    h_max = 2 * np.pi / support
    n = max(points, int(np.ceil(2 * K / h_max)) + 1)
    k = np.linspace(-K, K, n)
    wts = np.full(n, k[1] - k[0])
    wts[[0, -1]] *= 0.5
    return k, wts


class FockTomogram(_TomogramBase):
    """Tomogram functional of a truncated single-mode operator.

    ``validate=False`` admits any operator (e.g. traceless cross terms); the
    map is linear so such tomograms add up term by term.
    """

    def __init__(self, rho: FockOperator, settings: QuadratureSettings = DEFAULT_QUADRATURE,
                 validate=True):
        if len(rho.dims) != 1:
            raise ValueError("single-mode operator required; see bipartite.joint_tomogram")
        if validate:
            validate_density(rho)
        self.rho = rho
        self.settings = settings
        self.hermitian = bool(np.abs(rho.mat - rho.mat.conj().T).max(initial=0.0) <= 1e-12)

    def support_radius(self, ray: Ray) -> float:
        """Half-width in ``X`` outside which the tomogram is negligible."""
        n_eff = effective_dim(self.rho.mat)
        return np.sqrt(ray.scale) * (np.sqrt(2 * n_eff + 1) + self.settings.support_margin)

    def values(self, ray, xs):
        ray = as_ray(ray)
        xs = np.asarray(xs, dtype=float)
        K, n_eff = k_range(self.rho.mat, ray, self.settings)
        reach = self.support_radius(ray)
        xmax = np.abs(xs).max(initial=0.0)
        k, wts = fourier_grid(K, reach + max(xmax, reach), self.settings.min_points)
        if self.hermitian:
            # chi(-k) = chi(k)^*; the grid is symmetric about zero
            half = k.shape[0] // 2
            pos = operator_charfn(self.rho.mat, ray, k[half:], n_eff, self.settings.chunk)
            neg = np.conj(pos[: k.shape[0] - half][::-1]) if k.shape[0] % 2 == 0 else np.conj(pos[1:][::-1])
            chi = np.concatenate([neg, pos])
        else:
            chi = operator_charfn(self.rho.mat, ray, k, n_eff, self.settings.chunk)
        phase = np.exp(-1j * np.multiply.outer(xs, k))
        out = phase @ (wts * chi) / (2 * np.pi)
        return out.real if self.hermitian else out

    def charfn(self, ray, k):
        ray = as_ray(ray)
        k = np.asarray(k, dtype=float)
        return operator_charfn(self.rho.mat, ray, k.ravel()).reshape(k.shape)

    def moments(self, ray):
        ray = as_ray(ray)
        return ray_moments(self.rho, ray.mu, ray.nu)


def tomogram_of_fock(rho: FockOperator, ray, xs, settings: QuadratureSettings = DEFAULT_QUADRATURE):
    """``w(X)`` on ``xs`` for the density state ``rho`` by Fourier quadrature."""
    return FockTomogram(rho, settings).values(as_ray(ray), xs)


def tomogram_charfn(state, ray, k):
    """``chi(k, mu, nu) = int w exp(ikX) dX`` for an operator, span or tomogram."""
    if isinstance(state, FockOperator):
        state = FockTomogram(state, validate=False)
    elif isinstance(state, CoherentSpan):
        state = GaussianTomogram.from_span(state)
    return state.charfn(as_ray(ray), k)


# ---------------------------------------------------------------- pure states


def hermite_functions(nmax, y):
    """Normalised ``h_n(y)``, ``n < nmax``, stacked on the first axis."""
    y = np.asarray(y, dtype=float)
    out = np.zeros((nmax,) + y.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * y**2)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * y * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


@dataclass
class Wavefunction:
    """Position wavefunction with optional momentum representation.

    ``momentum(p) = (2 pi)^(-1/2) int position(y) exp(-i p y) dy``.
    ``extent`` bounds the region where either is non-negligible.
    """

    position: object
    momentum: object = None
    extent: float = 12.0

    @classmethod
    def from_fock(cls, vec: FockVector):
        amps = vec.amps
        n_eff = effective_dim(amps[:, None])
        amps = amps[:n_eff]
        rot = (-1j) ** np.arange(n_eff)

        def position(y):
            return np.tensordot(amps, hermite_functions(n_eff, y), axes=1)

        def momentum(p):
            return np.tensordot(amps * rot, hermite_functions(n_eff, p), axes=1)

        return cls(position, momentum, extent=np.sqrt(2 * n_eff + 1) + 10.0)


def _chirp_integral(f, extent, a, b, xs, c):
    """``(1/(2 pi |c|)) |int f(y) exp(i a y^2 / (2c) + i b X y / c) dy|^2`` on ``xs``."""
    fmax = (abs(a) * extent + np.abs(xs).max(initial=0.0)) / abs(c) + extent
    h = min(0.02, np.pi / (4 * fmax))
    n = int(np.ceil(2 * extent / h)) + 1
    y = np.linspace(-extent, extent, n)
    wts = np.full(n, y[1] - y[0])
    wts[[0, -1]] *= 0.5
    base = f(y) * np.exp(1j * a * y**2 / (2 * c)) * wts
    amp = np.exp(1j * b * np.multiply.outer(xs, y) / c) @ base
    return np.abs(amp) ** 2 / (2 * np.pi * abs(c))


def tomogram_of_pure(psi: Wavefunction, ray, X):
    """Tomogram of ``|psi><psi|`` from the wavefunction alone.

    For ``nu != 0`` integrates ``psi(y) exp(i mu y^2/(2 nu) - i X y/nu)``;
    when ``|nu| < |mu|`` and a momentum wavefunction is available the
    mirrored formula in momentum space is used instead, which is the only
    route for ``nu = 0``.
    """
    ray = as_ray(ray)
    xs = np.atleast_1d(np.asarray(X, dtype=float))
    if psi.momentum is not None and abs(ray.nu) < abs(ray.mu):
        # in momentum space p is the multiplier and q = i d/dp
        return _chirp_integral(psi.momentum, psi.extent, -ray.nu, 1.0, xs, ray.mu)
    if ray.nu == 0:
        raise ValueError("nu = 0 needs the momentum wavefunction")
    return _chirp_integral(psi.position, psi.extent, ray.mu, -1.0, xs, ray.nu)


# ---------------------------------------------------------------- checks


@dataclass
class HomogeneityReport:
    lam: float
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def check_homogeneity(tomogram, lam, rays, xs=None, tol=1e-7) -> HomogeneityReport:
    """Compare ``w(lam X, lam mu, lam nu)`` with ``w(X, mu, nu)/|lam|``."""
    if lam == 0:
        raise ValueError("lambda must be non-zero")
    worst = 0.0
    for ray in rays:
        ray = as_ray(ray)
        x = tomogram.default_xs(ray, 41) if xs is None else np.asarray(xs, dtype=float)
        lhs = tomogram.values(ray.scaled(lam), lam * x)
        rhs = tomogram.values(ray, x) / abs(lam)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return HomogeneityReport(lam, worst, tol)


def check_probability(tomogram, rays, n=401):
    """Worst negativity and worst normalisation residual over ``rays``."""
    min_val, max_resid = np.inf, 0.0
    for ray in rays:
        xs = tomogram.default_xs(ray, n, 8.0)
        vals = np.real(tomogram.values(ray, xs))
        min_val = min(min_val, float(vals.min()))
        max_resid = max(max_resid, abs(float(_trapz(vals, xs)) - 1.0))
    return min_val, max_resid


# ---------------------------------------------------------------- export


@dataclass
class TomogramGrid:
    rays: list
    xs: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def residuals(self):
        """``int w dX - 1`` per ray (trapezoid)."""
        return [float(_trapz(v, x)) - 1.0 for v, x in zip(self.values, self.xs)]

    def exported_values(self):
        out = np.array(self.values, dtype=float)
        out[(out < 0) & (out >= -NEG_TOL)] = 0.0
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["mu", "nu", "X", "w"])
        for ray, xs, vals in zip(self.rays, self.xs, self.exported_values()):
            for x, w in zip(xs, vals):
                writer.writerow([f"{ray.mu:.17g}", f"{ray.nu:.17g}", f"{x:.17g}", f"{w:.17g}"])
        return buf.getvalue()

    def to_dict(self):
        return {
            "rays": [
                {"mu": r.mu, "nu": r.nu, "X": list(map(float, xs)), "w": list(map(float, vals))}
                for r, xs, vals in zip(self.rays, self.xs, self.exported_values())
            ],
            **self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)
