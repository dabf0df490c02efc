"""Truncated number-basis numerics.

Dense complex matrices in the basis ``|0>, ..., |N-1>``; two-mode operators
are ``N1*N2`` square matrices indexed ``n1*N2 + n2`` and carry their mode
dimensions in ``dims``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammainc, gammaln

from .coherent import CoherentSpan
from .errors import DensityError, TruncationError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8


@dataclass(frozen=True)
class TruncationPolicy:
    target_tail: float = 1e-12
    max_dim: int = 256

    def __post_init__(self):
        if not 0 < self.target_tail < 1:
            raise ValueError("target_tail must lie in (0, 1)")
        if self.max_dim < 1:
            raise ValueError("max_dim must be positive")


DEFAULT_POLICY = TruncationPolicy()


def coherent_tail(radius: float, dim: int) -> float:
    """Probability mass of ``|alpha>`` (``|alpha| = radius``) on ``n >= dim``."""
    if dim <= 0:
        return 1.0
    if radius == 0:
        return 0.0
    return float(gammainc(dim, radius**2))


def fock_dim(radius: float, policy: TruncationPolicy = DEFAULT_POLICY, product=True) -> int:
    """Smallest dimension whose coherent tail is below ``policy.target_tail``.

    With ``product`` the result is doubled: products and tomogram
    cross-checks see the amplitude ``sqrt(tail)`` rather than the tail itself.
    """
    n = 1
    while coherent_tail(radius, n) > policy.target_tail:
        n += 1
        if n > policy.max_dim:
            raise TruncationError(
                f"|alpha|={radius:.3g} needs more than max_dim={policy.max_dim} levels"
            )
    if product:
        n *= 2
    if n > policy.max_dim:
        raise TruncationError(f"dimension {n} exceeds max_dim={policy.max_dim}")
    return n


@dataclass(frozen=True)
class FockVector:
    amps: np.ndarray
    __array_ufunc__ = None

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).ravel()
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self):
        return FockVector(self.amps / self.norm())

    def inner(self, other) -> complex:
        """``<self|other>`` after zero-padding to a common dimension."""
        a, b = _pad_pair(self.amps, other.amps)
        return complex(np.vdot(a, b))

    def padded(self, dim):
        return FockVector(pad_vector(self.amps, dim))

    def projector(self):
        return FockOperator(np.outer(self.amps, np.conj(self.amps)))


@dataclass(frozen=True)
class FockOperator:
    mat: np.ndarray
    dims: tuple = field(default=None)
    __array_ufunc__ = None

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("operator matrix must be square")
        dims = self.dims if self.dims is not None else (mat.shape[0],)
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != mat.shape[0]:
            raise ValueError(f"dims {dims} do not match matrix size {mat.shape[0]}")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def adjoint(self):
        return FockOperator(self.mat.conj().T, self.dims)

    def __matmul__(self, other):
        a, b = _pad_ops(self, other)
        return FockOperator(a.mat @ b.mat, a.dims)

    def __add__(self, other):
        a, b = _pad_ops(self, other)
        return FockOperator(a.mat + b.mat, a.dims)

    def __sub__(self, other):
        a, b = _pad_ops(self, other)
        return FockOperator(a.mat - b.mat, a.dims)

    def __mul__(self, scalar):
        return FockOperator(self.mat * scalar, self.dims)

    __rmul__ = __mul__

    def padded(self, dim):
        if len(self.dims) != 1:
            raise ValueError("padding is defined for single-mode operators")
        return FockOperator(pad_matrix(self.mat, dim))

    def is_density(self) -> bool:
        try:
            validate_density(self)
        except DensityError:
            return False
        return True


def pad_vector(v, dim):
    v = np.asarray(v, dtype=complex)
    if v.shape[0] > dim:
        raise ValueError("cannot pad to a smaller dimension")
    out = np.zeros(dim, dtype=complex)
    out[: v.shape[0]] = v
    return out


def pad_matrix(m, dim):
    m = np.asarray(m, dtype=complex)
    if m.shape[0] > dim:
        raise ValueError("cannot pad to a smaller dimension")
    out = np.zeros((dim, dim), dtype=complex)
    out[: m.shape[0], : m.shape[1]] = m
    return out


def _pad_pair(a, b):
    n = max(a.shape[0], b.shape[0])
    return pad_vector(a, n), pad_vector(b, n)


def _pad_ops(a: FockOperator, b: FockOperator):
    if a.dims == b.dims:
        return a, b
    if len(a.dims) == 1 and len(b.dims) == 1:
        n = max(a.dim, b.dim)
        return a.padded(n), b.padded(n)
    raise ValueError(f"incompatible mode dimensions {a.dims} and {b.dims}")


def validate_density(rho: FockOperator, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL,
                     psd_tol=PSD_TOL) -> FockOperator:
    """Raise :class:`DensityError` unless ``rho`` is Hermitian, unit-trace and PSD."""
    m = rho.mat
    herm = np.abs(m - m.conj().T).max(initial=0.0)
    if herm > hermitian_tol:
        raise DensityError(f"not Hermitian: max |M - M^+| = {herm:.3e}")
    tr = np.trace(m)
    if abs(tr - 1) > trace_tol:
        raise DensityError(f"trace {tr.real:.12g}{tr.imag:+.3e}j differs from 1")
    lo = min_eigenvalue(rho)
    if lo < -psd_tol:
        raise DensityError(f"negative eigenvalue {lo:.3e}")
    return rho


def hermitian_eigvals(mat) -> np.ndarray:
    """Real eigenvalues of the Hermitian part, ascending."""
    mat = np.asarray(mat, dtype=complex)
    return np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))


def min_eigenvalue(rho) -> float:
    mat = rho.mat if isinstance(rho, FockOperator) else rho
    return float(hermitian_eigvals(mat)[0])


def purity(rho: FockOperator) -> float:
    """``Tr rho^2`` of a validated density state."""
    validate_density(rho)
    return float(np.real(np.vdot(rho.mat.conj().T, rho.mat)))


def number_state(n: int, dim: int) -> FockVector:
    if not 0 <= n < dim:
        raise ValueError(f"|{n}> does not fit in dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1
    return FockVector(v)


def thermal_operator(nbar: float, dim: int) -> FockOperator:
    """Diagonal thermal state truncated (not renormalised) at ``dim``."""
    n = np.arange(dim)
    return FockOperator(np.diag((nbar / (1 + nbar)) ** n / (1 + nbar)).astype(complex))


def thermal_dim(nbar: float, policy: TruncationPolicy = DEFAULT_POLICY) -> int:
    """Levels needed for the thermal tail ``(nbar/(1+nbar))^N`` to drop below target."""
    if nbar <= 0:
        return 1
    ratio = nbar / (1 + nbar)
    return int(np.ceil(np.log(policy.target_tail) / np.log(ratio))) + 1


def coherent_vector(alpha: complex, dim: int, target_tail=None) -> FockVector:
    """``c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` for ``n < dim``."""
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    if target_tail is not None and coherent_tail(abs(alpha), dim) > target_tail:
        raise TruncationError(
            f"dimension {dim} leaves tail {coherent_tail(abs(alpha), dim):.2e} "
            f"> {target_tail:.2e} for |alpha|={abs(alpha):.3g}; increase N"
        )
    n = np.arange(1, dim)
    ratios = np.concatenate([[1.0 + 0j], alpha / np.sqrt(n)])
    return FockVector(np.exp(-0.5 * abs(alpha) ** 2) * np.cumprod(ratios))


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def displacement_matrix(u: complex, dim: int) -> FockOperator:
    """Matrix elements ``<m|D(u)|n>`` from the associated-Laguerre closed form.

    Each element is exact; the truncated matrix is unitary only up to the
    edge of the basis.
    """
    if u == 0:
        return FockOperator(np.eye(dim, dtype=complex))
    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    x = abs(u) ** 2
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + (hi - lo) * np.log(abs(u)) - 0.5 * x
    # below the diagonal the phase follows u, above it -u^*
    phase = np.where(m >= n, np.exp(1j * np.angle(u) * (m - n)),
                     np.exp(1j * np.angle(-np.conj(u)) * (n - m)))
    with np.errstate(over="ignore", invalid="ignore"):
        lag = eval_genlaguerre(lo, hi - lo, x)
        mat = np.exp(log_mag) * phase * lag
    return FockOperator(np.nan_to_num(mat))


def displacement_stack(alphas, dim: int) -> np.ndarray:
    """Batch of displacement matrices, shape ``(len(alphas), dim, dim)``.

    Same closed form as :func:`displacement_matrix`, evaluated with the
    three-term Laguerre recurrence on the normalised functions
    ``g_n^(d) = sqrt(n!/(n+d)!) x^(d/2) exp(-x/2) L_n^(d)(x)`` for every
    offset ``d`` at once.
    """
    a = np.atleast_1d(np.asarray(alphas, dtype=complex))
    x = (np.abs(a) ** 2)[:, None]
    d = np.arange(dim)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        # d * log(0) is nan for d = 0; that entry is exp(-x/2) = 1
        log_g0 = np.where(d == 0, 0.0, 0.5 * d * np.log(x)) - 0.5 * gammaln(d + 1) - 0.5 * x
    g = np.zeros((a.shape[0], dim, dim))  # [batch, n, d]
    g_prev = np.exp(log_g0)
    g[:, 0, :] = g_prev
    if dim > 1:
        g_cur = g_prev * (1 + d - x) / np.sqrt(d + 1)
        g[:, 1, :] = g_cur
        for n in range(1, dim - 1):
            g_next = ((2 * n + 1 + d - x) * g_cur / np.sqrt((n + 1) * (n + 1 + d))
                      - g_prev * np.sqrt(n * (n + d) / ((n + 1) * (n + 1 + d))))
            g_prev, g_cur = g_cur, g_next
            g[:, n + 1, :] = g_cur
    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    lo, off = np.minimum(m, n), np.abs(m - n)
    mag = g[:, lo, off]
    ang = np.where(m >= n, np.angle(a)[:, None, None] * (m - n),
                   np.angle(-np.conj(a))[:, None, None] * (n - m))
    return mag * np.exp(1j * ang)


def span_dim(span: CoherentSpan, policy: TruncationPolicy = DEFAULT_POLICY) -> int:
    return fock_dim(span.radius(), policy)


def _weighted_outer(w, l, r):
    """``w |l><r|`` in explicit real arithmetic.

    Real products and sums commute exactly, so swapping ``(w, l, r)`` for
    ``(w^*, r, l)`` yields the conjugate transpose bit for bit; complex
    ufuncs (SIMD/FMA paths) do not guarantee that.
    """
    a, b = l.real[:, None], l.imag[:, None]
    c, d = r.real[None, :], r.imag[None, :]
    u = a * c + b * d
    v = b * c - a * d
    p, q = w.real, w.imag
    return (p * u - q * v) + 1j * (p * v + q * u)


def span_to_fock(span: CoherentSpan, policy: TruncationPolicy = DEFAULT_POLICY,
                 dim=None) -> FockOperator:
    """Embed ``sum w |alpha><beta|`` as a matrix (every mode truncated at ``dim``)."""
    dim = span_dim(span, policy) if dim is None else dim
    modes = span.modes
    if len(span) == 0:
        return FockOperator(np.zeros((dim**modes, dim**modes), dtype=complex), (dim,) * modes)

    def vec(point):
        out = np.ones(1, dtype=complex)
        for z in point:
            out = np.kron(out, coherent_vector(z, dim).amps)
        return out

    mat = np.zeros((dim**modes, dim**modes), dtype=complex)
    for w, a, b in zip(span.weights, span.left, span.right):
        mat += _weighted_outer(w, vec(a), vec(b))
    return FockOperator(mat, (dim,) * modes)


def ray_moments(rho: FockOperator, mu: float, nu: float):
    """Mean and variance of the quadrature ``mu q + nu p`` (single mode, exact in the basis)."""
    dim = rho.dim
    c = (mu - 1j * nu) / np.sqrt(2)
    a = annihilation(dim)
    x_op = c * a + np.conj(c) * a.conj().T
    n = np.arange(dim)
    a2 = a @ a
    x2_op = c**2 * a2 + np.conj(c) ** 2 * a2.conj().T + abs(c) ** 2 * np.diag(2 * n + 1)
    mean = np.real(np.trace(rho.mat @ x_op))
    second = np.real(np.trace(rho.mat @ x2_op))
    return float(mean), float(max(second - mean**2, 0.0))


def reduced_state(rho: FockOperator, keep: int) -> FockOperator:
    """Partial trace of a two-mode operator, keeping mode ``keep`` (0 or 1)."""
    n1, n2 = rho.dims
    r = rho.mat.reshape(n1, n2, n1, n2)
    mat = np.einsum("ajbj->ab", r) if keep == 0 else np.einsum("iaib->ab", r)
    return FockOperator(mat)


def kron_ops(a: FockOperator, b: FockOperator) -> FockOperator:
    return FockOperator(np.kron(a.mat, b.mat), a.dims + b.dims)
