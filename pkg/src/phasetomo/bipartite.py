"""Two-mode states: joint tomograms, separable ensembles and entanglement witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coherent import CoherentKet, CoherentSpan
from .diagonal import PhaseWeight, dequantize_span, weight_dim, weight_to_operator, weight_tomogram
from .errors import OutOfClassError, QuadratureError
from .fock import (DEFAULT_POLICY, FockOperator, FockVector, TruncationPolicy, displacement_matrix,
                   displacement_stack, fock_dim, min_eigenvalue, ray_moments, reduced_state,
                   span_to_fock, validate_density)
from .tomography import (FockTomogram, GaussianTomogram, QuadratureSettings, _trapz, as_ray,
                         effective_dim, fourier_grid)

PPT_TOL = 1e-8


def _local_span(x):
    if isinstance(x, CoherentSpan):
        return x
    if isinstance(x, CoherentKet):
        return x.projector()
    if isinstance(x, PhaseWeight) and x.is_atomic():
        return CoherentSpan(x.atom_weights, x.atom_locs, x.atom_locs)
    return None


def _local_dim(x, policy):
    if isinstance(x, (FockOperator, FockVector)):
        return x.dim
    if isinstance(x, PhaseWeight) and not x.is_atomic():
        return weight_dim(x, policy)
    return fock_dim(_local_span(x).radius(), policy)


def _local_fock(x, dim, policy) -> FockOperator:
    if isinstance(x, FockVector):
        return x.padded(dim).projector()
    if isinstance(x, FockOperator):
        return x.padded(dim)
    if isinstance(x, PhaseWeight) and not x.is_atomic():
        return weight_to_operator(x, policy, dim=dim)
    return span_to_fock(_local_span(x), policy, dim=dim)


def local_tomogram(x):
    """Closed form when available, Fourier quadrature otherwise."""
    if isinstance(x, PhaseWeight):
        return weight_tomogram(x)
    span = _local_span(x)
    if span is not None:
        return GaussianTomogram.from_span(span)
    if isinstance(x, FockVector):
        x = x.projector()
    return FockTomogram(x)


@dataclass
class SeparableEnsemble:
    """``sum_k P_k rho_k(1) (x) rho_k(2)`` with ``P_k >= 0`` summing to one."""

    terms: list

    def __post_init__(self):
        self.terms = [(float(p), a, b) for p, a, b in self.terms]
        probs = np.array([p for p, _, _ in self.terms])
        if probs.size == 0:
            raise ValueError("empty ensemble")
        if np.any(probs < 0):
            raise ValueError("ensemble weights must be nonnegative")
        if abs(probs.sum() - 1) > 1e-10:
            raise ValueError(f"ensemble weights sum to {probs.sum():.12g}, not 1")

    def is_atomic(self) -> bool:
        return all(_local_span(a) is not None and _local_span(b) is not None for _, a, b in self.terms)


@dataclass
class BipartiteState:
    """Joint operator (with mode dimensions), optional exact span and separability certificate."""

    operator: FockOperator
    span: CoherentSpan | None = None
    certificate: SeparableEnsemble | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.operator.dims) != 2:
            raise ValueError("two-mode operator required")

    @property
    def dims(self):
        return self.operator.dims

    def reduced(self, mode):
        return reduced_state(self.operator, mode)


def build_separable(ensemble: SeparableEnsemble, policy: TruncationPolicy = DEFAULT_POLICY,
                    dims=None) -> BipartiteState:
    """Joint state of a convex sum of products, keeping the ensemble as certificate."""
    if dims is None:
        dims = (max(_local_dim(a, policy) for _, a, _ in ensemble.terms),
                max(_local_dim(b, policy) for _, _, b in ensemble.terms))
    n1, n2 = dims
    mat = np.zeros((n1 * n2, n1 * n2), dtype=complex)
    for p, a, b in ensemble.terms:
        mat += p * np.kron(_local_fock(a, n1, policy).mat, _local_fock(b, n2, policy).mat)
    op = validate_density(FockOperator(mat, (n1, n2)))
    span = None
    if ensemble.is_atomic():
        span = CoherentSpan.zero(2)
        for p, a, b in ensemble.terms:
            span = span + p * _local_span(a).tensor(_local_span(b))
    return BipartiteState(op, span, ensemble)


def from_span(span: CoherentSpan, policy: TruncationPolicy = DEFAULT_POLICY, dim=None,
              certificate=None) -> BipartiteState:
    if span.modes != 2:
        raise ValueError("two-mode span required")
    dim = fock_dim(span.radius(), policy) if dim is None else dim
    return BipartiteState(validate_density(span_to_fock(span, policy, dim=dim)), span, certificate)


def two_mode_cat(alpha, dim=24, phase=0.0, policy: TruncationPolicy = DEFAULT_POLICY) -> BipartiteState:
    """``(|alpha, alpha> + e^{i phase}|-alpha, -alpha>)/norm`` truncated at ``dim`` per mode."""
    ket = CoherentKet([1.0, np.exp(1j * phase)], [[alpha, alpha], [-alpha, -alpha]], modes=2)
    span = ket.normalized().projector()
    rho = span_to_fock(span, policy, dim=dim)
    # renormalise away the truncation tail so the density invariants hold exactly
    rho = FockOperator(rho.mat / rho.trace().real, rho.dims)
    return BipartiteState(validate_density(rho), span, None, {"kind": "cat", "alpha": alpha})


def product_state(a, b, policy: TruncationPolicy = DEFAULT_POLICY) -> BipartiteState:
    return build_separable(SeparableEnsemble([(1.0, a, b)]), policy)


# ---------------------------------------------------------------- joint tomogram


def joint_charfn_grid(rho: FockOperator, ray1, ray2, k1, k2):
    """``Tr[rho D1(alpha1(-k1)) D2(alpha2(-k2))]`` on the outer grid ``k1 x k2``."""
    n1, n2 = rho.dims
    r = rho.mat.reshape(n1, n2, n1, n2)
    d1 = displacement_stack(as_ray(ray1).displacement(-np.asarray(k1)), n1)
    d2 = displacement_stack(as_ray(ray2).displacement(-np.asarray(k2)), n2)
    # T[k, m2, n2] = sum_{m1, n1} R[m1, m2, n1, n2] D1[k, n1, m1]
    rr = r.transpose(2, 0, 1, 3).reshape(n1 * n1, n2 * n2)
    t = d1.reshape(d1.shape[0], n1 * n1) @ rr
    # chi[k, l] = sum_{m2, n2} T[k, m2, n2] D2[l, n2, m2]
    return t @ d2.transpose(0, 2, 1).reshape(d2.shape[0], n2 * n2).T


def joint_charfn(state, ray1, k1, ray2, k2) -> complex:
    """``E[exp(i k1 X1 + i k2 X2)]`` of the joint tomogram."""
    rho = state.operator if isinstance(state, BipartiteState) else state
    n1, n2 = rho.dims
    d1 = displacement_matrix(complex(as_ray(ray1).displacement(-k1)), n1).mat
    d2 = displacement_matrix(complex(as_ray(ray2).displacement(-k2)), n2).mat
    return complex(np.trace(rho.mat @ np.kron(d1, d2)))


def _joint_k_range(ray, mode, bound, n_eff, settings):
    c = abs(ray.displacement(1.0))
    K = max(settings.k_sigmas / np.sqrt(ray.scale / 2), np.sqrt(6 * n_eff + 2) / c)
    for _ in range(settings.max_doublings + 1):
        edge = np.abs(displacement_stack([ray.displacement(K)], n_eff)[0]).max() * bound
        if edge <= settings.edge_tol:
            return K
        K *= 2
    raise QuadratureError(f"joint characteristic function not decayed on mode {mode + 1} ray "
                          f"(mu={ray.mu:g}, nu={ray.nu:g})", K=K, edge_bound=edge)


def joint_tomogram(state, ray1, ray2, X1, X2,
                   settings: QuadratureSettings = QuadratureSettings(min_points=128)):
    """Joint density ``w(X1, X2)`` on the outer grid ``X1 x X2`` by double Fourier inversion."""
    rho = state.operator if isinstance(state, BipartiteState) else state
    ray1, ray2 = as_ray(ray1), as_ray(ray2)
    X1 = np.atleast_1d(np.asarray(X1, dtype=float))
    X2 = np.atleast_1d(np.asarray(X2, dtype=float))
    n_effs = [effective_dim(reduced_state(rho, m).mat) for m in (0, 1)]
    n1, n2 = rho.dims
    block = rho.mat.reshape(n1, n2, n1, n2)[: n_effs[0], : n_effs[1], : n_effs[0], : n_effs[1]]
    bound = np.abs(block).sum()
    sub = FockOperator(block.reshape(n_effs[0] * n_effs[1], -1), tuple(n_effs))
    grids = []
    for mode, (ray, xs) in enumerate(((ray1, X1), (ray2, X2))):
        K = _joint_k_range(ray, mode, bound, n_effs[mode], settings)
        reach = np.sqrt(ray.scale) * (np.sqrt(2 * n_effs[mode] + 1) + settings.support_margin)
        xmax = np.abs(xs).max(initial=0.0)
        grids.append(fourier_grid(K, reach + max(xmax, reach), settings.min_points))
    (k1, w1), (k2, w2) = grids
    chi = joint_charfn_grid(sub, ray1, ray2, k1, k2)
    e1 = np.exp(-1j * np.multiply.outer(X1, k1)) * w1
    e2 = np.exp(-1j * np.multiply.outer(X2, k2)) * w2
    return np.real(e1 @ chi @ e2.T) / (4 * np.pi**2)


def default_joint_axes(state, ray1, ray2, n=64, sigmas=6.0):
    axes = []
    for mode, ray in enumerate((as_ray(ray1), as_ray(ray2))):
        mean, var = ray_moments(state.reduced(mode), ray.mu, ray.nu)
        half = sigmas * np.sqrt(var)
        axes.append(np.linspace(mean - half, mean + half, n))
    return axes


@dataclass
class JointGrid:
    ray1: object
    ray2: object
    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        return float(_trapz(_trapz(self.values, self.x2, axis=1), self.x1))

    def to_csv(self) -> str:
        lines = ["mu1,nu1,mu2,nu2,X1,X2,w"]
        r1, r2 = as_ray(self.ray1), as_ray(self.ray2)
        head = f"{r1.mu:.17g},{r1.nu:.17g},{r2.mu:.17g},{r2.nu:.17g}"
        vals = np.array(self.values, dtype=float)
        vals[(vals < 0) & (vals >= -1e-9)] = 0.0
        for i, a in enumerate(self.x1):
            for j, b in enumerate(self.x2):
                lines.append(f"{head},{a:.17g},{b:.17g},{vals[i, j]:.17g}")
        return "\n".join(lines) + "\n"


def joint_grid(state: BipartiteState, ray1, ray2, n=64) -> JointGrid:
    x1, x2 = default_joint_axes(state, ray1, ray2, n)
    return JointGrid(as_ray(ray1), as_ray(ray2), x1, x2, joint_tomogram(state, ray1, ray2, x1, x2))


# ---------------------------------------------------------------- diagonal symbol


def joint_weight(state) -> PhaseWeight:
    """Two-mode atomic weight of a mixture of ``|z1, z2><z1, z2|``."""
    span = state.span if isinstance(state, BipartiteState) else state
    if span is None:
        raise OutOfClassError("state has no dyad form", rule="joint weight needs the two-mode atomic class")
    if span.modes != 2:
        raise ValueError("two-mode span required")
    return dequantize_span(span)


def weight_to_joint_span(phi: PhaseWeight) -> CoherentSpan:
    if phi.modes != 2 or not phi.is_atomic():
        raise OutOfClassError("not a two-mode atomic weight", rule="two-mode atoms only")
    return CoherentSpan(phi.atom_weights, phi.atom_locs, phi.atom_locs)


# ---------------------------------------------------------------- separability checks

DEFAULT_RAY_PAIRS = (((1.0, 0.0), (1.0, 0.0)), ((0.0, 1.0), (1.0, 0.0)), ((0.6, 0.8), (-0.8, 0.6)))


@dataclass
class FactorizationReport:
    max_deviation: float
    weight_deviation: float | None
    tolerance: float = 1e-7

    @property
    def passed(self) -> bool:
        ok = self.max_deviation <= self.tolerance
        if self.weight_deviation is not None:
            ok = ok and self.weight_deviation <= self.tolerance
        return ok


def check_tomographic_factorization(state: BipartiteState, ray_pairs=DEFAULT_RAY_PAIRS, n=64,
                                    certificate=None, tol=1e-7) -> FactorizationReport:
    """Max deviation between the joint tomogram and ``sum_k P_k w_k1 w_k2`` on grids."""
    cert = certificate if certificate is not None else state.certificate
    if cert is None:
        raise ValueError("no separability certificate")
    locals_ = [(p, local_tomogram(a), local_tomogram(b)) for p, a, b in cert.terms]
    worst = 0.0
    for ray1, ray2 in ray_pairs:
        grid = joint_grid(state, ray1, ray2, n)
        model = np.zeros_like(grid.values)
        for p, t1, t2 in locals_:
            model += p * np.outer(np.real(t1.values(ray1, grid.x1)), np.real(t2.values(ray2, grid.x2)))
        worst = max(worst, float(np.abs(grid.values - model).max()))
    weight_dev = None
    if state.span is not None and cert.is_atomic():
        model = CoherentSpan.zero(2)
        for p, a, b in cert.terms:
            model = model + p * _local_span(a).tensor(_local_span(b))
        try:
            lhs, rhs = joint_weight(state), dequantize_span(model)
            diff = weight_to_joint_span(lhs) - weight_to_joint_span(rhs)
            weight_dev = float(np.abs(diff.merged().weights).max(initial=0.0))
        except OutOfClassError:
            weight_dev = None
    return FactorizationReport(worst, weight_dev, tol)


def charfn_factorization(state: BipartiteState, k1, ray1, k2, ray2, certificate=None) -> float:
    """``|chi_joint - sum_k P_k chi_k1 chi_k2|`` at one point."""
    cert = certificate if certificate is not None else state.certificate
    if cert is None:
        raise ValueError("no separability certificate")
    joint = joint_charfn(state, ray1, k1, ray2, k2)
    model = sum(p * complex(local_tomogram(a).charfn(ray1, k1)) * complex(local_tomogram(b).charfn(ray2, k2))
                for p, a, b in cert.terms)
    return abs(joint - model)


@dataclass
class PPTResult:
    min_eigenvalue: float
    tolerance: float = PPT_TOL

    @property
    def entangled(self) -> bool:
        return self.min_eigenvalue < -self.tolerance

    @property
    def verdict(self) -> str:
        return "entangled" if self.entangled else "separable-consistent"


def partial_transpose(rho: FockOperator, mode=1) -> np.ndarray:
    n1, n2 = rho.dims
    r = rho.mat.reshape(n1, n2, n1, n2)
    r = r.transpose(0, 3, 2, 1) if mode == 1 else r.transpose(2, 1, 0, 3)
    return r.reshape(n1 * n2, n1 * n2)


def ppt_witness(state, tol=PPT_TOL) -> PPTResult:
    """Smallest eigenvalue of the partial transpose on mode 2."""
    rho = state.operator if isinstance(state, BipartiteState) else state
    if len(rho.dims) != 2:
        raise ValueError(f"two-mode operator required, got dims {rho.dims}")
    validate_density(rho)
    return PPTResult(min_eigenvalue(partial_transpose(rho)), tol)


def separability_report(state: BipartiteState, grid_check=True, tol=1e-7) -> dict:
    """Witness plus (when certified) factorization deviation and a verdict string."""
    ppt = ppt_witness(state)
    report = {"witness_min_eig": ppt.min_eigenvalue}
    certified = False
    if state.certificate is not None and grid_check:
        fac = check_tomographic_factorization(state, tol=tol)
        report["factorization_max_dev"] = fac.max_deviation
        if fac.weight_deviation is not None:
            report["weight_max_dev"] = fac.weight_deviation
        certified = fac.passed
    elif state.certificate is not None:
        certified = True
    if ppt.entangled:
        report["verdict"] = "entangled"
    elif certified:
        report["verdict"] = "separable-certified"
    else:
        report["verdict"] = "inconclusive"
    return report


def product_of_marginals(state: BipartiteState) -> SeparableEnsemble:
    """A one-term certificate built from the reduced states (correct only for product states)."""
    return SeparableEnsemble([(1.0, state.reduced(0), state.reduced(1))])
