"""Nonlinear superposition rule for two orthogonal pure density states.

Given ``rho_i = |psi_i><psi_i|`` and a rank-one projector ``P0 = |chi><chi|``::

    rho = p1 rho1 + p2 rho2
          + sqrt(p1 p2) (rho1 P0 rho2 + rho2 P0 rho1) / sqrt(Tr rho1 P0 rho2 P0)

is the projector onto ``sqrt(p1)|psi1> + exp(i phase) sqrt(p2)|psi2>`` with
``phase = arg(<chi|psi1><psi2|chi>)`` (see :data:`PHASE_CONVENTION`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coherent import CoherentKet, CoherentSpan, span_multiply, span_trace
from .diagonal import PhaseWeight, weight_dim, weight_to_operator, weight_to_span
from .errors import OutOfClassError, PreconditionError
from .fock import (DEFAULT_POLICY, FockOperator, FockVector, TruncationPolicy, coherent_vector,
                   fock_dim, span_to_fock)
from .star import SymbolProduct, star, star_trace, symbol_of
from .tomography import FockTomogram, GaussianTomogram, as_ray

#: With P0 = |chi><chi| selects the relative phase arg(<chi|psi1><psi2|chi>).
#: Frozen from the brute-force comparison in tests/test_superposition.py.
PHASE_CONVENTION = "arg(<chi|psi1><psi2|chi>)"

ORTHO_TOL = 1e-8
# Tr(rho1 rho2) = |<psi1|psi2>|^2 cannot resolve ORTHO_TOL**2 = 1e-16 through
# cancelling dyad sums, so operator-only inputs get this rounding allowance.
ORTHO_TRACE_FLOOR = 1e-14
DENOM_MIN = 1e-14


def _is_span_like(x):
    return isinstance(x, (CoherentSpan, CoherentKet, SymbolProduct)) or (
        isinstance(x, PhaseWeight) and x.is_atomic())


def _span(x) -> CoherentSpan:
    if isinstance(x, CoherentSpan):
        return x
    if isinstance(x, CoherentKet):
        return x.projector()
    if isinstance(x, SymbolProduct):
        return x.span
    if isinstance(x, PhaseWeight):
        return weight_to_span(x)
    raise TypeError(f"no dyad form for {type(x).__name__}")


def _ket_overlap(x, y):
    """``|<x|y>|`` when both states are given as kets, else ``None``."""
    if isinstance(x, CoherentKet) and isinstance(y, CoherentKet) and x.modes == y.modes:
        return abs(x.inner(y))
    if isinstance(x, FockVector) and isinstance(y, FockVector):
        dim = max(x.dim, y.dim)
        return abs(x.padded(dim).inner(y.padded(dim)))
    return None


def _needed_dim(x, policy):
    if isinstance(x, FockVector):
        return x.dim
    if isinstance(x, FockOperator):
        return x.dim
    if isinstance(x, PhaseWeight) and not x.is_atomic():
        return weight_dim(x, policy)
    return fock_dim(_span(x).radius(), policy)


def _fock(x, dim, policy) -> FockOperator:
    if isinstance(x, FockVector):
        return x.padded(dim).projector()
    if isinstance(x, FockOperator):
        return x.padded(dim)
    if isinstance(x, PhaseWeight) and not x.is_atomic():
        return weight_to_operator(x, policy, dim=dim)
    return span_to_fock(_span(x), policy, dim=dim)


def _ket(x, dim, policy) -> FockVector:
    """Unit ket of a pure state (global phase fixed by the largest amplitude for operators)."""
    if isinstance(x, FockVector):
        return x.padded(dim)
    if isinstance(x, CoherentKet) and x.modes == 1:
        amps = sum(c * coherent_vector(p[0], dim).amps for c, p in zip(x.coeffs, x.points))
        return FockVector(amps)
    vals, vecs = np.linalg.eigh(_fock(x, dim, policy).mat)
    v = vecs[:, -1]
    return FockVector(v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))])))


@dataclass
class SuperpositionSpec:
    """Inputs of the rule; states may be Fock kets/operators, dyad spans, coherent kets or weights."""

    p1: float
    p2: float
    state1: object
    state2: object
    p0: object
    policy: TruncationPolicy = field(default=DEFAULT_POLICY)

    def __post_init__(self):
        if not (0 <= self.p1 <= 1 and 0 <= self.p2 <= 1):
            raise PreconditionError("p1 and p2 must lie in [0, 1]")
        if abs(self.p1 + self.p2 - 1) > 1e-12:
            raise PreconditionError(f"p1 + p2 = {self.p1 + self.p2!r} != 1")

    @property
    def span_backend(self) -> bool:
        return all(_is_span_like(x) for x in (self.state1, self.state2, self.p0))

    def dim(self) -> int:
        return max(_needed_dim(x, self.policy) for x in (self.state1, self.state2, self.p0))

    def fock_operators(self, dim=None):
        dim = self.dim() if dim is None else dim
        return tuple(_fock(x, dim, self.policy) for x in (self.state1, self.state2, self.p0))

    def spans(self):
        return tuple(_span(x) for x in (self.state1, self.state2, self.p0))

    def validate(self):
        """Check purity, orthogonality, rank-one ``P0`` and the denominator; return it."""
        if self.span_backend:
            r1, r2, p0 = self.spans()
            tr = span_trace
            mul = span_multiply
        else:
            r1, r2, p0 = self.fock_operators()

            def tr(a):
                return a.trace()

            def mul(a, b):
                return a @ b
        for name, rho in (("state1", r1), ("state2", r2), ("P0", p0)):
            t = tr(rho)
            if abs(t - 1) > 1e-10:
                raise PreconditionError(f"{name} has trace {t.real:.12g}, expected 1")
            pur = tr(mul(rho, rho)).real
            if abs(pur - 1) > 1e-8:
                what = "P0 must be a rank-one projector" if name == "P0" else f"{name} is not pure"
                raise PreconditionError(f"{what} (Tr rho^2 = {pur:.10g})")
        amp = _ket_overlap(self.state1, self.state2)
        if amp is not None:
            if amp > ORTHO_TOL:
                raise PreconditionError(f"states are not orthogonal: |<psi1|psi2>| = {amp:.3e}")
        else:
            ov = tr(mul(r1, r2)).real
            if ov > ORTHO_TOL**2 + ORTHO_TRACE_FLOOR:
                raise PreconditionError(f"states are not orthogonal: |<psi1|psi2>|^2 = {ov:.3e}")
        denom = tr(mul(mul(r1, p0), mul(r2, p0))).real
        if denom <= DENOM_MIN:
            raise PreconditionError(
                f"Tr(rho1 P0 rho2 P0) = {denom:.3e}: P0 is orthogonal to an input state")
        return denom


def projector_phase(psi1: FockVector, psi2: FockVector, chi: FockVector) -> float:
    """Relative phase selected by ``P0 = |chi><chi|``."""
    return float(np.angle(chi.inner(psi1) * psi2.inner(chi)))


def superpose_kets(spec: SuperpositionSpec, phase: float) -> FockVector:
    """``sqrt(p1)|psi1> + exp(i phase) sqrt(p2)|psi2>`` in the number basis."""
    dim = spec.dim()
    k1 = _ket(spec.state1, dim, spec.policy)
    k2 = _ket(spec.state2, dim, spec.policy)
    if abs(k1.inner(k2)) > ORTHO_TOL:
        raise PreconditionError(f"states are not orthogonal: |<psi1|psi2>| = {abs(k1.inner(k2)):.3e}")
    return FockVector(np.sqrt(spec.p1) * k1.amps + np.exp(1j * phase) * np.sqrt(spec.p2) * k2.amps)


def oracle_ket(spec: SuperpositionSpec) -> FockVector:
    """The ket whose projector the density rule must reproduce."""
    dim = spec.dim()
    k1, k2, chi = (_ket(x, dim, spec.policy) for x in (spec.state1, spec.state2, spec.p0))
    return superpose_kets(spec, projector_phase(k1, k2, chi))


def _combine(p1, p2, r1, r2, cross, denom):
    return p1 * r1 + p2 * r2 + (np.sqrt(p1 * p2) / np.sqrt(denom)) * cross


def superpose_densities(spec: SuperpositionSpec):
    """Density-operator rule; a :class:`CoherentSpan` when every input has dyad form."""
    denom = spec.validate()
    if spec.span_backend:
        r1, r2, p0 = spec.spans()
        cross = span_multiply(span_multiply(r1, p0), r2) + span_multiply(span_multiply(r2, p0), r1)
        return _combine(spec.p1, spec.p2, r1, r2, cross, denom).merged()
    r1, r2, p0 = spec.fock_operators()
    cross = r1 @ p0 @ r2 + r2 @ p0 @ r1
    out = _combine(spec.p1, spec.p2, r1, r2, cross, denom)
    # restore exact Hermiticity lost to rounding
    return FockOperator(0.5 * (out.mat + out.mat.conj().T))


def superpose_symbols(p1, p2, phi1, phi2, phi0) -> SymbolProduct:
    """Weight-function rule using the star product.

    Operands are atoms-only weights or dyad spans carrying the symbol in
    operator form; orthogonal pure states never are single atoms, so the
    inputs themselves are generally spans.
    """
    for x in (phi1, phi2, phi0):
        if isinstance(x, PhaseWeight) and not x.is_atomic():
            raise OutOfClassError("superpose_symbols needs atoms-only weights",
                                  rule="star product closed on atoms only")
    spec = SuperpositionSpec(p1, p2, _span(phi1), _span(phi2), _span(phi0))
    spec.validate()
    denom = star_trace(star(phi1, phi0, phi2, phi0))
    if abs(denom.imag) > 1e-12 * abs(denom):
        raise PreconditionError(f"denominator trace is not real: {denom}")
    cross = star(phi1, phi0, phi2).span + star(phi2, phi0, phi1).span
    total = _combine(p1, p2, _span(phi1), _span(phi2), cross, denom.real).merged()
    return symbol_of(total)


@dataclass
class SuperposedTomogram:
    """Tomogram of the superposed state together with its three additive terms.

    ``cross`` is the tomogram of ``(rho1 P0 rho2 + rho2 P0 rho1)/sqrt(Tr rho1 P0 rho2 P0)``.
    """

    p1: float
    p2: float
    total: object
    w1: object
    w2: object
    cross: object

    def values(self, ray, xs):
        return self.total.values(ray, xs)

    def structure_deviation(self, rays, xs) -> float:
        worst = 0.0
        for ray in rays:
            ray = as_ray(ray)
            parts = (self.p1 * self.w1.values(ray, xs) + self.p2 * self.w2.values(ray, xs)
                     + np.sqrt(self.p1 * self.p2) * self.cross.values(ray, xs))
            worst = max(worst, float(np.abs(self.total.values(ray, xs) - parts).max()))
        return worst

    def cross_integral(self, ray, n=801) -> complex:
        xs = self.total.default_xs(ray, n, 10.0)
        return complex(np.trapezoid(self.cross.values(ray, xs), xs))


def superpose_tomograms(spec: SuperpositionSpec) -> SuperposedTomogram:
    """Tomographic rule, realised through the operator route term by term."""
    denom = spec.validate()
    rho = superpose_densities(spec)
    if spec.span_backend:
        r1, r2, p0 = spec.spans()
        cross = (span_multiply(span_multiply(r1, p0), r2)
                 + span_multiply(span_multiply(r2, p0), r1)) * (1 / np.sqrt(denom))
        make = GaussianTomogram.from_span
        return SuperposedTomogram(spec.p1, spec.p2, make(rho), make(r1), make(r2), make(cross))
    dim = rho.dim
    r1, r2, p0 = spec.fock_operators(dim)
    cross = (r1 @ p0 @ r2 + r2 @ p0 @ r1) * (1 / np.sqrt(denom))
    cross = FockOperator(0.5 * (cross.mat + cross.mat.conj().T))
    return SuperposedTomogram(spec.p1, spec.p2, FockTomogram(rho), FockTomogram(r1),
                              FockTomogram(r2), FockTomogram(cross, validate=False))
