"""Star product of diagonal symbols.

The kernel ``K(z1, z2, z)`` is defined as the trace of the product of two
coherent projectors against the dequantizer, i.e. it is the symbol of an
operator product. It is therefore realised here by multiplying the
operators exactly in the dyad algebra; it is never integrated pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coherent import CoherentSpan, span_allclose, span_multiply, span_trace
from .diagonal import PhaseWeight, dequantize_span, weight_to_span
from .errors import OutOfClassError
from .fock import DEFAULT_POLICY, TruncationPolicy, fock_dim, span_to_fock


@dataclass(frozen=True)
class SymbolProduct:
    """Result of a star product: the operator, plus its weight when diagonal."""

    span: CoherentSpan
    weight: PhaseWeight | None = None

    def trace(self) -> complex:
        return span_trace(self.span)


def _as_span(operand) -> CoherentSpan:
    if isinstance(operand, SymbolProduct):
        return operand.span
    if isinstance(operand, CoherentSpan):
        return operand
    if isinstance(operand, PhaseWeight):
        if not operand.is_atomic():
            raise OutOfClassError("star product needs atoms-only weights",
                                  rule="Gaussian components are not closed under the star product")
        return weight_to_span(operand)
    raise TypeError(f"unsupported star operand {type(operand).__name__}")


def symbol_of(span: CoherentSpan) -> SymbolProduct:
    """Wrap an operator, attaching its atomic weight when it has one."""
    weight = None
    if span.is_diagonal() and np.all(np.abs(span.weights.imag) <= 1e-14 * (1 + np.abs(span.weights))):
        weight = dequantize_span(CoherentSpan(span.weights.real, span.left, span.right),
                                 allow_negative=True)
    return SymbolProduct(span, weight)


def star(*operands) -> SymbolProduct:
    """``phi_1 * phi_2 * ...`` evaluated left to right through the operator product."""
    if not operands:
        raise ValueError("star needs at least one operand")
    spans = [_as_span(op) for op in operands]
    result = spans[0]
    for s in spans[1:]:
        result = span_multiply(result, s)
    return symbol_of(result)


def star_trace(product) -> complex:
    """``int (phi_A * phi_B)(z) d^2z``, which is the trace of the product operator."""
    return span_trace(_as_span(product))


@dataclass
class AssociativityReport:
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def kernel_check_associativity(a, b, c, tol=1e-12) -> AssociativityReport:
    """Compare ``(a*b)*c`` with ``a*(b*c)`` dyad by dyad."""
    left = star(star(a, b), c).span
    right = star(a, star(b, c)).span
    diff = (left - right).merged()
    dev = float(np.abs(diff.weights).max(initial=0.0))
    return AssociativityReport(dev, tol)


def homomorphism_error(a, b, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Frobenius distance between the embedded product and the product of embeddings."""
    sa, sb = _as_span(a), _as_span(b)
    dim = fock_dim(max(sa.radius(), sb.radius()), policy)
    prod = span_to_fock(star(sa, sb).span, policy, dim=dim).mat
    ref = span_to_fock(sa, policy, dim=dim).mat @ span_to_fock(sb, policy, dim=dim).mat
    return float(np.linalg.norm(prod - ref))


def spans_equal(a, b, atol=1e-12) -> bool:
    return span_allclose(_as_span(a), _as_span(b), atol=atol)
