import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from phasetomo.coherent import CoherentKet, CoherentSpan, gram_schmidt, span_trace
from phasetomo.diagonal import PhaseWeight
from phasetomo.errors import OutOfClassError, PreconditionError
from phasetomo.fock import FockOperator, FockVector, number_state, purity, span_to_fock
from phasetomo.star import star, star_trace
from phasetomo.superposition import (PHASE_CONVENTION, SuperpositionSpec, oracle_ket, superpose_densities,
                                     superpose_kets, superpose_symbols, superpose_tomograms)
from phasetomo.tomography import FockTomogram, GaussianTomogram, Ray, Wavefunction, tomogram_of_pure

from conftest import random_unit

RAYS5 = [Ray(1, 0), Ray(0, 1), Ray(0.6, 0.8), Ray(-1.3, 0.4), Ray(0.7, -0.9)]


def density_rule(p1, p2, r1, r2, p0):
    """The rule written out with plain matrices."""
    denom = np.trace(r1 @ p0 @ r2 @ p0).real
    return p1 * r1 + p2 * r2 + np.sqrt(p1 * p2) * (r1 @ p0 @ r2 + r2 @ p0 @ r1) / np.sqrt(denom)


def orthonormal_pair(dim, rng):
    q, _ = np.linalg.qr(rng.normal(size=(dim, 2)) + 1j * rng.normal(size=(dim, 2)))
    return q[:, 0], q[:, 1]


def cat_basis(alpha):
    return gram_schmidt([CoherentKet.coherent(alpha), CoherentKet.coherent(-alpha)])


def fock_spec(p1, u1, u2, chi):
    return SuperpositionSpec(p1, 1 - p1, FockVector(u1), FockVector(u2), FockVector(chi))


# ---------------------------------------------------------------- phase convention


def test_phase_convention_brute_force_in_three_dimensions():
    rng = np.random.default_rng(3)
    worst_right, best_wrong = 0.0, np.inf
    for _ in range(200):
        u1, u2 = orthonormal_pair(3, rng)
        chi = random_unit(3, rng)
        p1 = rng.uniform(0.1, 0.9)
        rho = density_rule(p1, 1 - p1, np.outer(u1, u1.conj()), np.outer(u2, u2.conj()), np.outer(chi, chi.conj()))
        phase = np.angle(np.vdot(chi, u1) * np.vdot(u2, chi))
        for sign in (1, -1):
            psi = np.sqrt(p1) * u1 + np.exp(1j * sign * phase) * np.sqrt(1 - p1) * u2
            err = np.linalg.norm(rho - np.outer(psi, psi.conj()))
            if sign == 1:
                worst_right = max(worst_right, err)
            else:
                best_wrong = min(best_wrong, err)
    assert worst_right <= 1e-12
    assert best_wrong > 1e-6
    assert PHASE_CONVENTION == "arg(<chi|psi1><psi2|chi>)"


# ---------------------------------------------------------------- kets


def test_superpose_kets_examples():
    e0, e1 = number_state(0, 2), number_state(1, 2)
    plus = FockVector(np.array([1, 1]) / np.sqrt(2))
    np.testing.assert_allclose(superpose_kets(SuperpositionSpec(1, 0, e0, e1, plus), 0.3).amps, [1, 0], atol=1e-15)
    np.testing.assert_allclose(superpose_kets(SuperpositionSpec(0.5, 0.5, e0, e1, plus), 0).amps,
                               plus.amps, atol=1e-15)
    k1, k2 = cat_basis(2.0)
    out = superpose_kets(SuperpositionSpec(0.5, 0.5, k1, k2, CoherentSpan.projector(0)), 0)
    assert out.norm() == pytest.approx(1, abs=1e-10)


def test_superpose_kets_rejects_non_orthogonal():
    spec = SuperpositionSpec(0.5, 0.5, number_state(0, 3), FockVector(np.array([1, 1, 0]) / np.sqrt(2)),
                             number_state(0, 3))
    with pytest.raises(PreconditionError, match="orthogonal"):
        superpose_kets(spec, 0)


# ---------------------------------------------------------------- densities


def test_superpose_densities_qubit_example():
    e0, e1 = number_state(0, 2), number_state(1, 2)
    plus = FockVector(np.array([1, 1]) / np.sqrt(2))
    rho = superpose_densities(SuperpositionSpec(0.5, 0.5, e0, e1, plus))
    np.testing.assert_allclose(rho.mat, np.full((2, 2), 0.5), atol=1e-15)
    minus = FockVector(np.array([1, -1]) / np.sqrt(2))
    rho = superpose_densities(SuperpositionSpec(0.5, 0.5, e0, e1, minus))
    np.testing.assert_allclose(rho.mat, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_p1_one_returns_first_state():
    u1, u2 = orthonormal_pair(4, np.random.default_rng(0))
    rho = superpose_densities(fock_spec(1.0, u1, u2, random_unit(4, np.random.default_rng(1))))
    np.testing.assert_allclose(rho.mat, np.outer(u1, u1.conj()), atol=1e-15)


def test_coherent_cat_is_pure_and_interferes():
    k1, k2 = cat_basis(2.0)
    spec = SuperpositionSpec(0.5, 0.5, k1, k2, CoherentSpan.projector(0))
    rho = superpose_densities(spec)
    assert isinstance(rho, CoherentSpan)
    assert span_trace(rho) == pytest.approx(1, abs=1e-12)
    assert span_trace(rho @ rho).real == pytest.approx(1, abs=1e-8)
    oracle = oracle_ket(spec)
    np.testing.assert_allclose(span_to_fock(rho, dim=oracle.dim).mat, oracle.projector().mat, atol=1e-10)
    xs = np.linspace(-3, 3, 241)
    w = superpose_tomograms(spec).values(Ray(0, 1), xs)
    pure = tomogram_of_pure(Wavefunction.from_fock(oracle), Ray(0, 1), xs)
    assert np.abs(w - pure).max() <= 1e-8
    minima = np.flatnonzero((w[1:-1] < w[:-2]) & (w[1:-1] < w[2:]))
    assert len(minima) >= 4  # fringes; a Gaussian has none
    assert w[minima].min() <= 1e-3 * w.max()


def test_rejects_bad_preconditions():
    e0, e1 = number_state(0, 3), number_state(1, 3)
    with pytest.raises(PreconditionError, match="!= 1"):
        SuperpositionSpec(0.5, 0.6, e0, e1, e0)
    with pytest.raises(PreconditionError, match="orthogonal to an input"):
        superpose_densities(SuperpositionSpec(0.5, 0.5, e0, e1, number_state(2, 3)))
    with pytest.raises(PreconditionError, match="not orthogonal"):
        superpose_densities(SuperpositionSpec(0.5, 0.5, e0, FockVector(np.array([1, 1, 0]) / np.sqrt(2)), e0))
    mixed = FockOperator(np.diag([0.5, 0.5, 0]).astype(complex))
    with pytest.raises(PreconditionError, match="not pure"):
        superpose_densities(SuperpositionSpec(0.5, 0.5, mixed, number_state(2, 3), e0))
    with pytest.raises(PreconditionError, match="rank-one"):
        superpose_densities(SuperpositionSpec(0.5, 0.5, e0, e1, mixed))


@given(st.integers(2, 8), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_purity_and_oracle_in_small_dimensions(dim, p1, seed):
    rng = np.random.default_rng(seed)
    u1, u2 = orthonormal_pair(dim, rng)
    chi = random_unit(dim, rng)
    assume(abs(np.vdot(chi, u1)) > 0.05 and abs(np.vdot(chi, u2)) > 0.05)
    spec = fock_spec(p1, u1, u2, chi)
    rho = superpose_densities(spec)
    assert purity(rho) == pytest.approx(1, abs=1e-8)
    assert rho.trace() == pytest.approx(1, abs=1e-8)
    assert np.linalg.norm(rho.mat - oracle_ket(spec).projector().mat) <= 1e-8


# ---------------------------------------------------------------- symbols


def test_superpose_symbols_rejects_degenerate_and_gaussian():
    vac = PhaseWeight.vacuum()
    with pytest.raises(PreconditionError):
        superpose_symbols(0.5, 0.5, vac, vac, vac)
    with pytest.raises(OutOfClassError):
        superpose_symbols(0.5, 0.5, vac, PhaseWeight.thermal(1.0), vac)


@pytest.mark.parametrize("alpha", [1.0, 1.5 + 0.5j, 2.0])
def test_symbol_route_matches_operator_route(alpha):
    k1, k2 = cat_basis(alpha)
    r1, r2, p0 = k1.projector(), k2.projector(), CoherentSpan.projector(0.3j)
    via_symbols = superpose_symbols(0.3, 0.7, r1, r2, p0)
    via_ops = superpose_densities(SuperpositionSpec(0.3, 0.7, k1, k2, p0))
    dim = 48
    diff = span_to_fock(via_symbols.span, dim=dim).mat - span_to_fock(via_ops, dim=dim).mat
    assert np.abs(diff).max() <= 1e-10
    denom = star_trace(star(r1, p0, r2, p0))
    assert abs(denom - span_trace(r1 @ p0 @ r2 @ p0)) <= 1e-12


# ---------------------------------------------------------------- tomograms


def test_tomogram_p1_one_is_first_tomogram():
    k1, k2 = cat_basis(1.0)
    tomo = superpose_tomograms(SuperpositionSpec(1.0, 0.0, k1, k2, CoherentSpan.projector(0)))
    w1 = GaussianTomogram.from_span(k1.projector())
    for ray in RAYS5:
        xs = tomo.total.default_xs(ray, 41)
        assert np.array_equal(tomo.values(ray, xs), w1.values(ray, xs))


def test_qubit_tomogram_matches_pure_state_formula():
    e0, e1 = number_state(0, 2), number_state(1, 2)
    spec = SuperpositionSpec(0.5, 0.5, e0, e1, FockVector(np.array([1, 1]) / np.sqrt(2)))
    tomo = superpose_tomograms(spec)
    psi = Wavefunction.from_fock(oracle_ket(spec))
    xs = np.linspace(-5, 5, 101)
    for ray in RAYS5:
        assert np.abs(tomo.values(ray, xs) - tomogram_of_pure(psi, ray, xs)).max() <= 1e-8
    assert tomo.structure_deviation(RAYS5, xs) <= 1e-8


@pytest.mark.parametrize("backend", ["span", "fock"])
def test_cross_term_integrates_to_zero(backend):
    k1, k2 = cat_basis(1.2)
    if backend == "span":
        spec = SuperpositionSpec(0.4, 0.6, k1, k2, CoherentSpan.projector(0.5))
    else:
        u1, u2 = orthonormal_pair(5, np.random.default_rng(4))
        spec = fock_spec(0.4, u1, u2, random_unit(5, np.random.default_rng(5)))
    tomo = superpose_tomograms(spec)
    rng = np.random.default_rng(9)
    for mu, nu in rng.normal(size=(10, 2)):
        ray = Ray(mu, nu)
        assert abs(tomo.cross_integral(ray)) <= 1e-8
        assert tomo.w1.normalization(ray) == pytest.approx(1, abs=1e-8)
        assert tomo.total.normalization(ray) == pytest.approx(1, abs=1e-8)
    assert tomo.structure_deviation(RAYS5, np.linspace(-4, 4, 33)) <= 1e-8


def test_three_routes_agree_in_tomogram_space():
    k1, k2 = cat_basis(1.5 - 0.5j)
    p0 = CoherentSpan.projector(0.2 + 0.2j)
    spec = SuperpositionSpec(0.35, 0.65, k1, k2, p0)
    op_route = FockTomogram(span_to_fock(superpose_densities(spec)))
    sym_route = GaussianTomogram.from_span(superpose_symbols(0.35, 0.65, k1.projector(), k2.projector(), p0).span)
    tomo_route = superpose_tomograms(spec)
    xs = np.linspace(-6, 6, 61)
    for ray in RAYS5:
        a, b, c = op_route.values(ray, xs), sym_route.values(ray, xs), tomo_route.values(ray, xs)
        assert max(np.abs(a - b).max(), np.abs(b - c).max(), np.abs(a - c).max()) <= 1e-8
