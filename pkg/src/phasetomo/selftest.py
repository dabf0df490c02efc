"""Fast invariant suite behind ``phasetomo selftest``."""

from __future__ import annotations

import numpy as np

from .bipartite import SeparableEnsemble, build_separable, check_tomographic_factorization, ppt_witness, two_mode_cat
from .coherent import CoherentKet, CoherentSpan, coherent_overlap, gram_schmidt
from .diagonal import PhaseWeight, p_to_q, q_to_p_gaussian, husimi_of_weight, tomogram_to_weight_gaussian, weight_tomogram
from .fock import coherent_vector, purity, span_to_fock
from .star import kernel_check_associativity, star
from .superposition import SuperpositionSpec, oracle_ket, superpose_densities
from .tomography import FockTomogram, GaussianTomogram, Ray, check_probability, vacuum_tomogram

RAYS = [Ray(1, 0), Ray(0, 1), Ray(0.6, 0.8), Ray(-1.3, 0.4), Ray(2.0, -0.5)]


def _vacuum_tomogram():
    xs = np.linspace(-4, 4, 201)
    tomo = FockTomogram(coherent_vector(0, 1).projector())
    err = max(np.abs(tomo.values(r, xs) - vacuum_tomogram(xs, r.mu, r.nu)).max() for r in RAYS)
    return err <= 1e-8, f"max error {err:.2e}"


def _overlap():
    err = abs(coherent_vector(1, 40).inner(coherent_vector(1j, 40)) - coherent_overlap(1, 1j))
    return err <= 1e-10, f"error {err:.2e}"


def _probability():
    phi = PhaseWeight([(0.3, 1 + 1j), (0.7, -0.5)], [])
    min_val, resid = check_probability(weight_tomogram(phi), RAYS)
    return min_val >= -1e-9 and resid <= 1e-6, f"min {min_val:.2e}, residual {resid:.2e}"


def _duality():
    phi = PhaseWeight([(0.4, 0.5j)], [(0.6, 1 - 1j, 0.7)])
    back = tomogram_to_weight_gaussian(weight_tomogram(phi))
    z = np.array([0, 1 + 1j, -2j])
    err_t = abs(back.gaussians[0][2] - 0.7) + abs(back.atoms[0][1] - 0.5j)
    err_q = np.abs(p_to_q(q_to_p_gaussian(husimi_of_weight(phi)), z) - p_to_q(phi, z)).max()
    return max(err_t, err_q) <= 1e-8, f"errors {err_t:.2e}, {err_q:.2e}"


def _star():
    vac = PhaseWeight.vacuum()
    idem = star(vac, vac).weight
    ok = idem is not None and idem.atoms == [(1.0, 0j)]
    rep = kernel_check_associativity(PhaseWeight.atom(1), PhaseWeight.atom(0.5j), PhaseWeight.atom(-1 + 0.3j))
    return ok and rep.passed, f"vacuum idempotent {ok}, associativity {rep.max_deviation:.1e}"


def _superposition():
    k1, k2 = gram_schmidt([CoherentKet.coherent(2.0), CoherentKet.coherent(-2.0)])
    spec = SuperpositionSpec(0.5, 0.5, k1, k2, CoherentSpan.projector(0.3))
    rho = superpose_densities(spec)
    mat = span_to_fock(rho, dim=spec.dim())
    dist = np.linalg.norm(mat.mat - oracle_ket(spec).projector().mat)
    return dist <= 1e-8, f"purity {purity(mat):.12f}, oracle distance {dist:.1e}"


def _bipartite():
    ens = SeparableEnsemble([(0.5, PhaseWeight.vacuum(), PhaseWeight.vacuum()),
                             (0.5, PhaseWeight.atom(1.0), PhaseWeight.atom(1.0))])
    sep = build_separable(ens)
    fac = check_tomographic_factorization(sep, n=32)
    cat = ppt_witness(two_mode_cat(1.5))
    ok = fac.passed and not ppt_witness(sep).entangled and cat.entangled
    return ok, f"factorization {fac.max_deviation:.1e}, cat PPT eigenvalue {cat.min_eigenvalue:.4f}"


CHECKS = [
    ("vacuum tomogram closed form", _vacuum_tomogram),
    ("coherent overlap vs Fock", _overlap),
    ("probability contract", _probability),
    ("P/Q and P/tomogram duality", _duality),
    ("star product", _star),
    ("superposition rule", _superposition),
    ("bipartite certificate and witness", _bipartite),
]


def run_selftest():
    results = []
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
