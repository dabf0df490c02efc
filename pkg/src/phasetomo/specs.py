"""JSON state specifications shared by the CLI.

Every document is an object with a ``kind`` key. Complex numbers may be
written as a plain number, a ``[re, im]`` pair or ``{"re": .., "im": ..}``.

Single-mode kinds::

    {"kind": "vacuum"}
    {"kind": "fock", "n": 1, "dim": 4}
    {"kind": "coherent", "alpha": [1.0, 0.5]}
    {"kind": "cat", "alpha": 2.0, "phase": 0.0}
    {"kind": "thermal", "nbar": 1.0, "center": 0}
    {"kind": "mixture", "components": [{"p": 0.5, "alpha": 0}, {"p": 0.5, "state": {...}}]}
    {"kind": "phase-weight", "atoms": [{"w": 1, "x": 0, "y": 0}], "gaussians": []}
    {"kind": "coherent-ket", "coeffs": [1, 1], "points": [1, -1]}
    {"kind": "span", "dyads": [{"w": [1, 0], "left": [[0, 0]], "right": [[0, 0]]}]}
    {"kind": "ket", "amps": [[0.6, 0], [0, 0.8]]}
    {"kind": "density", "re": [[...]], "im": [[...]]}
    {"kind": "gaussian-tomogram", "components": [{"w": 1, "mean_mu": 0, "mean_nu": 0, "var_scale": 0.5}]}

Two-mode kind::

    {"kind": "two-mode", "ensemble": [{"p": 1, "mode1": {...}, "mode2": {...}}]}
    {"kind": "two-mode", "cat": {"alpha": 1.5, "dim": 24, "phase": 0}}
    {"kind": "two-mode", "atoms": [{"w": 1, "x": 0, "y": 0, "x2": 0, "y2": 0}]}
"""

from __future__ import annotations

import numbers

import numpy as np

from .bipartite import BipartiteState, SeparableEnsemble, build_separable, two_mode_cat
from .coherent import CoherentKet, CoherentSpan, cat_ket
from .diagonal import PhaseWeight, tomogram_to_weight_gaussian
from .fock import DEFAULT_POLICY, FockOperator, FockVector, TruncationPolicy, number_state, validate_density
from .tomography import GaussianTomogram


class SpecError(ValueError):
    """Malformed or schema-violating state document."""


def parse_complex(value, what="value") -> complex:
    if isinstance(value, bool):
        raise SpecError(f"{what}: expected a number, got a boolean")
    if isinstance(value, numbers.Number):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_real(value[0], what), _real(value[1], what))
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return complex(_real(value.get("re", 0.0), what), _real(value.get("im", 0.0), what))
    raise SpecError(f"{what}: cannot read {value!r} as a complex number")


def _real(value, what="value") -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise SpecError(f"{what}: expected a real number, got {value!r}")
    out = float(value)
    if not np.isfinite(out):
        raise SpecError(f"{what}: must be finite")
    return out


def _require(doc, key, kind):
    if key not in doc:
        raise SpecError(f"'{kind}' state needs the key '{key}'")
    return doc[key]


def _list(value, what):
    if not isinstance(value, list):
        raise SpecError(f"{what}: expected a list")
    return value


def _complex_matrix(doc, kind):
    if "re" in doc:
        re = np.array(doc["re"], dtype=float)
        im = np.array(doc.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise SpecError(f"'{kind}': re and im shapes differ")
        return re + 1j * im
    rows = _list(_require(doc, "matrix", kind), "matrix")
    return np.array([[parse_complex(v, "matrix entry") for v in _list(r, "matrix row")] for r in rows])


def load_state(doc, policy: TruncationPolicy = DEFAULT_POLICY):
    """Build the state object described by ``doc``.

    Returns a :class:`PhaseWeight`, :class:`CoherentSpan`, :class:`CoherentKet`,
    :class:`FockVector`, :class:`FockOperator`, :class:`GaussianTomogram` or
    :class:`BipartiteState`.
    """
    if not isinstance(doc, dict):
        raise SpecError("state document must be a JSON object")
    kind = doc.get("kind")
    loader = _LOADERS.get(kind)
    if loader is None:
        raise SpecError(f"unknown state kind {kind!r}; expected one of {sorted(_LOADERS)}")
    try:
        return loader(doc, policy)
    except SpecError:
        raise
    except (TypeError, KeyError) as exc:
        raise SpecError(f"'{kind}' state: {exc}") from exc


def _vacuum(doc, policy):
    return PhaseWeight.vacuum()


def _fock(doc, policy):
    n = _require(doc, "n", "fock")
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise SpecError("'fock': n must be a nonnegative integer")
    dim = doc.get("dim", n + 1)
    if isinstance(dim, bool) or not isinstance(dim, int) or dim <= n:
        raise SpecError(f"'fock': dim must be an integer > n = {n}")
    return number_state(n, dim)


def _coherent(doc, policy):
    return PhaseWeight.atom(parse_complex(_require(doc, "alpha", "coherent"), "alpha"))


def _cat(doc, policy):
    alpha = parse_complex(_require(doc, "alpha", "cat"), "alpha")
    if alpha == 0:
        raise SpecError("'cat': alpha must be non-zero")
    return cat_ket(alpha, _real(doc.get("phase", 0.0), "phase"))


def _thermal(doc, policy):
    nbar = _real(_require(doc, "nbar", "thermal"), "nbar")
    if nbar < 0:
        raise SpecError("'thermal': nbar must be nonnegative")
    return PhaseWeight.thermal(nbar, parse_complex(doc.get("center", 0.0), "center"))


def _mixture(doc, policy):
    comps = _list(_require(doc, "components", "mixture"), "components")
    if not comps:
        raise SpecError("'mixture': needs at least one component")
    probs, states = [], []
    for c in comps:
        p = _real(_require(c, "p", "mixture component"), "p")
        if p < 0:
            raise SpecError("'mixture': component weights must be nonnegative")
        probs.append(p)
        if "alpha" in c:
            states.append(PhaseWeight.atom(parse_complex(c["alpha"], "alpha")))
        else:
            states.append(load_state(_require(c, "state", "mixture component"), policy))
    if abs(sum(probs) - 1) > 1e-10:
        raise SpecError(f"'mixture': weights sum to {sum(probs):.12g}, not 1")
    return mix(probs, states, policy)


def mix(probs, states, policy: TruncationPolicy = DEFAULT_POLICY):
    """Convex combination; stays in the weight or span class whenever every input does."""
    if all(isinstance(s, PhaseWeight) for s in states):
        atoms = [(p * w, z) for p, s in zip(probs, states) for w, z in s.atoms]
        gaussians = [(p * w, c, v) for p, s in zip(probs, states) for w, c, v in s.gaussians]
        return PhaseWeight(atoms, gaussians)
    spans = [as_span(s) for s in states]
    if all(s is not None for s in spans):
        out = CoherentSpan.zero()
        for p, s in zip(probs, spans):
            out = out + p * s
        return out
    from .superposition import _fock, _needed_dim
    dim = max(_needed_dim(s, policy) for s in states)
    return FockOperator(sum(p * _fock(s, dim, policy).mat for p, s in zip(probs, states)))


def as_span(state):
    """Exact dyad form of a single-mode state, or ``None``."""
    if isinstance(state, CoherentSpan):
        return state
    if isinstance(state, CoherentKet):
        return state.projector()
    if isinstance(state, PhaseWeight) and state.is_atomic():
        return CoherentSpan(state.atom_weights, state.atom_locs, state.atom_locs)
    return None


def _phase_weight(doc, policy):
    for a in doc.get("atoms", []):
        if "x2" in a:
            raise SpecError("'phase-weight' is single-mode; use kind 'two-mode' with atoms")
    try:
        return PhaseWeight.from_dict(doc)
    except KeyError as exc:
        raise SpecError(f"'phase-weight': component missing {exc}") from exc


def _coherent_ket(doc, policy):
    coeffs = [parse_complex(c, "coeff") for c in _list(_require(doc, "coeffs", "coherent-ket"), "coeffs")]
    points = [parse_complex(z, "point") for z in _list(_require(doc, "points", "coherent-ket"), "points")]
    if len(coeffs) != len(points) or not coeffs:
        raise SpecError("'coherent-ket': coeffs and points must be non-empty and of equal length")
    ket = CoherentKet(coeffs, points)
    if ket.norm() == 0:
        raise SpecError("'coherent-ket': zero vector")
    return ket.normalized()


def _span(doc, policy):
    dyads = _list(_require(doc, "dyads", "span"), "dyads")
    w = [parse_complex(d["w"], "w") for d in dyads]
    left = [[parse_complex(z, "left") for z in _list(d["left"], "left")] for d in dyads]
    right = [[parse_complex(z, "right") for z in _list(d["right"], "right")] for d in dyads]
    if not dyads:
        raise SpecError("'span': needs at least one dyad")
    return CoherentSpan(w, np.array(left), np.array(right))


def _ket(doc, policy):
    if "re" in doc:
        amps = np.array(doc["re"], dtype=float) + 1j * np.array(doc.get("im", np.zeros(len(doc["re"]))), dtype=float)
    else:
        amps = np.array([parse_complex(a, "amp") for a in _list(_require(doc, "amps", "ket"), "amps")])
    if amps.ndim != 1 or amps.size == 0:
        raise SpecError("'ket': amplitudes must form a non-empty list")
    vec = FockVector(amps)
    if abs(vec.norm() - 1) > 1e-10:
        raise SpecError(f"'ket': norm {vec.norm():.12g} differs from 1")
    return vec


def _density(doc, policy):
    mat = _complex_matrix(doc, "density")
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.size == 0:
        raise SpecError("'density': matrix must be square and non-empty")
    dims = doc.get("dims")
    return validate_density(FockOperator(mat, tuple(dims) if dims else None))


def _gaussian_tomogram(doc, policy):
    comps = _list(_require(doc, "components", "gaussian-tomogram"), "components")
    if not comps:
        raise SpecError("'gaussian-tomogram': needs at least one component")
    cols = {k: [_real(c[k], k) for c in comps] for k in ("w", "mean_mu", "mean_nu", "var_scale")}
    if any(w < 0 for w in cols["w"]) or abs(sum(cols["w"]) - 1) > 1e-10:
        raise SpecError("'gaussian-tomogram': weights must be nonnegative and sum to 1")
    if any(t <= 0 for t in cols["var_scale"]):
        raise SpecError("'gaussian-tomogram': var_scale must be positive")
    return GaussianTomogram(cols["w"], cols["mean_mu"], cols["mean_nu"], cols["var_scale"])


def _two_mode(doc, policy):
    if "cat" in doc:
        c = doc["cat"]
        dim = c.get("dim", 24)
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 2:
            raise SpecError("'two-mode' cat: dim must be an integer >= 2")
        return two_mode_cat(parse_complex(_require(c, "alpha", "two-mode cat"), "alpha"), dim,
                            _real(c.get("phase", 0.0), "phase"), policy)
    if "atoms" in doc:
        terms = []
        for a in _list(doc["atoms"], "atoms"):
            z1 = complex(_real(a["x"], "x"), _real(a["y"], "y"))
            z2 = complex(_real(a.get("x2", 0.0), "x2"), _real(a.get("y2", 0.0), "y2"))
            terms.append((_real(a["w"], "w"), PhaseWeight.atom(z1), PhaseWeight.atom(z2)))
        return build_separable(_ensemble(terms), policy)
    if "ensemble" in doc:
        terms = []
        for t in _list(doc["ensemble"], "ensemble"):
            a = single_mode(load_state(_require(t, "mode1", "ensemble term"), policy))
            b = single_mode(load_state(_require(t, "mode2", "ensemble term"), policy))
            terms.append((_real(_require(t, "p", "ensemble term"), "p"), a, b))
        return build_separable(_ensemble(terms), policy)
    raise SpecError("'two-mode' state needs one of 'ensemble', 'cat' or 'atoms'")


def _ensemble(terms):
    try:
        return SeparableEnsemble(terms)
    except ValueError as exc:
        raise SpecError(f"'two-mode': {exc}") from exc


def single_mode(state):
    """Reject two-mode documents where a single mode is expected; tomograms become weights."""
    if isinstance(state, BipartiteState):
        raise SpecError("a single-mode state is required here")
    if isinstance(state, GaussianTomogram):
        return tomogram_to_weight_gaussian(state)
    return state


_LOADERS = {
    "vacuum": _vacuum,
    "fock": _fock,
    "coherent": _coherent,
    "cat": _cat,
    "thermal": _thermal,
    "mixture": _mixture,
    "phase-weight": _phase_weight,
    "coherent-ket": _coherent_ket,
    "span": _span,
    "ket": _ket,
    "density": _density,
    "gaussian-tomogram": _gaussian_tomogram,
    "two-mode": _two_mode,
}


def density_to_dict(rho: FockOperator) -> dict:
    out = {"kind": "density", "dim": rho.dim, "re": rho.mat.real.tolist(), "im": rho.mat.imag.tolist()}
    if len(rho.dims) > 1:
        out["dims"] = list(rho.dims)
    return out
