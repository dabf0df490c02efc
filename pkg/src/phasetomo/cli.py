"""Command-line front end.

Exit codes: 0 success, 1 malformed input or schema error, 2 numeric
failure, 3 conversion outside the implemented classes, 4 superposition
precondition failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

import numpy as np

from .bipartite import BipartiteState, separability_report
from .coherent import CoherentSpan
from .diagonal import (PhaseWeight, dequantize_span, husimi_function, husimi_of_weight,
                       tomogram_to_weight_gaussian, weight_to_operator, weight_tomogram)
from .errors import (DensityError, OutOfClassError, PhaseTomoError, PreconditionError,
                     QuadratureError, TruncationError)
from .fock import FockOperator, FockVector, TruncationPolicy, purity, span_to_fock, validate_density
from .specs import SpecError, as_span, density_to_dict, load_state, single_mode
from .superposition import (PHASE_CONVENTION, SuperpositionSpec, _ket, oracle_ket, projector_phase,
                            superpose_densities)
from .tomography import (NEG_TOL, FockTomogram, GaussianTomogram, QuadratureSettings, Ray, TomogramGrid,
                         _trapz)

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_CLASS, EXIT_PRECONDITION = 0, 1, 2, 3, 4

DEFAULT_RAYS = ((1.0, 0.0), (0.0, 1.0), (np.sqrt(0.5), np.sqrt(0.5)))


class CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- config


def read_config(path):
    """``key = value`` lines (``#`` comments) parsed without a section header."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[config]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise CliFailure(EXIT_SCHEMA, f"cannot read config {path}: {exc}") from exc
    return dict(parser["config"])


def settings_from(args):
    cfg = read_config(args.config) if args.config else {}
    known = {"target_tail", "max_dim", "quad_points", "k_sigmas", "edge_tol"}
    unknown = set(cfg) - known
    if unknown:
        raise CliFailure(EXIT_SCHEMA, f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in cfg:
            try:
                return cast(cfg[key].strip().strip('"'))
            except ValueError as exc:
                raise CliFailure(EXIT_SCHEMA, f"config {key}: {exc}") from exc
        return default

    try:
        policy = TruncationPolicy(pick(args.target_tail, "target_tail", float, 1e-12),
                                  pick(args.max_dim, "max_dim", int, 256))
        quad = QuadratureSettings(min_points=pick(args.quad_points, "quad_points", int, 2048),
                                  k_sigmas=pick(None, "k_sigmas", float, 8.0),
                                  edge_tol=pick(None, "edge_tol", float, 1e-13))
    except ValueError as exc:
        raise CliFailure(EXIT_SCHEMA, str(exc)) from exc
    return policy, quad


# ---------------------------------------------------------------- io


def read_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliFailure(EXIT_SCHEMA, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliFailure(EXIT_SCHEMA, f"malformed JSON in {path}: {exc}") from exc


def write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def load(path, policy):
    doc = read_json(path)
    try:
        state = load_state(doc, policy)
    except SpecError as exc:
        raise CliFailure(EXIT_SCHEMA, f"{path}: {exc}") from exc
    except DensityError as exc:
        raise CliFailure(EXIT_SCHEMA, f"{path}: not a density state: {exc}") from exc
    except ValueError as exc:
        raise CliFailure(EXIT_SCHEMA, f"{path}: {exc}") from exc
    check_state(state, policy, path)
    return state


def check_state(state, policy, path):
    """Density invariants for loaded states (each class checked in its own form)."""
    if isinstance(state, PhaseWeight):
        total = state.total_weight()
        if abs(total - 1) > 1e-10:
            raise CliFailure(EXIT_SCHEMA, f"{path}: weights sum to {total:.12g}, not 1")
        return
    if isinstance(state, CoherentSpan):
        try:
            validate_density(span_to_fock(state, policy))
        except DensityError as exc:
            raise CliFailure(EXIT_SCHEMA, f"{path}: not a density state: {exc}") from exc


# ---------------------------------------------------------------- state helpers


def tomogram_of(state, quad):
    state = single_mode(state)
    if isinstance(state, GaussianTomogram):
        return state
    if isinstance(state, PhaseWeight):
        return weight_tomogram(state)
    span = as_span(state)
    if span is not None:
        return GaussianTomogram.from_span(span)
    if isinstance(state, FockVector):
        state = state.projector()
    return FockTomogram(state, quad)


def operator_of(state, policy) -> FockOperator:
    state = single_mode(state)
    if isinstance(state, PhaseWeight):
        return weight_to_operator(state, policy)
    span = as_span(state)
    if span is not None:
        return span_to_fock(span, policy)
    if isinstance(state, FockVector):
        return state.projector()
    return state


def weight_of(state) -> PhaseWeight:
    if isinstance(state, GaussianTomogram):
        return tomogram_to_weight_gaussian(state)
    if isinstance(state, PhaseWeight):
        return state
    span = as_span(state)
    if span is not None:
        return dequantize_span(span)
    if isinstance(state, (FockVector, FockOperator)):
        rho = state.projector() if isinstance(state, FockVector) else state
        vac = np.zeros_like(rho.mat)
        vac[0, 0] = 1
        if np.abs(rho.mat - vac).max() <= 1e-12:
            return PhaseWeight.vacuum()
        raise OutOfClassError("number-basis state has no finite atoms+Gaussians weight",
                              rule="P of Fock and generic states is a generalized distribution "
                                   "outside the atoms+Gaussians class")
    raise OutOfClassError(f"no weight for {type(state).__name__}", rule="unsupported state class")


# ---------------------------------------------------------------- commands


def read_rays(args):
    if args.rays_file:
        doc = read_json(args.rays_file)
        if not isinstance(doc, list) or not doc:
            raise CliFailure(EXIT_SCHEMA, "rays file must hold a non-empty JSON list")
        rays = []
        for item in doc:
            try:
                mu, nu = (item["mu"], item["nu"]) if isinstance(item, dict) else item
                rays.append(Ray(mu, nu))
            except (TypeError, ValueError, KeyError) as exc:
                raise CliFailure(EXIT_SCHEMA, f"bad ray {item!r}: {exc}") from exc
        return rays
    try:
        return [Ray(args.mu, args.nu)]
    except ValueError as exc:
        raise CliFailure(EXIT_SCHEMA, str(exc)) from exc


def cmd_tomogram(args):
    policy, quad = settings_from(args)
    state = load(args.state, policy)
    if isinstance(state, BipartiteState):
        raise CliFailure(EXIT_SCHEMA, "tomogram needs a single-mode state")
    tomo = tomogram_of(state, quad)
    lam = args.scale
    if lam == 0:
        raise CliFailure(EXIT_SCHEMA, "--scale must be non-zero")
    explicit = args.xmin is not None or args.xmax is not None
    if explicit and (args.xmin is None or args.xmax is None or args.xmax <= args.xmin):
        raise CliFailure(EXIT_SCHEMA, "--xmin and --xmax must both be given with xmin < xmax")
    if args.steps < 2:
        raise CliFailure(EXIT_SCHEMA, "--steps must be at least 2")
    rays, rows, vals = [], [], []
    for ray in read_rays(args):
        label = f"ray (mu={ray.mu:.17g}, nu={ray.nu:.17g})"
        try:
            xs = np.linspace(args.xmin, args.xmax, args.steps) if explicit else tomo.default_xs(ray, args.steps)
            # homogeneity: sample w(lam X, lam mu, lam nu), which equals w(X, mu, nu)/|lam|
            scaled = ray.scaled(lam)
            w = np.real(tomo.values(scaled, lam * xs))
        except QuadratureError as exc:
            raise CliFailure(EXIT_NUMERIC, f"{label}: {exc} {exc.diagnostics}") from exc
        if not np.all(np.isfinite(w)):
            raise CliFailure(EXIT_NUMERIC, f"{label}: non-finite tomogram values")
        if w.min() < -NEG_TOL:
            raise CliFailure(EXIT_NUMERIC, f"{label}: negative tomogram value {w.min():.3e}")
        resid = float(np.sign(lam) * _trapz(w, lam * xs)) - 1.0
        print(f"{label}: normalization residual {resid:.3e}", file=sys.stderr)
        rays.append(scaled)
        rows.append(lam * xs)
        vals.append(w)
    grid = TomogramGrid(rays, np.array(rows), np.array(vals))
    fmt = args.format or ("json" if (args.out or "").endswith(".json") else "csv")
    write_text(args.out, grid.to_csv() if fmt == "csv" else grid.to_json() + "\n")
    return EXIT_OK


def cmd_convert(args):
    policy, quad = settings_from(args)
    state = load(args.state, policy)
    if isinstance(state, BipartiteState):
        raise CliFailure(EXIT_SCHEMA, "convert needs a single-mode state")
    if args.to == "p":
        out = dump_json(weight_of(state).to_dict())
    elif args.to == "q":
        if isinstance(state, (PhaseWeight, GaussianTomogram)):
            q = husimi_of_weight(weight_of(state))
        else:
            q = husimi_function(as_span(state) or operator_of(state, policy))
        out = q.grid_csv(args.extent, args.steps)
    elif args.to == "fock":
        out = dump_json(density_to_dict(operator_of(state, policy)))
    else:
        tomo = tomogram_of(state, quad)
        if isinstance(tomo, GaussianTomogram) and tomo.is_real_mixture():
            out = dump_json(tomo.to_dict())
        else:
            out = tomo.grid(DEFAULT_RAYS, n=args.steps).to_json() + "\n"
    write_text(args.out, out)
    return EXIT_OK


def cmd_superpose(args):
    policy, _ = settings_from(args)
    doc = read_json(args.spec)
    if not isinstance(doc, dict):
        raise CliFailure(EXIT_SCHEMA, "superposition spec must be a JSON object")
    try:
        p1 = float(doc["p1"])
        p2 = float(doc.get("p2", 1.0 - p1))
        states = [single_mode(load_state(doc[k], policy)) for k in ("state1", "state2", "P0")]
    except (KeyError, TypeError, ValueError) as exc:
        raise CliFailure(EXIT_SCHEMA, f"{args.spec}: {exc!s}") from exc
    for s in states:
        if isinstance(s, PhaseWeight) and not s.is_atomic():
            raise CliFailure(EXIT_PRECONDITION, "superposition inputs must be pure states")
    spec = SuperpositionSpec(p1, p2, *states, policy=policy)
    rho = superpose_densities(spec)
    if isinstance(rho, CoherentSpan):
        rho = span_to_fock(rho, policy, dim=spec.dim())
        rho = FockOperator(0.5 * (rho.mat + rho.mat.conj().T))
    k1, k2, chi = (_ket(s, spec.dim(), spec.policy) for s in states)
    report = {
        "state": density_to_dict(rho),
        "purity": purity(rho),
        "trace": rho.trace().real,
        "phase_convention": PHASE_CONVENTION,
        "relative_phase": projector_phase(k1, k2, chi),
        "oracle_distance": float(np.linalg.norm(rho.mat - oracle_ket(spec).projector().mat)),
    }
    print(f"purity {report['purity']:.6f}", file=sys.stderr)
    write_text(args.out, dump_json(report))
    return EXIT_OK


def cmd_separability(args):
    policy, _ = settings_from(args)
    state = load(args.state, policy)
    if not isinstance(state, BipartiteState):
        raise CliFailure(EXIT_SCHEMA, "separability needs a 'two-mode' state")
    report = separability_report(state, grid_check=args.grid_check)
    print(f"verdict {report['verdict']} (witness min eigenvalue {report['witness_min_eig']:.6e})",
          file=sys.stderr)
    write_text(args.out, dump_json(report))
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest
    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC


# ---------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(prog="phasetomo",
                                     description="Tomograms, diagonal weights and superpositions of quantum states.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file (target_tail, max_dim, quad_points, k_sigmas, edge_tol)")
    common.add_argument("--target-tail", type=float, help="Fock truncation tail target")
    common.add_argument("--max-dim", type=int, help="largest allowed Fock dimension")
    common.add_argument("--quad-points", type=int, help="minimum Fourier quadrature points")
    common.add_argument("--out", help="output file (default stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tomogram", parents=[common], help="sample w(X, mu, nu)")
    p.add_argument("state", help="state JSON file")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--rays-file", help="JSON list of [mu, nu] pairs")
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--scale", type=float, default=1.0,
                   help="sample the ray (lam mu, lam nu) at lam X")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_tomogram)

    p = sub.add_parser("convert", parents=[common], help="change representation")
    p.add_argument("state")
    p.add_argument("--to", choices=("p", "q", "fock", "tomogram"), required=True)
    p.add_argument("--extent", type=float, default=5.0, help="Q grid half-width")
    p.add_argument("--steps", type=int, default=101)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("superpose", parents=[common], help="nonlinear superposition of two pure states")
    p.add_argument("spec", help="JSON with p1, p2, state1, state2, P0")
    p.set_defaults(func=cmd_superpose)

    p = sub.add_parser("separability", parents=[common], help="entanglement witness and factorization report")
    p.add_argument("state")
    p.add_argument("--witness", choices=("ppt",), default="ppt")
    p.add_argument("--grid-check", action="store_true", help="verify the tomographic factorization on grids")
    p.set_defaults(func=cmd_separability)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OutOfClassError as exc:
        print(f"error: {exc} (rule: {exc.rule})", file=sys.stderr)
        return EXIT_CLASS
    except PreconditionError as exc:
        print(f"error: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (QuadratureError, TruncationError, DensityError, PhaseTomoError, np.linalg.LinAlgError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
