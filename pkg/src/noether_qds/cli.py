"""Command-line front end.

Exit codes: 0 success, 1 a requested assertion failed (or, for
``classical-check``, the variable is not a constant), 2 malformed input,
3 ``--condexp`` requested without a faithful stationary state.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, classical, harness, noether
from .errors import NoetherError
from .io import REPORT_SCHEMA, DocumentError, ProblemDocument, encode_complex_matrix, tolerance_config
from .linops import DEFAULT_TOL, subspace_distance
from .qds import LindbladSpec, lindblad_heisenberg, lindblad_schrodinger

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_POSTULATE = 0, 1, 2, 3
SEED_ENV = "NOETHER_QDS_SEED"
BUILTIN_SUITES = {"paper-suite": harness.default_suite}


def _default_seed(fallback: int | None = 0) -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise DocumentError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {(k if isinstance(k, str) else str(k)): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _header(kind: str, seed: int, started: float) -> dict:
    return {"tool": "noether-qds", "version": __version__, "kind": kind, "seed": seed,
            "timing_s": time.perf_counter() - started}


def _emit(report: dict, fmt: str, text_lines) -> None:
    if fmt == "json":
        print(json.dumps(_jsonable(report), indent=2))
    else:
        for line in text_lines:
            print(line)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        grid = tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid time grid {text!r}") from None
    if not grid or any(t < 0 or not np.isfinite(t) for t in grid):
        raise argparse.ArgumentTypeError("time grid needs finite nonnegative values")
    return grid


def _config(doc: ProblemDocument, args):
    cfg = doc.config(DEFAULT_TOL)
    overrides = {}
    if getattr(args, "tol", None) is not None:
        overrides["commute_tol"] = args.tol
    if getattr(args, "time_grid", None) is not None:
        overrides["time_grid"] = args.time_grid
    return tolerance_config(overrides, cfg) if overrides else cfg


def cmd_classical_check(args) -> int:
    started = time.perf_counter()
    seed = _default_seed()
    doc = ProblemDocument.load(args.input)
    if doc.kind != "classical":
        raise DocumentError(f"expected a classical document, got kind {doc.kind!r}")
    cfg = _config(doc, args)
    gen = classical.validate_generator(doc.M, cfg)
    parts = classical.communication_classes(gen, cfg)
    rep = classical.check_constant(doc.A, gen, cfg)
    classes = [[x + 1 for x in block] for block in parts.classes]
    report = _header("classical", seed, started) | {
        "d": doc.d,
        "classes": classes,
        "constant": rep.is_constant,
        "consistent": rep.consistent,
        "conditions": {"distribution": rep.cond_distribution, "moments": rep.cond_moments,
                       "measurable": rep.cond_measurable, "commutator": rep.cond_commutator},
        "residuals": {k: float(v) for k, v in rep.details.items()},
        "generator_residuals": gen.residuals,
    }
    lines = [
        f"communication classes: {classes}",
        *(f"{k:>13}: {v}" for k, v in report["conditions"].items()),
        f"constant: {str(rep.is_constant).lower()}",
    ]
    _emit(report, args.format, lines)
    return EXIT_OK if rep.is_constant else EXIT_FAIL


def cmd_quantum_analyze(args) -> int:
    started = time.perf_counter()
    seed = _default_seed()
    doc = ProblemDocument.load(args.input)
    if doc.kind != "quantum":
        raise DocumentError(f"expected a quantum document, got kind {doc.kind!r}")
    cfg = _config(doc, args)
    spec = LindbladSpec(doc.H, tuple(doc.L), cfg)
    M = lindblad_schrodinger(spec)
    L = lindblad_heisenberg(spec)

    requested = {k: getattr(args, k) for k in ("fixed_points", "constants", "stationary", "condexp")}
    report_all = not any(requested.values())

    stat = noether.stationary_state(M, cfg)
    F = noether.fixed_points(L, cfg)
    C = noether.commutant(spec.operators(), cfg, d=spec.dim)
    dist = subspace_distance(F, C)
    assertions, messages = {}, []

    observables = []
    if report_all or args.constants or args.condexp:
        for i, A in enumerate(doc.all_observables()):
            rep = noether.noether_check(A, spec, cfg, commutant_space=C, stationary=stat)
            observables.append({
                "index": i,
                "constant": rep.is_constant,
                "is_fixed_point": rep.is_fixed_point,
                "hat_commutes": rep.hat_commutes,
                "in_commutant": rep.in_commutant,
                "consistent": rep.consistent,
                "heisenberg_drift": noether.heisenberg_drift(A, L, cfg.time_grid),
                "residuals": rep.residuals,
            })

    if args.fixed_points:
        if stat.postulate_p_holds:
            assertions["fixed_points_equal_commutant"] = dist <= cfg.subspace_tol
            assertions["fixed_points_form_algebra"] = F.is_algebra
        else:
            messages.append("postulate (P) fails: fixed points need not equal the commutant, "
                            "no assertion made")
    if args.constants:
        assertions["all_observables_constant"] = all(o["constant"] for o in observables)
    if args.stationary:
        assertions["postulate_p"] = stat.postulate_p_holds

    condexp = None
    exit_code = EXIT_OK
    if args.condexp:
        if stat.postulate_p_holds:
            condexp = [encode_complex_matrix(noether.conditional_expectation(A, L, cfg))
                       for A in doc.all_observables()]
        else:
            messages.append(
                f"postulate (P) fails: the stationary candidate has minimum eigenvalue "
                f"{stat.min_eigenvalue:.3g}, so no faithful stationary state exists and the "
                f"conditional expectation is undefined")
            exit_code = EXIT_POSTULATE
    if exit_code == EXIT_OK and not all(assertions.values()):
        exit_code = EXIT_FAIL

    report = _header("quantum", seed, started) | {
        "d": spec.dim,
        "fixed_points": {"dim": F.dim, "closed_under_adjoint": F.closed_under_adjoint,
                         "closed_under_product": F.closed_under_product,
                         "contains_identity": F.contains_identity},
        "commutant": {"dim": C.dim},
        "subspace_distance": dist,
        "stationary": {"postulate_p": stat.postulate_p_holds,
                       "min_eigenvalue": stat.min_eigenvalue,
                       "kernel_dim": stat.kernel_dim,
                       "candidate": encode_complex_matrix(stat.candidate)},
        "observables": observables,
        "conditional_expectation": condexp,
        "assertions": assertions,
        "messages": messages,
    }
    lines = [
        f"fixed points: dim {F.dim} (algebra: {str(F.is_algebra).lower()})",
        f"commutant of {{H, L_k, L_k*}}: dim {C.dim}",
        f"subspace distance: {dist:.3e}",
        f"postulate (P): {str(stat.postulate_p_holds).lower()} "
        f"(min eigenvalue {stat.min_eigenvalue:.6g})",
    ]
    for o in observables:
        lines.append(f"observable {o['index']}: constant: {str(o['constant']).lower()} "
                     f"(fixed point {str(o['is_fixed_point']).lower()}, "
                     f"commutant {str(o['in_commutant']).lower()})")
    if condexp is not None:
        for i, E in enumerate(condexp):
            lines.append(f"E[A_{i}|M] = {np.round(np.array(E)[..., 0] + 1j * np.array(E)[..., 1], 10).tolist()}")
    lines += [f"assertion {k}: {'pass' if v else 'FAIL'}" for k, v in assertions.items()]
    for msg in messages:
        print(msg, file=sys.stderr)
    _emit(report, args.format, lines)
    return exit_code


def load_recipes(source: str, seed: int | None, trials: int | None) -> tuple[list, int]:
    """Recipes from a built-in name or a JSON file, plus the effective seed.

    An explicit ``seed`` overrides every recipe's own seed.
    """
    if source in BUILTIN_SUITES:
        seed = 0 if seed is None else seed
        return BUILTIN_SUITES[source](seed=seed, trials=trials), seed
    try:
        data = json.loads(Path(source).read_text())
    except OSError as exc:
        raise DocumentError(f"cannot read recipe {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{source}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("recipes"), list):
        raise DocumentError("recipe document must be an object with a 'recipes' list")
    out = []
    for k, item in enumerate(data["recipes"]):
        if not isinstance(item, dict):
            raise DocumentError(f"recipes[{k}] must be an object")
        item = dict(item)
        if seed is not None:
            item["seed"] = seed
        elif "seed" not in item and "seed" in data:
            item["seed"] = data["seed"]
        if trials is not None:
            item["trials"] = trials
        try:
            out.append(harness.InstanceRecipe.from_dict(item))
        except (TypeError, ValueError) as exc:
            raise DocumentError(f"recipes[{k}]: {exc}") from exc
    if seed is None:
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise DocumentError(f"recipe seed must be an integer, got {seed!r}")
    return out, seed


def cmd_verify(args) -> int:
    started = time.perf_counter()
    explicit = args.seed if args.seed is not None else _default_seed(None)
    recipes, seed = load_recipes(args.recipe, explicit, args.trials)
    summary = harness.verify_equivalences(recipes, DEFAULT_TOL)
    body = summary.to_dict()
    for s in body["suites"]:
        s.pop("details")
    report = _header("verify", seed, started) | body
    lines = [f"{s.kind:<36} {s.passed:>4}/{s.trials:<4} passed" for s in summary.suites]
    lines.append(f"{'total':<36} {summary.total - sum(s.failed for s in summary.suites):>4}/"
                 f"{summary.total:<4} {'OK' if summary.ok else 'FAILED'}")
    _emit(report, args.format, lines)
    return EXIT_OK if summary.ok else EXIT_FAIL


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noether-qds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_format(p):
        p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("classical-check", help="decide whether A is a constant of a classical chain")
    p.add_argument("input", help="problem document (kind: classical)")
    p.add_argument("--tol", type=float, help="override commute_tol")
    p.add_argument("--time-grid", type=_parse_grid, help="times for the distribution check")
    add_format(p)
    p.set_defaults(func=cmd_classical_check)

    p = sub.add_parser("quantum-analyze", help="fixed points, constants and stationary state")
    p.add_argument("input", help="problem document (kind: quantum)")
    p.add_argument("--fixed-points", action="store_true",
                   help="assert fixed points equal the commutant when (P) holds")
    p.add_argument("--constants", action="store_true", help="assert every observable is constant")
    p.add_argument("--stationary", action="store_true", help="assert postulate (P)")
    p.add_argument("--condexp", action="store_true", help="conditional expectation of observables")
    p.add_argument("--tol", type=float, help="override commute_tol")
    p.add_argument("--time-grid", type=_parse_grid, help="times for the Heisenberg drift check")
    add_format(p)
    p.set_defaults(func=cmd_quantum_analyze)

    p = sub.add_parser("verify", help="run the equivalence suites")
    p.add_argument("recipe", nargs="?", default="paper-suite",
                   help=f"recipe file or built-in suite ({', '.join(BUILTIN_SUITES)})")
    p.add_argument("--seed", type=int, help=f"seed (default ${SEED_ENV} or 0)")
    p.add_argument("--trials", type=int, help="trials per recipe")
    add_format(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "trials", None) is not None and args.trials < 0:
        print("noether-qds: error: --trials must be >= 0", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        print("noether-qds: error: --tol must be > 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (DocumentError, NoetherError) as exc:
        print(f"noether-qds: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


__all__ = ["main", "build_parser", "REPORT_SCHEMA"]
