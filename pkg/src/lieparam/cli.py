"""Command line entry point: ``lieparam <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from typing import Sequence

from .cdgl import (
    CdglPresentation,
    FiniteSimplicialSet,
    check_differential,
    degree_basis,
    gauge,
    is_mc,
    ls_interval,
    model_of_simplicial_set,
    simplex_model,
)
from .errors import CertificateFailure, InputError, LieParamError, ParseError
from .freelie import TensorElt, bch, evaluate_expression, format_q
from .psi import monoidal_comparison, psi_report
from .spectra import (
    FreeSpectrum,
    indecomposable_reduction,
    linear_reduction,
    quadratic_spectrum,
    sphere_spectrum_model,
    stable_homology,
    suspend_spectrum,
    zero_spectrum,
)
from .ulmod import ULModule, ext, uhat_module

EXIT_OK, EXIT_INPUT, EXIT_CERTIFICATE = 0, 1, 2


def thread_limit() -> int:
    """``LIEPARAM_THREADS``; the computations run in one thread, the value
    only has to be a positive integer."""
    raw = os.environ.get("LIEPARAM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InputError(f"LIEPARAM_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise InputError("LIEPARAM_THREADS must be at least 1")
    return n


# ---------------------------------------------------------------------------
# inputs


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc.msg}") from exc


def load_presentation(source: str, cap: int) -> CdglPresentation:
    if source == "ls-interval":
        return ls_interval(cap)
    if source.startswith("simplex:"):
        try:
            n = int(source.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad simplex source {source!r}") from exc
        return simplex_model(n, cap)
    return CdglPresentation.from_json(_load_json(source), cap)


def load_spectrum(source: str, cap: int, levels: int) -> FreeSpectrum:
    kind, _, rest = source.partition(":")
    builders = {"sphere": sphere_spectrum_model, "zero": zero_spectrum, "quadratic": quadratic_spectrum}
    if kind in builders and rest:
        return builders[kind](load_presentation(rest, cap), levels)
    M = FreeSpectrum.from_json(_load_json(source), cap)
    if levels < M.n_max:
        M = FreeSpectrum(M.base, M.levels[: levels + 1], M.structure[:levels], M.abelian, M.connected)
    return M


def load_module(source: str, cap: int) -> ULModule:
    if source.startswith("uhat:"):
        return uhat_module(load_presentation(source[5:], cap))
    return ULModule.from_json(_load_json(source), cap)


# ---------------------------------------------------------------------------
# commands


def _dims(d: dict) -> dict:
    return {str(k): v for k, v in sorted(d.items())}


def cmd_model(args) -> tuple[dict, int]:
    X = FiniteSimplicialSet.from_json(_load_json(args.input))
    L = model_of_simplicial_set(X, args.cap, pointed=args.pointed, base_point=args.base_point,
                                max_dim=args.simplex_dim_max)
    return {"presentation": L.to_json(), "check": check_differential(L).ok}, EXIT_OK


def cmd_psi(args) -> tuple[dict, int]:
    M = load_spectrum(args.spectrum, args.cap, args.levels)
    if args.shift:
        M = suspend_spectrum(M, args.shift)
    lo, hi = args.window
    rep = psi_report(M, (lo, hi))
    H = rep.module.homology((lo, hi))
    return {
        "module": rep.module.to_json(),
        "homology": _dims(H.dims),
        "complete": _dims(H.complete),
        "level": rep.level,
        "stabilized": rep.stabilized,
        "caveats": rep.caveats,
    }, EXIT_OK


def cmd_stable_homology(args) -> tuple[dict, int]:
    M = load_spectrum(args.spectrum, args.cap, args.levels)
    if args.reduction == "linear":
        M = linear_reduction(M)
    elif args.reduction == "indecomposable":
        M = indecomposable_reduction(M)
    return {"stable_homology": stable_homology(M, tuple(args.window)).to_json()}, EXIT_OK


def cmd_ext(args) -> tuple[dict, int]:
    R = load_module(args.source, args.cap)
    S = load_module(args.target, args.cap)
    return {"ext": ext(R, S, tuple(args.window)).to_json()}, EXIT_OK


def cmd_smash(args) -> tuple[dict, int]:
    X = load_spectrum(args.left, args.cap, args.levels)
    Y = sphere_spectrum_model(X.base, args.levels) if args.right is None else load_spectrum(
        args.right, args.cap, args.levels)
    rep = monoidal_comparison(X, Y, tuple(args.window), signs=args.signs)
    out = {
        "smash": _dims(rep.smash_dims),
        "tensor": _dims(rep.tensor_dims),
        "equal": rep.smash_dims == rep.tensor_dims,
        "chain_isomorphism": rep.chain_isomorphism,
        "linear": rep.linear,
        "signs": args.signs,
        "levels": list(rep.levels),
        "caveats": rep.caveats,
    }
    return out, EXIT_OK if rep.chain_isomorphism else EXIT_CERTIFICATE


def _parse_element(text: str, L: CdglPresentation) -> TensorElt:
    try:
        expr = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"element is not valid JSON: {exc.msg}") from exc
    return evaluate_expression(expr, L.alphabet, L.cap)


def _random_degree_zero(L: CdglPresentation, rng: random.Random) -> TensorElt:
    out = TensorElt.zero(L.alphabet, L.cap)
    for b in degree_basis(L, 0):
        c = rng.randint(-2, 2)
        if c:
            out = out + b.scale(Fraction(c, rng.randint(1, 3)))
    return out


def cmd_gauge(args) -> tuple[dict, int]:
    L = load_presentation(args.presentation, args.cap)
    if args.z is not None:
        y = _parse_element(args.y, L) if args.y is not None else TensorElt.zero(L.alphabet, L.cap)
        z = _parse_element(args.z, L)
        g = gauge(L, z, y)
        ok = is_mc(L, g)
        return {"gauge": g.as_lie().expression(), "mc": ok}, EXIT_OK if ok else EXIT_CERTIFICATE
    rng = random.Random(args.seed)
    starts = [L.gen(n) for n in L.mc] or [TensorElt.zero(L.alphabet, L.cap)]
    mc_ok = composition_ok = 0
    for _ in range(args.trials):
        y = gauge(L, _random_degree_zero(L, rng), rng.choice(starts))
        z1, z2 = _random_degree_zero(L, rng), _random_degree_zero(L, rng)
        mc_ok += is_mc(L, gauge(L, z1, y))
        composition_ok += (gauge(L, bch(z1, z2), y) - gauge(L, z1, gauge(L, z2, y))).is_zero()
    ok = mc_ok == composition_ok == args.trials
    return {"trials": args.trials, "mc": mc_ok, "composition": composition_ok}, (
        EXIT_OK if ok else EXIT_CERTIFICATE)


def cmd_check(args) -> tuple[dict, int]:
    L = load_presentation(args.presentation, args.cap)
    rep = check_differential(L)
    return {"check": rep.to_json()}, EXIT_OK if rep.ok else EXIT_CERTIFICATE


# ---------------------------------------------------------------------------
# output


def _plain(value) -> object:
    if isinstance(value, Fraction):
        return format_q(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def render(report: dict, style: str) -> str:
    report = _plain(report)
    if style == "json":
        return json.dumps(report, indent=2, sort_keys=True)
    lines = [f"command: {report['command']}"]
    for k, v in sorted(report["config"].items()):
        lines.append(f"  {k}: {v}")
    for key, value in sorted(report["results"].items()):
        _table(lines, key, value, 0)
    return "\n".join(lines)


def _table(lines: list, key: str, value, depth: int):
    pad = "  " * depth
    if isinstance(value, dict) and value and all(isinstance(v, (int, bool, type(None), str)) for v in value.values()) \
            and all(str(k).lstrip("-").isdigit() for k in value):
        lines.append(f"{pad}{key}:")
        lines.append(f"{pad}  degree  value")
        for k, v in sorted(value.items(), key=lambda kv: int(kv[0])):
            lines.append(f"{pad}  {int(k):>6}  {'-' if v is None else v}")
    elif isinstance(value, dict) and key not in ("module", "presentation"):
        lines.append(f"{pad}{key}:")
        for k, v in sorted(value.items()):
            _table(lines, k, v, depth + 1)
    elif isinstance(value, (dict, list)) and key in ("module", "presentation"):
        lines.append(f"{pad}{key}: {json.dumps(value, sort_keys=True, separators=(',', ':'))}")
    else:
        lines.append(f"{pad}{key}: {value}")


# ---------------------------------------------------------------------------
# parser


def _window(text: str) -> list:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("window must look like LO:HI") from exc
    if lo > hi:
        raise argparse.ArgumentTypeError("window needs LO <= HI")
    return [lo, hi]


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected an integer") from exc
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=_positive, default=6, help="weight cap N (default 6)")
    common.add_argument("--window", type=_window, default=[0, 4], help="degree window LO:HI (default 0:4)")
    common.add_argument("--levels", type=_positive, default=5, help="top spectrum level (default 5)")
    common.add_argument("--output", choices=("table", "json"), default="table")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--simplex-dim-max", type=_positive, default=3)

    parser = argparse.ArgumentParser(prog="lieparam", description="Exact Lie models of parametrized spectra.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", parents=[common], help="Lie model of a finite simplicial set")
    p.add_argument("input")
    p.add_argument("--pointed", action="store_true")
    p.add_argument("--base-point")
    p.set_defaults(run=cmd_model)

    p = sub.add_parser("psi", parents=[common], help="module of a free spectrum and its homology")
    p.add_argument("spectrum", help="spectrum JSON, or sphere:BASE / zero:BASE / quadratic:BASE")
    p.add_argument("--shift", type=int, default=0, help="suspend the spectrum this many times")
    p.set_defaults(run=cmd_psi)

    p = sub.add_parser("stable-homology", parents=[common], help="stable homology of a free spectrum")
    p.add_argument("spectrum")
    p.add_argument("--reduction", choices=("full", "linear", "indecomposable"), default="full")
    p.set_defaults(run=cmd_stable_homology)

    p = sub.add_parser("ext", parents=[common], help="Ext between two modules")
    p.add_argument("source", help="module JSON or uhat:BASE")
    p.add_argument("target")
    p.set_defaults(run=cmd_ext)

    p = sub.add_parser("smash", parents=[common], help="compare the smash product with the tensor product")
    p.add_argument("left")
    p.add_argument("right", nargs="?", help="defaults to the sphere spectrum over the same base")
    p.add_argument("--signs", choices=("stated", "koszul"), default="stated")
    p.set_defaults(run=cmd_smash)

    p = sub.add_parser("gauge", parents=[common], help="gauge action on Maurer-Cartan elements")
    p.add_argument("presentation", help="presentation JSON, ls-interval or simplex:N")
    p.add_argument("--z", help="degree-0 element as a bracket expression")
    p.add_argument("--y", help="Maurer-Cartan element (default 0)")
    p.add_argument("--trials", type=_positive, default=20)
    p.set_defaults(run=cmd_gauge)

    p = sub.add_parser("check", parents=[common], help="check that the differential squares to zero")
    p.add_argument("presentation")
    p.set_defaults(run=cmd_check)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[str, int]:
    parser = build_parser()
    args = parser.parse_args(argv)
    thread_limit()
    results, code = args.run(args)
    config = {"cap": args.cap, "window": args.window, "levels": args.levels, "output": args.output,
              "seed": args.seed}
    report = {"command": args.command, "config": config, "results": results}
    return render(report, args.output), code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        text, code = run(argv)
    except CertificateFailure as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LieParamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
