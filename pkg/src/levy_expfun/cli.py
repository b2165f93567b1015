"""Command-line entry point.

Subcommands bind the library modules to model files on disk: ``factorize``
prints the ladder factors, ``simulate`` draws samples to CSV, ``density``
solves the renewal equation over a window, ``moments`` runs the moment
recurrence, ``tail`` reports the asymptotic regimes, and ``check`` runs the
distributional identity harness. All randomness flows from ``--seed``
(default 42) through fixed substream derivation, so identical invocations
produce byte-identical output. Exit codes: 0 success, 1 invalid request
(bad flags, bad model file, unsatisfied hypotheses), 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import asymptotics, checks, density, moments, montecarlo
from .errors import (
    DivergentMoment,
    HypothesisFailure,
    LevyExpfunError,
    ModelFileError,
    OutsideDomain,
    UnsupportedIdentity,
    UnsupportedModel,
)
from .models import LevyModel, model_label
from .wienerhopf import factorization_residual, factorize

_VALIDATION_ERRORS = (
    ModelFileError,
    OutsideDomain,
    UnsupportedModel,
    UnsupportedIdentity,
    HypothesisFailure,
    DivergentMoment,
)


class _Parser(argparse.ArgumentParser):
    # malformed invocations are validation failures: usage on stderr, exit 1
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="levy-expfun", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, **kwargs) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--model", required=True, help="path to a model JSON file")
        return p

    p = add("factorize", help="print the ascending/descending ladder factors")
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = add("simulate", help="draw samples of the exponential functional")
    p.add_argument("--scheme", choices=("path", "perpetuity"), default="path")
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--dt", type=float, default=2e-3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")

    p = add("density", help="solve the renewal equation on a log window")
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")

    p = add("moments", help="moment recurrence values E[I^beta]")
    p.add_argument("--beta", required=True, help="comma-separated orders, e.g. 1,2,3")
    p.add_argument(
        "--anchor",
        type=float,
        default=None,
        help="anchor value E[I^{b0-1}] for the fractional residue class b0",
    )

    p = add("tail", help="asymptotic tail report")
    p.add_argument("--mode", choices=("cramer", "convequiv", "lefttail"), required=True)
    p.add_argument("--n", type=int, default=100000, help="samples for the comparison (0 = none)")
    p.add_argument("--seed", type=int, default=42)

    p = add("check", help="distributional identity verification")
    p.add_argument("--identity", default=None, help="identity id (see check --all for the list)")
    p.add_argument("--all", action="store_true", help="run the full identity matrix")
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="CSV output path for --all (default stdout)")
    return parser


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(float(v)) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _print_json(payload) -> None:
    print(json.dumps(_jsonable(payload), sort_keys=True, indent=2))


def _factor_dict(factor) -> dict:
    return {
        "scale": factor.scale,
        "roots": list(factor.roots),
        "poles": list(factor.poles),
        "kill": factor.kill,
        "drift": factor.drift,
    }


def _cmd_factorize(args, model: LevyModel) -> int:
    factors = factorize(model)
    resid = factorization_residual(model, factors)
    if args.json:
        _print_json(
            {
                "ascending": _factor_dict(factors.ascending),
                "descending": _factor_dict(factors.descending),
                "kill_up": factors.kill_up,
                "kill_down": factors.kill_down,
                "factorization_residual": resid,
            }
        )
        return 0
    asc, dsc = factors.ascending, factors.descending
    print(f"model: {model_label(model)}")
    print(f"kappa    : scale={asc.scale:.12g} roots={list(asc.roots)} poles={list(asc.poles)} kill={asc.kill:.12g}")
    print(f"kappahat : scale={dsc.scale:.12g} roots={list(dsc.roots)} poles={list(dsc.poles)} kill={dsc.kill:.12g}")
    print(f"factorization residual: {resid:.3e}")
    return 0


def _cmd_simulate(args, model: LevyModel) -> int:
    if args.n <= 0:
        raise OutsideDomain("n must be positive")
    if args.scheme == "path":
        out = montecarlo.sample_I_path(model, args.n, args.seed, dt=args.dt)
    else:
        out = montecarlo.sample_I_perpetuity(model, args.n, args.seed, dt=args.dt)
    lines = [
        f"# model={model_label(model)}",
        f"# scheme={out.scheme} n={args.n} seed={args.seed} dt={args.dt!r}",
    ]
    lines.extend(repr(float(v)) for v in out.values)
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_density(args, model: LevyModel) -> int:
    if args.points <= 1:
        raise OutsideDomain("points must exceed 1")
    if not (0 < args.tmin < args.tmax):
        raise OutsideDomain("need 0 < tmin < tmax")
    est = density.solve_renewal(model, args.tmin, args.tmax)
    grid = np.geomspace(args.tmin, args.tmax, args.points)
    k = est(grid)
    tail = est.tail(grid)
    lines = [
        f"# model={model_label(model)}",
        f"# tmin={args.tmin!r} tmax={args.tmax!r} points={args.points}",
        f"# mass_defect={est.mass_defect!r} residual_p95={est.meta['residual_p95']!r}",
        "t,k,tail",
    ]
    lines.extend(
        f"{float(t)!r},{float(v)!r},{float(w)!r}" for t, v, w in zip(grid, k, tail)
    )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_moments(args, model: LevyModel) -> int:
    try:
        betas = [float(tok) for tok in args.beta.split(",") if tok.strip()]
    except ValueError:
        raise OutsideDomain(f"could not parse --beta {args.beta!r}") from None
    if not betas:
        raise OutsideDomain("--beta needs at least one order")
    result: dict[str, float] = {}
    residue = None
    for beta in betas:
        if abs(beta - round(beta)) <= 1e-9:
            result[f"{beta:g}"] = moments.moment_I(model, beta)
            continue
        if args.anchor is None:
            raise OutsideDomain(
                f"fractional order {beta:g} needs --anchor (a known E[I^{{b0-1}}])"
            )
        b0 = beta - math.ceil(beta) + 1.0
        if residue is None:
            residue = b0
        elif abs(residue - b0) > 1e-9:
            raise OutsideDomain("all fractional orders must share one residue class")
        result[f"{beta:g}"] = moments.moment_I(model, beta, anchor=(b0, args.anchor))
    _print_json(result)
    return 0


def _sample_for_tail(model: LevyModel, n: int, seed: int):
    try:
        return montecarlo.sample_I_closed(model, n, seed)
    except UnsupportedModel:
        return montecarlo.sample_I_path(model, n, seed)


def _tail_dict(report: asymptotics.TailReport) -> dict:
    return {
        "kind": report.kind,
        "exponent": report.exponent,
        "constant": report.constant,
        "validity": report.validity,
        "comparison": report.comparison,
        "meta": report.meta,
    }


def _cmd_tail(args, model: LevyModel) -> int:
    samples = _sample_for_tail(model, args.n, args.seed) if args.n > 0 else None
    if args.mode == "cramer":
        report = asymptotics.cramer_constant(model, samples=samples)
    elif args.mode == "convequiv":
        report = asymptotics.convolution_equiv_tail(model, 0.0, samples=samples, gate=False)
    else:
        report = asymptotics.left_tail(model, samples=samples)
    _print_json(_tail_dict(report))
    return 0


_IDENTITY_BY_LOWER = {name.lower(): name for name in checks.IDENTITIES}


def _cmd_check(args, model: LevyModel) -> int:
    if args.n <= 0:
        raise OutsideDomain("n must be positive")
    if args.all:
        reports, skipped = checks.run_all(model, args.n, args.seed)
        lines = [
            f"# model={model_label(model)} n={args.n} seed={args.seed}",
            "identity,status,ks_stat,ks_critical_1pct,max_abs_z,note",
        ]
        for rep in reports:
            zmax = max((abs(z) for _, z in rep.mellin_z), default=0.0)
            lines.append(
                f"{rep.identity_id},{rep.verdict},{rep.ks_stat!r},"
                f"{rep.ks_critical_1pct!r},{zmax!r},"
            )
        for ident, reason in sorted(skipped.items()):
            lines.append(f'{ident},skipped,,,,"{reason}"')
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    if args.identity is None:
        raise OutsideDomain("check needs --identity <id> or --all")
    ident = _IDENTITY_BY_LOWER.get(args.identity.lower())
    if ident is None:
        raise UnsupportedIdentity(
            f"unknown identity {args.identity!r}; known: {', '.join(checks.IDENTITIES)}"
        )
    report = checks.check_identity(ident, model, args.n, args.seed)
    _print_json(report.as_dict())
    return 0


_DISPATCH = {
    "factorize": _cmd_factorize,
    "simulate": _cmd_simulate,
    "density": _cmd_density,
    "moments": _cmd_moments,
    "tail": _cmd_tail,
    "check": _cmd_check,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        model = LevyModel.from_file(args.model)
        model.require_admissible()
        return _DISPATCH[args.subcommand](args, model)
    except (*_VALIDATION_ERRORS, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LevyExpfunError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
