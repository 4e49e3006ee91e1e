"""Command-line front end.

Commands::

    almostosc simulate SPEC [--n N] [--mode exact|float] [--out PATH]
    almostosc classify SPEC [--n N] [--tol TOL] [--out PATH]
    almostosc check SPEC [--n N] [--d D] [--m M] [--p EXPR] [--out PATH]
    almostosc verify-example NAME [--n N]

``SPEC`` is a path to a spec file or one of the bundled names
``example1``, ``example2``, ``example3``.

Exit status: 0 success, 1 verification failure (nonzero residual, wrong
verdict, numeric breakdown), 2 input error (bad file, violated hypothesis).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import criteria
from .classifier import DEFAULT_ZERO_TOL, Verdict, classify_almost_oscillatory
from .criteria import CriterionParams, HypothesisError, conjunction
from .equation import (
    InexactError,
    NonPositiveCoefficientError,
    Trajectory,
    closed_form_window,
    residual,
    simulate,
    trajectory_to_csv,
)
from .numerics import DEFAULT_ATOL, Mode, NumericOverflowError, to_value
from .seqlang import SeqEvalError, SeqLangError, parse_seq
from .specfile import BUNDLED, SpecFile, SpecFileError, load_bundled, load_spec_file

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


class VerificationError(Exception):
    pass


def _need_init(sf: SpecFile):
    if sf.init is None:
        raise InputError("missing required key: init (initial values x)")
    return sf.init


def run_simulate(sf: SpecFile, n: int | None = None, mode: Mode | str | None = None) -> Trajectory:
    mode = sf.mode if mode is None else Mode(mode)
    return simulate(sf.spec, _need_init(sf), n or sf.horizon, mode)


def run_classify(sf: SpecFile, n: int | None = None, tol: float = DEFAULT_ZERO_TOL) -> Verdict:
    traj = run_simulate(sf, n)
    return classify_almost_oscillatory(traj, (traj.n0, traj.horizon), tol)


def _trajectory_defaults(sf: SpecFile, N: int, defaulted: set) -> dict:
    """``d`` and ``M`` taken from a simulated solution, where usable."""
    try:
        traj = simulate(sf.spec, sf.init, N, sf.mode, allow_float_fallback=True, check=False)
    except (ArithmeticError, ValueError):
        return {}
    out = {}
    if "d" in defaulted:
        d = criteria.default_d(traj, traj.interior)
        if d is not None:
            out["d"] = d
    if "M" in defaulted:
        out["M"] = criteria.default_m(traj, sf.spec.alpha)
    return out


def run_check(sf: SpecFile, n: int | None = None, d=None, m=None, p: str | None = None) -> dict:
    """All criterion reports for ``sf`` as one JSON-ready document."""
    N = n or sf.horizon
    problem = sf.spec.hypothesis_violation(1, N + 1)
    if problem:
        raise HypothesisError(problem)
    params = sf.params
    defaulted = set(params.defaulted)
    kwargs = {"p": params.p, "d": params.d, "M": params.M, "R": params.R}
    for key, value in (("d", d), ("M", m)):
        if value is not None:
            kwargs[key] = to_value(value)
            defaulted.discard(key)
    if p is not None:
        kwargs["p"] = parse_seq(p)
        defaulted.discard("p")
    if sf.init is not None and defaulted & {"d", "M"}:
        kwargs.update(_trajectory_defaults(sf, N, defaulted))
    params = CriterionParams(defaulted=defaulted, **kwargs)
    s1 = criteria.criterion1_series(sf.spec, params, N)
    s2 = {s: criteria.criterion2_series(sf.spec, params, s, N) for s in ("plus", "minus")}
    s2_verdict = conjunction(r.verdict for r in s2.values())
    overall = conjunction([s1.verdict, s2_verdict])
    answer = {criteria.Verdict.DIVERGENT: "yes", criteria.Verdict.BOUNDED: "no"}.get(overall, "inconclusive")
    return {
        "spec": sf.spec.describe(),
        "N": N,
        "s1": s1.to_dict(),
        "s2": {"plus": s2["plus"].to_dict(), "minus": s2["minus"].to_dict(), "verdict": s2_verdict.value},
        "summary": f"all criterion hypotheses exhibit divergence evidence: {answer}",
    }


@dataclass(frozen=True)
class ExampleCheck:
    name: str
    ok: bool
    message: str
    first_failure: int | None = None
    tag: str | None = None


def verify_example(name: str, n: int = 500) -> ExampleCheck:
    """Simulate a bundled example exactly and confirm residual, closed form and tag."""
    sf = load_bundled(name)
    traj = run_simulate(sf, n, Mode.EXACT)
    for idx in traj.interior:
        res = residual(sf.spec, traj.x, idx)
        if res != 0:
            return ExampleCheck(name, False, f"residual {res} at n={idx}", idx)
    if sf.solution is not None:
        cf = closed_form_window(sf.solution, traj.x.start, traj.x.stop)
        for idx in traj.x.indices():
            if traj.x[idx] != cf[idx]:
                return ExampleCheck(name, False, f"x_{idx} = {traj.x[idx]} differs from closed form {cf[idx]}", int(idx))
    verdict = classify_almost_oscillatory(traj, (traj.n0, traj.horizon))
    if sf.expect is not None and verdict.tag.value != sf.expect:
        return ExampleCheck(name, False, f"tag {verdict.tag.value}, expected {sf.expect}", None, verdict.tag.value)
    return ExampleCheck(name, True,
                        f"{name}: residual exactly 0 on n={traj.interior.start}..{traj.interior.stop - 1}, "
                        f"tag {verdict.tag.value}", None, verdict.tag.value)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    sf = load_spec_file(args.spec)
    traj = run_simulate(sf, args.n, args.mode)
    _emit(trajectory_to_csv(traj), args.out)
    print(f"residual self-check: max scaled |residual| = {traj.max_residual:.3e}", file=sys.stderr)
    if traj.max_residual > DEFAULT_ATOL:
        raise VerificationError(f"residual {traj.max_residual:.3e} exceeds {DEFAULT_ATOL:g}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    sf = load_spec_file(args.spec)
    _emit(run_classify(sf, args.n, args.tol).to_json(), args.out)
    return EXIT_OK


def _cmd_check(args) -> int:
    sf = load_spec_file(args.spec)
    doc = run_check(sf, args.n, args.d, args.m, args.p)
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    print(doc["summary"], file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    result = verify_example(args.name, args.n)
    if not result.ok:
        raise VerificationError(result.message)
    print(result.message)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="almostosc",
        description="Simulate and classify solutions of neutral difference equations "
                    "with quasidifferences, and evaluate almost-oscillation criteria.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write the trajectory as CSV (n,x,z,dz,qd)")
    p.add_argument("spec")
    p.add_argument("--n", type=int, help="horizon N (default: from the spec file)")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("classify", help="simulate, then report almost-oscillation evidence as JSON")
    p.add_argument("spec")
    p.add_argument("--n", type=int)
    p.add_argument("--tol", type=float, default=DEFAULT_ZERO_TOL)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("check", help="partial-sum reports for the divergence conditions")
    p.add_argument("spec")
    p.add_argument("--n", type=int)
    p.add_argument("--d")
    p.add_argument("--m")
    p.add_argument("--p", help="weight sequence expression")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("verify-example", help="exact check of a bundled example")
    p.add_argument("name", choices=BUNDLED)
    p.add_argument("--n", type=int, default=500)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", None) is not None and args.n < 1:
        parser.error("--n must be positive")
    try:
        return args.func(args)
    except (InputError, SpecFileError, SeqLangError, HypothesisError, NonPositiveCoefficientError,
            SeqEvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (VerificationError, InexactError, NumericOverflowError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
