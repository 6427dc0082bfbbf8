"""Command-line front end: verification, sweeps, simulation, CSV output.

Exit codes: 0 success (including an audit that *finds* signaling, since
the finding is the product), 2 when a verification fails (a box breaks
its invariants or signals), 1 for usage errors (bad flags, malformed
box CSV, unparseable expressions).

Angles are radians unless --degrees is given. Numeric output uses 17
significant digits unless --digits overrides. The default Monte Carlo
seed comes from the BOXWORLD_SEED environment variable.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import audit as audit_mod
from . import boxes, dsl, hybrid, protocol

SEED_ENV_VAR = "BOXWORLD_SEED"
BUILTIN_BOXES = ("pr", "uniform")


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; this CLI reserves 2 for
    # verification failures, so remap.
    def error(self, message):
        raise _UsageError(message)


def _fmt(value: float, digits: int) -> str:
    return f"{value:.{digits}g}"


def _load_box(source: str, tol: float) -> boxes.ConditionalBox:
    if source == "pr":
        return boxes.pr_box()
    if source == "uniform":
        return boxes.uniform_box()
    path = Path(source)
    if not path.exists():
        raise _UsageError(f"unknown box {source!r}: not a builtin {BUILTIN_BOXES} or a file")
    try:
        text = path.read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read box file {source!r}: {exc}") from exc
    return boxes.loads_csv(text, tol=tol)


def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def _theta_grid(args) -> np.ndarray:
    if args.steps < 1:
        raise _UsageError("--steps must be at least 1")
    if args.steps == 1:
        return np.array([_angle(args.theta_min, args.degrees)])
    return np.linspace(
        _angle(args.theta_min, args.degrees), _angle(args.theta_max, args.degrees), args.steps
    )


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise _UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="boxworld", description=__doc__.splitlines()[0])
    parser.add_argument("--digits", type=int, default=17, help="significant digits in output")
    parser.add_argument("--output", type=Path, default=None, help="write output to a file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_theta(p, required=True):
        p.add_argument("--theta", type=float, required=required, help="angle (radians)")
        p.add_argument("--degrees", action="store_true", help="interpret angles as degrees")

    p = sub.add_parser("verify", help="box invariants and the marginal-independence check")
    p.add_argument("--box", default="pr", help="builtin name (pr, uniform) or CSV path")
    p.add_argument("--tol", type=float, default=boxes.DEFAULT_TOL)

    p = sub.add_parser("chsh", help="CHSH functional of a binary box")
    p.add_argument("--box", default="pr")
    p.add_argument("--tol", type=float, default=boxes.DEFAULT_TOL)

    p = sub.add_parser("local", help="local-polytope membership by LP")
    p.add_argument("--box", default="pr")
    p.add_argument("--tol", type=float, default=boxes.DEFAULT_TOL)

    p = sub.add_parser("signal", help="marginal shift and witness basis at one angle")
    add_theta(p)

    p = sub.add_parser("scan", help="sweep angles; CSV of signaling magnitudes")
    p.add_argument("--theta-min", type=float, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--degrees", action="store_true")

    p = sub.add_parser("repeat", help="rounds needed to reach a target success")
    add_theta(p)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--max-n", type=int, default=protocol.MIN_ROUNDS_MAX_COPIES)

    p = sub.add_parser("simulate", help="seeded Monte Carlo of the repetition protocol")
    add_theta(p)
    p.add_argument("--n", type=int, required=True, help="channel uses per shot")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV_VAR} or 0")

    p = sub.add_parser("audit", help="positivity/normalization/signaling of the effective box")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--theta-min", type=float, default=None)
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--degrees", action="store_true")

    p = sub.add_parser("parse", help="parse a state expression and evaluate it")
    p.add_argument("--expr", required=True)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--dump-rho", action="store_true", help="emit the density operator as CSV")

    return parser


def cmd_verify(args, out) -> int:
    box = _load_box(args.box, args.tol)
    report = boxes.check_no_signaling(box, tol=args.tol)
    ok = max(report.a_to_b_violation, report.b_to_a_violation) <= args.tol
    chsh_text = ""
    if box.table.shape == (2, 2, 2, 2):
        chsh_text = f"; CHSH = {_fmt(boxes.chsh_value(box), args.digits)}"
    status = "OK" if ok else "VIOLATED"
    print(f"no-signaling: {status}{chsh_text}", file=out)
    print(
        f"a->b violation = {_fmt(report.a_to_b_violation, args.digits)}; "
        f"b->a violation = {_fmt(report.b_to_a_violation, args.digits)}",
        file=out,
    )
    if not ok:
        direction, receiver, senders = report.worst_settings
        print(f"worst: {direction} at receiver input {receiver}, sender pair {senders}", file=out)
    return 0 if ok else 2


def cmd_chsh(args, out) -> int:
    box = _load_box(args.box, args.tol)
    print(_fmt(boxes.chsh_value(box), args.digits), file=out)
    return 0


def cmd_local(args, out) -> int:
    box = _load_box(args.box, args.tol)
    local, weights = boxes.is_local(box, tol=args.tol)
    print(f"local: {'true' if local else 'false'}", file=out)
    if local:
        print("weights: " + ",".join(_fmt(w, args.digits) for w in weights), file=out)
    return 0


def cmd_signal(args, out) -> int:
    theta = _angle(args.theta, args.degrees)
    report = hybrid.signaling_witness(theta)
    print(f"theta = {_fmt(theta, args.digits)}", file=out)
    print(f"a->b violation = {_fmt(report.a_to_b_violation, args.digits)}", file=out)
    for name, ket in zip(("witness[0]", "witness[1]"), report.witness_basis):
        amps = " ".join(
            f"{z.real:.{args.digits}g}{z.imag:+.{args.digits}g}j" for z in ket.amplitudes
        )
        print(f"{name} = {amps}", file=out)
    return 0


def cmd_scan(args, out) -> int:
    print("theta,ab_violation,ba_violation", file=out)
    for theta in _theta_grid(args):
        ab = hybrid.signaling_witness(float(theta)).a_to_b_violation
        ba = audit_mod.audit_dynamics(float(theta)).b_to_a_violation
        print(
            f"{_fmt(float(theta), args.digits)},{_fmt(ab, args.digits)},{_fmt(ba, args.digits)}",
            file=out,
        )
    return 0


def cmd_repeat(args, out) -> int:
    theta = _angle(args.theta, args.degrees)
    n = protocol.min_rounds(theta, args.target, max_n=args.max_n)
    print(f"n = {n}", file=out)
    return 0


def cmd_simulate(args, out) -> int:
    theta = _angle(args.theta, args.degrees)
    seed = args.seed if args.seed is not None else _default_seed()
    result = protocol.simulate(theta, args.n, args.shots, seed)
    print("theta,n,exact,empirical,shots,seed", file=out)
    print(
        f"{_fmt(result.theta, args.digits)},{result.n},"
        f"{_fmt(result.exact_success, args.digits)},"
        f"{_fmt(result.empirical_success, args.digits)},{result.shots},{result.seed}",
        file=out,
    )
    return 0


def cmd_audit(args, out) -> int:
    if args.theta is not None:
        thetas = [_angle(args.theta, args.degrees)]
    elif args.theta_min is not None and args.theta_max is not None and args.steps is not None:
        thetas = list(_theta_grid(args))
    else:
        raise _UsageError("audit needs --theta or all of --theta-min/--theta-max/--steps")
    print("theta,pos_ok,norm_ok,ab_violation,ba_violation", file=out)
    for theta in thetas:
        rep = audit_mod.audit_dynamics(float(theta))
        print(
            f"{_fmt(rep.theta, args.digits)},"
            f"{'true' if rep.positivity_ok else 'false'},"
            f"{'true' if rep.normalization_ok else 'false'},"
            f"{_fmt(rep.a_to_b_violation, args.digits)},"
            f"{_fmt(rep.b_to_a_violation, args.digits)}",
            file=out,
        )
    return 0


def cmd_parse(args, out) -> int:
    expr = dsl.parse(args.expr)
    theta = _angle(args.theta, args.degrees) if args.theta is not None else None
    print(f"canonical: {dsl.format(expr)}", file=out)
    state = hybrid.distribute(expr, theta)
    print(f"branches ({len(state.branches)}):", file=out)
    out.write(hybrid.dumps(state, digits=args.digits))
    if args.dump_rho:
        from .quantum import dumps_density_csv

        print("rho:", file=out)
        out.write(dumps_density_csv(state.to_density(), digits=args.digits))
    return 0


_COMMANDS = {
    "verify": cmd_verify,
    "chsh": cmd_chsh,
    "local": cmd_local,
    "signal": cmd_signal,
    "scan": cmd_scan,
    "repeat": cmd_repeat,
    "simulate": cmd_simulate,
    "audit": cmd_audit,
    "parse": cmd_parse,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)

    handle = None
    try:
        out = sys.stdout
        if args.output is not None:
            try:
                handle = open(args.output, "w")
            except OSError as exc:
                raise _UsageError(f"cannot open output file: {exc}") from exc
            out = handle
        return _COMMANDS[args.command](args, out)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (boxes.BoxFormatError, dsl.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (boxes.BoxValidationError, protocol.ZeroSignalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, hybrid.ExpressionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if handle is not None:
            handle.close()


if __name__ == "__main__":
    sys.exit(main())
