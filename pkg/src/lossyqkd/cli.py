"""Command-line front end: ``lossyqkd {scan,check,witness,qber}``.

Exit codes: 0 PreconditionHolds, 2 NoKey, 3 Marginal, 1 any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .channel import ChannelParams, apply_channel, qber_analytic, qber_simulated
from .protocols import PROTOCOLS, get_protocol
from .scan import NonMonotoneError, ScanConfig, check_point, threshold_scan, write_rows
from .sdp import SolverError
from .verifier import Outcome

EXIT_ERROR = 1


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the NoKey exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, point: bool = True) -> None:
    p.add_argument("--protocol", required=True, choices=sorted(PROTOCOLS))
    p.add_argument("--theta", type=float, default=0.0, help="collective rotation in radians")
    p.add_argument("--alpha", type=float, default=None, help="signal overlap parameter")
    if point:
        p.add_argument("--p", type=float, default=0.0, help="loss probability")
        p.add_argument("--e", type=float, default=0.0, help="depolarising rate")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--verbose", action="store_true", help="log solver iterations to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lossyqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    scan = sub.add_parser("scan", help="threshold curve e*(p) by bisection")
    _common(scan, point=False)
    scan.add_argument("--mode", choices=("two-way", "rr", "dr"), default="two-way")
    scan.add_argument("--p-min", type=float, default=0.0)
    scan.add_argument("--p-max", type=float, default=0.95)
    scan.add_argument("--p-steps", type=int, default=21)
    scan.add_argument("--tol", type=float, default=1e-4)
    scan.add_argument("--jobs", type=int, default=1, help="worker processes for rows")

    check = sub.add_parser("check", help="decide a single (p, e) point")
    _common(check)
    check.add_argument("--mode", choices=("two-way", "rr", "dr"), default="two-way")

    wit = sub.add_parser("witness", help="dump the optimal witness as JSON")
    _common(wit)
    wit.add_argument("--mode", choices=("two-way", "rr", "dr"), default="two-way")

    qber = sub.add_parser("qber", help="analytic and simulated QBER")
    _common(qber)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_scan(args) -> int:
    cfg = ScanConfig(args.protocol, args.mode, args.theta, args.alpha, args.p_min, args.p_max,
                     args.p_steps, args.tol, args.out, args.format)
    rows = threshold_scan(cfg, jobs=args.jobs)
    write_rows(rows, cfg, stream=sys.stdout)
    return 0


def _point_qber(args) -> float:
    return qber_analytic(args.protocol, args.e, args.theta, args.alpha)


def _cmd_check(args) -> int:
    report = check_point(args.protocol, args.mode, args.p, args.e, args.theta, args.alpha,
                         verbose=args.verbose)
    fields = {
        "protocol": args.protocol,
        "mode": args.mode,
        "p": args.p,
        "e": args.e,
        "theta": args.theta,
        "decision": report.decision.value,
        "t_star": report.t_star,
        "witness_value": report.witness.value,
        "qber": _point_qber(args),
        "face_reduced": report.face_reduced,
        "iterations": report.solver["iterations"],
    }
    if args.format == "json":
        text = json.dumps(fields, indent=2) + "\n"
    else:
        text = "".join(f"{k}: {v}\n" for k, v in fields.items())
    _emit(text, args.out)
    return report.exit_code


def _cmd_witness(args) -> int:
    report = check_point(args.protocol, args.mode, args.p, args.e, args.theta, args.alpha,
                         verbose=args.verbose)
    if report.decision is Outcome.MARGINAL:
        print(f"refusing to dump a witness at a Marginal point (t* = {report.t_star:.3e})",
              file=sys.stderr)
        return report.exit_code
    payload = report.witness.to_dict()
    payload["decision"] = report.decision.value
    payload["point"] = {"protocol": args.protocol, "mode": args.mode, "p": args.p, "e": args.e,
                        "theta": args.theta, "alpha": args.alpha}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return report.exit_code


def _cmd_qber(args) -> int:
    spec = get_protocol(args.protocol, args.alpha)
    analytic = qber_analytic(spec, args.e, args.theta)
    simulated = qber_simulated(spec, apply_channel(spec, ChannelParams(args.p, args.e, args.theta)))
    fields = {"protocol": args.protocol, "e": args.e, "theta": args.theta, "p": args.p,
              "qber_analytic": analytic, "qber_simulated": simulated}
    if args.format == "json":
        text = json.dumps(fields, indent=2) + "\n"
    else:
        text = "".join(f"{k}: {v!r}\n" if isinstance(v, float) else f"{k}: {v}\n"
                       for k, v in fields.items())
    _emit(text, args.out)
    return 0


def _configure_logging(verbose: bool) -> None:
    logger = logging.getLogger("lossyqkd")
    for h in [h for h in logger.handlers if getattr(h, "_lossyqkd_cli", False)]:
        logger.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    handler._lossyqkd_cli = True
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False


_COMMANDS = {"scan": _cmd_scan, "check": _cmd_check, "witness": _cmd_witness, "qber": _cmd_qber}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, SolverError, NonMonotoneError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
