"""Command-line front end.

Exit codes::

    0  success
    2  unreadable or malformed net / constraint file
    3  state cap exceeded
    4  no supervisor exists (dangerous initial state, initial constraint violation)
    5  supervisor would inhibit an uncontrollable transition
    6  verification of the controlled net failed
    7  net is not safe
    8  internal consistency failure
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classification import ConsistencyError, InfeasibleError
from .constraints import constraint_from_json
from .model import DeclarationError, SafetyViolation, build_net, dump_net
from .pipeline import (
    RunConfig,
    analysis_report,
    analyze,
    synthesis_json,
    synthesis_report,
    synthesize_net,
    to_json,
    to_text,
)
from .reachability import DEFAULT_MAX_STATES, StateCapExceeded, build_rg, export_dot
from .synthesis import InadmissibleSupervisor, synthesize, verify_mpc

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_STATE_CAP = 3
EXIT_INFEASIBLE = 4
EXIT_INADMISSIBLE = 5
EXIT_UNVERIFIED = 6
EXIT_UNSAFE = 7
EXIT_INTERNAL = 8


class InputError(Exception):
    pass


def _read_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load(path: str):
    try:
        return build_net(_read_json(path))
    except DeclarationError as exc:
        raise InputError(f"{path}: {exc}") from None


def _emit(text: str, args, filename: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render(report: dict, args, stem: str) -> None:
    if args.format == "text":
        _emit(to_text(report), args, f"{stem}.txt")
    else:
        _emit(to_json(report), args, f"{stem}.json")


def _config(args) -> RunConfig:
    return RunConfig(max_states=args.max_states, exact_cover=args.exact_cover, tie_break=args.tie_break)


def cmd_analyze(args) -> int:
    a = analyze(load(args.net), _config(args))
    _render(analysis_report(a), args, "report")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    s = synthesize_net(load(args.net), _config(args))
    _render(synthesis_report(s), args, "report")
    if args.out:
        (Path(args.out) / "controlled_net.json").write_text(dump_net(s.result.controlled), encoding="utf-8")
    return EXIT_OK if s.verification.ok else EXIT_UNVERIFIED


def cmd_verify(args) -> int:
    net = load(args.net)
    config = _config(args)
    if args.constraints:
        raw = _read_json(args.constraints)
        if isinstance(raw, dict):
            raw = raw.get("constraints", [])
        try:
            constraints = [constraint_from_json(net, c) for c in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.constraints}: bad constraint ({exc})") from None
        a = analyze(net, config)
        result = synthesize(constraints, net)
        report = verify_mpc(result, a.classification, config.max_states)
    else:
        s = synthesize_net(net, config)
        result, report = s.result, s.verification
    payload = {"synthesis": synthesis_json(result, report.ok), "verification": report.to_json()}
    _emit(to_json(payload), args, "verification.json")
    return EXIT_OK if report.ok else EXIT_UNVERIFIED


def cmd_export_dot(args) -> int:
    net = load(args.net)
    s = synthesize_net(net, _config(args))
    a = s.analysis
    cl = a.classification
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "rg_real.dot").write_text(export_dot(a.rg_real, cl.highlight(a.rg_real.states)), encoding="utf-8")
    (out / "rg_quasi.dot").write_text(export_dot(a.rg_quasi, cl.highlight(a.rg_quasi.states)), encoding="utf-8")
    rg_c = build_rg(s.result.controlled, max_states=args.max_states)
    n = len(net.places)
    colors = {m: cl.class_of(net.marking(m.bits[:n])) for m in rg_c.states}
    (out / "rg_controlled.dot").write_text(export_dot(rg_c, colors), encoding="utf-8")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("net", help="net declaration (JSON)")
    common.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    common.add_argument("--exact-cover", action="store_true", help="always use exhaustive cover search")
    common.add_argument("--tie-break", choices=("places", "arcs"), default="arcs")
    common.add_argument("--out", metavar="DIR", help="write files into DIR instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(
        prog="pnsynth", description="Maximally permissive Petri net supervisor synthesis."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="classify states").set_defaults(func=cmd_analyze)
    sub.add_parser("synthesize", parents=[common], help="full pipeline").set_defaults(func=cmd_synthesize)
    p = sub.add_parser("verify", parents=[common], help="verify a supervisor")
    p.add_argument("--constraints", metavar="FILE", help='JSON list of {"places": [...], "bound": k}')
    p.set_defaults(func=cmd_verify)
    sub.add_parser("export-dot", parents=[common], help="write DOT graphs").set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        code, msg = EXIT_PARSE, str(exc)
    except StateCapExceeded as exc:
        code, msg = EXIT_STATE_CAP, str(exc)
    except InfeasibleError as exc:
        code, msg = EXIT_INFEASIBLE, str(exc)
    except InadmissibleSupervisor as exc:
        code, msg = EXIT_INADMISSIBLE, str(exc)
    except SafetyViolation as exc:
        code, msg = EXIT_UNSAFE, str(exc)
    except ConsistencyError as exc:
        code, msg = EXIT_INTERNAL, str(exc)
    print(f"pnsynth: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
