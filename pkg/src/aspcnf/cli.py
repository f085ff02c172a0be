"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 input error, 3 certification or
verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .baselines import NotNormal, NotTight, clark_completion, global_translation
from .bench import SCENARIOS, reports_to_json, scenario_reports
from .bijective import BijectiveOptions, translate_bijective
from .cnf import CertificationFailed, write_dimacs
from .decomposition import (InvalidTd, UncoveredRule, assign_rules,
                            decompose_heuristic, make_nice, read_td,
                            validate_td, write_td)
from .hardness import (AuditFailure, InvariantViolation, MalformedInstance,
                       build_hardness_program, djp_parse, random_djp)
from .oracles import TooLarge, check_preservation
from .ordered import GLOBAL_BITS, OrderedOptions, translate_ordered
from .program import NotHcf, ParseError, format_program, parse_program, primal_graph

USAGE_EXIT = 1
INPUT_EXIT = 2
CHECK_EXIT = 3

INPUT_ERRORS = (ParseError, NotHcf, NotTight, NotNormal, InvalidTd,
                UncoveredRule, MalformedInstance, InvariantViolation,
                TooLarge, AuditFailure, OSError, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _add_td_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--td", metavar="FILE",
                     help="guiding decomposition in PACE .td format")
    sub.add_argument("--root", type=int, default=None,
                     help="root bag id for --td (default: bag 1)")
    sub.add_argument("--heuristic", choices=("min-fill", "min-degree"),
                     default="min-fill")
    sub.add_argument("--seed", type=int, default=0)


def _guiding_td(args, graph):
    if args.td:
        td = read_td(_read_text(args.td), root=args.root)
    else:
        td = decompose_heuristic(graph, args.heuristic, args.seed)
    report = validate_td(graph, td)
    if not report.valid:
        raise InvalidTd(
            f"decomposition does not match the program: missing vertices "
            f"{report.missing_vertices}, uncovered edges {report.uncovered_edges}, "
            f"disconnected {report.disconnected_vertices}")
    return td


def _translate(args):
    program = parse_program(_read_text(args.input))
    witness = None
    if args.reduction == "completion":
        formula = clark_completion(program)
    elif args.reduction == "global":
        formula, _ = global_translation(
            program, OrderedOptions(seed=args.seed))
    else:
        td = _guiding_td(args, primal_graph(program))
        nice = make_nice(td)
        assign = assign_rules(program, nice)
        if args.reduction == "ordered":
            scope = GLOBAL_BITS if args.global_bits else "local"
            opts = OrderedOptions(strengthen=args.strengthen,
                                  ordering_scope=scope, seed=args.seed)
            formula, witness = translate_ordered(program, nice, assign, opts)
        else:
            opts = BijectiveOptions(max_rules_per_node=args.max_rules_per_node,
                                    seed=args.seed)
            formula, witness = translate_bijective(program, nice, assign, opts)
        if args.certify:
            if args.global_bits:
                sys.stderr.write("note: no width bound is certified for "
                                 "global ordering bits\n")
            else:
                from .cnf import certify_width
                regime = "klogk" if args.reduction == "ordered" else "ksquared"
                report = certify_width(formula, witness, td.width, regime)
                sys.stderr.write(
                    f"certified: witness width {report.witness_width} <= "
                    f"{regime} bound {report.bound} (input width {td.width})\n")
    if args.certify and args.reduction in ("completion", "global"):
        sys.stderr.write(f"note: the {args.reduction} encoding claims no "
                         f"width bound; nothing to certify\n")
    _write_text(args.output, write_dimacs(formula))
    if args.witness:
        if witness is None:
            sys.stderr.write("note: this reduction produces no witness\n")
        else:
            _write_text(args.witness, write_td(witness.td))
    return 0


def _decompose(args):
    program = parse_program(_read_text(args.input))
    td = decompose_heuristic(primal_graph(program), args.heuristic, args.seed)
    _write_text(args.output, write_td(td))
    return 0


def _verify(args):
    program = parse_program(_read_text(args.input))
    if args.reduction == "completion":
        formula = clark_completion(program)
    elif args.reduction == "global":
        formula, _ = global_translation(program)
    else:
        td = _guiding_td(args, primal_graph(program))
        nice = make_nice(td)
        assign = assign_rules(program, nice)
        if args.reduction == "ordered":
            opts = OrderedOptions(strengthen=args.strengthen, seed=args.seed)
            formula, _ = translate_ordered(program, nice, assign, opts)
        else:
            formula, _ = translate_bijective(program, nice, assign,
                                             BijectiveOptions(seed=args.seed))
    report = check_preservation(program, formula, args.mode, cap=args.cap)
    sys.stdout.write(json.dumps(report.to_json_dict(), indent=2) + "\n")
    return 0 if report.ok else CHECK_EXIT


def _gen_hardness(args):
    if args.random:
        n, m, q = args.random
        inst = random_djp(args.seed, n, m, q)
    elif args.input:
        inst = djp_parse(_read_text(args.input))
    else:
        raise MalformedInstance("need an instance file or --random N M Q")
    result = build_hardness_program(inst, args.heuristic, args.seed)
    _write_text(args.output, format_program(result.program))
    if args.td_out:
        if result.td is None:
            sys.stderr.write("note: early-out, no decomposition produced\n")
        else:
            _write_text(args.td_out, write_td(result.td))
    if result.early_out:
        sys.stderr.write("note: more open pairs than bag atoms; emitted the "
                         "canonical inconsistent program\n")
    return 0


def _bench(args):
    reports = scenario_reports(args.scenario, args.count, args.seed,
                               args.heuristic)
    _write_text(args.output, reports_to_json(reports))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="aspcnf",
                     description="Decomposition-guided ASP-to-CNF translation")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("translate", help="translate a program to DIMACS CNF")
    tr.add_argument("input", help="program file ('-' for stdin)")
    tr.add_argument("--reduction", required=True,
                    choices=("ordered", "bijective", "completion", "global"))
    tr.add_argument("--strengthen", action="store_true",
                    help="prune duplicate node-local orderings (ordered only)")
    tr.add_argument("--global-bits", action="store_true",
                    help="one global position per atom (ordered only)")
    tr.add_argument("--max-rules-per-node", type=int, default=None,
                    help="bag-program splitting threshold (bijective only)")
    tr.add_argument("--certify", action="store_true",
                    help="validate the witness and check the width bound")
    tr.add_argument("-o", "--output", default=None, metavar="FILE")
    tr.add_argument("--witness", default=None, metavar="FILE",
                    help="write the witness decomposition (PACE .td)")
    _add_td_options(tr)
    tr.set_defaults(func=_translate)

    de = sub.add_parser("decompose", help="decompose a program's primal graph")
    de.add_argument("input")
    de.add_argument("--heuristic", choices=("min-fill", "min-degree"),
                    default="min-fill")
    de.add_argument("--seed", type=int, default=0)
    de.add_argument("-o", "--output", default=None, metavar="FILE")
    de.set_defaults(func=_decompose)

    ve = sub.add_parser("verify",
                        help="compare projected models against answer sets")
    ve.add_argument("input")
    ve.add_argument("--mode", choices=("weak", "bijective"), default="weak")
    ve.add_argument("--reduction", default="ordered",
                    choices=("ordered", "bijective", "completion", "global"))
    ve.add_argument("--strengthen", action="store_true")
    ve.add_argument("--cap", type=int, default=22,
                    help="atom limit for the brute-force oracle")
    _add_td_options(ve)
    ve.set_defaults(func=_verify)

    gh = sub.add_parser("gen-hardness",
                        help="reduce a disjoint-paths instance to a program")
    gh.add_argument("input", nargs="?", default=None,
                    help="instance in DjP format")
    gh.add_argument("--random", nargs=3, type=int, default=None,
                    metavar=("N", "M", "Q"),
                    help="generate a random instance instead")
    gh.add_argument("--heuristic", choices=("min-fill", "min-degree"),
                    default="min-fill")
    gh.add_argument("--seed", type=int, default=0)
    gh.add_argument("-o", "--output", default=None, metavar="FILE")
    gh.add_argument("--td-out", default=None, metavar="FILE",
                    help="write the pair-connected decomposition")
    gh.set_defaults(func=_gen_hardness)

    be = sub.add_parser("bench", help="width statistics over a synthetic corpus")
    be.add_argument("--scenario", required=True, choices=SCENARIOS)
    be.add_argument("--count", type=int, default=20)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--heuristic", choices=("min-fill", "min-degree"),
                    default="min-degree")
    be.add_argument("-o", "--output", default=None, metavar="FILE")
    be.set_defaults(func=_bench)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        return args.func(args)
    except CertificationFailed as exc:
        sys.stderr.write(f"certification failed: {exc}\n")
        return CHECK_EXIT
    except INPUT_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_EXIT


if __name__ == "__main__":
    sys.exit(main())
