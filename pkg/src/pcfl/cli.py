import argparse
import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from .base import closed_type, infer
from .corpus import ctx_spot_check, run_manifest, sample_contexts
from .embed import embed, mass_preservation
from .equivalence import check_equiv, open_check, sim_directions, verdict_to_json
from .evaluate import dist_to_json, eval_stable, eval_with_deficit
from .flow import disentangle_json
from .lmc import arg_universe_for, build_fragment, fragment_to_json, program_state
from .parser import parse_term, parse_test, parse_type, parse_typing_context, pretty, pretty_type, pretty_untyped
from .testing import compile_test
from .types.errors import PcflError, ResourceLimitError
from .types.misc import Config, Verdict, VerdictKind
from .types.syntax import Term, Type

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SEPARATED = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

Report = Dict[str, Any]


def _read(source: str) -> str:
    if source == "-":
        return sys.stdin.read()

    return Path(source).read_text(encoding="utf-8")


def _term(source: str) -> Term:
    return parse_term(_read(source))


def _config(args: argparse.Namespace) -> Config:
    return Config(args.fuel, args.arg_size, args.depth, args.test_depth, args.state_cap).validate()


def _pair(args: argparse.Namespace):
    left, right = _term(args.left), _term(args.right)
    sigma = parse_type(args.type) if args.type else closed_type(left, what="left term")

    return left, right, sigma


def _emit(args: argparse.Namespace, report: Report, text: Callable[[Report], str]):
    if args.json:
        print(json.dumps(report, indent=2, ensure_ascii=False))
    else:
        print(text(report))


def _verdict_text(report: Report) -> str:
    lines = [report["verdict"]]
    if "witness_test" in report:
        lines.append(f"witness: {report['witness_test']}")
        lines.append(f"p_left: {report['p_left']}  p_right: {report['p_right']}")
    if "closure" in report:
        lines.append("closure: " + ", ".join(f"{k} = {v}" for k, v in report["closure"].items()))

    return "\n".join(lines)


def _verdict_exit(verdict: Verdict) -> int:
    return EXIT_SEPARATED if verdict.kind == VerdictKind.NotEquivalent else EXIT_OK


############
# Commands #
############


def cmd_check(args: argparse.Namespace) -> int:
    term = _term(args.file)
    gamma = parse_typing_context(args.open) if args.open else {}
    ty = infer(gamma, term)
    _emit(args, {"term": pretty(term), "type": pretty_type(ty)}, lambda r: r["type"])

    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    term = _term(args.file)
    closed_type(term)

    if args.stable:
        dist, deficit, fuel = eval_stable(term, args.fuel)
    else:
        (dist, deficit), fuel = eval_with_deficit(term, args.fuel), args.fuel

    report = {**dist_to_json(dist), "deficit": str(deficit), "fuel": fuel}

    def text(r: Report) -> str:
        rows = [f"{s['prob']}\t{s['value']}" for s in r["support"]]
        return "\n".join([*rows, f"mass {r['mass']}, deficit {r['deficit']} at fuel {r['fuel']}"])

    _emit(args, report, text)

    return EXIT_OK


def cmd_equiv(args: argparse.Namespace) -> int:
    cfg = _config(args)
    left, right = _term(args.left), _term(args.right)

    if args.open:
        gamma = parse_typing_context(args.open)
        sigma = parse_type(args.type) if args.type else infer(gamma, left)
        verdict = open_check(gamma, left, right, sigma, cfg)
    else:
        sigma = parse_type(args.type) if args.type else closed_type(left, what="left term")
        verdict = check_equiv(left, right, sigma, cfg)

    _logger.info("equiv: %s", verdict.kind.value)
    _emit(args, verdict_to_json(verdict), _verdict_text)

    return _verdict_exit(verdict)


def cmd_sim(args: argparse.Namespace) -> int:
    cfg = _config(args)
    left, right, sigma = _pair(args)
    left_by_right, right_by_left = sim_directions(left, right, sigma, cfg)

    report = {
        "right_simulates_left": left_by_right,
        "left_simulates_right": right_by_left,
        "config": cfg.as_dict(),
    }

    def text(r: Report) -> str:
        return "\n".join(
            [
                f"left ≾ right: {'yes' if r['right_simulates_left'] else 'no'}",
                f"right ≾ left: {'yes' if r['left_simulates_right'] else 'no'}",
            ]
        )

    _emit(args, report, text)

    return EXIT_OK


def cmd_distinguish(args: argparse.Namespace) -> int:
    cfg = _config(args)
    left, right, sigma = _pair(args)
    verdict = check_equiv(left, right, sigma, cfg)
    report = verdict_to_json(verdict)

    def text(r: Report) -> str:
        if "witness_test" not in r:
            return "none"
        return f"{r['witness_test']}\np_left: {r['p_left']}  p_right: {r['p_right']}"

    _emit(args, report, text)

    return _verdict_exit(verdict)


def cmd_compile_test(args: argparse.Namespace) -> int:
    test = parse_test(args.test)
    sigma = parse_type(args.type)
    program, value = compile_test(test, sigma)
    report = {"program_context": pretty(program), "value_context": pretty(value)}

    _emit(args, report, lambda r: f"program: {r['program_context']}\nvalue:   {r['value_context']}")

    return EXIT_OK


def cmd_embed(args: argparse.Namespace) -> int:
    term = _term(args.file)
    closed_type(term)
    report: Report = {"untyped": pretty_untyped(embed(term))}

    if args.masses:
        comparison = mass_preservation(term, args.fuel)
        report.update(source_mass=comparison.src.to_json(), target_mass=comparison.tgt.to_json())

    def text(r: Report) -> str:
        if "source_mass" not in r:
            return r["untyped"]
        return f"{r['untyped']}\nmass {r['source_mass']} -> {r['target_mass']}"

    _emit(args, report, text)

    return EXIT_OK


def cmd_disentangle(args: argparse.Namespace) -> int:
    obj = json.loads(_read(args.file))
    print(json.dumps(disentangle_json(obj)))

    return EXIT_OK


def cmd_spot_check(args: argparse.Namespace) -> int:
    cfg = _config(args)
    left, right, sigma = _pair(args)

    if args.contexts:
        lines = _read(args.contexts).splitlines()
        contexts = [parse_term(line) for line in lines if line.strip() and not line.lstrip().startswith("#")]
    else:
        contexts = sample_contexts(sigma, args.samples, args.seed, cfg.arg_size)

    rows = ctx_spot_check(left, right, sigma, contexts, cfg.fuel)
    report = {"rows": [row.to_json(pretty(row.context)) for row in rows], "config": cfg.as_dict()}

    def text(r: Report) -> str:
        out = []
        for row in r["rows"]:
            if "error" in row:
                out.append(f"error\t{row['context']}\t{row['error']}")
            else:
                mark = "≤" if row["leq"] else ">"
                out.append(f"{row['mass_left']} {mark} {row['mass_right']}\t{row['context']}")
        return "\n".join(out)

    _emit(args, report, text)

    return EXIT_OK if all(row.leq is not False for row in rows) else EXIT_SEPARATED


def cmd_export(args: argparse.Namespace) -> int:
    cfg = _config(args)
    terms: List[Term] = [_term(source) for source in args.files]
    sigma: Type = parse_type(args.type) if args.type else closed_type(terms[0])
    for term in terms:
        closed_type(term, sigma)

    roots = [program_state(term, sigma) for term in terms]
    fragment = build_fragment(roots, cfg.fuel, arg_universe_for(sigma, cfg.arg_size), cfg.depth, cfg.state_cap)
    print(json.dumps(fragment_to_json(fragment), indent=2, ensure_ascii=False))

    return EXIT_OK


def cmd_corpus(args: argparse.Namespace) -> int:
    results = run_manifest(_config(args), args.kind or None)
    report = {"results": [result.to_json() for result in results]}

    def text(r: Report) -> str:
        return "\n".join(f"{'ok' if e['ok'] else 'FAILED'}\t{e['kind']}\t{e['name']}" for e in r["results"])

    _emit(args, report, text)

    return EXIT_OK if all(result.ok for result in results) else EXIT_SEPARATED


##########
# Parser #
##########


def _bounds(parser: argparse.ArgumentParser):
    defaults = Config()
    parser.add_argument("--fuel", type=int, default=defaults.fuel, help="big-step derivation depth")
    parser.add_argument("--arg-size", type=int, default=defaults.arg_size, help="size bound of argument values")
    parser.add_argument("--depth", type=int, default=defaults.depth, help="fragment exploration depth")
    parser.add_argument("--test-depth", type=int, default=defaults.test_depth, help="initial witness search depth")
    parser.add_argument("--state-cap", type=int, default=defaults.state_cap, help="maximum fragment states")


def _two_terms(parser: argparse.ArgumentParser):
    parser.add_argument("left", help="file with the left term, - for stdin")
    parser.add_argument("right", help="file with the right term")
    parser.add_argument("--type", help="type of both terms, inferred from the left one by default")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="pcfl", description="Bounded analyses of probabilistic PCFL programs")
    sub = parser.add_subparsers(dest="command", required=True)
    add = functools.partial(sub.add_parser, parents=[common])

    p = add("check", help="infer the type of a term")
    p.add_argument("file")
    p.add_argument("--open", metavar="GAMMA", help="typing context, e.g. 'x:bool, y:int'")
    p.set_defaults(handler=cmd_check)

    p = add("eval", help="evaluate a closed term to its value distribution")
    p.add_argument("file")
    p.add_argument("--fuel", type=int, default=Config().fuel)
    p.add_argument("--stable", action="store_true", help="double the fuel until the deficit is 0")
    p.set_defaults(handler=cmd_eval)

    p = add("equiv", help="bounded applicative bisimilarity of two terms")
    _two_terms(p)
    _bounds(p)
    p.add_argument("--open", metavar="GAMMA", help="check open terms under every bounded closure")
    p.set_defaults(handler=cmd_equiv)

    p = add("sim", help="bounded applicative similarity in both directions")
    _two_terms(p)
    _bounds(p)
    p.set_defaults(handler=cmd_sim)

    p = add("distinguish", help="search a test separating two terms")
    _two_terms(p)
    _bounds(p)
    p.set_defaults(handler=cmd_distinguish)

    p = add("compile-test", help="compile a test into program and value contexts")
    p.add_argument("test")
    p.add_argument("type")
    p.set_defaults(handler=cmd_compile_test)

    p = add("embed", help="translate a term into the untyped calculus")
    p.add_argument("file")
    p.add_argument("--masses", action="store_true", help="compare convergence masses before and after")
    p.add_argument("--fuel", type=int, default=Config().fuel)
    p.set_defaults(handler=cmd_embed)

    p = add("disentangle", help="solve a probability assignment given as JSON")
    p.add_argument("file", help="JSON file, - for stdin")
    p.set_defaults(handler=cmd_disentangle)

    p = add("spot-check", help="compare convergence masses under program contexts")
    _two_terms(p)
    _bounds(p)
    p.add_argument("--contexts", help="file with one context per line, sampled when absent")
    p.add_argument("--samples", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_spot_check)

    p = add("export", help="dump the bounded chain fragment of some terms as JSON")
    p.add_argument("files", nargs="+")
    p.add_argument("--type")
    _bounds(p)
    p.set_defaults(handler=cmd_export)

    p = add("corpus", help="run the shipped example manifest")
    p.add_argument("--kind", action="append", choices=["eval", "equiv", "witness", "spot_check"])
    _bounds(p)
    p.set_defaults(handler=cmd_corpus)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.handler(args)
    except ResourceLimitError as e:
        print(f"pcfl: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (PcflError, OSError, KeyError, ValueError) as e:
        print(f"pcfl: {e}", file=sys.stderr)
        return EXIT_INPUT


#####################
#      Exports      #
#####################

__all__ = [
    "build_parser",
    "main",
]


if __name__ == "__main__":
    sys.exit(main())
