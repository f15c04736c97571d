from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from typing import Any, NoReturn

from . import enable_verbose_stdout_logging
from .alpha import DEFAULT_CAP, DEFAULT_TOL, AlphaMethod
from .catalog import catalog_entries, catalog_lookup
from .exceptions import ConfigError, QlabException
from .report import EXIT_CONFIG_ERROR, EXIT_OK, Report
from .run import CheckName, RunConfig, run_suite
from .version import __version__

DEFAULT_CHECKS = (CheckName.QUASICONVEX, CheckName.CONDITION_B, CheckName.QUASIMONOTONE)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; 2 is reserved for violated properties."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def _vector(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers like 1,2.5 got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--fn", dest="function", help="catalog function name")
    source.add_argument("--expr", dest="expression", help="expression over x1..xN")
    common.add_argument("--dim", type=int, help="dimension of --expr")
    common.add_argument("--box", help='scan box, "lo..hi[,lo..hi...]"')
    common.add_argument("--seed", type=lambda s: int(s, 0), help="seed (default: QLAB_SEED or 42)")
    common.add_argument("--samples", dest="points_per_box", type=int, help="points per box")
    common.add_argument("--alpha", type=float, help="perturbation bound of the robust checkers")
    common.add_argument("--cap", type=float, help=f"alpha* search cap (default {DEFAULT_CAP})")
    common.add_argument("--tol", type=float, help=f"alpha* bracket width (default {DEFAULT_TOL})")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--plot", help="write a TSV plot trace here (1D only)")
    common.add_argument("--no-tracing", dest="tracing_disabled", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging to stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="qlab", description="Quasiconvexity verification laboratory")
    parser.add_argument("--version", action="version", version=f"qlab {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", parents=[common], help="run property checkers")
    check.add_argument(
        "--checks",
        nargs="+",
        choices=[c.value for c in CheckName],
        default=[c.value for c in DEFAULT_CHECKS],
    )
    check.set_defaults(handler=_suite_from_check)

    alpha = commands.add_parser("alpha-star", parents=[common], help="bracket the modulus α*")
    alpha.add_argument(
        "--method",
        dest="methods",
        nargs="+",
        choices=[m.value for m in AlphaMethod],
        default=[m.value for m in AlphaMethod],
    )
    alpha.set_defaults(handler=_suite_from_alpha)

    mvt = commands.add_parser("mvt", parents=[common], help="approximate mean value theorem")
    mvt.add_argument("--a", type=_vector, required=True)
    mvt.add_argument("--b", type=_vector, required=True)
    mvt.set_defaults(handler=_suite_from_lemma, lemma="mvt")

    lemma = commands.add_parser("lemma", help="lemma harnesses")
    lemmas = lemma.add_subparsers(dest="lemma", required=True)

    three = lemmas.add_parser("three-points", parents=[common])
    for name in ("u", "v", "w"):
        three.add_argument(f"--{name}", type=_vector, required=True)
    three.add_argument("--lam", type=float, required=True, help="neighborhood radius")

    construct = lemmas.add_parser("tuacuctri", parents=[common])
    construct.add_argument("--v-star", dest="v_star", type=_vector, required=True)
    for name in ("u", "w", "v0"):
        construct.add_argument(f"--{name}", type=_vector, help="explicit triple (all three)")

    chain = lemmas.add_parser("bode2", parents=[common])
    chain.add_argument("--v-star", dest="v_star", type=_vector, required=True)
    for name in ("u", "v", "w", "z"):
        chain.add_argument(f"--{name}", type=_vector, required=True)

    radial = lemmas.add_parser("radial-limit", parents=[common])
    radial.add_argument("--u", type=_vector, required=True)
    radial.add_argument("--v", type=_vector, required=True)

    for sub in (three, construct, chain, radial):
        sub.set_defaults(handler=_suite_from_lemma)

    catalog = commands.add_parser("catalog", help="inspect the function catalog")
    views = catalog.add_subparsers(dest="view", required=True)
    views.add_parser("list").set_defaults(handler=_catalog_list)
    show = views.add_parser("show")
    show.add_argument("name")
    show.set_defaults(handler=_catalog_show)
    return parser


_COMMON_FIELDS = (
    "function",
    "expression",
    "dim",
    "box",
    "seed",
    "points_per_box",
    "alpha",
    "cap",
    "tol",
    "out",
    "plot",
)


def _config_data(args: argparse.Namespace) -> dict[str, Any]:
    data = {name: getattr(args, name) for name in _COMMON_FIELDS}
    data = {k: v for k, v in data.items() if v is not None}
    data["tracing_disabled"] = args.tracing_disabled
    return data


def _suite_from_check(args: argparse.Namespace) -> RunConfig:
    return RunConfig.build(_config_data(args), checks=args.checks)


def _suite_from_alpha(args: argparse.Namespace) -> RunConfig:
    return RunConfig.build(_config_data(args), alpha_star=args.methods)


def _suite_from_lemma(args: argparse.Namespace) -> RunConfig:
    task: dict[str, Any] = {"lemma": args.lemma}
    for name in ("a", "b", "u", "v", "w", "z", "v0", "v_star", "lam"):
        value = getattr(args, name, None)
        if value is not None:
            task[name] = value
    return RunConfig.build(_config_data(args), lemmas=[task])


def _catalog_list(args: argparse.Namespace) -> int:
    for f in catalog_entries():
        labels = f.labels
        assert labels is not None
        flags = (
            f"lsc={labels.lsc} quasiconvex={labels.quasiconvex} convex={labels.convex}"
            f" alpha_star={labels.alpha_star}"
        )
        print(f"{f.name}\t{f.dim}\t{flags}\t{labels.provenance}")
    return EXIT_OK


def _catalog_show(args: argparse.Namespace) -> int:
    print(json.dumps(catalog_lookup(args.name).describe(), indent=2))
    return EXIT_OK


def _summarize(report: Report) -> str:
    steps = ", ".join(f"{e.name}={e.status}" for e in report.entries)
    return f"{report.function['name']}: {steps} (exit {report.exit_code})"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "verbose", False):
        enable_verbose_stdout_logging()
    try:
        outcome = args.handler(args)
        if isinstance(outcome, int):
            return outcome
        report = run_suite(outcome)
    except ConfigError as e:
        print(f"qlab: config error: {e.message}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except QlabException as e:
        print(f"qlab: {type(e).__name__}: {e.message}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    if outcome.out:
        print(_summarize(report))
    else:
        print(report.to_json())
    return report.exit_code
