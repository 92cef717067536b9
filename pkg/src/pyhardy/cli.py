"""Command-line front end.

Usage:
    py-hardy analyze --preset classical:p=2,alpha=4
    py-hardy analyze --M power:p=2 --phi="-4*ln(r)" --omega "1/r" --traces out/
    py-hardy verify --triple triple.toml --functions functions.toml --jobs 4
    py-hardy verify --preset gaussian_counterexample --stock
    py-hardy classify --preset classical --u "r"
    py-hardy bk --preset gaussian_counterexample
    py-hardy muckenhoupt --preset classical:p=2,alpha=-2
    py-hardy sharpness --preset classical --budget 2000
    py-hardy catalog list
    py-hardy catalog show log_weights

Reports are JSON on stdout (or ``--out``); logs go to stderr.

Exit codes:
    0  success (verdict B1/B2/both, inequality holds, condition satisfied)
    1  condition not met (verdict neither, holds=no, BK violated, ...)
    2  input error (bad expression, unknown name, missing file, empty batch)
    3  numeric failure (non-finite certificate, quadrature failed)
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import catalog, report, traces
from .bloomkerman import BKStatus, bk_check, muckenhoupt_b
from .classify import Answer, TestFunction, classify_membership, quick_membership
from .config import DEFAULTS, Settings, load_settings
from .integrate import QuadratureError
from .loader import load_family, load_functions, load_triple
from .verifier import CounterexampleError, Holds, norm_verify, sharpness_search, verify
from .weights import Certificate, Verdict, WeightTriple, certify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_MET = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_INPUT_ERRORS = (ValueError, KeyError, FileNotFoundError, TypeError)


class _Run:
    """Per-invocation state: settings, input echo and stage timings."""

    def __init__(self, args: argparse.Namespace, settings: Settings):
        self.args = args
        self.settings = settings
        self.echo: Dict[str, Any] = {}
        self.timing: Dict[str, float] = {}

    def timed(self, stage: str, fn: Callable[[], Any]) -> Any:
        start = time.perf_counter()
        try:
            return fn()
        finally:
            self.timing[stage] = time.perf_counter() - start

    def finish(
        self, sections: Dict[str, Any], code: int, diagnostics: Sequence[str] = ()
    ) -> Tuple[Dict[str, Any], int]:
        timing = self.timing if self.args.timing else None
        doc = report.run_report(
            self.args.command, self.settings, self.echo, sections, diagnostics, code, timing
        )
        return doc, code


# ----------------------------------------------------------------------------
# Inputs
# ----------------------------------------------------------------------------


def _triple(run: _Run) -> WeightTriple:
    args = run.args
    inline = [args.M, args.phi, args.omega]
    if args.triple:
        run.echo["triple_file"] = str(args.triple)
        t = load_triple(args.triple, run.settings)
    elif args.preset:
        run.echo["preset"] = args.preset
        t = catalog.load(args.preset, run.settings).triple
    elif any(v is not None for v in inline):
        if not all(v is not None for v in inline):
            raise ValueError("inline triples need all of --M, --phi and --omega")
        t = WeightTriple.build(args.M, args.phi, args.omega, settings=run.settings)
    else:
        raise ValueError(
            "a triple is required: --triple FILE, --preset NAME or --M/--phi/--omega"
        )
    run.echo["triple"] = t.describe()
    return t


def _functions(run: _Run) -> List[TestFunction]:
    args = run.args
    if getattr(args, "u", None):
        run.echo["u"] = args.u
        return [TestFunction.from_text(args.u, args.uprime, args.kind)]
    if args.functions:
        run.echo["functions_file"] = str(args.functions)
        return load_functions(args.functions)
    if args.stock:
        run.echo["functions"] = "stock"
        return catalog.stock_functions()
    raise ValueError("test functions are required: --functions FILE or --stock")


def _certificate(run: _Run, t: WeightTriple) -> Certificate:
    cert = run.timed("certify", lambda: certify(t, run.settings))
    override = getattr(run.args, "constant", None)
    if override is None:
        return cert
    if not override > 0:
        raise ValueError(f"--constant must be positive, got {override!r}")
    run.echo["constant"] = override
    active = run.args.active_class or cert.active_class
    if active is None:
        raise ValueError("--constant on a triple with verdict neither needs --active-class")
    verdict = {"R+": Verdict.B1, "R-": Verdict.B2}[active]
    return replace(
        cert,
        verdict=cert.verdict if cert.verdict is not Verdict.NEITHER else verdict,
        C=override,
        C_tilde=override + 1.0,
        certified=False,
        active_class=active,
        notes=cert.notes + ("constant supplied with --constant",),
    )


def _ordered(run: _Run, fn: Callable[[TestFunction], Any], items: List[TestFunction]) -> List[Any]:
    jobs = max(1, int(run.args.jobs))
    if jobs == 1 or len(items) < 2:
        return [fn(u) for u in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _write_traces(run: _Run, items: Callable[[], List[traces.Trace]]) -> None:
    directory = run.args.traces
    if directory:
        written = traces.write_all(run.timed("traces", items), directory)
        run.echo["traces"] = sorted(str(p) for p in written.values())


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------


def cmd_analyze(run: _Run) -> Tuple[Dict[str, Any], int]:
    t = _triple(run)
    cert = _certificate(run, t)
    _write_traces(run, lambda: traces.b_traces(t) + traces.kl_traces(t, run.settings))
    sections = {"certificate": report.certificate_dict(cert)}
    if any(math.isnan(v) for v in (cert.b1, cert.b2, cert.L)):
        return run.finish(sections, EXIT_NUMERIC, ["certificate has a non-finite component"])
    code = EXIT_NOT_MET if cert.verdict is Verdict.NEITHER else EXIT_OK
    return run.finish(sections, code)


def cmd_verify(run: _Run) -> Tuple[Dict[str, Any], int]:
    t = _triple(run)
    functions = _functions(run)
    cert = _certificate(run, t)
    results = run.timed(
        "verify", lambda: _ordered(run, lambda u: verify(t, cert, u, run.settings), functions)
    )
    sections: Dict[str, Any] = {
        "certificate": report.certificate_dict(cert),
        "verifications": [report.verification_dict(r) for r in results],
    }
    if run.args.norm:
        norms = run.timed(
            "norm",
            lambda: _ordered(run, lambda u: norm_verify(t, cert, u, run.settings), functions),
        )
        sections["norm_verifications"] = [report.norm_dict(n) for n in norms]
        results = list(results) + list(norms)
    _write_traces(run, lambda: [traces.theta_trace(t, u, run.settings) for u in functions])
    failed = [r.function for r in results if r.holds is Holds.NO]
    if failed:
        logger.warning("inequality fails for %s", ", ".join(failed))
        return run.finish(sections, EXIT_NOT_MET, [f"holds=no for {name}" for name in failed])
    return run.finish(sections, EXIT_OK)


def cmd_classify(run: _Run) -> Tuple[Dict[str, Any], int]:
    t = _triple(run)
    functions = _functions(run)

    def one(u: TestFunction) -> Dict[str, Any]:
        out: Dict[str, Any] = {"function": u.label}
        out["direct"] = report.membership_dict(classify_membership(t, u, run.settings), True)
        out["sufficient"] = report.membership_dict(quick_membership(t, u, run.settings))
        return out

    rows = run.timed("classify", lambda: _ordered(run, one, functions))
    _write_traces(run, lambda: [traces.theta_trace(t, u, run.settings) for u in functions])
    undecided = [
        row["function"]
        for row in rows
        if row["direct"]["in_Rplus"] is Answer.UNDETERMINED
        and row["direct"]["in_Rminus"] is Answer.UNDETERMINED
        and row["sufficient"] is None
    ]
    code = EXIT_NOT_MET if undecided else EXIT_OK
    return run.finish({"memberships": rows}, code, [f"undetermined: {n}" for n in undecided])


def cmd_bk(run: _Run) -> Tuple[Dict[str, Any], int]:
    t = _triple(run)
    verdict = run.timed("bk", lambda: bk_check(t, settings=run.settings))
    sections = {"bk": report.bk_dict(verdict)}
    if verdict.status is BKStatus.SATISFIED:
        return run.finish(sections, EXIT_OK)
    if verdict.status is BKStatus.UNDETERMINED:
        return run.finish(sections, EXIT_NUMERIC, ["quadrature did not settle on the grid"])
    return run.finish(sections, EXIT_NOT_MET)


def cmd_muckenhoupt(run: _Run) -> Tuple[Dict[str, Any], int]:
    t = _triple(run)
    p = run.args.p if run.args.p is not None else t.M.degree
    if p is None:
        raise ValueError(f"muckenhoupt needs --p for M = {t.M.name!r}")
    run.echo["p"] = p
    B = run.timed("muckenhoupt", lambda: muckenhoupt_b(float(p), t, run.settings))
    sections = {"muckenhoupt": {"p": p, "B": B}}
    if math.isnan(B):
        return run.finish(sections, EXIT_NUMERIC, ["quadrature failed"])
    return run.finish(sections, EXIT_OK if math.isfinite(B) else EXIT_NOT_MET)


def cmd_sharpness(run: _Run) -> Tuple[Dict[str, Any], int]:
    args = run.args
    t = _triple(run)
    if args.family:
        run.echo["family_file"] = str(args.family)
        family = load_family(args.family)
    elif args.preset:
        family = catalog.load(args.preset, run.settings).family()
        if family is None:
            raise ValueError(f"catalog entry {args.preset!r} has no extremal family; use --family")
    else:
        raise ValueError("sharpness needs --family FILE or a --preset with an extremal family")
    run.echo["family"] = {"name": family.name, "template": family.template}
    cert = _certificate(run, t)
    sections: Dict[str, Any] = {"certificate": report.certificate_dict(cert)}
    if cert.C is None:
        return run.finish(sections, EXIT_NOT_MET, ["verdict neither: no constant to approach"])
    try:
        result = run.timed(
            "sharpness", lambda: sharpness_search(t, cert, family, args.budget, run.settings)
        )
    except CounterexampleError as exc:
        sections["counterexample"] = {"params": dict(exc.params), "ratio": exc.ratio}
        return run.finish(sections, EXIT_NOT_MET, [str(exc)])
    sections["sharpness"] = report.sharpness_dict(result, cert.C)
    return run.finish(sections, EXIT_OK)


def cmd_catalog(args: argparse.Namespace) -> int:
    if args.action == "list":
        for name in catalog.list_names():
            print(name)
        return EXIT_OK
    if not args.name:
        raise ValueError("catalog show needs a NAME")
    entry = catalog.load(args.name)
    print(f"{entry.name}  {entry.title}")
    triple = entry.triple.describe()
    for key in ("M", "phi", "omega"):
        print(f"  {key} = {triple[key]}")
    for line in entry.facts():
        print(f"  {line}")
    if entry.excluded:
        print(f"  excluded: {', '.join(entry.excluded)}")
    return EXIT_OK


_COMMANDS = {
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "classify": cmd_classify,
    "bk": cmd_bk,
    "muckenhoupt": cmd_muckenhoupt,
    "sharpness": cmd_sharpness,
}


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("triple")
    src.add_argument("--triple", type=Path, help="Triple spec TOML file")
    src.add_argument("--preset", help="Catalog entry, e.g. classical:p=2,alpha=4")
    src.add_argument("--M", dest="M", help="N-function: power:p=2, power_sum:p=2,q=3 or expr in λ")
    src.add_argument("--phi", help="φ(r) expression")
    src.add_argument("--omega", help="ω(r) expression")
    common.add_argument(
        "--config", type=Path, help="Tolerance ledger overrides (TOML or key=value)"
    )
    common.add_argument("--out", "-o", type=Path, help="Write the JSON report here")
    common.add_argument("--jobs", type=int, default=1, help="Worker threads for batches")
    common.add_argument("--traces", type=Path, help="Directory for CSV traces")
    common.add_argument("--timing", action="store_true", help="Add wall-clock timing")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def _function_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--functions", type=Path, help="Test-function TOML file")
    p.add_argument("--stock", action="store_true", help="Use the stock test functions")


def _constant_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--constant", type=float, help="Use this C instead of the certified one")
    p.add_argument("--active-class", choices=("R+", "R-"), help="Class for --constant")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="py-hardy", description="Certify and test weighted Hardy inequalities in Orlicz spaces"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    sub.add_parser("analyze", parents=[common], help="Certify a triple")

    p = sub.add_parser("verify", parents=[common], help="Check J ≤ C·H on test functions")
    _function_args(p)
    _constant_args(p)
    p.add_argument("--norm", action="store_true", help="Also compare Luxemburg norms")

    p = sub.add_parser("classify", parents=[common], help="Membership in R+ / R-")
    _function_args(p)
    p.add_argument("--u", help="A single test function u(r)")
    p.add_argument("--uprime", help="u′(r); derived when omitted")
    p.add_argument("--kind", default="generic", help="generic, hardy_transform, ...")

    sub.add_parser("bk", parents=[common], help="Bloom–Kerman grid screen")

    p = sub.add_parser("muckenhoupt", parents=[common], help="L^p two-factor supremum")
    p.add_argument("--p", type=float, help="Exponent (defaults to the degree of M)")

    p = sub.add_parser("sharpness", parents=[common], help="Push a family toward C")
    p.add_argument("--family", type=Path, help="Family spec TOML file")
    p.add_argument("--budget", type=int, help="Evaluation budget")
    _constant_args(p)

    p = sub.add_parser("catalog", help="List or show catalog entries")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _emit(doc: Dict[str, Any], out: Optional[Path]) -> None:
    text = report.dumps(doc)
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info("report written to %s", out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    if args.command == "catalog":
        try:
            return cmd_catalog(args)
        except _INPUT_ERRORS as exc:
            print(f"error: {report.error_message(exc)}", file=sys.stderr)
            return EXIT_INPUT

    settings = DEFAULTS
    run = _Run(args, settings)
    try:
        if args.config:
            run.settings = settings = load_settings(args.config)
            run.echo["config_file"] = str(args.config)
        doc, code = _COMMANDS[args.command](run)
    except _INPUT_ERRORS as exc:
        logger.error("%s", report.error_message(exc))
        doc = report.error_report(args.command, settings, run.echo, exc, EXIT_INPUT)
        code = EXIT_INPUT
    except (QuadratureError, FloatingPointError) as exc:
        logger.error("%s", exc)
        doc = report.error_report(args.command, settings, run.echo, exc, EXIT_NUMERIC)
        code = EXIT_NUMERIC
    _emit(doc, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
