"""Command-line pipeline: ingest -> factorize -> personas -> report, plus synth.

Exit codes: 0 success, 1 usage error, 2 input format error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile

from . import ingest, nmf, personas, report, synth
from .errors import ArchetypeError, BadComponent, BadDimensions, InputFormatError, NumericalError

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="audience-archetypes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="{ingest,factorize,personas,report,synth}",
                                parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", help="aggregate a CSV log into a viewership matrix")
    p.add_argument("--input", required=True, help="analytics log CSV")
    p.add_argument("--output", required=True, help="matrix JSON to write")
    p.add_argument("--config", help="key = value file with social_domains / direct_sources")

    p = sub.add_parser("factorize", help="rank-p NMF of a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--tol", type=float, default=nmf.FactorizationConfig.tol)
    p.add_argument("--max-iter", type=int, default=nmf.FactorizationConfig.max_iter)
    p.add_argument("--check-every", type=int, default=nmf.FactorizationConfig.check_every)
    p.add_argument("--log-scale", action="store_true", help="factorize log1p(V) instead of raw counts")

    p = sub.add_parser("personas", help="label components and rank referrals/videos")
    p.add_argument("--factors", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--top-referrals", type=int, default=15)
    p.add_argument("--top-videos", type=int, default=5)
    p.add_argument("--mode", choices=["auto", "independent", "one_to_one"], default="auto")

    p = sub.add_parser("report", help="channel summary, heatmap and persona report")
    p.add_argument("--personas", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--factors", help="factors JSON; required for the heatmap outputs")
    p.add_argument("--summary", help="channel summary JSON to write")
    p.add_argument("--report", help="persona report JSON to write")
    p.add_argument("--heatmap-csv", help="row-normalized heatmap CSV to write")
    p.add_argument("--heatmap-raw-csv", help="raw W heatmap CSV to write")
    p.add_argument("--heatmap-svg", help="heatmap SVG to write")
    p.add_argument("--heatmap-rows", type=int, default=15)
    p.add_argument("--mode", choices=["auto", "independent", "one_to_one"], default="auto")

    p = sub.add_parser("synth", help="synthetic planted-model log")
    p.add_argument("--rows", type=int, default=100)
    p.add_argument("--cols", type=int, default=200)
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--noise", choices=["none", "poisson"], default="poisson")
    p.add_argument("--scale", type=float, default=50.0)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--date", default="2017-02-05")
    p.add_argument("--output", required=True, help="CSV log to write")
    p.add_argument("--truth", help="ground-truth JSON to write")
    p.add_argument("--config-out", help="ingest config under which the planted channels round-trip")
    return parser


def _read(path, binary=False):
    try:
        with open(path, "rb" if binary else "r", **({} if binary else {"encoding": "utf-8"})) as fh:
            return fh.read()
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc.strerror}") from None


def _commit(outputs):
    """Write every (path, bytes) pair to a temp file, then rename all into place."""
    staged = []
    try:
        for path, payload in outputs:
            if isinstance(payload, str):
                payload = payload.encode("utf-8")
            directory = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def _log(msg):
    print(msg, file=sys.stderr)


def cmd_ingest(args):
    config = ingest.load_config(args.config) if args.config else ingest.load_config()
    with open(args.input, "rb") as fh:
        records = ingest.parse_log(fh)
    matrix = ingest.build_matrix(records, config)
    _log(f"ingested {len(records)} records into a {matrix.shape[0]}x{matrix.shape[1]} matrix")
    _commit([(args.output, matrix.to_json())])


def cmd_factorize(args):
    matrix = ingest.ViewershipMatrix.from_json(_read(args.matrix))
    if args.rank < 1 or args.restarts < 1 or args.max_iter < 1 or args.check_every < 1 or not args.tol > 0:
        raise UsageError("rank, restarts, max-iter and check-every must be >= 1 and tol > 0")
    config = nmf.FactorizationConfig(rank=args.rank, max_iter=args.max_iter, tol=args.tol,
                                     check_every=args.check_every, restarts=args.restarts,
                                     seed=args.seed, log_scale=args.log_scale)
    result = nmf.factorize(matrix, config)
    _log(f"rank {result.rank}: final error {result.final_error:.6g} after {result.iterations} "
         f"iterations (restart {result.restart_index})")
    _commit([(args.output, result.to_json())])


def cmd_personas(args):
    result = nmf.FactorizationResult.from_json(_read(args.factors))
    matrix = ingest.ViewershipMatrix.from_json(_read(args.matrix))
    if args.top_referrals < 1 or args.top_videos < 1:
        raise UsageError("--top-referrals and --top-videos must be >= 1")
    found = personas.extract_personas(result, matrix, args.top_referrals, args.top_videos, args.mode)
    for p in found:
        _log(f"component {p.component_index}: {p.channel_label.value} -> {p.preferred_video_type}")
    _commit([(args.output, personas.personas_to_json(found))])


def cmd_report(args):
    try:
        found = personas.personas_from_json(_read(args.personas))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputFormatError):
            raise
        raise InputFormatError(f"invalid personas document: {exc}") from None
    matrix = ingest.ViewershipMatrix.from_json(_read(args.matrix))
    summary = report.summarize_channels(matrix)
    outputs = []
    if args.summary:
        outputs.append((args.summary, summary.to_json()))
    if args.report:
        outputs.append((args.report, report.personas_report(found, summary)))
    wants_heatmap = args.heatmap_csv or args.heatmap_raw_csv or args.heatmap_svg
    if wants_heatmap:
        if not args.factors:
            raise UsageError("heatmap outputs require --factors")
        result = nmf.FactorizationResult.from_json(_read(args.factors))
        heat = report.heatmap_data(result, matrix, args.heatmap_rows, args.mode)
        if args.heatmap_csv:
            outputs.append((args.heatmap_csv, report.heatmap_csv(heat)))
        if args.heatmap_raw_csv:
            outputs.append((args.heatmap_raw_csv, report.heatmap_csv(heat, raw=True)))
        if args.heatmap_svg:
            outputs.append((args.heatmap_svg, report.render_svg(heat)))
    if not outputs:
        raise UsageError("report needs at least one output flag")
    _commit(outputs)


def cmd_synth(args):
    model = synth.gen_planted_factors(args.rows, args.cols, args.rank, args.seed, args.noise, args.scale)
    matrix = synth.sample_views(model)
    try:
        log = synth.emit_log(matrix, args.date)
    except ValueError:
        raise UsageError(f"--date must be an ISO date, got {args.date!r}") from None
    outputs = [(args.output, log)]
    if args.truth:
        outputs.append((args.truth, model.to_json()))
    if args.config_out:
        outputs.append((args.config_out, synth.ingest_config_for(matrix).to_text()))
    _log(f"planted {args.rows}x{args.cols} rank-{args.rank} model, {int(matrix.data.sum())} views")
    _commit(outputs)


COMMANDS = {
    "ingest": cmd_ingest,
    "factorize": cmd_factorize,
    "personas": cmd_personas,
    "report": cmd_report,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _log(f"error: usage: {exc}")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        _log(f"error: usage: {exc}")
        return EXIT_USAGE
    except (BadDimensions, BadComponent) as exc:
        _log(f"error: usage: {exc}")
        return EXIT_USAGE
    except NumericalError as exc:
        _log(f"error: numerical: {exc}")
        return EXIT_NUMERIC
    except (InputFormatError, ArchetypeError) as exc:
        _log(f"error: input: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _log(f"error: io: {exc}")
        return EXIT_INPUT
    return EXIT_OK


run_command = main


if __name__ == "__main__":
    sys.exit(main())
