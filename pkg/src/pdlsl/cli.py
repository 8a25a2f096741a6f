"""Command-line entry point: ``pdlsl <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .annotator import (
    evaluate, read_annotations, read_gold, summary_csv, summary_text, write_annotations,
)
from .checker import check_template
from .errors import InvariantError, PdlslError
from .logic.parser import parse_formula
from .logic.printer import print_formula
from .model import Lts
from .pipeline import (
    PipelineConfig, artifact_meta, dumps, load_config, load_resources, lts_document,
    run_pipeline, validate_config,
)
from .segmenter import read_segments_csv, write_segments_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("pdlsl")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_trace_opts(p):
    p.add_argument("--trace", required=True, help="trace file (CSV or JSON)")
    p.add_argument("--format", choices=("csv", "json"), help="trace format (default: file suffix)")
    p.add_argument("--max-gap", type=int, help="longest interior gap to interpolate, in frames")
    p.add_argument("--scale", type=float, help="body-scale length when the trace has no HEAD_w column")
    p.add_argument("--v-hold", type=float, help="hold speed threshold, body scales per second")
    p.add_argument("--min-hold", type=int, help="shortest hold, frames")
    p.add_argument("--smooth-w", type=int, help="speed smoothing window, frames (odd)")


def _add_model_opts(p):
    p.add_argument("--tau-touch", type=float, help="touch distance, body scales")
    p.add_argument("--theta-move", type=float, help="minimum net displacement for a move")
    p.add_argument("--theta-trill", type=float, help="minimum path length for a trill")
    p.add_argument("--catalog", help="symbol catalog file")
    p.add_argument("--regions", help="place-region JSON file")


def _add_check_opts(p):
    p.add_argument("--db", help="property database (default: shipped properties)")
    p.add_argument("--mode", choices=("strict", "optimistic"))
    p.add_argument("--head-anchor", choices=("touch", "region"),
                   help="head_anchor reads touch(HEAD,w) or at(w,HEAD)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdlsl", description="Sign-language trace verification with PDL_SL.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML config file (default: $PDLSL_CONFIG)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="write hold/movement segments as CSV")
    _add_trace_opts(p)
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("extract-model", help="build the LTS and write it as JSON")
    _add_trace_opts(p)
    _add_model_opts(p)
    p.add_argument("--segments", help="use this segments CSV instead of segmenting")
    p.add_argument("--out", help="output JSON (default: stdout)")

    p = sub.add_parser("check", help="evaluate one formula or template on every state")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="LTS JSON written by extract-model")
    src.add_argument("--trace", help="trace file; the model is extracted first")
    p.add_argument("--formula", required=True, help="formula text; may use database names")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--scale", type=float)
    _add_check_opts(p)
    p.add_argument("--all", action="store_true", help="also list states with no accepted binding")

    p = sub.add_parser("annotate", help="end-to-end: trace to annotation proposals (JSON lines)")
    _add_trace_opts(p)
    _add_model_opts(p)
    _add_check_opts(p)
    p.add_argument("--allow-vacuous", action="store_true", default=None,
                   help="report raw satisfaction, including vacuous implications")
    p.add_argument("--out", help="output JSONL (default: stdout)")
    p.add_argument("--lts-out", help="also write the extracted LTS JSON here")

    p = sub.add_parser("eval", help="score predictions against gold annotations")
    p.add_argument("--pred", required=True, help="annotation JSONL")
    p.add_argument("--gold", required=True, help="gold CSV: property,start,end")
    p.add_argument("--db", help="property database whose names are scored")
    p.add_argument("--count-unknown", action="store_true", default=None)
    p.add_argument("--min-iou", type=float, help="require this intersection-over-union")
    p.add_argument("--report-format", choices=("text", "csv"))
    p.add_argument("--out", help="report file (default: stdout)")
    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    keys = set(PipelineConfig.__dataclass_fields__)
    return cfg.updated(**{k: v for k, v in vars(args).items() if k in keys})


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_segment(args, cfg) -> int:
    result = run_pipeline(cfg, args.trace, upto="segment")
    buf = io.StringIO()
    buf.write(f"# config={json.dumps(result.meta(), sort_keys=True)}\n")
    write_segments_csv(result.segments, buf, offset=result.offset)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_extract_model(args, cfg) -> int:
    segmenter = None
    if args.segments:
        def segmenter(t):
            with open(args.segments, encoding="utf-8") as fh:
                return read_segments_csv(fh, offset=t.first_index)
    result = run_pipeline(cfg, args.trace, segmenter=segmenter, upto="model")
    _emit(dumps(lts_document(result)), args.out)
    return EXIT_OK


def cmd_check(args, cfg) -> int:
    res = load_resources(cfg)
    if args.model:
        data = json.loads(Path(args.model).read_text(encoding="utf-8"))
        lts = Lts.from_json(data, res.catalog)
        offset = int(data.get("metadata", {}).get("frame_offset", 0))
    else:
        result = run_pipeline(cfg, args.trace, res=res, upto="model")
        lts, offset = result.lts, result.offset
    text = args.formula.strip()
    # a bare database name checks the whole template
    f = res.db.definitions[text].value if text in res.db else parse_formula(text, res.catalog, defs=res.db.env)
    rows = check_template(lts, f, res.db.env, cfg.mode, res.catalog)
    if args.all:
        seen = {sid for sid, _, _ in rows}
        rows += [(st.id, None, "none") for st in lts.states if st.id not in seen]
        rows.sort(key=lambda r: r[0])
    lines = [f"# formula: {print_formula(f)}", f"# mode: {cfg.mode}"]
    for sid, binding, verdict in rows:
        st = lts.states[sid]
        shown = ", ".join(f"{k}={v}" for k, v in binding.items()) if binding else "-"
        lines.append(f"s{sid}\t{st.interval[0] + offset}-{st.interval[1] + offset}\t{shown}\t{verdict}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_annotate(args, cfg) -> int:
    result = run_pipeline(cfg, args.trace)
    buf = io.StringIO()
    write_annotations(result.annotations, buf, offset=result.offset, meta=result.meta())
    _emit(buf.getvalue(), args.out)
    if args.lts_out:
        Path(args.lts_out).write_text(dumps(lts_document(result)), encoding="utf-8")
    log.info("%d annotation(s)", len(result.annotations))
    return EXIT_OK


def cmd_eval(args, cfg) -> int:
    res = load_resources(cfg)
    pred = read_annotations(args.pred)
    gold = read_gold(args.gold)
    table, summary = evaluate(pred, gold, res.db.properties, count_unknown=cfg.count_unknown,
                              min_iou=cfg.min_iou)
    meta = json.dumps(artifact_meta(cfg, res), sort_keys=True)
    skipped = ", ".join(f"{k}={v}" for k, v in table.skipped.items())
    if cfg.report_format == "csv":
        text = f"# config={meta}\n{table.to_csv()}\n{summary_csv(summary)}# skipped: {skipped}\n"
    else:
        text = (f"# config={meta}\n{table.to_text()}\n\n{summary_text(summary)}\n"
                f"\nskipped: {skipped}\n")
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "segment": cmd_segment,
    "extract-model": cmd_extract_model,
    "check": cmd_check,
    "annotate": cmd_annotate,
    "eval": cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="pdlsl: %(levelname)s: %(message)s")
    try:
        cfg = resolve_config(args)
        problems = validate_config(cfg)
        if problems:
            for p in problems:
                print(f"pdlsl: config: {p}", file=sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args, cfg)
    except InvariantError as exc:
        print(f"pdlsl: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (PdlslError, OSError, ValueError) as exc:
        print(f"pdlsl: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
