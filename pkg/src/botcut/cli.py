"""Command line entry point.

Exit codes: 0 success, 1 domain error (bad data, invalid parameters,
missing ids), 2 I/O or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import io
from .analysis import KS_PAIRS, RATE_KEYS, hashtag_diff, heterophily_table, rate_name, roc_curve
from .energy import EnergyParams, validate
from .graph import IngestError
from .mincut import detect
from .synth import SynthConfig, SynthConfigError, generate

log = logging.getLogger("botcut")

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class DomainError(Exception):
    pass


class Manifest:
    def __init__(self, command: str):
        self.started = time.perf_counter()
        self.data = {
            "command": command,
            "version": __version__,
            "started_at": datetime.now(timezone.utc).isoformat(),
            "parameters": {},
            "inputs": {},
            "outputs": [],
            "timings_s": {},
        }

    def input(self, path) -> None:
        self.data["inputs"][str(path)] = io.sha256(path)

    def output(self, path) -> None:
        self.data["outputs"].append(str(path))

    def write(self, path) -> None:
        if path is None:
            return
        self.data["timings_s"]["total"] = time.perf_counter() - self.started
        Path(path).write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value parameter file")
    for name in EnergyParams.field_names():
        p.add_argument(f"--{name}", type=float, default=None)


def _resolve_params(args) -> EnergyParams:
    values = {}
    if args.config:
        values.update(io.read_params_file(args.config))
    for name in EnergyParams.field_names():
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag
    return EnergyParams(**values)


def _write_csv(rows, header, path=None) -> None:
    if path is None:
        fh = sys.stdout
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_validate(args) -> int:
    manifest = Manifest("validate")
    if args.config:
        manifest.input(args.config)
    params = _resolve_params(args)
    manifest.data["parameters"] = params.as_dict()
    problems = validate(params)
    for v in problems:
        print(v)
    if not problems:
        print("ok")
    manifest.data["violations"] = [str(v) for v in problems]
    manifest.write(args.manifest)
    return EXIT_DOMAIN if problems else EXIT_OK


def cmd_detect(args) -> int:
    manifest = Manifest("detect")
    params = _resolve_params(args)
    params.require_valid()
    manifest.data["parameters"] = {**params.as_dict(), "marginals": not args.no_marginals, "workers": args.workers}

    manifest.input(args.edges)
    t = time.perf_counter()
    g = io.read_edges(args.edges, header=args.header)
    prior = None
    if args.priors:
        manifest.input(args.priors)
        prior = io.read_priors(args.priors, strength=args.prior_strength)
    manifest.data["timings_s"]["read"] = time.perf_counter() - t
    if g.self_loops_dropped:
        log.info("dropped %d self-retweet record(s)", g.self_loops_dropped)
    log.info("solving %d accounts, %d edges", len(g), len(g.edges))

    result = detect(g, params, prior, marginals=not args.no_marginals, workers=args.workers)
    manifest.data["timings_s"].update(result.timings)

    io.write_detections(result, g, args.output)
    manifest.output(args.output)
    meta_path = args.meta or f"{args.output}.meta.json"
    meta = {**result.metadata(), "self_loops_dropped": g.self_loops_dropped}
    Path(meta_path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    manifest.output(meta_path)
    manifest.write(args.manifest or f"{args.output}.manifest.json")
    return EXIT_OK


def cmd_eval(args) -> int:
    manifest = Manifest("eval")
    manifest.input(args.detections)
    manifest.input(args.truth)
    detections = io.read_detections(args.detections)
    truth = io.read_labels(args.truth, header=args.header)
    missing = [a for a in truth if a not in detections]
    if missing:
        raise DomainError(f"{len(missing)} labeled account(s) missing from detections: {', '.join(missing[:50])}")
    scores = {}
    for account in truth:
        p = detections[account].get("p_bot")
        if p is None:
            raise DomainError(f"detection for {account!r} has no p_bot; rerun detect with marginals")
        scores[account] = float(p)
    report = roc_curve(scores, truth)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    roc_path, summary_path = out_dir / "roc.csv", out_dir / "auc.json"
    _write_csv(report.roc_points, ("fpr", "tpr", "threshold"), roc_path)
    summary_path.write_text(json.dumps(report.summary(), sort_keys=True) + "\n", encoding="utf-8")
    manifest.output(roc_path)
    manifest.output(summary_path)
    print(f"auc={report.auc:.6f}")
    manifest.write(args.manifest or out_dir / "eval.manifest.json")
    return EXIT_OK


STATS_COLUMNS = [rate_name(k) for k in RATE_KEYS] + [
    f"p({rate_name(a)} vs {rate_name(b)})" for a, b in KS_PAIRS
]


def cmd_stats(args) -> int:
    manifest = Manifest("stats")
    manifest.input(args.edges)
    manifest.input(args.labels)
    g = io.read_edges(args.edges, header=args.header)
    truth = io.read_labels(args.labels, header=args.header)
    n_bot, n_human = len(truth.bots), len(truth.humans)
    if n_bot < 2 or n_human < 2:
        raise DomainError(f"need at least 2 labeled accounts per class, got {n_bot} bot(s) and {n_human} human(s)")
    row = heterophily_table(g, truth.labels)
    values = ["" if math.isnan(row[c]) else repr(row[c]) for c in STATS_COLUMNS]
    _write_csv([values], STATS_COLUMNS)
    if args.output:
        _write_csv([values], STATS_COLUMNS, args.output)
        manifest.output(args.output)
    manifest.write(args.manifest or (f"{args.output}.manifest.json" if args.output else None))
    return EXIT_OK


SYNTH_FIELDS = list(SynthConfig().as_dict())


def cmd_synth(args) -> int:
    manifest = Manifest("synth")
    values = {}
    if args.config:
        manifest.input(args.config)
        with open(args.config, encoding="utf-8") as fh:
            values.update(json.load(fh))
        unknown = set(values) - set(SYNTH_FIELDS)
        if unknown:
            raise DomainError(f"unknown synth config field(s): {', '.join(sorted(unknown))}")
    for name in SYNTH_FIELDS:
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag
    cfg = SynthConfig(**values)
    cfg.validate()
    manifest.data["parameters"] = cfg.as_dict()

    out = generate(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = out_dir / "edges.csv", out_dir / "truth.csv", out_dir / "config.json"
    io.write_edges(out.graph, paths[0])
    io.write_labels(out.truth, paths[1])
    paths[2].write_text(json.dumps(cfg.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for p in paths:
        manifest.output(p)
    log.info("wrote %d accounts (%d bots), %d edges", len(out.truth), len(out.truth.bots), len(out.graph.edges))
    manifest.write(args.manifest or out_dir / "manifest.json")
    return EXIT_OK


def cmd_hashtags(args) -> int:
    manifest = Manifest("hashtags")
    manifest.input(args.tweets)
    manifest.input(args.detections)
    tweets = io.read_tweets(args.tweets)
    detections = io.read_detections(args.detections)
    predicted = {a: rec.get("map_label") for a, rec in detections.items()}
    ranked = hashtag_diff(tweets, predicted)
    _write_csv(ranked, ("hashtag", "count"), args.output)
    if args.output:
        manifest.output(args.output)
    manifest.write(args.manifest or (f"{args.output}.manifest.json" if args.output else None))
    return EXIT_OK


def _header_flag(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--header", dest="header", action="store_true", default=None,
                   help="CSV inputs have a header row (default: detect)")
    g.add_argument("--no-header", dest="header", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="botcut", description="Joint bot detection on retweet graphs by minimum cut.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check energy parameters")
    _add_param_flags(p)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("detect", help="MAP labels and bot probabilities")
    p.add_argument("edges")
    p.add_argument("-o", "--output", required=True, help="detections JSONL")
    p.add_argument("--priors", help="CSV account_id,value with a probability or bot/human")
    p.add_argument("--prior-strength", type=float, default=0.9)
    p.add_argument("--no-marginals", action="store_true", help="skip per-node probabilities")
    p.add_argument("--workers", type=int, default=0, help="processes for marginals (0 = all cores)")
    p.add_argument("--meta", help="solve metadata JSON (default: OUTPUT.meta.json)")
    p.add_argument("--manifest")
    _add_param_flags(p)
    _header_flag(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="ROC curve and AUC against ground truth")
    p.add_argument("detections")
    p.add_argument("truth")
    p.add_argument("-o", "--out-dir", default=".")
    p.add_argument("--manifest")
    _header_flag(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="retweet-rate means and KS p-values")
    p.add_argument("edges")
    p.add_argument("labels")
    p.add_argument("-o", "--output")
    p.add_argument("--manifest")
    _header_flag(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="planted-bot synthetic graph")
    p.add_argument("-o", "--out-dir", required=True)
    p.add_argument("--config", help="JSON file with SynthConfig fields")
    defaults = SynthConfig()
    for name in SYNTH_FIELDS:
        kind = type(getattr(defaults, name))
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("hashtags", help="hashtags used by predicted bots only")
    p.add_argument("tweets")
    p.add_argument("detections")
    p.add_argument("-o", "--output")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_hashtags)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, IngestError, SynthConfigError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
