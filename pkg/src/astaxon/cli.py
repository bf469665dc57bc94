"""Command-line front end.

Subcommands: ingest, train, classify, validate, stats.  Data products go to
``--out`` (or stdout); progress and summaries go to stderr unless
``--quiet``.  Exit codes: 0 success, 1 usage or configuration error,
2 data or parse failure.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import os
import sys
from collections import Counter
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .boosting import Model, TermRule, TrainConfig, load_model, save_model, train
from .core import CLASSES, AsClass, AstaxonError, ConfigError, FormatError, LabeledExample, decide
from .eval import class_distribution, cross_validate, format_cv_lines, format_cv_table, format_distribution
from .ingest import (
    assemble,
    labeled_examples,
    parse_descriptions,
    parse_relationships,
    parse_routes,
    read_dataset,
    write_dataset,
)
from .textprep import default_stopwords, load_stopwords

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2

_SHORT = ("L.ISP", "S.ISP", "Cusmr", "Uni", "IXP", "NIC")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


class _Ctx:
    def __init__(self, args):
        self.quiet = getattr(args, "quiet", False)
        self.seed = getattr(args, "seed", 0)
        self.stopwords = getattr(args, "stopwords", None)

    def note(self, *lines: str) -> None:
        if not self.quiet:
            for line in lines:
                print(line, file=sys.stderr)


def _existing(path: Optional[str], what: str) -> Optional[str]:
    if path is not None and not os.path.isfile(path):
        raise _UsageError(f"{what} not found: {path}")
    return path


@contextlib.contextmanager
def _sink(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_lines(path: str) -> List[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def _load_dataset(path: str):
    return read_dataset(_read_lines(_existing(path, "dataset")))


def _train_config(args, seed: int) -> TrainConfig:
    return TrainConfig(
        rounds=args.rounds,
        smoothing=args.smoothing,
        max_sequence_len=args.max_seq,
        rng_seed=seed,
        workers=args.workers,
    )


def format_round_table(model: Model) -> str:
    """Per-round summary: attribute, term or threshold, six confidences."""
    head = f"{'round':>5}  {'attribute':<11} {'term/threshold':<24}" + "".join(f"{s:>8}" for s in _SHORT)
    lines = [head]

    def row(t, attr, cond, values):
        return f"{t:>5}  {attr:<11} {cond:<24}" + "".join(f"{v:>8.3f}" for v in values)

    for t, h in enumerate(model.rounds, 1):
        if isinstance(h, TermRule):
            lines.append(row(t, "description", '"' + " ".join(h.terms) + '"', h.present))
        else:
            lines.append(row(t, h.attribute, f"< {h.threshold:g}", h.below))
            lines.append(row("", "", f"> {h.threshold:g}", h.above))
    return "\n".join(lines)


# -- subcommands ---------------------------------------------------------------


def cmd_ingest(args, ctx: _Ctx) -> int:
    sources = [args.routes, args.topology_routes, args.relationships, args.descriptions]
    if not any(sources):
        raise _UsageError("ingest needs at least one of --routes, --topology-routes, --relationships, --descriptions")
    for path, what in zip(sources, ("routes file", "topology routes file", "relationships file", "descriptions file")):
        _existing(path, what)
    _existing(args.labels, "labels file")
    stoplist = load_stopwords(_existing(ctx.stopwords, "stopword file")) if ctx.stopwords else default_stopwords()

    stats = {name: Counter() for name in ("routes", "topology", "relationships", "descriptions")}
    routes = parse_routes(_read_lines(args.routes), stats["routes"]) if args.routes else []
    topology = parse_routes(_read_lines(args.topology_routes), stats["topology"]) if args.topology_routes else []
    links = parse_relationships(_read_lines(args.relationships), stats["relationships"]) if args.relationships else []
    descriptions = (
        parse_descriptions(_read_lines(args.descriptions), stats["descriptions"]) if args.descriptions else {}
    )
    records = assemble(routes, links, descriptions, stoplist, topology_routes=topology)

    labels = {}
    if args.labels:
        for lineno, raw in enumerate(_read_lines(args.labels), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            asn, sep, token = line.partition("|")
            try:
                if not sep:
                    raise ValueError("expected ASN|class")
                labels[int(asn)] = AsClass.from_token(token.strip())
            except ValueError as exc:
                raise FormatError(f"labels: {exc}", lineno) from None

    with _sink(args.out) as out:
        write_dataset(((r, labels.get(r.asn)) for r in records), out)
    for name, counter in stats.items():
        if counter:
            ctx.note(f"{name}: " + ", ".join(f"{k}={v}" for k, v in sorted(counter.items())))
    n_labeled = sum(r.asn in labels for r in records)
    ctx.note(f"records: {len(records)} (labeled {n_labeled})")
    return EXIT_OK


def _training_set(args, ctx: _Ctx) -> List[LabeledExample]:
    rows = _load_dataset(args.dataset)
    examples = labeled_examples(rows)
    skipped = len(rows) - len(examples)
    if args.supplement:
        extra = labeled_examples(_load_dataset(args.supplement))
        known = {ex.record.asn for ex in examples}
        examples += [ex for ex in extra if ex.record.asn not in known]
        ctx.note(f"supplement: {len(extra)} labeled rows")
    if skipped:
        ctx.note(f"unlabeled rows ignored: {skipped}")
    if not examples:
        raise FormatError("dataset has no labeled rows")
    return examples


def cmd_train(args, ctx: _Ctx) -> int:
    config = _train_config(args, ctx.seed)
    examples = _training_set(args, ctx)
    model = train(examples, config)
    with _sink(args.out) as out:
        save_model(model, out)
    ctx.note(f"config: m={model.m} {model.header()}", format_round_table(model))
    ctx.note("Z_t product: " + format(float(np.prod(model.z_values)), ".6g"))
    return EXIT_OK


def cmd_classify(args, ctx: _Ctx) -> int:
    rows = _load_dataset(args.dataset)
    model = load_model(_read_lines(_existing(args.model, "model file")))
    preds = []
    with _sink(args.out) as out:
        for record, _ in rows:
            pred = decide(model.ranking(record))
            preds.append(pred)
            label = pred.top_class.token if pred.top_class is not None else "ABSTAIN"
            scores = ",".join(format(s, ".17g") for s in pred.ranking.scores)
            out.write(f"{record.asn}|{label}|{scores}\n")
    ctx.note(format_distribution(class_distribution(preds)))
    return EXIT_OK


def _parse_sizes(text: Optional[str], available: int) -> List[int]:
    if not text:
        step = max(1, available // 10)
        sizes = list(range(step, available + 1, step))
        if sizes[-1] != available:
            sizes.append(available)
        return sizes
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise _UsageError(f"bad --sizes value {text!r}") from None


def cmd_validate(args, ctx: _Ctx) -> int:
    config = _train_config(args, ctx.seed)
    examples = _training_set(args, ctx)
    if not 1 <= args.holdout < len(examples):
        raise _UsageError(f"holdout {args.holdout} must be in [1, {len(examples) - 1}] for |S|={len(examples)}")
    sizes = _parse_sizes(args.sizes, len(examples) - args.holdout)
    # parallelism goes to iterations; each fit runs single-threaded
    result = cross_validate(
        examples,
        args.holdout,
        args.iterations,
        sizes,
        seed=ctx.seed,
        config=dataclasses.replace(config, workers=1),
        workers=args.workers,
    )
    machine = format_cv_lines(result)
    with _sink(args.out) as out:
        out.write(format_cv_table(result) + "\n\n")
        out.write("# size|mean_acc|sd_acc|mean_cov|sd_cov\n")
        out.write(machine + "\n")
    ctx.note(f"validated |S|={len(examples)} holdout={args.holdout} iterations={args.iterations} seed={ctx.seed}")
    return EXIT_OK


def cmd_stats(args, ctx: _Ctx) -> int:
    rows = _load_dataset(args.dataset)
    labels = Counter(label for _, label in rows if label is not None)
    lines = [f"records: {len(rows)}", f"labeled: {sum(labels.values())}"]
    for cls in CLASSES:
        lines.append(f"  {cls.token:<12}{labels.get(cls, 0):>8}")
    if rows:
        with_text = sum(bool(r.description_terms) for r, _ in rows)
        lines.append(f"with description terms: {with_text}")
        for name in ("customers", "providers", "peers", "prefixes", "space"):
            values = np.array([r.scalar(name) for r, _ in rows])
            lines.append(f"  {name:<10} min={values.min()} median={np.median(values):g} max={values.max()}")
    if args.model:
        model = load_model(_read_lines(_existing(args.model, "model file")))
        dist = class_distribution(decide(model.ranking(r)) for r, _ in rows)
        lines.append(format_distribution(dist))
    with _sink(args.out) as out:
        out.write("\n".join(lines) + "\n")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _global_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--stopwords", default=argparse.SUPPRESS, help="stop-word list file (default: bundled)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress summaries")
    return common


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rounds", type=int, default=28, help="boosting rounds T (default 28)")
    p.add_argument("--smoothing", type=float, default=None, help="confidence smoothing (default 1/(m*k))")
    p.add_argument("--max-seq", type=int, default=2, help="longest term sequence (default 2)")
    p.add_argument("--supplement", help="extra labeled dataset appended to the training set")
    p.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="astaxon", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("ingest", parents=[common], help="build a dataset file from raw inputs")
    p.add_argument("--routes", help="routes file for prefix/space attributes")
    p.add_argument("--topology-routes", help="routes file whose path ASes join the AS universe")
    p.add_argument("--relationships", help="a|b|code relationship file")
    p.add_argument("--descriptions", help="ASN<TAB>description file")
    p.add_argument("--labels", help="ASN|class label file")
    p.add_argument("-o", "--out", help="output dataset (default stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", parents=[common], help="train a model on labeled rows")
    p.add_argument("dataset")
    p.add_argument("-o", "--out", help="output model file (default stdout)")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", parents=[common], help="classify every row of a dataset")
    p.add_argument("dataset")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-o", "--out", help="predictions file (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("validate", parents=[common], help="repeated random-subsampling validation")
    p.add_argument("dataset")
    p.add_argument("--holdout", type=int, default=100, help="test examples per iteration (default 100)")
    p.add_argument("--iterations", type=int, default=400, help="iterations (default 400)")
    p.add_argument("--sizes", help="comma-separated train sizes (default: ten even steps)")
    p.add_argument("-o", "--out", help="report file (default stdout)")
    _add_train_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", parents=[common], help="dataset summary and predicted class counts")
    p.add_argument("dataset")
    p.add_argument("-m", "--model", help="also report predicted class distribution")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    ctx = _Ctx(args)
    try:
        return args.func(args, ctx)
    except (_UsageError, ConfigError) as exc:
        print(f"astaxon: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AstaxonError, UnicodeDecodeError) as exc:
        print(f"astaxon: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"astaxon: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
