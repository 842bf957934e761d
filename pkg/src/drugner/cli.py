"""Batch command-line pipeline: convert, split, train, search, evaluate, predict.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Output files are written atomically (temp file + rename) so a failed command
never leaves partial output behind. Every random choice flows from --seed;
when the flag is omitted a seed is drawn and printed so the run can be
reproduced afterwards.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint, tagger_from_checkpoint
from .corpus import (
    Corpus,
    convert_ddi_directory,
    corpus_stats,
    load_column_corpus,
    load_raw_corpus,
    render_stats,
    write_column_corpus,
)
from .errors import DataError, NumericError
from .evaluation import evaluate_strict, iob_to_spans, render_report, render_report_tsv
from .fileio import atomic_write_text
from .hyperparams import HyperParams
from .models import ARCHITECTURES
from .numeric import derive_seed
from .training import random_search, split_train_validation, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int.from_bytes(os.urandom(8), "little") >> 1
    print(f"seed: {seed}")
    return seed


def _load_tagged_corpus(path: str) -> Corpus:
    corpus = load_column_corpus(path)
    if not corpus.sentences:
        raise DataError(f"corpus {path} is empty")
    return corpus


def _hyperparams(args, seed: int) -> HyperParams:
    hp = HyperParams(
        hidden=args.hidden,
        window=args.window,
        dim=args.dim,
        learning_rate=args.learning_rate,
        dropout_rate=args.dropout,
        max_epochs=args.max_epochs,
        seed=seed,
    )
    hp.validate(unrestricted=args.unrestricted)
    return hp


def _predict_sentence(tagger, tokens, constrain_iob: bool) -> list[str]:
    ids = tagger.encode(tokens)
    if constrain_iob and tagger.arch == "bilstm-crf":
        tag_ids = tagger.predict_tag_ids(ids, constrain_iob=True)
    else:
        tag_ids = tagger.predict_tag_ids(ids)
    return [tagger.tags[i] for i in tag_ids]


def cmd_convert(args) -> int:
    warnings: list[str] = []
    merged = Corpus(label="+".join(Path(d).name for d in args.xml_dir))
    for directory in args.xml_dir:
        merged.sentences.extend(convert_ddi_directory(directory, warnings).sentences)
    write_column_corpus(merged, args.out)
    for message in warnings:
        print(f"warning: {message}", file=sys.stderr)
    if not merged.sentences:
        print(f"warning: no sentences found under {', '.join(args.xml_dir)}", file=sys.stderr)
    print(render_stats(corpus_stats(merged), merged.label), end="")
    return EXIT_OK


def cmd_split(args) -> int:
    seed = _resolve_seed(args)
    corpus = _load_tagged_corpus(args.corpus)
    train_sents, val_sents = split_train_validation(corpus.sentences, args.ratio, seed)
    write_column_corpus(Corpus(train_sents), args.train_out)
    write_column_corpus(Corpus(val_sents), args.val_out)
    print(f"split {len(corpus.sentences)} sentences -> "
          f"{len(train_sents)} train / {len(val_sents)} validation")
    return EXIT_OK


def cmd_train(args) -> int:
    seed = _resolve_seed(args)
    hp = _hyperparams(args, seed)
    corpus = _load_tagged_corpus(args.corpus)
    train_sents, val_sents = split_train_validation(
        corpus.sentences, args.ratio, derive_seed(seed, 0)
    )
    ckpt, record = train(args.arch, train_sents, val_sents, hp, clip_norm=args.clip_norm)
    save_checkpoint(ckpt, args.out)
    record_path = args.record or f"{args.out}.record.tsv"
    atomic_write_text(record_path, record.to_tsv())
    from .figures import save_training_curves

    save_training_curves(record, args.curves or f"{args.out}.curves.png")
    print(f"best epoch {record.best_epoch}: validation micro-F1 {record.best_val_f1:.2f}")
    return EXIT_OK


def cmd_search(args) -> int:
    seed = _resolve_seed(args)
    corpus = _load_tagged_corpus(args.corpus)
    result = random_search(
        args.arch,
        corpus.sentences,
        trials=args.trials,
        seed=seed,
        ratio=args.ratio,
        max_epochs=args.max_epochs,
        clip_norm=args.clip_norm,
        jobs=args.jobs,
    )
    save_checkpoint(result.best_checkpoint, args.out)
    log_path = args.log or f"{args.out}.trials.tsv"
    atomic_write_text(log_path, result.trials_tsv())
    from .figures import save_search_figure

    save_search_figure(result.trials, result.best_index, args.log_figure or f"{args.out}.trials.png")
    hp = result.best_hyperparams
    print(
        f"best trial {result.best_index}: validation micro-F1 "
        f"{result.best_record.best_val_f1:.2f} "
        f"(hidden={hp.hidden} window={hp.window} dim={hp.dim} "
        f"lr={hp.learning_rate:.4f} dropout={hp.dropout_rate:.4f})"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    tagger = tagger_from_checkpoint(ckpt)
    raw_text = Path(args.corpus).read_text(encoding="utf-8") if Path(args.corpus).exists() else None
    if raw_text is not None and raw_text.strip() and "\t" not in raw_text:
        raise DataError(f"corpus {args.corpus} has no gold tags; evaluation needs token<TAB>tag lines")
    corpus = _load_tagged_corpus(args.corpus)
    for sent in corpus.sentences:
        for tag in sent.tags or ():
            if tag not in tagger.tags:
                raise DataError(f"corpus tag {tag!r} is not in the checkpoint tag set")
    gold = [iob_to_spans(s.tags) for s in corpus.sentences]
    predicted = [
        iob_to_spans(_predict_sentence(tagger, s.tokens, args.constrain_iob))
        for s in corpus.sentences
    ]
    report = evaluate_strict(gold, predicted)
    text = render_report(report, title=f"strict evaluation: {args.corpus}")
    print(text, end="")
    if args.report:
        atomic_write_text(f"{args.report}.txt", text)
        atomic_write_text(f"{args.report}.tsv", render_report_tsv(report))
        from .figures import save_report_figure

        save_report_figure(report, f"{args.report}.png", title=Path(args.corpus).name)
    return EXIT_OK


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    tagger = tagger_from_checkpoint(ckpt)
    fmt = args.format
    if fmt == "auto":
        try:
            content = Path(args.input).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read input {args.input}: {exc}") from exc
        fmt = "column" if "\t" in content else "raw"
    corpus = (
        load_column_corpus(args.input) if fmt == "column" else load_raw_corpus(args.input)
    )
    lines: list[str] = []
    for sent in corpus.sentences:
        tags = _predict_sentence(tagger, sent.tokens, args.constrain_iob)
        lines.extend(f"{token}\t{tag}" for token, tag in zip(sent.tokens, tags))
        lines.append("")
    atomic_write_text(args.out, "\n".join(lines))
    print(f"tagged {len(corpus.sentences)} sentences -> {args.out}")
    return EXIT_OK


def _add_hyperparam_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--hidden", type=int, default=100, help="hidden-layer size")
    sub.add_argument("--window", type=int, default=3, help="context window size (odd)")
    sub.add_argument("--dim", type=int, default=100, help="embedding dimension")
    sub.add_argument("--learning-rate", type=float, default=0.05)
    sub.add_argument("--dropout", type=float, default=0.05, help="drop probability")
    sub.add_argument("--max-epochs", type=int, default=100)
    sub.add_argument(
        "--unrestricted",
        action="store_true",
        help="allow hyperparameters outside the standard search space",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drugner",
        description="Drug name recognition with recurrent sequence taggers.",
    )
    commands = parser.add_subparsers(dest="command", metavar="command")

    p = commands.add_parser("convert", help="DDI XML directories -> one column corpus")
    p.add_argument("--xml-dir", required=True, action="append",
                   help="XML directory; repeat the flag to merge several")
    p.add_argument("--out", required=True, help="output column-format corpus")
    p.set_defaults(func=cmd_convert)

    p = commands.add_parser("split", help="split a corpus into train/validation files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ratio", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--train-out", required=True)
    p.add_argument("--val-out", required=True)
    p.set_defaults(func=cmd_split)

    p = commands.add_parser("train", help="train one architecture with early stopping")
    p.add_argument("--corpus", required=True)
    p.add_argument("--arch", choices=ARCHITECTURES, required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--ratio", type=float, default=0.7, help="train fraction of the split")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--clip-norm", type=float, default=None,
                   help="optional global gradient-norm cap (off by default)")
    p.add_argument("--record", default=None, help="per-epoch TSV (default <out>.record.tsv)")
    p.add_argument("--curves", default=None, help="training-curve PNG (default <out>.curves.png)")
    _add_hyperparam_flags(p)
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("search", help="random hyperparameter search")
    p.add_argument("--corpus", required=True)
    p.add_argument("--arch", choices=ARCHITECTURES, required=True)
    p.add_argument("--out", required=True, help="best checkpoint output path")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--ratio", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--clip-norm", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1, help="concurrent trials")
    p.add_argument("--log", default=None, help="per-trial TSV (default <out>.trials.tsv)")
    p.add_argument("--log-figure", default=None, help="per-trial PNG (default <out>.trials.png)")
    p.set_defaults(func=cmd_search)

    p = commands.add_parser("evaluate", aliases=["eval"], help="strict evaluation of a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True, help="column corpus with gold tags")
    p.add_argument("--report", default=None,
                   help="report path prefix: writes <prefix>.txt/.tsv/.png")
    p.add_argument("--constrain-iob", action="store_true",
                   help="mask invalid IOB bigrams at decode time (bilstm-crf only)")
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("predict", help="tag a raw or column corpus")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("auto", "column", "raw"), default="auto")
    p.add_argument("--constrain-iob", action="store_true")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_OK if code == 0 else EXIT_USAGE
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
