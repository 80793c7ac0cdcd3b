"""Command-line interface.

Subcommands:

*   ``diacritize``  read text, write the diacritized rendering
*   ``eval``        score a system text against a gold text
*   ``serve``       run the HTTP service
*   ``stats``       lexicon/corpus statistics
*   ``synth``       generate the synthetic training corpus and fixtures
*   ``train``       train models into a loadable model directory

``eval``, ``stats``, and ``train`` accept ``--report DIR`` and then write
TSV tables plus PNG figures into that directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .hebrew import MATRES_KEEP, MATRES_REMOVE
from .lexicon import (
    QuoteIndex,
    load_annotated_corpus,
    load_collocations,
    load_lexicon,
    load_wordset,
)
from .pipeline import Pipeline, evaluate, train_models

_MATRES = {
    "keep": MATRES_KEEP,
    MATRES_KEEP: MATRES_KEEP,
    "remove": MATRES_REMOVE,
    MATRES_REMOVE: MATRES_REMOVE,
}


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nakdan", description="Hebrew diacritization engine"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diacritize", help="diacritize plain text")
    p.add_argument("--model", required=True, help="model directory")
    p.add_argument("--genre", default="modern", choices=["modern", "rabbinic", "poetry"])
    p.add_argument("--matres", default="keep", choices=sorted(set(_MATRES)))
    p.add_argument("--beam", type=int, default=8, help="beam width for unknown words")
    p.add_argument("--in", dest="infile", default="-", help="input file or - for stdin")
    p.add_argument("--out", dest="outfile", default="-", help="output file or - for stdout")
    p.add_argument(
        "--rabbinic-model", default=None, help="model directory for --genre rabbinic"
    )

    p = sub.add_parser("eval", help="score a system text against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--sys", dest="system", required=True)
    p.add_argument("--report", default=None, help="directory for TSV tables and figures")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", required=True, help="model directory")
    p.add_argument("--rabbinic-model", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = sub.add_parser("stats", help="lexicon/corpus statistics")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--corpus", default=None, help="annotated corpus for coverage")
    p.add_argument("--report", default=None, help="directory for TSV tables and figures")

    p = sub.add_parser("synth", help="generate the synthetic corpus and fixtures")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sentences", type=int, default=200)
    p.add_argument("--heldout", type=int, default=40)

    p = sub.add_parser("train", help="train models into a model directory")
    p.add_argument("--corpus", required=True, help="annotated training corpus")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True, help="model directory to write")
    p.add_argument("--collocations", default=None)
    p.add_argument("--verses", default=None)
    p.add_argument("--proper-nouns", default=None)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="directory for TSV tables and figures")
    p.add_argument("--quiet", action="store_true", help="suppress per-epoch progress")

    return parser


def _cmd_diacritize(args) -> int:
    if args.genre == "rabbinic":
        if not args.rabbinic_model:
            print("error: --genre rabbinic requires --rabbinic-model", file=sys.stderr)
            return 2
        pipeline = Pipeline.load(args.rabbinic_model)
    else:
        pipeline = Pipeline.load(args.model)
    text = _read_text(args.infile)
    from .pipeline import export_plain

    out_lines = []
    for line in text.splitlines() or [""]:
        document = pipeline.diacritize(
            line,
            matres=_MATRES[args.matres],
            beam_width=args.beam,
            skip_morphology=args.genre == "poetry",
        )
        out_lines.append(export_plain(document))
    _write_text(args.outfile, "\n".join(out_lines))
    return 0


def _cmd_eval(args) -> int:
    report = evaluate(_read_text(args.gold), _read_text(args.system))
    print(f"words\t{report.words}")
    print(f"word_accuracy\t{report.word_accuracy:.6f}")
    print(f"letters\t{report.letters}")
    print(f"letter_accuracy\t{report.letter_accuracy:.6f}")
    if args.report:
        from .reports import write_eval_report

        paths = write_eval_report(report, args.report)
        for name, path in paths.items():
            print(f"report_{name}\t{path}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import build_app

    app = build_app(args.model, args.rabbinic_model)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_stats(args) -> int:
    from .reports import lexicon_statistics, write_stats_report

    lexicon = load_lexicon(args.lexicon)
    corpus = []
    if args.corpus:
        corpus = [tok for sent in load_annotated_corpus(args.corpus) for tok in sent]
    stats = lexicon_statistics(lexicon, corpus)
    for key in (
        "surfaces",
        "readings",
        "ambiguous_surfaces",
        "max_readings",
        "corpus_tokens",
        "covered_tokens",
    ):
        print(f"{key}\t{stats[key]}")
    print(f"coverage\t{stats['coverage']:.6f}")
    if args.report:
        paths = write_stats_report(lexicon, corpus, args.report)
        for name, path in paths.items():
            print(f"report_{name}\t{path}")
    return 0


def _cmd_synth(args) -> int:
    from .toydata import write_fixtures

    paths = write_fixtures(
        args.out, seed=args.seed, n_train=args.sentences, n_heldout=args.heldout
    )
    for name, path in paths.items():
        print(f"{name}\t{path}")
    return 0


def _cmd_train(args) -> int:
    corpus = load_annotated_corpus(args.corpus)
    lexicon = load_lexicon(args.lexicon)
    proper = load_wordset(args.proper_nouns) if args.proper_nouns else frozenset()
    rules = load_collocations(args.collocations) if args.collocations else ()
    quotes = QuoteIndex.from_file(args.verses) if args.verses else None
    log = None if args.quiet else lambda msg: print(msg, file=sys.stderr)
    tagger, diacritizer, history = train_models(
        corpus,
        lexicon,
        proper,
        epochs=args.epochs,
        lr=args.lr,
        seed=args.seed,
        log=log,
    )
    pipeline = Pipeline(tagger, diacritizer, lexicon, rules, quotes, proper)
    pipeline.save(args.out)
    print(f"model\t{args.out}")
    if history["tagger"]:
        print(f"tagger_loss\t{history['tagger'][-1]['loss']:.6f}")
        print(f"diacritizer_loss\t{history['diacritizer'][-1]['loss']:.6f}")
    if args.report:
        from .reports import write_training_report

        paths = write_training_report(history, args.report)
        for name, path in paths.items():
            print(f"report_{name}\t{path}")
    history_path = Path(args.out) / "history.json"
    history_path.write_text(json.dumps(history, indent=2), encoding="utf-8")
    return 0


_COMMANDS = {
    "diacritize": _cmd_diacritize,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
    "stats": _cmd_stats,
    "synth": _cmd_synth,
    "train": _cmd_train,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
