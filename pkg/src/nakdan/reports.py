"""Report rendering: delimited summaries plus matplotlib figures.

Each ``write_*_report`` helper writes a TSV next to a PNG in the target
directory and returns the paths it produced, so CLI report runs leave a
self-contained folder of numbers and plots.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .lexicon import GoldToken, Lexicon
from .pipeline import EvalReport


def _write_tsv(path: Path, rows: list[list], header: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(cell) for cell in row) + "\n")


def write_eval_report(report: EvalReport, out_dir) -> dict[str, Path]:
    """Accuracy summary TSV, per-error TSV, and an accuracy bar chart."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = out / "eval_summary.tsv"
    _write_tsv(
        summary,
        [
            ["words", report.words],
            ["correct_words", report.correct_words],
            ["word_accuracy", f"{report.word_accuracy:.6f}"],
            ["letters", report.letters],
            ["correct_letters", report.correct_letters],
            ["letter_accuracy", f"{report.letter_accuracy:.6f}"],
        ],
        header=["metric", "value"],
    )
    errors = out / "eval_errors.tsv"
    _write_tsv(
        errors,
        [[e.index, e.surface, e.gold, e.system] for e in report.errors],
        header=["word_index", "surface", "gold", "system"],
    )

    figure = out / "eval_accuracy.png"
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.bar(
        ["word", "letter"],
        [report.word_accuracy, report.letter_accuracy],
        color=["#4878d0", "#ee854a"],
    )
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("accuracy")
    ax.set_title(f"{report.words} words, {report.letters} letters")
    for i, value in enumerate([report.word_accuracy, report.letter_accuracy]):
        ax.text(i, value + 0.02, f"{value:.3f}", ha="center")
    fig.tight_layout()
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return {"summary": summary, "errors": errors, "figure": figure}


def lexicon_statistics(lexicon: Lexicon, corpus: list[GoldToken]) -> dict:
    """Ambiguity and coverage numbers the stats report is built from."""
    readings = {
        surface: len(lexicon.lookup(surface).candidates)
        for surface in lexicon.surfaces()
    }
    ambiguous = sum(1 for n in readings.values() if n > 1)
    covered = sum(1 for tok in corpus if lexicon.lookup(tok.surface).known)
    return {
        "surfaces": len(readings),
        "readings": sum(readings.values()),
        "ambiguous_surfaces": ambiguous,
        "max_readings": max(readings.values(), default=0),
        "corpus_tokens": len(corpus),
        "covered_tokens": covered,
        "coverage": covered / len(corpus) if corpus else 0.0,
        "readings_per_surface": readings,
    }


def write_stats_report(
    lexicon: Lexicon, corpus: list[GoldToken], out_dir
) -> dict[str, Path]:
    """Lexicon/corpus statistics TSVs and an ambiguity histogram."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats = lexicon_statistics(lexicon, corpus)

    summary = out / "stats_summary.tsv"
    _write_tsv(
        summary,
        [
            ["surfaces", stats["surfaces"]],
            ["readings", stats["readings"]],
            ["ambiguous_surfaces", stats["ambiguous_surfaces"]],
            ["max_readings", stats["max_readings"]],
            ["corpus_tokens", stats["corpus_tokens"]],
            ["covered_tokens", stats["covered_tokens"]],
            ["coverage", f"{stats['coverage']:.6f}"],
        ],
        header=["metric", "value"],
    )

    counts: dict[str, int] = {}
    for tok in corpus:
        counts[tok.surface] = counts.get(tok.surface, 0) + 1
    per_surface = out / "stats_surfaces.tsv"
    _write_tsv(
        per_surface,
        [
            [surface, n_readings, counts.get(surface, 0)]
            for surface, n_readings in sorted(stats["readings_per_surface"].items())
        ],
        header=["surface", "readings", "corpus_count"],
    )

    figure = out / "stats_ambiguity.png"
    values = list(stats["readings_per_surface"].values())
    fig, ax = plt.subplots(figsize=(4, 3))
    top = max(values, default=1)
    ax.hist(values, bins=range(1, top + 2), align="left", rwidth=0.8, color="#4878d0")
    ax.set_xlabel("readings per surface form")
    ax.set_ylabel("surface forms")
    ax.set_xticks(range(1, top + 1))
    ax.set_title(f"coverage {stats['coverage']:.1%} of {stats['corpus_tokens']} tokens")
    fig.tight_layout()
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return {"summary": summary, "surfaces": per_surface, "figure": figure}


def write_training_report(history: dict[str, list[dict]], out_dir) -> dict[str, Path]:
    """Per-epoch loss TSV and loss-curve figure for both models."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tagger = history.get("tagger", [])
    diacritizer = history.get("diacritizer", [])
    epochs = max(len(tagger), len(diacritizer))

    losses = out / "train_losses.tsv"
    rows = []
    for i in range(epochs):
        row = [i + 1]
        row.append(f"{tagger[i]['loss']:.6f}" if i < len(tagger) else "")
        row.append(f"{diacritizer[i]['loss']:.6f}" if i < len(diacritizer) else "")
        rows.append(row)
    _write_tsv(losses, rows, header=["epoch", "tagger_loss", "diacritizer_loss"])

    figure = out / "train_losses.png"
    fig, ax = plt.subplots(figsize=(5, 3))
    if tagger:
        ax.plot(
            [h["epoch"] for h in tagger],
            [h["loss"] for h in tagger],
            marker="o",
            label="tagger",
        )
    if diacritizer:
        ax.plot(
            [h["epoch"] for h in diacritizer],
            [h["loss"] for h in diacritizer],
            marker="s",
            label="diacritizer",
        )
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss per sentence")
    if tagger or diacritizer:
        ax.legend()
    fig.tight_layout()
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return {"losses": losses, "figure": figure}
