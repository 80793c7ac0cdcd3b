"""End-to-end diacritization: tag, constrain, rank, and render documents.

The pipeline ties the pieces together per sentence of word tokens:

1. lexicon lookup gives each word its candidate set;
2. collocation rules prune candidates in matched contexts;
3. the tagger predicts pos and properties, restricted to candidate tags;
4. candidates are filtered by the prediction (exact match, then pos-only,
   then unfiltered — the guarantee that known words keep a lexicon reading);
5. known words are ranked by the diacritizer, unknown words beam-searched;
6. canonical-quote matches promote the canonical reading to the front.

Instances are not thread-safe: the underlying layers keep forward caches.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diacritizer import (
    Diacritizer,
    DiacritizerConfig,
    LABELS,
    letter_from_label,
)
from .hebrew import (
    MATRES_KEEP,
    MATRES_REMOVE,
    DiacritizedWord,
    ShinDotSide,
    SiglaSpan,
    Token,
    TokenKind,
    bare_letters,
    normalize_text,
    parse_word,
    reconstruct_token,
    render,
    to_lexicon_string,
    tokenize,
)
from .lexicon import (
    AnalysisFilter,
    CandidateSet,
    CollocationRule,
    GoldToken,
    Lexicon,
    MorphAnalysis,
    QuoteIndex,
    QuoteSpan,
    apply_collocation_constraints,
    load_collocations,
    load_lexicon,
    load_wordset,
    match_biblical_quotes,
    save_lexicon,
)
from .nn import load_params, save_params, sgd_step
from .tagger import TagPrediction, Tagger, TaggerConfig

DOCUMENT_FORMAT = 1
MODEL_FORMAT = 1


class PipelineError(ValueError):
    """Invalid pipeline input or document operation."""


# ---------------------------------------------------------------------------
# Annotated documents
# ---------------------------------------------------------------------------


@dataclass
class Alternative:
    """One proposed reading: diacritics plus the analysis behind them."""

    diac: str  # lexicon-style string; '|' marks a deleted mater
    probability: float
    analysis: MorphAnalysis | None = None


@dataclass
class AnnotatedWord:
    token_index: int
    surface: str  # bare letters
    known: bool
    alternatives: list[Alternative]
    selected: int = 0

    def selection(self) -> Alternative:
        return self.alternatives[self.selected]


@dataclass
class AnnotatedDocument:
    text: str  # normalized source text
    tokens: list[Token]
    words: list[AnnotatedWord]
    quotes: list[QuoteSpan]
    matres: str = MATRES_KEEP


def select_alternative(
    document: AnnotatedDocument, word_index: int, alt_index: int, apply_all: bool = False
) -> list[int]:
    """Choose an alternative; optionally for every word sharing the surface.

    Returns the indices of all words whose selection changed.
    """
    if not 0 <= word_index < len(document.words):
        raise PipelineError(f"word index {word_index} out of range")
    word = document.words[word_index]
    if not 0 <= alt_index < len(word.alternatives):
        raise PipelineError(f"alternative index {alt_index} out of range")
    changed = []
    if word.selected != alt_index:
        changed.append(word_index)
    word.selected = alt_index
    if apply_all:
        wanted = word.alternatives[alt_index].diac
        for i, other in enumerate(document.words):
            if i == word_index or other.surface != word.surface:
                continue
            for j, alt in enumerate(other.alternatives):
                if alt.diac == wanted:
                    if other.selected != j:
                        changed.append(i)
                    other.selected = j
                    break
    return changed


# ---------------------------------------------------------------------------
# The pipeline
# ---------------------------------------------------------------------------


def _softmax_probs(scores: list[float]) -> list[float]:
    arr = np.asarray(scores, dtype=np.float64)
    arr = np.exp(arr - arr.max())
    arr /= arr.sum()
    return [float(p) for p in arr]


@dataclass
class _Proposal:
    diac: str
    score: float
    analysis: MorphAnalysis | None


class Pipeline:
    """A loaded model bundle that turns plain text into annotated documents."""

    def __init__(
        self,
        tagger: Tagger,
        diacritizer: Diacritizer,
        lexicon: Lexicon,
        rules: tuple[CollocationRule, ...] = (),
        quotes: QuoteIndex | None = None,
        proper_nouns: frozenset[str] = frozenset(),
    ):
        self.tagger = tagger
        self.diacritizer = diacritizer
        self.lexicon = lexicon
        self.rules = tuple(rules)
        self.quotes = quotes
        self.proper_nouns = proper_nouns

    # -- inference -------------------------------------------------------------

    def diacritize(
        self,
        text: str,
        matres: str = MATRES_KEEP,
        beam_width: int | None = None,
        skip_morphology: bool = False,
    ) -> AnnotatedDocument:
        if matres not in (MATRES_KEEP, MATRES_REMOVE):
            raise PipelineError(f"unknown matres policy {matres!r}")
        norm = normalize_text(text)
        tokens = tokenize(norm)
        word_positions = [i for i, t in enumerate(tokens) if t.kind is TokenKind.WORD]
        if not word_positions:
            return AnnotatedDocument(norm, tokens, [], [], matres)

        surfaces = [bare_letters(tokens[i].surface) for i in word_positions]
        token_sets: list[CandidateSet] = [
            self.lexicon.lookup(bare_letters(t.surface))
            if t.kind is TokenKind.WORD
            else CandidateSet()
            for t in tokens
        ]
        token_sets = apply_collocation_constraints(tokens, token_sets, self.rules, self.lexicon)
        word_sets = [token_sets[i] for i in word_positions]

        predictions: list[TagPrediction] | None = None
        if not skip_morphology:
            predictions = self.tagger.tag_sentence(surfaces, word_sets)

        # Every lexicon reading stays visible as an alternative; the tagger
        # filter only narrows which of them gets auto-selected.
        encoding = self.diacritizer.encode_sentence(surfaces)
        proposals: list[list[_Proposal]] = []
        preferred: list[set[str] | None] = []
        for w, surface in enumerate(surfaces):
            cands = word_sets[w]
            if cands.known:
                ranked = self.diacritizer.rank_known(encoding.letters[w], cands)
                row: list[_Proposal] = []
                seen: set[str] = set()
                for cand, score in ranked:
                    if cand.diac in seen:
                        continue
                    seen.add(cand.diac)
                    row.append(_Proposal(cand.diac, score, cand.analysis))
                filtered = self._filter_candidates(
                    cands, predictions[w] if predictions else None
                )
                preferred.append({c.diac for c in filtered.candidates})
            else:
                row = self._beam_proposals(
                    encoding.letters[w],
                    surface,
                    beam_width,
                    predictions[w].analysis() if predictions else None,
                )
                preferred.append(None)
            proposals.append(row)

        quote_spans: list[QuoteSpan] = []
        if self.quotes is not None:
            quote_spans = match_biblical_quotes(tokens, self.quotes)
            canonical_of = self._apply_quotes(quote_spans, word_positions, proposals)
            for w, diac in canonical_of.items():
                preferred[w] = {diac}

        words = []
        for w, surface in enumerate(surfaces):
            row = sorted(proposals[w], key=lambda p: -p.score)
            probs = _softmax_probs([p.score for p in row])
            allowed = preferred[w]
            selected = 0
            if allowed:
                selected = next(
                    (i for i, p in enumerate(row) if p.diac in allowed), 0
                )
            words.append(
                AnnotatedWord(
                    token_index=word_positions[w],
                    surface=surface,
                    known=word_sets[w].known,
                    alternatives=[
                        Alternative(p.diac, prob, p.analysis) for p, prob in zip(row, probs)
                    ],
                    selected=selected,
                )
            )
        return AnnotatedDocument(norm, tokens, words, quote_spans, matres)

    def _filter_candidates(
        self, cands: CandidateSet, prediction: TagPrediction | None
    ) -> CandidateSet:
        """Exact-analysis filter, then pos-only, then give up filtering."""
        if prediction is None:
            return cands
        predicted = prediction.analysis()
        exact = tuple(c for c in cands.candidates if c.analysis == predicted)
        if exact:
            return CandidateSet(exact, known=True)
        by_pos = tuple(c for c in cands.candidates if c.analysis.pos == prediction.pos)
        if by_pos:
            return CandidateSet(by_pos, known=True)
        return cands

    def _beam_proposals(
        self,
        letters: np.ndarray,
        surface: str,
        beam_width: int | None,
        analysis: MorphAnalysis | None,
    ) -> list[_Proposal]:
        hypotheses = self.diacritizer.beam_search(letters, surface, beam_width)
        shin_sides = self.diacritizer.predict_shin_dot(letters, surface)
        row = []
        for hyp in hypotheses:
            letters_out = []
            for j, label_id in enumerate(hyp.labels):
                side = shin_sides.get(j, ShinDotSide.NONE)
                letters_out.append(letter_from_label(surface[j], LABELS[label_id], side))
            word = DiacritizedWord(tuple(letters_out))
            row.append(_Proposal(to_lexicon_string(word), hyp.score, analysis))
        return row

    def _apply_quotes(
        self,
        spans: list[QuoteSpan],
        word_positions: list[int],
        proposals: list[list[_Proposal]],
    ) -> dict[int, str]:
        """Promote the canonical reading of quoted words to the top."""
        position_of = {t: w for w, t in enumerate(word_positions)}
        canonical_of: dict[int, str] = {}
        for span in spans:
            for token_index, canonical in zip(span.token_indices, span.canonical):
                w = position_of[token_index]
                diac = to_lexicon_string(parse_word(normalize_text(canonical)))
                row = proposals[w]
                top = max(p.score for p in row)
                existing = next((p for p in row if p.diac == diac), None)
                if existing is not None:
                    existing.score = top + 1.0
                else:
                    analysis = self._lexicon_analysis_of(diac)
                    row.append(_Proposal(diac, top + 1.0, analysis))
                canonical_of[w] = diac
        return canonical_of

    def _lexicon_analysis_of(self, diac: str) -> MorphAnalysis | None:
        cands = self.lexicon.lookup(bare_letters(diac))
        for cand in cands.candidates:
            if cand.diac == diac:
                return cand.analysis
        return None

    # -- persistence -------------------------------------------------------------

    def save(self, model_dir) -> None:
        out = Path(model_dir)
        out.mkdir(parents=True, exist_ok=True)
        config = {
            "format": MODEL_FORMAT,
            "tagger": self.tagger.config.to_dict(),
            "diacritizer": self.diacritizer.config.to_dict(),
        }
        (out / "config.json").write_text(
            json.dumps(config, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        (out / "tagger.nkdw").write_bytes(save_params(self.tagger.bank))
        (out / "diacritizer.nkdw").write_bytes(save_params(self.diacritizer.bank))
        save_lexicon(self.lexicon, out / "lexicon.tsv")
        if self.rules:
            (out / "collocations.tsv").write_text(
                "".join(line + "\n" for line in _collocation_lines(self.rules)),
                encoding="utf-8",
            )
        if self.quotes is not None:
            (out / "verses.tsv").write_text(
                "".join(
                    f"{v.reference}\t{' '.join(v.words)}\n" for v in self.quotes.verses
                ),
                encoding="utf-8",
            )
        if self.proper_nouns:
            (out / "proper_nouns.txt").write_text(
                "".join(w + "\n" for w in sorted(self.proper_nouns)), encoding="utf-8"
            )

    @classmethod
    def load(cls, model_dir) -> "Pipeline":
        src = Path(model_dir)
        config_path = src / "config.json"
        if not config_path.exists():
            raise PipelineError(f"{src} has no config.json")
        config = json.loads(config_path.read_text(encoding="utf-8"))
        if config.get("format") != MODEL_FORMAT:
            raise PipelineError(f"unsupported model format {config.get('format')!r}")
        lexicon = load_lexicon(src / "lexicon.tsv")
        proper_path = src / "proper_nouns.txt"
        proper = load_wordset(proper_path) if proper_path.exists() else frozenset()
        tagger = Tagger.with_bank(
            lexicon,
            proper,
            TaggerConfig.from_dict(config["tagger"]),
            load_params((src / "tagger.nkdw").read_bytes()),
        )
        diacritizer = Diacritizer.with_bank(
            DiacritizerConfig.from_dict(config["diacritizer"]),
            load_params((src / "diacritizer.nkdw").read_bytes()),
        )
        rules_path = src / "collocations.tsv"
        rules = load_collocations(rules_path) if rules_path.exists() else ()
        verses_path = src / "verses.tsv"
        quotes = QuoteIndex.from_file(verses_path) if verses_path.exists() else None
        return cls(tagger, diacritizer, lexicon, rules, quotes, proper)


def _collocation_lines(rules: tuple[CollocationRule, ...]) -> list[str]:
    lines = []
    for rule in rules:
        pattern = " ".join(
            ("~" if item.expand_lemma else "") + item.surface for item in rule.pattern
        )
        filters = "|".join(_filter_text(f) for f in rule.allowed)
        lines.append(f"{pattern}\t{rule.position}\t{filters}")
    return lines


def _filter_text(f: AnalysisFilter) -> str:
    parts = []
    if f.pos is not None:
        parts.append(f"pos={f.pos}")
    parts.extend(f"{k}={v}" for k, v in f.properties)
    return ";".join(parts)


# ---------------------------------------------------------------------------
# Rendering and structured exchange
# ---------------------------------------------------------------------------


def _rendered_word(document: AnnotatedDocument, word: AnnotatedWord, policy: str) -> str:
    token = document.tokens[word.token_index]
    parsed = parse_word(word.selection().diac)
    return render(DiacritizedWord(parsed.letters, token.sigla), policy)


def export_plain(document: AnnotatedDocument, matres: str | None = None) -> str:
    """The document text with every word replaced by its selected reading."""
    policy = matres or document.matres
    by_token = {w.token_index: w for w in document.words}
    parts = []
    for i, token in enumerate(document.tokens):
        word = by_token.get(i)
        if word is None:
            parts.append(reconstruct_token(token))
        else:
            parts.append(_rendered_word(document, word, policy))
    return "".join(parts)


def export_html(document: AnnotatedDocument, matres: str | None = None) -> str:
    """Minimal HTML: words carry their index, quotes carry their reference."""
    import html as _html

    policy = matres or document.matres
    by_token = {w.token_index: (i, w) for i, w in enumerate(document.words)}
    quote_open: dict[int, QuoteSpan] = {}
    quote_close: set[int] = set()
    for span in document.quotes:
        quote_open[span.token_indices[0]] = span
        quote_close.add(span.token_indices[-1])
    parts = ['<p dir="rtl">']
    for i, token in enumerate(document.tokens):
        if i in quote_open:
            ref = _html.escape(quote_open[i].reference, quote=True)
            parts.append(f'<span class="quote" data-ref="{ref}">')
        entry = by_token.get(i)
        if entry is None:
            parts.append(_html.escape(reconstruct_token(token)))
        else:
            index, word = entry
            parts.append(
                f'<span class="word" data-word="{index}">'
                + _html.escape(_rendered_word(document, word, policy))
                + "</span>"
            )
        if i in quote_close:
            parts.append("</span>")
    parts.append("</p>")
    return "".join(parts)


def _analysis_to_dict(analysis: MorphAnalysis | None):
    if analysis is None:
        return None
    return {"pos": analysis.pos, "properties": dict(analysis.properties)}


def _analysis_from_dict(data) -> MorphAnalysis | None:
    if data is None:
        return None
    return MorphAnalysis(data["pos"], tuple(sorted(data["properties"].items())))


def document_to_dict(document: AnnotatedDocument) -> dict:
    return {
        "format": DOCUMENT_FORMAT,
        "text": document.text,
        "matres": document.matres,
        "tokens": [
            {
                "surface": t.surface,
                "span": list(t.span),
                "kind": t.kind.name,
                "sigla": [[s.offset, s.glyphs] for s in t.sigla],
            }
            for t in document.tokens
        ],
        "words": [
            {
                "token_index": w.token_index,
                "surface": w.surface,
                "known": w.known,
                "selected": w.selected,
                "alternatives": [
                    {
                        "diac": a.diac,
                        "probability": a.probability,
                        "analysis": _analysis_to_dict(a.analysis),
                    }
                    for a in w.alternatives
                ],
            }
            for w in document.words
        ],
        "quotes": [
            {
                "token_indices": list(q.token_indices),
                "reference": q.reference,
                "canonical": list(q.canonical),
            }
            for q in document.quotes
        ],
    }


def document_from_dict(data: dict) -> AnnotatedDocument:
    if not isinstance(data, dict) or data.get("format") != DOCUMENT_FORMAT:
        raise PipelineError(f"unsupported document format {data.get('format')!r}")
    try:
        tokens = [
            Token(
                surface=t["surface"],
                span=tuple(t["span"]),
                kind=TokenKind[t["kind"]],
                sigla=tuple(SiglaSpan(off, glyphs) for off, glyphs in t["sigla"]),
            )
            for t in data["tokens"]
        ]
        words = [
            AnnotatedWord(
                token_index=w["token_index"],
                surface=w["surface"],
                known=w["known"],
                selected=w["selected"],
                alternatives=[
                    Alternative(
                        a["diac"], a["probability"], _analysis_from_dict(a["analysis"])
                    )
                    for a in w["alternatives"]
                ],
            )
            for w in data["words"]
        ]
        quotes = [
            QuoteSpan(tuple(q["token_indices"]), q["reference"], tuple(q["canonical"]))
            for q in data["quotes"]
        ]
        return AnnotatedDocument(data["text"], tokens, words, quotes, data["matres"])
    except (KeyError, TypeError) as exc:
        raise PipelineError(f"malformed document payload: {exc}") from exc


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalError:
    """One mismatched word: where it is and what the two texts say."""

    index: int
    surface: str
    gold: str
    system: str


@dataclass(frozen=True)
class EvalReport:
    words: int
    correct_words: int
    letters: int
    correct_letters: int
    errors: tuple[EvalError, ...] = ()

    @property
    def word_accuracy(self) -> float:
        return self.correct_words / self.words

    @property
    def letter_accuracy(self) -> float:
        return self.correct_letters / self.letters


def _word_tokens(text: str) -> list[Token]:
    return [t for t in tokenize(normalize_text(text)) if t.kind is TokenKind.WORD]


def evaluate(gold_text: str, system_text: str) -> EvalReport:
    """Word- and letter-level accuracy of aligned diacritized texts.

    Texts must contain the same word tokens; shin dots, gemination, and
    mater deletion all count toward letter correctness.
    """
    gold_tokens = _word_tokens(gold_text)
    sys_tokens = _word_tokens(system_text)
    if len(gold_tokens) != len(sys_tokens):
        raise PipelineError(
            f"gold has {len(gold_tokens)} words, system has {len(sys_tokens)}"
        )
    if not gold_tokens:
        raise PipelineError("no words to evaluate")
    words = len(gold_tokens)
    correct_words = 0
    letters = 0
    correct_letters = 0
    errors: list[EvalError] = []
    for i, (g, s) in enumerate(zip(gold_tokens, sys_tokens)):
        gw = parse_word(g.surface)
        sw = parse_word(s.surface)
        if gw.surface != sw.surface:
            raise PipelineError(
                f"word {i} differs: gold {gw.surface!r} vs system {sw.surface!r}"
            )
        gold_diac = to_lexicon_string(gw)
        sys_diac = to_lexicon_string(sw)
        if gold_diac == sys_diac:
            correct_words += 1
        else:
            errors.append(EvalError(i, gw.surface, gold_diac, sys_diac))
        for gl, sl in zip(gw.letters, sw.letters):
            letters += 1
            if gl == sl:
                correct_letters += 1
    return EvalReport(words, correct_words, letters, correct_letters, tuple(errors))


def expected_random_accuracy(lexicon: Lexicon, corpus: list[GoldToken]) -> float:
    """Expected word accuracy of picking uniformly among lexicon readings."""
    if not corpus:
        raise PipelineError("empty corpus")
    total = 0.0
    for token in corpus:
        cands = lexicon.lookup(token.surface)
        if cands.known:
            diacs = {c.diac for c in cands.candidates}
            total += (1.0 / len(diacs)) if token.diac in diacs else 0.0
    return total / len(corpus)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def build_vocabulary(corpus: list[list[GoldToken]]) -> list[str]:
    return sorted({tok.surface for sent in corpus for tok in sent})


def train_models(
    corpus: list[list[GoldToken]],
    lexicon: Lexicon,
    proper_nouns: frozenset[str] = frozenset(),
    tagger_config: TaggerConfig | None = None,
    diacritizer_config: DiacritizerConfig | None = None,
    epochs: int = 30,
    lr: float = 0.5,
    seed: int = 0,
    log=None,
) -> tuple[Tagger, Diacritizer, dict[str, list[dict]]]:
    """Train both models on an annotated corpus; returns per-epoch history."""
    if not corpus:
        raise PipelineError("empty corpus")
    vocab = build_vocabulary(corpus)
    tagger_config = tagger_config or TaggerConfig()
    diacritizer_config = diacritizer_config or DiacritizerConfig()
    if not tagger_config.words:
        tagger_config.words = list(vocab)
    if not diacritizer_config.words:
        diacritizer_config.words = list(vocab)
    tagger = Tagger(lexicon, proper_nouns, tagger_config, seed=seed)
    diacritizer = Diacritizer(diacritizer_config, seed=seed)

    sentences = [
        (
            [tok.surface for tok in sent],
            [tok.analysis for tok in sent],
            [parse_word(tok.diac) for tok in sent],
        )
        for sent in corpus
    ]
    rng = random.Random(seed)
    history: dict[str, list[dict]] = {"tagger": [], "diacritizer": []}
    order = list(range(len(sentences)))
    for epoch in range(1, epochs + 1):
        rng.shuffle(order)
        tag_total = 0.0
        dia_total = 0.0
        for index in order:
            surfaces, analyses, gold_words = sentences[index]
            tag_total += sgd_step(
                tagger.bank, lambda: tagger.train_loss(surfaces, analyses), lr
            )
            dia_total += sgd_step(
                diacritizer.bank, lambda: diacritizer.train_loss(surfaces, gold_words), lr
            )
        tag_mean = tag_total / len(sentences)
        dia_mean = dia_total / len(sentences)
        history["tagger"].append({"epoch": epoch, "loss": tag_mean})
        history["diacritizer"].append({"epoch": epoch, "loss": dia_mean})
        if log is not None:
            log(f"epoch {epoch}: tagger loss {tag_mean:.4f}, diacritizer loss {dia_mean:.4f}")
    return tagger, diacritizer, history
