"""Wordform lexicon, collocation constraints, and canonical quote index.

File formats (UTF-8, LF, ``#`` comments):

* lexicon TSV: ``surface<TAB>diacritized<TAB>pos<TAB>prop=val;prop=val<TAB>freq``
  (freq optional, default 1; a ``Lemma=`` key in the property column names
  the lexeme and is not part of the analysis)
* collocation rules: ``pattern tokens<TAB>position<TAB>allowed-analysis-filter``
  (``~`` before a pattern token matches every inflected form of that lemma;
  ``|`` separates alternative filters)
* canonical verse corpus: ``book chapter:verse<TAB>diacritized text``
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import defaultdict

from .hebrew import (
    DiacritizedWord,
    TokenKind,
    WordParseError,
    bare_letters,
    normalize_text,
    parse_word,
    to_lexicon_string,
    tokenize,
)


POS_TAGS = (
    "Adj",
    "Adv",
    "Conj",
    "At_Prep",
    "Neg",
    "Noun",
    "Num",
    "Prep",
    "Pron",
    "ProperNoun",
    "Verb",
    "Interrogative",
    "Interj",
    "Quantifier",
    "Existential",
    "Modal",
    "Prefix",
    "Participle",
    "Copula",
    "Titular",
    "Shel_Prep",
)

PROPERTY_VALUES = {
    "Gender": frozenset({"m", "f", "mf"}),
    "Number": frozenset({"s", "p", "d"}),
    "Person": frozenset({"1", "2", "3", "a"}),
    "State": frozenset({"abs", "cons"}),
    "Tense": frozenset({"past", "present", "future", "imperative", "infinitive"}),
    "SuffixType": frozenset({"poss", "acc", "pron"}),
    "SuffixGender": frozenset({"m", "f", "mf"}),
    "SuffixNumber": frozenset({"s", "p", "d"}),
    "SuffixPerson": frozenset({"1", "2", "3", "a"}),
}

_SUFFIX_KEYS = ("SuffixType", "SuffixGender", "SuffixNumber", "SuffixPerson")

# Property keys each coarse tag admits. Nouns never take Tense; verbs never
# take State; closed classes take nothing unless suffixed pronouns apply.
PROPERTY_SCHEMA: dict[str, frozenset[str]] = {
    "Noun": frozenset(("Gender", "Number", "State") + _SUFFIX_KEYS),
    "Verb": frozenset(("Tense", "Person", "Gender", "Number") + _SUFFIX_KEYS),
    "Adj": frozenset(("Gender", "Number", "State")),
    "Num": frozenset(("Gender", "Number", "State")),
    "Participle": frozenset(("Gender", "Number", "State")),
    "Quantifier": frozenset(("Gender", "Number", "State")),
    "Pron": frozenset(("Gender", "Number", "Person")),
    "Copula": frozenset(("Gender", "Number", "Person")),
    "ProperNoun": frozenset(("Gender", "Number")),
    "At_Prep": frozenset(("SuffixGender", "SuffixNumber", "SuffixPerson")),
    "Shel_Prep": frozenset(("SuffixGender", "SuffixNumber", "SuffixPerson")),
    "Prep": frozenset(),
    "Adv": frozenset(),
    "Conj": frozenset(),
    "Neg": frozenset(),
    "Interrogative": frozenset(),
    "Interj": frozenset(),
    "Modal": frozenset(),
    "Prefix": frozenset(),
    "Titular": frozenset(),
    "Existential": frozenset(),
}

PROPERTY_KEYS = tuple(sorted(PROPERTY_VALUES))


class LexiconError(ValueError):
    """Malformed lexicon, rule, or corpus input."""


@dataclass(frozen=True)
class MorphAnalysis:
    """Coarse POS plus the fine-grained properties the tag admits."""

    pos: str
    properties: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.pos not in PROPERTY_SCHEMA:
            raise LexiconError(f"unknown pos tag {self.pos!r}")
        allowed = PROPERTY_SCHEMA[self.pos]
        seen = set()
        for key, value in self.properties:
            if key not in allowed:
                raise LexiconError(f"{self.pos} does not admit property {key!r}")
            if key in seen:
                raise LexiconError(f"duplicate property {key!r}")
            if value not in PROPERTY_VALUES[key]:
                raise LexiconError(f"bad value {value!r} for {key}")
            seen.add(key)
        object.__setattr__(self, "properties", tuple(sorted(self.properties)))

    def get(self, key: str) -> str | None:
        for k, v in self.properties:
            if k == key:
                return v
        return None

    @classmethod
    def make(cls, pos: str, **props: str) -> "MorphAnalysis":
        return cls(pos, tuple(props.items()))


@dataclass(frozen=True)
class Candidate:
    """One legal (diacritization, analysis) pair for a surface form."""

    word: DiacritizedWord
    analysis: MorphAnalysis
    frequency: int = 1
    lemma: str | None = None

    @property
    def diac(self) -> str:
        return to_lexicon_string(self.word)


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    options: tuple[Candidate, ...]


@dataclass(frozen=True)
class CandidateSet:
    """The legal options for one word; ``known=False`` means unconstrained."""

    candidates: tuple[Candidate, ...] = ()
    known: bool = False

    def __post_init__(self) -> None:
        if not self.known and self.candidates:
            raise LexiconError("an unknown word cannot carry candidates")

    def pos_values(self) -> frozenset[str]:
        return frozenset(c.analysis.pos for c in self.candidates)


UNKNOWN = CandidateSet()


def _parse_props(text: str, lineno: int, pos: str) -> tuple[MorphAnalysis, str | None]:
    props = []
    lemma = None
    if text and text != "-":
        for item in text.split(";"):
            if not item:
                continue
            if "=" not in item:
                raise LexiconError(f"line {lineno}: property {item!r} is not key=value")
            key, value = item.split("=", 1)
            if key == "Lemma":
                lemma = value
            else:
                props.append((key, value))
    try:
        return MorphAnalysis(pos, tuple(props)), lemma
    except LexiconError as exc:
        raise LexiconError(f"line {lineno}: {exc}") from exc


class Lexicon:
    """Hash-indexed wordform table; immutable after load."""

    def __init__(self, entries: dict[str, LexiconEntry]):
        self._entries = entries
        lemma_index: dict[str, set[str]] = defaultdict(set)
        for surface, entry in entries.items():
            for option in entry.options:
                if option.lemma:
                    lemma_index[option.lemma].add(surface)
        self._lemma_index = {k: frozenset(v) for k, v in lemma_index.items()}

    def __len__(self) -> int:
        return len(self._entries)

    def surfaces(self) -> list[str]:
        return sorted(self._entries)

    def lookup(self, surface: str) -> CandidateSet:
        entry = self._entries.get(bare_letters(normalize_text(surface)))
        if entry is None:
            return UNKNOWN
        return CandidateSet(entry.options, known=True)

    def forms_of_lemma(self, lemma: str) -> frozenset[str]:
        return self._lemma_index.get(lemma, frozenset())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lexicon):
            return NotImplemented
        return self._entries == other._entries


def load_lexicon(path) -> Lexicon:
    """Load and index a lexicon TSV; duplicate rows merge, frequencies sum."""
    merged: dict[str, dict[tuple[str, MorphAnalysis], Candidate]] = defaultdict(dict)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (4, 5):
                raise LexiconError(
                    f"{path}:{lineno}: expected 4 or 5 tab-separated fields, got {len(fields)}"
                )
            surface, diac, pos, props = fields[:4]
            freq = 1
            if len(fields) == 5 and fields[4]:
                try:
                    freq = int(fields[4])
                except ValueError:
                    raise LexiconError(f"{path}:{lineno}: frequency field {fields[4]!r}")
                if freq < 0:
                    raise LexiconError(f"{path}:{lineno}: negative frequency")
            try:
                word = parse_word(normalize_text(diac))
            except WordParseError as exc:
                raise LexiconError(f"{path}:{lineno}: diacritized field: {exc}") from exc
            surface_n = normalize_text(surface)
            if word.surface != surface_n:
                raise LexiconError(
                    f"{path}:{lineno}: diacritization strips to {word.surface!r},"
                    f" surface column says {surface_n!r}"
                )
            analysis, lemma = _parse_props(props, lineno, pos)
            key = (to_lexicon_string(word), analysis)
            bucket = merged[surface_n]
            if key in bucket:
                old = bucket[key]
                bucket[key] = Candidate(old.word, old.analysis, old.frequency + freq, old.lemma)
            else:
                bucket[key] = Candidate(word, analysis, freq, lemma)
    entries = {}
    for surface, bucket in merged.items():
        options = sorted(bucket.values(), key=lambda c: (-c.frequency, c.diac, c.analysis.pos))
        entries[surface] = LexiconEntry(surface, tuple(options))
    return Lexicon(entries)


def save_lexicon(lexicon: Lexicon, path) -> None:
    """Write the TSV form that load_lexicon reads; load(save(x)) == x."""
    with open(path, "w", encoding="utf-8") as fh:
        for surface in lexicon.surfaces():
            for cand in lexicon.lookup(surface).candidates:
                props = ";".join(f"{k}={v}" for k, v in cand.analysis.properties)
                if cand.lemma:
                    props = f"Lemma={cand.lemma}" + (";" + props if props else "")
                fields = [surface, cand.diac, cand.analysis.pos, props or "-", str(cand.frequency)]
                fh.write("\t".join(fields) + "\n")


def load_wordset(path) -> frozenset[str]:
    """A plain word list (e.g. proper nouns), one surface per line."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(bare_letters(normalize_text(line)))
    return frozenset(words)


# ---------------------------------------------------------------------------
# Collocation constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisFilter:
    """Conjunctive match on pos and property values."""

    pos: str | None = None
    properties: tuple[tuple[str, str], ...] = ()

    def matches(self, analysis: MorphAnalysis) -> bool:
        if self.pos is not None and analysis.pos != self.pos:
            return False
        return all(analysis.get(k) == v for k, v in self.properties)


@dataclass(frozen=True)
class PatternItem:
    surface: str
    expand_lemma: bool = False


@dataclass(frozen=True)
class CollocationRule:
    pattern: tuple[PatternItem, ...]
    position: int
    allowed: tuple[AnalysisFilter, ...]
    source_line: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.position < len(self.pattern):
            raise LexiconError("constrained position outside the pattern")


def parse_filter(text: str) -> AnalysisFilter:
    pos = None
    props = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise LexiconError(f"filter clause {item!r} is not key=value")
        key, value = item.split("=", 1)
        if key == "pos":
            if value not in PROPERTY_SCHEMA:
                raise LexiconError(f"unknown pos tag {value!r} in filter")
            pos = value
        else:
            if key not in PROPERTY_VALUES or value not in PROPERTY_VALUES[key]:
                raise LexiconError(f"bad filter clause {item!r}")
            props.append((key, value))
    return AnalysisFilter(pos, tuple(sorted(props)))


def load_collocations(path) -> tuple[CollocationRule, ...]:
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise LexiconError(f"{path}:{lineno}: expected 3 tab-separated fields")
            items = []
            for tok in fields[0].split():
                if tok.startswith("~"):
                    items.append(PatternItem(bare_letters(normalize_text(tok[1:])), True))
                else:
                    items.append(PatternItem(bare_letters(normalize_text(tok))))
            try:
                position = int(fields[1])
            except ValueError:
                raise LexiconError(f"{path}:{lineno}: position field {fields[1]!r}")
            allowed = tuple(parse_filter(part) for part in fields[2].split("|"))
            try:
                rules.append(CollocationRule(tuple(items), position, allowed, lineno))
            except LexiconError as exc:
                raise LexiconError(f"{path}:{lineno}: {exc}") from exc
    return tuple(rules)


def _item_matches(item: PatternItem, surface: str, lexicon: Lexicon | None) -> bool:
    if item.expand_lemma:
        if lexicon is None:
            return False
        return surface in lexicon.forms_of_lemma(item.surface)
    return surface == item.surface


def apply_collocation_constraints(
    tokens,
    sets: list[CandidateSet],
    rules,
    lexicon: Lexicon | None = None,
    diagnostics: list[str] | None = None,
) -> list[CandidateSet]:
    """Filter candidate sets where collocation patterns match.

    Rules apply in file order. A rule occurrence that would empty a
    non-empty set is skipped and, if ``diagnostics`` is given, noted there.
    """
    if len(tokens) != len(sets):
        raise LexiconError("one candidate set per token required")
    out = list(sets)
    word_positions = [i for i, t in enumerate(tokens) if t.kind is TokenKind.WORD]
    surfaces = [bare_letters(normalize_text(tokens[i].surface)) for i in word_positions]
    for rule in rules:
        width = len(rule.pattern)
        for start in range(len(surfaces) - width + 1):
            if not all(
                _item_matches(rule.pattern[k], surfaces[start + k], lexicon)
                for k in range(width)
            ):
                continue
            pos = word_positions[start + rule.position]
            current = out[pos]
            if not current.candidates:
                continue
            kept = tuple(
                c
                for c in current.candidates
                if any(f.matches(c.analysis) for f in rule.allowed)
            )
            if not kept:
                if diagnostics is not None:
                    diagnostics.append(
                        f"rule at line {rule.source_line} would empty"
                        f" candidates of {surfaces[start + rule.position]!r}; skipped"
                    )
                continue
            out[pos] = CandidateSet(kept, known=current.known)
    return out


# ---------------------------------------------------------------------------
# Ambiguity statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoldToken:
    """A corpus token: surface, gold diacritization, gold analysis."""

    surface: str
    diac: str
    analysis: MorphAnalysis


def load_annotated_corpus(path) -> list[list[GoldToken]]:
    """Sentence-per-block corpus: lexicon-style 4-column rows, blank line between."""
    sentences: list[list[GoldToken]] = []
    current: list[GoldToken] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                continue
            if not line:
                if current:
                    sentences.append(current)
                    current = []
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise LexiconError(f"{path}:{lineno}: expected 4 tab-separated fields")
            surface, diac, pos, props = fields
            diac_n = to_lexicon_string(parse_word(normalize_text(diac)))
            analysis, _ = _parse_props(props, lineno, pos)
            surface_n = normalize_text(surface)
            if bare_letters(diac_n) != surface_n:
                raise LexiconError(f"{path}:{lineno}: diacritization does not match surface")
            current.append(GoldToken(surface_n, diac_n, analysis))
    if current:
        sentences.append(current)
    return sentences


@dataclass(frozen=True)
class AmbiguityReport:
    """Mean option counts per corpus token, before and after conditioning."""

    analyses_per_form: float
    analyses_given_diac: float
    diacs_per_form: float
    diacs_given_analysis: float
    pos_per_form: float
    pos_given_diac: float
    diacs_given_pos: float
    tokens: int
    skipped: int


def compute_ambiguity_stats(lexicon: Lexicon, corpus: list[GoldToken]) -> AmbiguityReport:
    """Token-weighted ambiguity means over a gold corpus.

    Tokens whose surface is out of lexicon, or whose gold option is not in
    the entry, are skipped and counted.
    """
    sums = [0.0] * 7
    used = 0
    skipped = 0
    for token in corpus:
        cs = lexicon.lookup(token.surface)
        options = cs.candidates
        with_diac = [c for c in options if c.diac == token.diac]
        with_analysis = [c for c in options if c.analysis == token.analysis]
        if not cs.known or not with_diac or not with_analysis:
            skipped += 1
            continue
        used += 1
        sums[0] += len({c.analysis for c in options})
        sums[1] += len({c.analysis for c in with_diac})
        sums[2] += len({c.diac for c in options})
        sums[3] += len({c.diac for c in with_analysis})
        sums[4] += len({c.analysis.pos for c in options})
        sums[5] += len({c.analysis.pos for c in with_diac})
        with_pos = [c for c in options if c.analysis.pos == token.analysis.pos]
        sums[6] += len({c.diac for c in with_pos})
    if used == 0:
        return AmbiguityReport(0, 0, 0, 0, 0, 0, 0, 0, skipped)
    means = [s / used for s in sums]
    return AmbiguityReport(*means, tokens=used, skipped=skipped)


# ---------------------------------------------------------------------------
# Canonical quote matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verse:
    reference: str
    words: tuple[str, ...]  # canonical diacritized forms, normalized
    bare: tuple[str, ...]


@dataclass(frozen=True)
class QuoteSpan:
    """A run of input tokens matching a canonical verse n-gram."""

    token_indices: tuple[int, ...]
    reference: str
    canonical: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.token_indices)


class QuoteIndex:
    """N-gram index over a canonical diacritized corpus (default N=3)."""

    def __init__(self, verses: list[Verse], n: int = 3):
        if n < 1:
            raise LexiconError("n-gram size must be positive")
        self.n = n
        self.verses = tuple(verses)
        index: dict[tuple[str, ...], list[tuple[int, int]]] = defaultdict(list)
        for vi, verse in enumerate(self.verses):
            for wi in range(len(verse.bare) - n + 1):
                index[verse.bare[wi : wi + n]].append((vi, wi))
        self._index = dict(index)

    @classmethod
    def from_file(cls, path, n: int = 3) -> "QuoteIndex":
        verses = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                if "\t" not in line:
                    raise LexiconError(f"{path}:{lineno}: expected reference<TAB>text")
                reference, text = line.split("\t", 1)
                words = [
                    t.surface
                    for t in tokenize(normalize_text(text))
                    if t.kind is TokenKind.WORD
                ]
                if not words:
                    raise LexiconError(f"{path}:{lineno}: verse has no Hebrew words")
                verses.append(
                    Verse(
                        reference.strip(),
                        tuple(words),
                        tuple(bare_letters(w) for w in words),
                    )
                )
        return cls(verses, n)

    def seeds(self, gram: tuple[str, ...]):
        return self._index.get(gram, ())


def match_biblical_quotes(tokens, index: QuoteIndex) -> list[QuoteSpan]:
    """Greedy left-to-right maximal matching of verse n-grams in a text.

    Returns non-overlapping spans of at least ``index.n`` word tokens, each
    carrying the canonical diacritization of the matched verse words.
    """
    n = index.n
    word_positions = [i for i, t in enumerate(tokens) if t.kind is TokenKind.WORD]
    bare = [bare_letters(normalize_text(tokens[i].surface)) for i in word_positions]
    spans: list[QuoteSpan] = []
    i = 0
    while i + n <= len(bare):
        best_len = 0
        best_seed = None
        for vi, wi in index.seeds(tuple(bare[i : i + n])):
            verse = index.verses[vi]
            length = n
            while (
                i + length < len(bare)
                and wi + length < len(verse.bare)
                and bare[i + length] == verse.bare[wi + length]
            ):
                length += 1
            if length > best_len:
                best_len = length
                best_seed = (vi, wi)
        if best_seed is None:
            i += 1
            continue
        vi, wi = best_seed
        verse = index.verses[vi]
        spans.append(
            QuoteSpan(
                token_indices=tuple(word_positions[i : i + best_len]),
                reference=verse.reference,
                canonical=verse.words[wi : wi + best_len],
            )
        )
        i += best_len
    return spans
