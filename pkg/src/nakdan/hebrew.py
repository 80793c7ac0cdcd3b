"""Hebrew text data model: letters, diacritic marks, tokenization, rendering.

Diacritics are encoded with the standard Hebrew combining code points:
vowel points U+05B0..U+05BB, dagesh U+05BC, shin/sin dots U+05C1/U+05C2.
A shuruk is modeled as the vowel ``Vowel.SHURUK`` on a vav and rendered
with the dagesh code point, as in plain Unicode text; a vav carrying the
dot plus another vowel is a geminated vav instead.

Canonical mark order within a letter is: consonant, dagesh, shin/sin dot,
vowel. ``normalize_text`` rewrites any input into this order.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from enum import Enum


ALEF = "א"
VAV = "ו"
YOD = "י"
HE = "ה"
SHIN = "ש"

DAGESH = "ּ"
SHIN_DOT = "ׁ"
SIN_DOT = "ׂ"

# Letters that can act as matres lectionis (vowel carriers).
MATER_LETTERS = frozenset((ALEF, HE, VAV, YOD))

# Final-form pairs (regular -> final).
FINAL_FORMS = {
    "כ": "ך",  # kaf
    "מ": "ם",  # mem
    "נ": "ן",  # nun
    "פ": "ף",  # pe
    "צ": "ץ",  # tsadi
}


def is_hebrew_letter(ch: str) -> bool:
    return "א" <= ch <= "ת"


def bare_letters(text: str) -> str:
    """Only the Hebrew consonants of ``text``, marks and markers dropped."""
    return "".join(ch for ch in text if is_hebrew_letter(ch))


class Vowel(Enum):
    """The twelve primary vowel marks."""

    SHEVA = "ְ"
    HATAF_SEGOL = "ֱ"
    HATAF_PATAH = "ֲ"
    HATAF_QAMATS = "ֳ"
    HIRIQ = "ִ"
    TSERE = "ֵ"
    SEGOL = "ֶ"
    PATAH = "ַ"
    QAMATS = "ָ"
    HOLAM = "ֹ"
    QUBUTS = "ֻ"
    SHURUK = "ּ"  # dot inside a vav; shares the dagesh code point


_VOWEL_BY_CHAR = {v.value: v for v in Vowel if v is not Vowel.SHURUK}


class ShinDotSide(Enum):
    NONE = "none"
    RIGHT = "right"  # pronounced sh
    LEFT = "left"  # pronounced s


_SHIN_DOT_CHARS = {ShinDotSide.RIGHT: SHIN_DOT, ShinDotSide.LEFT: SIN_DOT}


class HebrewError(ValueError):
    """Invalid Hebrew text or mark combination."""


@dataclass(frozen=True)
class DiacriticMark:
    """Marks carried by one letter: at most one vowel, gemination, shin dot."""

    vowel: Vowel | None = None
    gemination: bool = False
    shin_dot: ShinDotSide = ShinDotSide.NONE

    def __post_init__(self) -> None:
        if self.vowel is Vowel.SHURUK and self.gemination:
            raise HebrewError("shuruk and gemination share one dot and cannot combine")

    @property
    def empty(self) -> bool:
        return (
            self.vowel is None
            and not self.gemination
            and self.shin_dot is ShinDotSide.NONE
        )


EMPTY_MARK = DiacriticMark()


@dataclass(frozen=True)
class DiacritizedLetter:
    """A consonant with its marks; ``mater_deleted`` flags a dropped mater."""

    base: str
    mark: DiacriticMark = EMPTY_MARK
    mater_deleted: bool = False

    def __post_init__(self) -> None:
        if len(self.base) != 1 or not is_hebrew_letter(self.base):
            raise HebrewError(f"not a Hebrew consonant: {self.base!r}")
        if self.mater_deleted and not self.mark.empty:
            raise HebrewError("a mater-deleted letter cannot carry marks")
        if self.mark.shin_dot is not ShinDotSide.NONE and self.base != SHIN:
            raise HebrewError("shin dot on a letter other than shin")

    def rendered(self) -> str:
        """The letter with marks in canonical order (deletion flag ignored)."""
        parts = [self.base]
        if self.mark.gemination or self.mark.vowel is Vowel.SHURUK:
            parts.append(DAGESH)
        if self.mark.shin_dot is not ShinDotSide.NONE:
            parts.append(_SHIN_DOT_CHARS[self.mark.shin_dot])
        if self.mark.vowel is not None and self.mark.vowel is not Vowel.SHURUK:
            parts.append(self.mark.vowel.value)
        return "".join(parts)


@dataclass(frozen=True)
class SiglaSpan:
    """One contiguous run of editorial sigla glyphs inside a word.

    ``offset`` counts the letters that precede the run in the stripped word.
    """

    offset: int
    glyphs: str


class TokenKind(Enum):
    WORD = "hebrew-word"
    PUNCT = "punctuation"
    OTHER = "non-hebrew"
    SPACE = "whitespace"


@dataclass(frozen=True)
class Token:
    """A tokenizer output unit; ``span`` is (start, end) offsets into the source."""

    surface: str
    span: tuple[int, int]
    kind: TokenKind
    sigla: tuple[SiglaSpan, ...] = ()

    def letter_count(self) -> int:
        return sum(1 for ch in self.surface if is_hebrew_letter(ch))


@dataclass(frozen=True)
class DiacritizedWord:
    """An ordered sequence of diacritized letters plus any carried sigla."""

    letters: tuple[DiacritizedLetter, ...]
    sigla: tuple[SiglaSpan, ...] = ()

    def __post_init__(self) -> None:
        if self.letters and self.letters[-1].base == ALEF:
            if self.letters[-1].mark.gemination:
                raise HebrewError("gemination on a word-final alef")
        for span in self.sigla:
            if not 0 <= span.offset <= len(self.letters):
                raise HebrewError("sigla offset outside the word")

    @property
    def surface(self) -> str:
        return "".join(letter.base for letter in self.letters)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

# Glyph-variant vowels folded onto their primary code point.
_FOLD_MAP = {0x05BA: 0x05B9, 0x05C7: 0x05B8}  # holam for vav, qamats qatan


def _mark_rank(ch: str) -> tuple[int, str]:
    cp = ord(ch)
    if cp == 0x05BC:
        return (0, ch)
    if cp in (0x05C1, 0x05C2):
        return (1, ch)
    if 0x05B0 <= cp <= 0x05BB:
        return (2, ch)
    if cp in (0x05BD, 0x05BF, 0x05C4, 0x05C5):
        return (3, ch)
    if 0x0591 <= cp <= 0x05AF:
        return (4, ch)
    return (9, "")  # non-Hebrew marks keep their relative order


def normalize_text(raw: str, rules=None) -> str:
    """Return ``raw`` with combining marks in canonical order.

    Decomposes presentation forms, folds glyph-variant vowel points, and
    reorders each run of combining marks to dagesh, shin/sin dot, vowel.
    Total and idempotent. ``rules`` is an optional sequence of str -> str
    hooks (e.g. for historical orthography) applied after normalization;
    idempotence is then up to the rules.
    """
    text = unicodedata.normalize("NFD", raw).translate(_FOLD_MAP)
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        if unicodedata.combining(text[i]):
            j = i
            while j < n and unicodedata.combining(text[j]):
                j += 1
            out.extend(sorted(text[i:j], key=_mark_rank))
            i = j
        else:
            out.append(text[i])
            i += 1
    result = "".join(out)
    for rule in rules or ():
        result = rule(result)
    return result


# ---------------------------------------------------------------------------
# Word parsing and rendering
# ---------------------------------------------------------------------------

# Marker used in lexicon/corpus files for a mater-deleted letter.
MATER_MARKER = "|"

# Marks tolerated but dropped when parsing words (cantillation, meteg, rafe).
_IGNORED_MARK = frozenset(
    chr(c) for c in range(0x0591, 0x05B0)
) | {"ֽ", "ֿ", "ׄ", "ׅ"}


class WordParseError(HebrewError):
    """A string does not parse as a diacritized word."""


def parse_word(text: str, sigla: tuple[SiglaSpan, ...] = ()) -> DiacritizedWord:
    """Parse a diacritized word string into the data model.

    Accepts the file convention where ``|`` after a letter flags a deleted
    mater. A dot on a vav with no other vowel reads as shuruk.
    """
    letters: list[DiacritizedLetter] = []
    base: str | None = None
    vowel: Vowel | None = None
    dagesh = False
    shin_side = ShinDotSide.NONE
    deleted = False

    def flush() -> None:
        nonlocal base, vowel, dagesh, shin_side, deleted
        if base is None:
            return
        if deleted and (vowel or dagesh or shin_side is not ShinDotSide.NONE):
            raise WordParseError(f"marks on a mater-deleted letter in {text!r}")
        if base == VAV and dagesh and vowel is None:
            mark = DiacriticMark(vowel=Vowel.SHURUK)
        else:
            mark = DiacriticMark(vowel=vowel, gemination=dagesh, shin_dot=shin_side)
        letters.append(DiacritizedLetter(base, mark, mater_deleted=deleted))
        base, vowel, dagesh, shin_side, deleted = None, None, False, ShinDotSide.NONE, False

    for ch in text:
        if is_hebrew_letter(ch):
            flush()
            base = ch
        elif ch == MATER_MARKER:
            if base is None:
                raise WordParseError(f"dangling mater marker in {text!r}")
            deleted = True
        elif ch == DAGESH:
            if base is None:
                raise WordParseError(f"mark before any letter in {text!r}")
            dagesh = True
        elif ch in (SHIN_DOT, SIN_DOT):
            if base != SHIN:
                raise WordParseError(f"shin dot on non-shin in {text!r}")
            shin_side = ShinDotSide.RIGHT if ch == SHIN_DOT else ShinDotSide.LEFT
        elif ch in _VOWEL_BY_CHAR:
            if base is None:
                raise WordParseError(f"mark before any letter in {text!r}")
            if vowel is not None:
                raise WordParseError(f"two vowels on one letter in {text!r}")
            vowel = _VOWEL_BY_CHAR[ch]
        elif ch in _IGNORED_MARK:
            continue
        else:
            raise WordParseError(f"unexpected character {ch!r} in {text!r}")
    flush()
    try:
        return DiacritizedWord(tuple(letters), sigla)
    except HebrewError as exc:
        raise WordParseError(str(exc)) from exc


def compose(surface: str, marks: list[DiacriticMark], deleted: set[int] = frozenset()) -> DiacritizedWord:
    """Build a word from a bare surface and per-letter marks (test helper)."""
    if len(surface) != len(marks):
        raise HebrewError("one mark bundle per letter required")
    letters = tuple(
        DiacritizedLetter(
            ch,
            EMPTY_MARK if i in deleted else marks[i],
            mater_deleted=i in deleted,
        )
        for i, ch in enumerate(surface)
    )
    return DiacritizedWord(letters)


def strip_diacritics(word: DiacritizedWord) -> str:
    """The bare consonantal spelling, including mater-deleted letters."""
    return word.surface


MATRES_KEEP = "keep-matres"
MATRES_REMOVE = "remove-matres"
_LEXICON_STYLE = "lexicon"


def render(word: DiacritizedWord, policy: str = MATRES_KEEP, with_sigla: bool = True) -> str:
    """Render a word as text under a matres lectionis policy.

    ``keep-matres`` keeps deleted matres as bare letters; ``remove-matres``
    omits them. Sigla runs are reinserted at their letter offsets, shifted
    past any letters the policy removed.
    """
    if policy not in (MATRES_KEEP, MATRES_REMOVE, _LEXICON_STYLE):
        raise HebrewError(f"unknown matres policy {policy!r}")
    runs = sorted(word.sigla, key=lambda s: s.offset) if with_sigla else []
    out: list[str] = []
    si = 0
    for idx, letter in enumerate(word.letters):
        while si < len(runs) and runs[si].offset == idx:
            out.append(runs[si].glyphs)
            si += 1
        if letter.mater_deleted:
            if policy == MATRES_KEEP:
                out.append(letter.base)
            elif policy == _LEXICON_STYLE:
                out.append(letter.base + MATER_MARKER)
        else:
            out.append(letter.rendered())
    while si < len(runs):
        out.append(runs[si].glyphs)
        si += 1
    return "".join(out)


def to_lexicon_string(word: DiacritizedWord) -> str:
    """Serialize with the ``|`` deleted-mater convention, sigla omitted."""
    return render(word, _LEXICON_STYLE, with_sigla=False)


# ---------------------------------------------------------------------------
# Sigla tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SiglaTable:
    pairs: tuple[tuple[str, str], ...]

    @property
    def glyphs(self) -> frozenset[str]:
        return frozenset(g for pair in self.pairs for g in pair)


DEFAULT_SIGLA = SiglaTable(pairs=(("[", "]"), ("(", ")"), ("<", ">"), ("⟨", "⟩")))


def load_sigla_table(path) -> SiglaTable:
    """Load a sigla table: one open/close pair per line, tab-separated."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not all(fields):
                raise HebrewError(f"{path}:{lineno}: expected open<TAB>close")
            pairs.append((fields[0], fields[1]))
    return SiglaTable(tuple(pairs))


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

_LETTER, _SIGLA, _OTHER = 0, 1, 2


@dataclass
class _Item:
    kind: int
    text: str
    start: int
    end: int


def _scan_chunk(text: str, start: int, end: int, glyphs: frozenset[str]) -> list[_Item]:
    items: list[_Item] = []
    for p in range(start, end):
        ch = text[p]
        if is_hebrew_letter(ch):
            items.append(_Item(_LETTER, ch, p, p + 1))
        elif unicodedata.combining(ch) or (
            ch == MATER_MARKER and items and items[-1].kind == _LETTER
        ):
            # Marks attach to whatever precedes them; orphan marks after a
            # sigla run become part of that run so reconstruction is exact.
            # The mater-deletion marker likewise clings to the letter it
            # annotates so pointed dictionary forms tokenize as one word.
            if items:
                items[-1].text += ch
                items[-1].end = p + 1
            else:
                items.append(_Item(_OTHER, ch, p, p + 1))
        elif ch in glyphs:
            if items and items[-1].kind == _SIGLA and items[-1].end == p:
                items[-1].text += ch
                items[-1].end = p + 1
            else:
                items.append(_Item(_SIGLA, ch, p, p + 1))
        else:
            if items and items[-1].kind == _OTHER and items[-1].end == p:
                items[-1].text += ch
                items[-1].end = p + 1
            else:
                items.append(_Item(_OTHER, ch, p, p + 1))
    return items


def _classify_run(text: str) -> TokenKind:
    if all(unicodedata.category(ch)[0] in ("P", "S") for ch in text):
        return TokenKind.PUNCT
    return TokenKind.OTHER


def _word_token(items: list[_Item]) -> Token:
    surface_parts: list[str] = []
    sigla: list[SiglaSpan] = []
    letter_count = 0
    for item in items:
        if item.kind == _LETTER:
            surface_parts.append(item.text)
            letter_count += 1
        else:
            sigla.append(SiglaSpan(offset=letter_count, glyphs=item.text))
    return Token(
        surface="".join(surface_parts),
        span=(items[0].start, items[-1].end),
        kind=TokenKind.WORD,
        sigla=tuple(sigla),
    )


def tokenize(text: str, sigla_table: SiglaTable = DEFAULT_SIGLA) -> list[Token]:
    """Split text into word, punctuation, non-Hebrew, and whitespace tokens.

    Sigla glyph runs with Hebrew letters on both sides stay inside a single
    hebrew-word token, recorded as ``SiglaSpan`` entries and removed from
    the matchable surface. Leading or trailing sigla become punctuation.
    """
    glyphs = sigla_table.glyphs
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            j = i
            while j < n and text[j].isspace():
                j += 1
            tokens.append(Token(text[i:j], (i, j), TokenKind.SPACE))
            i = j
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        items = _scan_chunk(text, i, j, glyphs)
        k = 0
        while k < len(items):
            item = items[k]
            if item.kind == _LETTER:
                last_letter = k
                m = k
                while m < len(items) and items[m].kind in (_LETTER, _SIGLA):
                    if items[m].kind == _LETTER:
                        last_letter = m
                    m += 1
                tokens.append(_word_token(items[k : last_letter + 1]))
                k = last_letter + 1
            elif item.kind == _SIGLA:
                tokens.append(Token(item.text, (item.start, item.end), TokenKind.PUNCT))
                k += 1
            else:
                kind = _classify_run(item.text)
                tokens.append(Token(item.text, (item.start, item.end), kind))
                k += 1
        i = j
    return tokens


def reconstruct_token(token: Token) -> str:
    """The exact source text of a token, sigla reinserted."""
    if token.kind is not TokenKind.WORD or not token.sigla:
        return token.surface
    runs = sorted(token.sigla, key=lambda s: s.offset)
    out: list[str] = []
    si = 0
    letter_count = 0
    for ch in token.surface:
        if is_hebrew_letter(ch):
            while si < len(runs) and runs[si].offset == letter_count:
                out.append(runs[si].glyphs)
                si += 1
            letter_count += 1
        out.append(ch)
    while si < len(runs):
        out.append(runs[si].glyphs)
        si += 1
    return "".join(out)


def detokenize(tokens: list[Token]) -> str:
    """Invert ``tokenize``: concatenation reproduces the source exactly."""
    return "".join(reconstruct_token(t) for t in tokens)
