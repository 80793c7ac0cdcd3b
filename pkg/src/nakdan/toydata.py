"""Deterministic synthetic corpus for exercising the whole pipeline.

A small invented Hebrew-like language with enough structure to learn:

* trigger-resolved homographs — the word right before an ambiguous surface
  decides which lexicon reading is correct, so context is worth real accuracy;
* a noun family whose final-letter vowel is governed by the preceding word,
  so the pattern generalizes to stems never seen in training;
* words with a fixed shin/sin dot side;
* a two-word collocation that forces a construct-state reading;
* a handful of canonical "verses" for quote matching.

Everything is generated from one RNG seed, so fixtures are reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .hebrew import normalize_text, parse_word, to_lexicon_string
from .lexicon import GoldToken, MorphAnalysis


def _canon(diac: str) -> str:
    return to_lexicon_string(parse_word(normalize_text(diac)))


def _noun(gender="m", state="abs") -> MorphAnalysis:
    return MorphAnalysis.make("Noun", Gender=gender, Number="s", State=state)


def _verb() -> MorphAnalysis:
    return MorphAnalysis.make("Verb", Tense="past", Person="3", Gender="m", Number="s")


def _pron(gender="m") -> MorphAnalysis:
    return MorphAnalysis.make("Pron", Gender=gender, Number="s", Person="3")


@dataclass(frozen=True)
class Reading:
    surface: str
    diac: str
    analysis: MorphAnalysis
    frequency: int = 1
    lemma: str | None = None


# -- closed-class words -------------------------------------------------------

NOUN_TRIGGER = "על"  # homographs read as their first option after this
VERB_TRIGGER = "כל"  # ... and as their second option after this
FAMILY_TRIGGER_A = "עוד"  # noun family ends in qamats after this
FAMILY_TRIGGER_B = "זה"  # ... and in hiriq after this

_CLOSED = [
    Reading(NOUN_TRIGGER, "עַל", MorphAnalysis.make("Prep"), 40),
    Reading(VERB_TRIGGER, "כָּל", MorphAnalysis.make("Quantifier"), 30),
    Reading(FAMILY_TRIGGER_A, "עוֹד", MorphAnalysis.make("Adv"), 25),
    Reading(FAMILY_TRIGGER_B, "זֶה", _pron(), 25),
    Reading("הוא", "הוּא", _pron(), 20),
]

# -- trigger-resolved homographs ----------------------------------------------

HOMOGRAPHS = {
    "בצל": (
        Reading("בצל", "בָּצָל", _noun(), 12, "בצל"),
        Reading("בצל", "בְּצֵל", _noun(state="cons"), 5, "בצל"),
    ),
    "ספר": (
        Reading("ספר", "סֵפֶר", _noun(), 9, "ספר"),
        Reading("ספר", "סָפַר", _verb(), 4, "ספר"),
    ),
    "דבר": (
        Reading("דבר", "דָּבָר", _noun(), 8, "דבר"),
        Reading("דבר", "דִּבֵּר", _verb(), 3, "דבר"),
    ),
    "מלך": (
        Reading("מלך", "מֶלֶךְ", _noun(), 7, "מלך"),
        Reading("מלך", "מָלַךְ", _verb(), 2, "מלך"),
    ),
}

# -- the final-vowel noun family ----------------------------------------------

FAMILY_STEMS = (
    "גמלת",
    "דרכת",
    "סמכת",
    "פרחת",
    "ברקת",
    "קרנת",
    "כתבת",
    "נמלת",
    "זכת",
    "לפת",
    "קמת",
    "דגמנת",
    "פרסמת",
    "צלצלת",
)
PSEUDO_WORD = "גרזמת"  # same shape as the family stems, absent everywhere

_PATAH = "ַ"
_QAMATS = "ָ"
_HIRIQ = "ִ"


def family_form(stem: str, final_vowel: str) -> str:
    """Patah on every interior letter, the context-chosen vowel on the last."""
    body = "".join(ch + _PATAH for ch in stem[:-1])
    return body + stem[-1] + final_vowel


def _family_readings(stem: str) -> tuple[Reading, Reading]:
    return (
        Reading(stem, family_form(stem, _QAMATS), _noun("f"), 6, stem),
        Reading(stem, family_form(stem, _HIRIQ), _noun("f", "cons"), 5, stem),
    )


# -- open-class vocabulary ------------------------------------------------------

PLAIN_NOUNS = [
    Reading("כלב", "כֶּלֶב", _noun(), 9),
    Reading("גמל", "גָּמָל", _noun(), 8),
    Reading("דגל", "דֶּגֶל", _noun(), 7),
    Reading("לחם", "לֶחֶם", _noun(), 7),
    Reading("גן", "גַּן", _noun(), 6),
    Reading("ילד", "יֶלֶד", _noun(), 6),
    # full spelling whose yod is a deleted mater in the pointed form
    Reading("שיעור", "שִׁי|עוּר", _noun(), 5),
]

SHIN_NOUNS = [
    Reading("שמש", "שֶׁמֶשׁ", _noun("f"), 5),
    Reading("שלג", "שֶׁלֶג", _noun(), 5),
]

VERBS = [
    Reading("אכל", "אָכַל", _verb(), 9),
    Reading("כתב", "כָּתַב", _verb(), 8),
    Reading("נפל", "נָפַל", _verb(), 7),
    Reading("רקד", "רָקַד", _verb(), 6),
    Reading("שמח", "שָׂמַח", _verb(), 6),
]

PROPER = [
    Reading("דוד", "דָּוִד", MorphAnalysis.make("ProperNoun", Gender="m", Number="s"), 5),
    Reading("משה", "מֹשֶׁה", MorphAnalysis.make("ProperNoun", Gender="m", Number="s"), 5),
    Reading("שרה", "שָׂרָה", MorphAnalysis.make("ProperNoun", Gender="f", Number="s"), 5),
]

PHARMACY = [
    Reading("בית", "בַּיִת", _noun(), 10, "בית"),
    Reading("בית", "בֵּית", _noun(state="cons"), 4, "בית"),
    Reading("מרקחת", "מִרְקַחַת", _noun("f"), 4),
]

VERSES = [
    ("תהו א:א", ["הוּא", "אָכַל", "לֶחֶם", "עַל", "דֶּגֶל"]),
    ("תהו א:ב", ["כֶּלֶב", "רָקַד", "עַל", "גָּמָל"]),
    ("בהו ב:א", ["יֶלֶד", "כָּתַב", "עַל", "שֶׁלֶג"]),
]


def all_readings() -> list[Reading]:
    readings = list(_CLOSED) + list(PLAIN_NOUNS) + list(SHIN_NOUNS)
    readings += list(VERBS) + list(PROPER) + list(PHARMACY)
    for pair in HOMOGRAPHS.values():
        readings.extend(pair)
    for stem in FAMILY_STEMS:
        readings.extend(_family_readings(stem))
    return readings


def lexicon_rows() -> list[str]:
    rows = []
    for r in all_readings():
        props = ";".join(f"{k}={v}" for k, v in r.analysis.properties)
        if r.lemma:
            props = f"Lemma={r.lemma}" + (";" + props if props else "")
        rows.append("\t".join([r.surface, r.diac, r.analysis.pos, props or "-", str(r.frequency)]))
    return rows


def collocation_rows() -> list[str]:
    return [
        "# pharmacy: the head noun must be construct",
        "בית מרקחת\t0\tpos=Noun;State=cons",
    ]


def verse_rows() -> list[str]:
    return [f"{ref}\t{' '.join(words)}" for ref, words in VERSES]


def proper_noun_rows() -> list[str]:
    return [r.surface for r in PROPER]


# -- sentence generation --------------------------------------------------------


def _g(reading: Reading) -> GoldToken:
    return GoldToken(
        normalize_text(reading.surface), _canon(reading.diac), reading.analysis
    )


_VERSE_ANALYSIS = {
    _canon(r.diac): r.analysis
    for r in list(_CLOSED) + PLAIN_NOUNS + SHIN_NOUNS + VERBS + PROPER
}


def _verse_token(diac: str) -> GoldToken:
    canon = _canon(diac)
    word = parse_word(normalize_text(diac))
    return GoldToken(word.surface, canon, _VERSE_ANALYSIS[canon])


def generate_sentences(rng: random.Random, count: int) -> list[list[GoldToken]]:
    sentences = []
    for _ in range(count):
        roll = rng.random()
        if roll < 0.15:  # homograph in noun-trigger context
            pair = HOMOGRAPHS[rng.choice(sorted(HOMOGRAPHS))]
            sent = [_g(_CLOSED[0]), _g(pair[0])]
            if rng.random() < 0.5:
                sent.append(_g(rng.choice(PLAIN_NOUNS)))
        elif roll < 0.30:  # homograph in verb-trigger context
            pair = HOMOGRAPHS[rng.choice(sorted(HOMOGRAPHS))]
            sent = [_g(_CLOSED[1]), _g(pair[1])]
            if rng.random() < 0.5:
                sent.append(_g(rng.choice(PLAIN_NOUNS)))
        elif roll < 0.46:  # subject verb object
            sent = [
                _g(rng.choice(PLAIN_NOUNS)),
                _g(rng.choice(VERBS)),
                _g(rng.choice(PLAIN_NOUNS)),
            ]
        elif roll < 0.62:  # family word, qamats context
            stem = rng.choice(FAMILY_STEMS)
            sent = [_g(_CLOSED[2]), _g(_family_readings(stem)[0])]
        elif roll < 0.78:  # family word, hiriq context
            stem = rng.choice(FAMILY_STEMS)
            sent = [_g(_CLOSED[3]), _g(_family_readings(stem)[1])]
        elif roll < 0.84:  # proper noun subject
            sent = [_g(rng.choice(PROPER)), _g(rng.choice(VERBS))]
        elif roll < 0.90:  # shin noun subject
            sent = [
                _g(rng.choice(SHIN_NOUNS)),
                _g(rng.choice(VERBS)),
                _g(rng.choice(PLAIN_NOUNS)),
            ]
        elif roll < 0.95:  # collocation forces the construct reading
            sent = [_g(PHARMACY[1]), _g(PHARMACY[2])]
            if rng.random() < 0.5:
                sent = [_g(_CLOSED[3])] + sent
        else:  # a literal verse fragment
            ref, words = VERSES[rng.randrange(len(VERSES))]
            length = rng.randint(3, len(words))
            start = rng.randint(0, len(words) - length)
            sent = [_verse_token(w) for w in words[start : start + length]]
        sentences.append(sent)
    return sentences


@dataclass
class ToyWorld:
    """All fixture content for one seed, before it is written anywhere."""

    lexicon_rows: list[str]
    collocation_rows: list[str]
    verse_rows: list[str]
    proper_nouns: list[str]
    train: list[list[GoldToken]]
    heldout: list[list[GoldToken]]


def build_world(seed: int = 0, n_train: int = 200, n_heldout: int = 40) -> ToyWorld:
    rng = random.Random(seed)
    train = generate_sentences(rng, n_train)
    heldout = generate_sentences(rng, n_heldout)
    return ToyWorld(
        lexicon_rows(),
        collocation_rows(),
        verse_rows(),
        proper_noun_rows(),
        train,
        heldout,
    )


def _corpus_lines(sentences: list[list[GoldToken]]) -> list[str]:
    lines = []
    for sent in sentences:
        for tok in sent:
            props = ";".join(f"{k}={v}" for k, v in tok.analysis.properties)
            lines.append("\t".join([tok.surface, tok.diac, tok.analysis.pos, props or "-"]))
        lines.append("")
    return lines


def write_fixtures(out_dir, seed: int = 0, n_train: int = 200, n_heldout: int = 40) -> dict:
    """Write the full fixture tree; returns the path of every file written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    world = build_world(seed, n_train, n_heldout)
    paths = {
        "lexicon": out / "lexicon.tsv",
        "collocations": out / "collocations.tsv",
        "verses": out / "verses.tsv",
        "proper_nouns": out / "proper_nouns.txt",
        "train": out / "corpus_train.tsv",
        "heldout": out / "corpus_heldout.tsv",
    }
    paths["lexicon"].write_text("".join(r + "\n" for r in world.lexicon_rows), encoding="utf-8")
    paths["collocations"].write_text(
        "".join(r + "\n" for r in world.collocation_rows), encoding="utf-8"
    )
    paths["verses"].write_text("".join(r + "\n" for r in world.verse_rows), encoding="utf-8")
    paths["proper_nouns"].write_text(
        "".join(r + "\n" for r in world.proper_nouns), encoding="utf-8"
    )
    paths["train"].write_text("".join(r + "\n" for r in _corpus_lines(world.train)), encoding="utf-8")
    paths["heldout"].write_text(
        "".join(r + "\n" for r in _corpus_lines(world.heldout)), encoding="utf-8"
    )
    return paths
