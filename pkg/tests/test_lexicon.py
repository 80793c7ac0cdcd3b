"""Lexicon, collocation constraints, ambiguity stats, quote matching."""

import random

import pytest

from nakdan.hebrew import TokenKind, bare_letters, normalize_text, tokenize
from nakdan.lexicon import (
    UNKNOWN,
    AnalysisFilter,
    CandidateSet,
    CollocationRule,
    GoldToken,
    LexiconError,
    MorphAnalysis,
    PatternItem,
    QuoteIndex,
    apply_collocation_constraints,
    compute_ambiguity_stats,
    load_annotated_corpus,
    load_collocations,
    load_lexicon,
    load_wordset,
    match_biblical_quotes,
    parse_filter,
    save_lexicon,
)


def write_lexicon(tmp_path, rows, name="lex.tsv"):
    path = tmp_path / name
    path.write_text("".join(r + "\n" for r in rows), encoding="utf-8")
    return path


ONION_ROWS = [
    "# three readings of one consonant string",
    "בצל\tבָּצָל\tNoun\tGender=m;Number=s;State=abs;Lemma=בצל\t12",
    "בצל\tבְּצֵל\tNoun\tGender=m;Number=s;State=cons\t5",
    "בצל\tבַּצֵּל\tNoun\tGender=m;Number=s;State=abs\t3",
]


# ---------------------------------------------------------------------------
# MorphAnalysis schema
# ---------------------------------------------------------------------------


def test_schema_rejects_tense_on_noun():
    with pytest.raises(LexiconError):
        MorphAnalysis.make("Noun", Tense="past")


def test_schema_rejects_state_on_verb():
    with pytest.raises(LexiconError):
        MorphAnalysis.make("Verb", State="cons")


def test_schema_accepts_documented_combinations():
    MorphAnalysis.make("Noun", Gender="m", Number="s", State="abs")
    MorphAnalysis.make("Verb", Tense="past", Person="3", Gender="m", Number="s")
    MorphAnalysis.make("Noun", SuffixType="poss", SuffixPerson="1", SuffixNumber="s")
    MorphAnalysis.make("Prep")


def test_schema_rejects_unknown_pos_and_values():
    with pytest.raises(LexiconError):
        MorphAnalysis.make("Gerund")
    with pytest.raises(LexiconError):
        MorphAnalysis.make("Noun", Gender="x")
    with pytest.raises(LexiconError):
        MorphAnalysis("Noun", (("Gender", "m"), ("Gender", "f")))


def test_analysis_properties_sorted_for_stable_equality():
    a = MorphAnalysis("Noun", (("Number", "s"), ("Gender", "m")))
    b = MorphAnalysis("Noun", (("Gender", "m"), ("Number", "s")))
    assert a == b and hash(a) == hash(b)


# ---------------------------------------------------------------------------
# load / lookup
# ---------------------------------------------------------------------------


def test_two_options_one_entry(tmp_path):
    path = write_lexicon(
        tmp_path,
        [
            "ספר\tסֵפֶר\tNoun\tGender=m;Number=s;State=abs\t9",
            "ספר\tסָפַר\tVerb\tTense=past;Person=3;Gender=m;Number=s\t4",
            "כלב\tכֶּלֶב\tNoun\tGender=m;Number=s;State=abs\t7",
        ],
    )
    lex = load_lexicon(path)
    assert len(lex) == 2
    cs = lex.lookup("ספר")
    assert cs.known and len(cs.candidates) == 2


def test_onion_surface_has_three_options(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, ONION_ROWS))
    cs = lex.lookup("בצל")
    assert cs.known
    assert len(cs.candidates) == 3
    assert {c.diac for c in cs.candidates} == {
        normalize_text("בָּצָל"),
        normalize_text("בְּצֵל"),
        normalize_text("בַּצֵּל"),
    }


def test_save_load_round_trip_is_identity(tmp_path):
    rows = ONION_ROWS + [
        "ספר\tסֵפֶר\tNoun\tGender=m;Number=s;State=abs\t9",
        "ספר\tסָפַר\tVerb\tTense=past;Person=3;Gender=m;Number=s;Lemma=ספר\t4",
        "על\tעַל\tPrep\t-",
    ]
    lex = load_lexicon(write_lexicon(tmp_path, rows))
    out = tmp_path / "saved.tsv"
    save_lexicon(lex, out)
    again = load_lexicon(out)
    assert again == lex
    assert again.surfaces() == lex.surfaces()
    assert again.lookup("בצל") == lex.lookup("בצל")
    assert again.forms_of_lemma("ספר") == lex.forms_of_lemma("ספר")
    # serialization is deterministic: saving twice gives identical bytes
    out2 = tmp_path / "saved2.tsv"
    save_lexicon(again, out2)
    assert out.read_bytes() == out2.read_bytes()


def test_surface_mismatch_error_names_line(tmp_path):
    path = write_lexicon(
        tmp_path,
        [
            "כלב\tכֶּלֶב\tNoun\tGender=m;Number=s\t1",
            "כלב\tסֵפֶר\tNoun\tGender=m;Number=s\t1",
        ],
    )
    with pytest.raises(LexiconError, match=":2"):
        load_lexicon(path)


def test_malformed_row_error_names_line(tmp_path):
    path = write_lexicon(tmp_path, ["כלב\tכֶּלֶב\tNoun"])
    with pytest.raises(LexiconError, match=":1"):
        load_lexicon(path)
    path = write_lexicon(tmp_path, ["כלב\tכֶּלֶב\tNoun\t-\tmany"], name="f.tsv")
    with pytest.raises(LexiconError, match="frequency"):
        load_lexicon(path)


def test_duplicate_rows_merge_and_sum(tmp_path):
    row = "כלב\tכֶּלֶב\tNoun\tGender=m;Number=s\t"
    lex = load_lexicon(write_lexicon(tmp_path, [row + "3", row + "5"]))
    cs = lex.lookup("כלב")
    assert len(cs.candidates) == 1
    assert cs.candidates[0].frequency == 8


def test_options_frequency_descending(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, ONION_ROWS))
    freqs = [c.frequency for c in lex.lookup("בצל").candidates]
    assert freqs == sorted(freqs, reverse=True) == [12, 5, 3]


def test_unknown_surface(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, ONION_ROWS))
    cs = lex.lookup("סרדינות")
    assert not cs.known and cs.candidates == ()


def test_empty_lexicon_knows_nothing(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, ["# nothing"]))
    assert len(lex) == 0
    assert not lex.lookup("כלב").known


def test_lookup_normalizes_and_strips_marks(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, ONION_ROWS))
    assert lex.lookup("בָּצָל").known  # diacritized query resolves too


def test_frequency_defaults_to_one(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, ["כלב\tכֶּלֶב\tNoun\tGender=m;Number=s"]))
    assert lex.lookup("כלב").candidates[0].frequency == 1


def test_candidate_set_invariant():
    with pytest.raises(LexiconError):
        CandidateSet(candidates=(object(),), known=False)


def test_wordset_loader(tmp_path):
    path = tmp_path / "names.txt"
    path.write_text("# names\nדוד\nיוסף\n\n", encoding="utf-8")
    names = load_wordset(path)
    assert names == frozenset({"דוד", "יוסף"})


# ---------------------------------------------------------------------------
# Collocation constraints
# ---------------------------------------------------------------------------

PHARMACY_ROWS = [
    "בית\tבַּיִת\tNoun\tGender=m;Number=s;State=abs;Lemma=בית\t20",
    "בית\tבֵּית\tNoun\tGender=m;Number=s;State=cons;Lemma=בית\t6",
    "מרקחת\tמִרְקַחַת\tNoun\tGender=f;Number=s;State=abs\t2",
    "כתב\tכָּתַב\tVerb\tTense=past;Person=3;Gender=m;Number=s;Lemma=כתב\t8",
    "כתב\tכְּתָב\tNoun\tGender=m;Number=s;State=abs\t3",
    "כותב\tכּוֹתֵב\tVerb\tTense=present;Gender=m;Number=s;Lemma=כתב\t5",
    "כותב\tכּוֹתֵב\tNoun\tGender=m;Number=s;State=cons\t1",
]


def sets_for(tokens, lex):
    return [
        lex.lookup(t.surface) if t.kind is TokenKind.WORD else UNKNOWN for t in tokens
    ]


def test_construct_state_forced_before_pharmacy(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, PHARMACY_ROWS))
    rules_path = tmp_path / "rules.tsv"
    rules_path.write_text("בית מרקחת\t0\tpos=Noun;State=cons\n", encoding="utf-8")
    rules = load_collocations(rules_path)
    tokens = tokenize("בית מרקחת")
    before = sets_for(tokens, lex)
    assert len(before[0].candidates) == 2
    after = apply_collocation_constraints(tokens, before, rules, lexicon=lex)
    kept = after[0].candidates
    assert len(kept) == 1
    assert kept[0].analysis.get("State") == "cons"
    # the unconstrained position is untouched
    assert after[2] is before[2]


def test_no_match_returns_sets_unchanged(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, PHARMACY_ROWS))
    rules = (
        CollocationRule(
            (PatternItem("בית"), PatternItem("מרקחת")),
            0,
            (parse_filter("pos=Noun;State=cons"),),
        ),
    )
    tokens = tokenize("בית כתב")
    before = sets_for(tokens, lex)
    after = apply_collocation_constraints(tokens, before, rules, lexicon=lex)
    assert after == before


def test_rule_that_would_empty_is_skipped_with_diagnostic(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, PHARMACY_ROWS))
    rules = (
        CollocationRule(
            (PatternItem("בית"), PatternItem("מרקחת")),
            1,
            (parse_filter("pos=Verb"),),  # pharmacy has no verb reading
        ),
    )
    tokens = tokenize("בית מרקחת")
    before = sets_for(tokens, lex)
    diagnostics = []
    after = apply_collocation_constraints(
        tokens, before, rules, lexicon=lex, diagnostics=diagnostics
    )
    assert after == before
    assert len(diagnostics) == 1 and "skipped" in diagnostics[0]


def test_lemma_expansion_matches_inflected_forms(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, PHARMACY_ROWS))
    rules_path = tmp_path / "rules.tsv"
    rules_path.write_text("~כתב מרקחת\t0\tpos=Verb\n", encoding="utf-8")
    rules = load_collocations(rules_path)
    tokens = tokenize("כותב מרקחת")
    after = apply_collocation_constraints(tokens, sets_for(tokens, lex), rules, lexicon=lex)
    assert {c.analysis.pos for c in after[0].candidates} == {"Verb"}


def test_constraints_never_grow_sets(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, PHARMACY_ROWS))
    rules_path = tmp_path / "rules.tsv"
    rules_path.write_text(
        "בית מרקחת\t0\tpos=Noun;State=cons\n~כתב מרקחת\t0\tpos=Verb\n",
        encoding="utf-8",
    )
    rules = load_collocations(rules_path)
    for text in ("בית מרקחת", "כותב מרקחת", "בית כתב כותב"):
        tokens = tokenize(text)
        before = sets_for(tokens, lex)
        after = apply_collocation_constraints(tokens, before, rules, lexicon=lex)
        for b, a in zip(before, after):
            assert len(a.candidates) <= len(b.candidates)
            assert not (b.candidates and not a.candidates)


def test_rule_position_validated():
    with pytest.raises(LexiconError):
        CollocationRule((PatternItem("בית"),), 1, (AnalysisFilter(),))


def test_collocation_loader_errors(tmp_path):
    path = tmp_path / "rules.tsv"
    path.write_text("בית מרקחת\t0\n", encoding="utf-8")
    with pytest.raises(LexiconError, match=":1"):
        load_collocations(path)
    path.write_text("בית\tzero\tpos=Noun\n", encoding="utf-8")
    with pytest.raises(LexiconError, match="position"):
        load_collocations(path)
    path.write_text("בית\t0\tpos=Gerund\n", encoding="utf-8")
    with pytest.raises(LexiconError, match="Gerund"):
        load_collocations(path)


# ---------------------------------------------------------------------------
# Ambiguity statistics
# ---------------------------------------------------------------------------


def test_unambiguous_lexicon_means_one(tmp_path):
    lex = load_lexicon(
        write_lexicon(
            tmp_path,
            [
                "כלב\tכֶּלֶב\tNoun\tGender=m;Number=s\t1",
                "ספר\tסֵפֶר\tNoun\tGender=m;Number=s\t1",
            ],
        )
    )
    corpus = [
        GoldToken("כלב", normalize_text("כֶּלֶב"), MorphAnalysis.make("Noun", Gender="m", Number="s")),
        GoldToken("ספר", normalize_text("סֵפֶר"), MorphAnalysis.make("Noun", Gender="m", Number="s")),
    ]
    report = compute_ambiguity_stats(lex, corpus)
    assert report.tokens == 2 and report.skipped == 0
    for value in (
        report.analyses_per_form,
        report.analyses_given_diac,
        report.diacs_per_form,
        report.diacs_given_analysis,
        report.pos_per_form,
        report.pos_given_diac,
        report.diacs_given_pos,
    ):
        assert value == 1.0


def test_two_form_toy_counts_by_hand(tmp_path):
    # form A: 3 options, 2 distinct diacritizations, 3 distinct analyses
    # form B: 1 option; corpus holds one token of each
    lex = load_lexicon(
        write_lexicon(
            tmp_path,
            [
                "אם\tאֵם\tNoun\tGender=f;Number=s\t5",
                "אם\tאִם\tConj\t-\t9",
                "אם\tאִם\tInterrogative\t-\t2",
                "כלב\tכֶּלֶב\tNoun\tGender=m;Number=s\t1",
            ],
        )
    )
    corpus = [
        GoldToken("אם", normalize_text("אִם"), MorphAnalysis.make("Conj")),
        GoldToken("כלב", normalize_text("כֶּלֶב"), MorphAnalysis.make("Noun", Gender="m", Number="s")),
    ]
    report = compute_ambiguity_stats(lex, corpus)
    assert report.analyses_per_form == pytest.approx(2.0)
    assert report.diacs_per_form == pytest.approx(1.5)
    assert report.analyses_given_diac == pytest.approx(1.5)
    assert report.diacs_given_analysis == pytest.approx(1.0)
    assert report.pos_per_form == pytest.approx(2.0)
    assert report.pos_given_diac == pytest.approx(1.5)
    assert report.diacs_given_pos == pytest.approx(1.0)


def test_stats_skip_unresolvable_tokens(tmp_path):
    lex = load_lexicon(write_lexicon(tmp_path, ONION_ROWS))
    corpus = [
        GoldToken("סרדינות", "סרדינות", MorphAnalysis.make("Noun")),
    ]
    report = compute_ambiguity_stats(lex, corpus)
    assert report.tokens == 0 and report.skipped == 1


def test_annotated_corpus_loader(tmp_path):
    path = tmp_path / "corpus.tsv"
    path.write_text(
        "# sentence one\n"
        "כלב\tכֶּלֶב\tNoun\tGender=m;Number=s\n"
        "כתב\tכָּתַב\tVerb\tTense=past;Person=3;Gender=m;Number=s\n"
        "\n"
        "ספר\tסֵפֶר\tNoun\tGender=m;Number=s\n",
        encoding="utf-8",
    )
    sentences = load_annotated_corpus(path)
    assert [len(s) for s in sentences] == [2, 1]
    assert sentences[0][0].surface == "כלב"
    assert sentences[0][1].analysis.pos == "Verb"


def test_annotated_corpus_rejects_mismatch(tmp_path):
    path = tmp_path / "corpus.tsv"
    path.write_text("כלב\tסֵפֶר\tNoun\tGender=m;Number=s\n", encoding="utf-8")
    with pytest.raises(LexiconError, match=":1"):
        load_annotated_corpus(path)


# ---------------------------------------------------------------------------
# Quote matching
# ---------------------------------------------------------------------------

VERSES = [
    "בראשית 1:1\tבְּרֵאשִׁית בָּרָא אֱלֹהִים אֵת הַשָּׁמַיִם וְאֵת הָאָרֶץ",
    "בראשית 1:2\tוְהָאָרֶץ הָיְתָה תֹהוּ וָבֹהוּ וְחֹשֶׁךְ עַל פְּנֵי תְהוֹם",
]


def make_index(tmp_path, n=3):
    path = tmp_path / "verses.tsv"
    path.write_text("".join(v + "\n" for v in VERSES), encoding="utf-8")
    return QuoteIndex.from_file(path, n=n)


def test_embedded_fragment_found_with_canonical_marks(tmp_path):
    index = make_index(tmp_path)
    text = "אמר ברא אלהים את השמים ואת אמר"
    tokens = tokenize(text)
    spans = match_biblical_quotes(tokens, index)
    assert len(spans) == 1
    span = spans[0]
    assert len(span) == 5
    assert span.reference == "בראשית 1:1"
    assert [bare_letters(w) for w in span.canonical] == [
        "ברא",
        "אלהים",
        "את",
        "השמים",
        "ואת",
    ]
    assert span.canonical[0] == normalize_text("בָּרָא")
    surfaces = [tokens[i].surface for i in span.token_indices]
    assert surfaces == ["ברא", "אלהים", "את", "השמים", "ואת"]


def test_two_token_overlap_below_threshold(tmp_path):
    index = make_index(tmp_path, n=3)
    spans = match_biblical_quotes(tokenize("ברא אלהים"), index)
    assert spans == []
    spans = match_biblical_quotes(tokenize("אמר ברא אלהים אמר"), index)
    assert spans == []


def test_punctuation_between_quote_words_tolerated(tmp_path):
    index = make_index(tmp_path)
    spans = match_biblical_quotes(tokenize("ברא, אלהים; את"), index)
    assert len(spans) == 1 and len(spans[0]) == 3


def brute_force_spans(bare_words, verses, n):
    spans = []
    i = 0
    while i + n <= len(bare_words):
        best = 0
        for verse in verses:
            for off in range(len(verse)):
                length = 0
                while (
                    i + length < len(bare_words)
                    and off + length < len(verse)
                    and bare_words[i + length] == verse[off + length]
                ):
                    length += 1
                best = max(best, length)
        if best >= n:
            spans.append((i, i + best))
            i += best
        else:
            i += 1
    return spans


def test_planted_fragments_match_brute_force(tmp_path):
    rng = random.Random(99)
    letters = "בגדלמנ"
    verses = []
    for _ in range(12):
        verses.append(
            [
                "".join(rng.choice(letters) for _ in range(rng.randint(2, 4)))
                for _ in range(rng.randint(6, 10))
            ]
        )
    lines = [f"ספר {i}:1\t" + " ".join(words) for i, words in enumerate(verses)]
    path = tmp_path / "verses.tsv"
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    index = QuoteIndex.from_file(path, n=3)

    for trial in range(30):
        words = []
        planted = []
        for _ in range(rng.randint(1, 4)):
            words.extend("קקק" for _ in range(rng.randint(1, 4)))
            verse = rng.choice(verses)
            length = rng.randint(3, min(5, len(verse)))
            start = rng.randint(0, len(verse) - length)
            planted.append((len(words), len(words) + length))
            words.extend(verse[start : start + length])
        words.extend("קקק" for _ in range(rng.randint(1, 4)))
        tokens = tokenize(" ".join(words))
        spans = match_biblical_quotes(tokens, index)

        word_positions = {p: k for k, p in enumerate(i for i, t in enumerate(tokens) if t.kind is TokenKind.WORD)}
        got = [
            (word_positions[s.token_indices[0]], word_positions[s.token_indices[-1]] + 1)
            for s in spans
        ]
        expected = brute_force_spans(words, verses, 3)
        assert got == expected, trial
        # planted fragments are exactly recovered unless brute force says a
        # longer accidental run exists; coverage must include every plant
        for a, b in planted:
            assert any(x <= a and b <= y for x, y in got)
        for (a1, b1), (a2, b2) in zip(got, got[1:]):
            assert b1 <= a2
        assert all(b - a >= 3 for a, b in got)


def test_bible_loader_errors(tmp_path):
    path = tmp_path / "verses.tsv"
    path.write_text("no tab here\n", encoding="utf-8")
    with pytest.raises(LexiconError, match=":1"):
        QuoteIndex.from_file(path)
    path.write_text("ref\t123\n", encoding="utf-8")
    with pytest.raises(LexiconError, match="no Hebrew words"):
        QuoteIndex.from_file(path)
