"""Morphological tagger: features, constrained prediction, fine properties."""

import numpy as np
import pytest

from nakdan.lexicon import POS_TAGS, MorphAnalysis, load_lexicon
from nakdan.nn import NNError, load_params, save_params
from nakdan.tagger import (
    NONE_VALUE,
    TagPrediction,
    Tagger,
    TaggerConfig,
    load_word_vectors,
)

ROWS = [
    "ספר\tסֵפֶר\tNoun\tGender=m;Number=s;State=abs\t9",
    "ספר\tסָפַר\tVerb\tTense=past;Person=3;Gender=m;Number=s\t4",
    "בצל\tבָּצָל\tNoun\tGender=m;Number=s;State=abs\t12",
    "בצל\tבְּצֵל\tNoun\tGender=m;Number=s;State=cons\t5",
    "מרקחת\tמִרְקַחַת\tNoun\tGender=f;Number=s;State=abs\t2",
    "כלב\tכֶּלֶב\tNoun\tGender=m;Number=s;State=abs\t7",
    "על\tעַל\tPrep\t-\t30",
]

TINY = dict(
    char_dim=6,
    char_hidden=5,
    word_dim=6,
    word_hidden=5,
    cat_dim=3,
    tag_dim=4,
    enc_hidden=6,
    fine_hidden=5,
    mlp_hidden=6,
    layers=2,
)


@pytest.fixture(scope="module")
def lexicon(tmp_path_factory):
    path = tmp_path_factory.mktemp("lex") / "lex.tsv"
    path.write_text("".join(r + "\n" for r in ROWS), encoding="utf-8")
    return load_lexicon(path)


@pytest.fixture(scope="module")
def tagger(lexicon):
    config = TaggerConfig(**TINY, words=["כלב", "ספר", "בצל", "מרקחת", "על"])
    return Tagger(lexicon, proper_nouns=frozenset({"דוד"}), config=config, seed=3)


def test_out_of_lexicon_word_zero_analysis_component(tagger):
    encoding = tagger.encode_coarse(["כלב", "סרדינות"])
    slices = tagger.config.feature_slices()
    unknown = encoding.features[1]
    known = encoding.features[0]
    assert np.all(unknown[slices["analyses"]] == 0.0)
    assert np.any(known[slices["analyses"]] != 0.0)
    assert unknown[slices["bits"]][1] == 0.0
    assert known[slices["bits"]][1] == 1.0


def test_proper_noun_bit(tagger):
    encoding = tagger.encode_coarse(["דוד", "כלב"])
    slices = tagger.config.feature_slices()
    assert encoding.features[0][slices["bits"]][0] == 1.0
    assert encoding.features[1][slices["bits"]][0] == 0.0


def test_one_token_sentence(tagger):
    encoding = tagger.encode_coarse(["בצל"])
    assert encoding.features.shape == (1, tagger.config.coarse_input_dim)
    preds = tagger.predict_pos(encoding)
    assert len(preds) == 1
    assert preds[0].pos == "Noun"  # only tag in the lexicon for this form


def test_char_perturbation_in_word_two_changes_word_one_features(tagger):
    # both spellings are out of the lexicon and word vocabulary, so only
    # the sentence-wide character encoder can tell the sentences apart
    a = tagger.encode_coarse(["כלב", "סרדינות"])
    b = tagger.encode_coarse(["כלב", "סרדינוט"])
    slices = tagger.config.feature_slices()
    assert not np.allclose(a.features[0][slices["chars"]], b.features[0][slices["chars"]])
    assert np.array_equal(a.features[0][slices["word"]], b.features[0][slices["word"]])


def test_forced_choice_single_allowed_tag(tagger):
    encoding = tagger.encode_coarse(["מרקחת"])
    for tag in ("Interj", "Titular"):
        preds = tagger.predict_pos(encoding, allowed=[frozenset({tag})])
        assert preds[0].pos == tag


def test_unknown_word_allows_all_tags(tagger, lexicon):
    assert tagger.allowed_tags(lexicon.lookup("סרדינות")) == frozenset(POS_TAGS)
    assert tagger.allowed_tags(lexicon.lookup("ספר")) == frozenset({"Noun", "Verb"})


def test_restricted_argmax_equals_brute_force(tagger):
    rng = np.random.default_rng(17)
    surfaces = ["ספר", "סרדינות", "בצל", "על"]
    encoding = tagger.encode_coarse(surfaces)
    for _ in range(25):
        allowed = [
            frozenset(rng.choice(POS_TAGS, size=rng.integers(1, 8), replace=False))
            for _ in surfaces
        ]
        preds = tagger.predict_pos(encoding, allowed=allowed)
        for pred, tags in zip(preds, allowed):
            dist = pred.pos_distribution
            assert abs(dist.sum() - 1.0) < 1e-9
            brute = max(
                sorted(tags), key=lambda t: (dist[POS_TAGS.index(t)], -POS_TAGS.index(t))
            )
            assert pred.pos == brute
            assert pred.pos in tags


def test_constrained_equals_unconstrained_when_winner_allowed(tagger):
    encoding = tagger.encode_coarse(["ספר", "בצל"])
    free = tagger.predict_pos(encoding, allowed=[frozenset(POS_TAGS)] * 2)
    rng = np.random.default_rng(23)
    for _ in range(10):
        allowed = []
        for pred in free:
            extra = set(rng.choice(POS_TAGS, size=3, replace=False))
            extra.add(pred.pos)
            allowed.append(frozenset(extra))
        constrained = tagger.predict_pos(encoding, allowed=allowed)
        assert [p.pos for p in constrained] == [p.pos for p in free]


def test_verb_properties_licensed_state_absent(tagger):
    encoding = tagger.encode_coarse(["ספר"])
    coarse = [TagPrediction("Verb", np.zeros(len(POS_TAGS)))]
    full = tagger.predict_morph(encoding, coarse)[0]
    assert set(full.properties) == {
        "Tense",
        "Person",
        "Gender",
        "Number",
        "SuffixType",
        "SuffixGender",
        "SuffixNumber",
        "SuffixPerson",
    }
    assert "State" not in full.properties
    for value, dist in full.properties.values():
        assert abs(dist.sum() - 1.0) < 1e-9


def test_prep_has_empty_property_map(tagger):
    encoding = tagger.encode_coarse(["על"])
    coarse = [TagPrediction("Prep", np.zeros(len(POS_TAGS)))]
    full = tagger.predict_morph(encoding, coarse)[0]
    assert full.properties == {}
    assert full.analysis() == MorphAnalysis.make("Prep")


def test_fine_values_restricted_to_lexicon_for_known_words(tagger):
    encoding = tagger.encode_coarse(["מרקחת"])
    coarse = [TagPrediction("Noun", np.zeros(len(POS_TAGS)))]
    full = tagger.predict_morph(encoding, coarse)[0]
    assert full.properties["Gender"][0] == "f"
    assert full.properties["Number"][0] == "s"
    assert full.properties["State"][0] == "abs"
    assert full.properties["SuffixType"][0] == NONE_VALUE


def test_fine_features_blind_to_characters(tagger):
    # two unknown spellings differing in one character: identical
    # analysis sets by construction, so fine predictions must be identical
    coarse = [
        TagPrediction("Noun", np.zeros(len(POS_TAGS))),
        TagPrediction("Noun", np.zeros(len(POS_TAGS))),
    ]
    a = tagger.predict_morph(tagger.encode_coarse(["כלב", "סרדינות"]), coarse)
    b = tagger.predict_morph(tagger.encode_coarse(["כלב", "סרדינוט"]), coarse)
    for key in a[1].properties:
        assert np.array_equal(a[1].properties[key][1], b[1].properties[key][1])


def test_tag_sentence_end_to_end(tagger):
    preds = tagger.tag_sentence(["בצל", "על", "סרדינות"])
    assert preds[0].pos == "Noun"
    assert preds[1].pos == "Prep"
    for pred in preds:
        analysis = pred.analysis()  # must satisfy the schema
        assert analysis.pos == pred.pos


def test_prediction_deterministic(tagger):
    first = tagger.tag_sentence(["ספר", "בצל"])
    second = tagger.tag_sentence(["ספר", "בצל"])
    assert [p.pos for p in first] == [p.pos for p in second]
    for x, y in zip(first, second):
        assert np.array_equal(x.pos_distribution, y.pos_distribution)


def test_training_reduces_loss(lexicon):
    config = TaggerConfig(**TINY, words=["ספר", "כלב", "על"])
    tagger = Tagger(lexicon, config=config, seed=1)
    sentences = [
        (["כלב", "ספר"], [MorphAnalysis.make("Noun", Gender="m", Number="s", State="abs"),
                           MorphAnalysis.make("Verb", Tense="past", Person="3", Gender="m", Number="s")]),
        (["על", "ספר"], [MorphAnalysis.make("Prep"),
                          MorphAnalysis.make("Noun", Gender="m", Number="s", State="abs")]),
    ]

    def epoch():
        total = 0.0
        for surfaces, gold in sentences:
            from nakdan.nn import sgd_step

            total += sgd_step(tagger.bank, lambda: tagger.train_loss(surfaces, gold), lr=0.5)
        return total

    losses = [epoch() for _ in range(30)]
    assert losses[-1] < losses[0] * 0.5


def test_weights_round_trip_through_file(tagger, lexicon):
    blob = save_params(tagger.bank)
    clone = Tagger.with_bank(lexicon, tagger.proper_nouns, tagger.config, load_params(blob))
    a = tagger.tag_sentence(["ספר", "בצל"])
    b = clone.tag_sentence(["ספר", "בצל"])
    assert [p.pos for p in a] == [p.pos for p in b]
    for x, y in zip(a, b):
        assert np.array_equal(x.pos_distribution, y.pos_distribution)


def test_with_bank_rejects_mismatched_config(tagger, lexicon):
    other = TaggerConfig(**TINY, words=["לא", "כן"])
    blob = load_params(save_params(tagger.bank))
    with pytest.raises(NNError):
        Tagger.with_bank(lexicon, frozenset(), other, blob)


def test_word_vectors_substitute_rows(lexicon, tmp_path):
    path = tmp_path / "vecs.txt"
    vec = " ".join(["0.25"] * TINY["word_dim"])
    path.write_text(f"כלב {vec}\n", encoding="utf-8")
    vectors = load_word_vectors(path)
    config = TaggerConfig(**TINY, words=["כלב", "ספר"])
    tagger = Tagger(lexicon, config=config, seed=0, word_vectors=vectors)
    row = tagger.bank["tag.word_emb"][tagger.word_index["כלב"]]
    assert np.allclose(row, 0.25)


def test_empty_sentence_rejected(tagger):
    with pytest.raises(NNError, match="empty"):
        tagger.encode_coarse([])
