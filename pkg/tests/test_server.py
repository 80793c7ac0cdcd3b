"""HTTP service tests: endpoint contracts, error shapes, cache behavior."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from nakdan.diacritizer import DiacritizerConfig
from nakdan.lexicon import (
    Lexicon,
    QuoteIndex,
    load_annotated_corpus,
    load_collocations,
    load_lexicon,
    load_wordset,
)
from nakdan.pipeline import Pipeline, train_models
from nakdan.server import create_app
from nakdan.tagger import TaggerConfig
from nakdan.toydata import write_fixtures


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    out = tmp_path_factory.mktemp("toy")
    paths = write_fixtures(out, seed=11, n_train=60, n_heldout=10)
    lexicon = load_lexicon(paths["lexicon"])
    return {
        "lexicon": lexicon,
        "train": load_annotated_corpus(paths["train"]),
        "rules": load_collocations(paths["collocations"]),
        "quotes": QuoteIndex.from_file(paths["verses"]),
        "proper": load_wordset(paths["proper_nouns"]),
    }


def _pipeline(world, lexicon=None) -> Pipeline:
    lex = world["lexicon"] if lexicon is None else lexicon
    tagger, diacritizer, _ = train_models(
        world["train"],
        world["lexicon"],
        world["proper"],
        TaggerConfig(
            char_dim=4,
            char_hidden=4,
            word_dim=6,
            word_hidden=4,
            cat_dim=2,
            tag_dim=3,
            enc_hidden=6,
            fine_hidden=4,
            mlp_hidden=6,
            layers=1,
        ),
        DiacritizerConfig(
            char_dim=4,
            char_hidden=5,
            word_dim=6,
            word_hidden=4,
            label_dim=4,
            hist_hidden=5,
            mlp_hidden=8,
            layers=1,
        ),
        epochs=0,
        seed=3,
    )
    return Pipeline(tagger, diacritizer, lex, world["rules"], world["quotes"])


@pytest.fixture(scope="module")
def client(world):
    app = create_app(
        {"modern": _pipeline(world), "rabbinic": _pipeline(world, Lexicon({}))}
    )
    return TestClient(app)


@pytest.fixture(scope="module")
def client_no_rabbinic(world):
    return TestClient(create_app({"modern": _pipeline(world)}))


def _post_text(client, text, **overrides):
    body = {"text": text, **overrides}
    response = client.post("/api/diacritize", json=body)
    assert response.status_code == 200, response.text
    return response.json()


# ---------------------------------------------------------------------------
# Happy paths
# ---------------------------------------------------------------------------


def test_health_lists_genres(client, client_no_rabbinic):
    body = client.get("/api/health").json()
    assert body["status"] == "ok"
    assert body["genres"] == ["modern", "rabbinic", "poetry"]
    slim = client_no_rabbinic.get("/api/health").json()
    assert slim["genres"] == ["modern", "poetry"]


def test_diacritize_returns_id_and_document(client):
    body = _post_text(client, "על בצל")
    assert isinstance(body["doc_id"], str) and body["doc_id"]
    document = body["document"]
    assert document["format"] == 1
    assert len(document["words"]) == 2
    for word in document["words"]:
        probs = [a["probability"] for a in word["alternatives"]]
        assert probs == sorted(probs, reverse=True)
        assert 0 <= word["selected"] < len(word["alternatives"])


def test_document_ids_are_unique(client):
    a = _post_text(client, "בצל")["doc_id"]
    b = _post_text(client, "בצל")["doc_id"]
    assert a != b


def test_get_document_round_trip(client):
    body = _post_text(client, "כל ספר")
    fetched = client.get(f"/api/doc/{body['doc_id']}")
    assert fetched.status_code == 200
    assert fetched.json() == {"doc_id": body["doc_id"], "document": body["document"]}


def test_select_updates_subsequent_export(client):
    body = _post_text(client, "בית")
    doc_id = body["doc_id"]
    word = body["document"]["words"][0]
    before = client.get(f"/api/doc/{doc_id}/export", params={"format": "plain"}).text
    other = 1 - word["selected"]
    response = client.post(
        f"/api/doc/{doc_id}/select",
        json={"word_index": 0, "alt_index": other},
    )
    assert response.status_code == 200
    payload = response.json()
    assert payload["changed"] == [0]
    assert payload["document"]["words"][0]["selected"] == other
    after = client.get(f"/api/doc/{doc_id}/export", params={"format": "plain"}).text
    assert after != before
    assert word["alternatives"][other]["diac"] in after


def test_select_apply_all_updates_repeated_surface(client):
    body = _post_text(client, "בית ספר בית")
    doc_id = body["doc_id"]
    words = body["document"]["words"]
    other = 1 - words[0]["selected"]
    target = words[0]["alternatives"][other]["diac"]
    response = client.post(
        f"/api/doc/{doc_id}/select",
        json={"word_index": 0, "alt_index": other, "apply_all": True},
    )
    updated = response.json()["document"]["words"]
    for i in (0, 2):
        chosen = updated[i]["alternatives"][updated[i]["selected"]]["diac"]
        assert chosen == target
    assert updated[1]["selected"] == words[1]["selected"]


def test_export_formats(client):
    body = _post_text(client, "אמר: הוא אכל לחם")
    doc_id = body["doc_id"]
    plain = client.get(f"/api/doc/{doc_id}/export", params={"format": "plain"})
    assert plain.status_code == 200
    assert plain.headers["content-type"].startswith("text/plain")
    html = client.get(f"/api/doc/{doc_id}/export", params={"format": "html"})
    assert html.headers["content-type"].startswith("text/html")
    assert 'dir="rtl"' in html.text and 'data-word="0"' in html.text
    structured = client.get(f"/api/doc/{doc_id}/export", params={"format": "structured"})
    assert structured.headers["content-type"].startswith("application/json")
    assert structured.json() == body["document"]
    default = client.get(f"/api/doc/{doc_id}/export")
    assert default.text == plain.text


def test_poetry_skips_morphology_but_stays_constrained(client, world):
    body = _post_text(client, "על בצל", genre="poetry")
    word = body["document"]["words"][1]
    options = {c.diac for c in world["lexicon"].lookup("בצל").candidates}
    assert {a["diac"] for a in word["alternatives"]} == options
    assert word["alternatives"][word["selected"]]["diac"] in options


def test_rabbinic_routes_to_alternate_model(client):
    modern = _post_text(client, "בצל")["document"]["words"][0]
    rabbinic = _post_text(client, "בצל", genre="rabbinic")["document"]["words"][0]
    assert modern["known"] is True
    assert rabbinic["known"] is False  # the rabbinic lexicon is empty


def test_matres_aliases_accepted(client):
    for name in ("keep", "keep-matres", "remove", "remove-matres"):
        body = _post_text(client, "בצל", matres=name)
        assert body["document"]["matres"].endswith("-matres")


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


def test_unknown_document_is_404(client):
    for path in ("/api/doc/nope", "/api/doc/nope/export"):
        response = client.get(path)
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_document"
    response = client.post(
        "/api/doc/nope/select", json={"word_index": 0, "alt_index": 0}
    )
    assert response.status_code == 404


def test_malformed_bodies_are_400_with_reason(client):
    response = client.post("/api/diacritize", json={"text": 5})
    assert response.status_code == 400
    error = response.json()["error"]
    assert error["code"] == "invalid_request"
    assert error["detail"]
    response = client.post("/api/doc/whatever/select", json={"alt_index": 0})
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "invalid_request"


def test_bad_enum_values_are_400(client):
    cases = [
        ({"text": "בצל", "genre": "klingon"}, "unknown_genre"),
        ({"text": "בצל", "matres": "sometimes"}, "unknown_matres"),
        ({"text": "בצל", "beam": 0}, "invalid_beam"),
        ({"text": "בצל", "beam": 10_000}, "invalid_beam"),
    ]
    for body, code in cases:
        response = client.post("/api/diacritize", json=body)
        assert response.status_code == 400
        assert response.json()["error"]["code"] == code


def test_rabbinic_unavailable_is_400(client_no_rabbinic):
    response = client_no_rabbinic.post(
        "/api/diacritize", json={"text": "בצל", "genre": "rabbinic"}
    )
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "genre_unavailable"


def test_invalid_selection_is_400(client):
    doc_id = _post_text(client, "בצל")["doc_id"]
    response = client.post(
        f"/api/doc/{doc_id}/select", json={"word_index": 9, "alt_index": 0}
    )
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "invalid_selection"


def test_unknown_export_format_is_400(client):
    doc_id = _post_text(client, "בצל")["doc_id"]
    response = client.get(f"/api/doc/{doc_id}/export", params={"format": "pdf"})
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "unknown_format"


def test_oversize_text_is_413_with_limit(world):
    app = create_app({"modern": _pipeline(world)}, max_chars=50)
    client = TestClient(app)
    response = client.post("/api/diacritize", json={"text": "א" * 51})
    assert response.status_code == 413
    error = response.json()["error"]
    assert error["code"] == "text_too_long"
    assert error["limit"] == 50 and error["length"] == 51
    ok = client.post("/api/diacritize", json={"text": "א" * 50})
    assert ok.status_code == 200


def test_cache_evicts_least_recently_used(world):
    app = create_app({"modern": _pipeline(world)}, cache_size=2)
    client = TestClient(app)
    first = _post_text(client, "בצל")["doc_id"]
    second = _post_text(client, "ספר")["doc_id"]
    client.get(f"/api/doc/{first}")  # refresh first; second becomes oldest
    third = _post_text(client, "דבר")["doc_id"]
    assert client.get(f"/api/doc/{first}").status_code == 200
    assert client.get(f"/api/doc/{second}").status_code == 404
    assert client.get(f"/api/doc/{third}").status_code == 200


def test_create_app_requires_modern(world):
    with pytest.raises(ValueError):
        create_app({"rabbinic": _pipeline(world)})
