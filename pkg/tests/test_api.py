"""HTTP service: word lists, sessions, attempt scoring, statistics."""

import io
import wave

import numpy as np
import pytest
from fastapi.testclient import TestClient

from nutq.acoustic import TrainingConfig, TrainingUtterance, train_acoustic_model
from nutq.api import create_app
from nutq.audio import compute_mfcc, encode_wav, load_wav
from nutq.store import DocumentStore

from conftest import attempt_wav, tiny_inventory, tone_samples

# Words whose phonemes all have tone frequencies in conftest.TONE_HZ:
# "fii" (F IY), "bat" (B AE T), and "batta" (B AE T T AE, a geminate).
WORD_FII = "فِي"
WORD_BAT = "بَتْ"
WORD_BATTA = "بَتَّ"
UNCOVERED_WORD = "وَلَدٍ"  # W AE L AE D IH N
BARE_WORD = "كتب"  # no diacritics: unphonetizable


@pytest.fixture(scope="module")
def model():
    rng = np.random.default_rng(7)
    inventory = tiny_inventory(["F", "IY", "B", "AE", "T"])
    corpus = []
    for transcript in (("F", "IY"), ("B", "AE", "T"), ("B", "AE", "T", "T", "AE")):
        for _ in range(6):
            padded = ("SIL", *transcript, "SIL")
            features = compute_mfcc(load_wav(encode_wav(tone_samples(padded, rng))))
            corpus.append(TrainingUtterance(features=features, transcript=padded))
    return train_acoustic_model(corpus, TrainingConfig(iterations=4),
                                inventory=inventory)


@pytest.fixture()
def client(tmp_path, model):
    app = create_app(DocumentStore(tmp_path / "store"), model)
    return TestClient(app)


@pytest.fixture()
def rng():
    return np.random.default_rng(99)


def make_learner(client, learner_id="sami"):
    response = client.post("/learners", json={"learner_id": learner_id,
                                              "name": "Sami"})
    assert response.status_code == 201
    return response.json()


def make_wordlist(client, words=(WORD_FII, WORD_BAT, WORD_BATTA), level="A1"):
    response = client.post("/wordlists", json={"name": "unit one",
                                               "level": level,
                                               "words": list(words)})
    assert response.status_code == 201
    return response.json()


def make_session(client, learner_id="sami", teacher_limit=3, **kwargs):
    make_learner(client, learner_id)
    wordlist = make_wordlist(client, **kwargs)
    response = client.post("/sessions", json={
        "learner_id": learner_id, "wordlist_id": wordlist["wordlist_id"],
        "teacher_limit": teacher_limit})
    assert response.status_code == 201
    return response.json(), wordlist


# -- learners ---------------------------------------------------------------------


def test_create_learner(client):
    doc = make_learner(client)
    assert doc["learner_id"] == "sami"
    assert doc["name"] == "Sami"
    assert doc["schema_version"] == 1


def test_create_learner_generates_id(client):
    response = client.post("/learners", json={})
    assert response.status_code == 201
    assert response.json()["learner_id"]


def test_duplicate_learner_conflicts(client):
    make_learner(client)
    response = client.post("/learners", json={"learner_id": "sami"})
    assert response.status_code == 409


def test_invalid_learner_id_rejected(client):
    response = client.post("/learners", json={"learner_id": "../escape"})
    assert response.status_code == 422


# -- wordlists --------------------------------------------------------------------


def test_create_wordlist_phonetizes_and_labels(client):
    doc = make_wordlist(client)
    assert doc["level"] == "A1"
    words = doc["words"]
    assert [w["word"] for w in words] == [WORD_FII, WORD_BAT, WORD_BATTA]
    fii, bat, batta = words
    assert fii["phonemes"] == ["F", "IY"]
    assert fii["class"] == "US"
    assert bat["phonemes"] == ["B", "AE", "T"]
    assert batta["phonemes"] == ["B", "AE", "T", "T", "AE"]
    assert batta["class"] == "LSVG"
    for word in words:
        assert word["granted"] is True
        assert len(word["spans"]) == len(word["phonemes"])
        for start, end in word["spans"]:
            assert 0 <= start < end <= len(word["word"])


def test_wordlist_with_unphonetizable_words_lists_them(client):
    response = client.post("/wordlists", json={
        "level": "A1", "words": [WORD_FII, BARE_WORD, "xyz"]})
    assert response.status_code == 422
    failed = response.json()["detail"]["unphonetizable"]
    assert [f["word"] for f in failed] == [BARE_WORD, "xyz"]
    assert all(f["error"] for f in failed)


def test_empty_wordlist_rejected(client):
    response = client.post("/wordlists", json={"level": "A1", "words": []})
    assert response.status_code == 422


def test_bad_level_rejected(client):
    response = client.post("/wordlists", json={"level": "C2",
                                               "words": [WORD_FII]})
    assert response.status_code == 422


def test_get_wordlist_roundtrip_and_404(client):
    doc = make_wordlist(client)
    fetched = client.get(f"/wordlists/{doc['wordlist_id']}")
    assert fetched.status_code == 200
    assert fetched.json() == doc
    assert client.get("/wordlists/nope").status_code == 404


def test_patch_grants(client):
    doc = make_wordlist(client)
    wid = doc["wordlist_id"]
    patched = client.patch(f"/wordlists/{wid}",
                           json={"grants": [{"index": 1, "granted": False}]})
    assert patched.status_code == 200
    assert [w["granted"] for w in patched.json()["words"]] == [True, False, True]

    out_of_range = client.patch(f"/wordlists/{wid}",
                                json={"grants": [{"index": 7, "granted": True}]})
    assert out_of_range.status_code == 422
    assert client.patch("/wordlists/nope", json={"grants": []}).status_code == 404


# -- sessions ---------------------------------------------------------------------


def test_create_session(client):
    session, wordlist = make_session(client)
    assert session["cursor"] == 0
    assert session["word_count"] == 3
    assert session["complete"] is False
    assert session["current_word"]["word"] == WORD_FII
    assert session["current_word"]["word_index"] == 0
    assert session["attempts"] == []
    fetched = client.get(f"/sessions/{session['session_id']}")
    assert fetched.status_code == 200
    assert fetched.json() == session


def test_session_requires_known_learner_and_wordlist(client):
    make_learner(client)
    wordlist = make_wordlist(client)
    assert client.post("/sessions", json={
        "learner_id": "ghost",
        "wordlist_id": wordlist["wordlist_id"]}).status_code == 404
    assert client.post("/sessions", json={
        "learner_id": "sami", "wordlist_id": "ghost"}).status_code == 404


def test_session_covers_only_granted_words(client):
    make_learner(client)
    wordlist = make_wordlist(client)
    wid = wordlist["wordlist_id"]
    client.patch(f"/wordlists/{wid}",
                 json={"grants": [{"index": 0, "granted": False}]})
    response = client.post("/sessions", json={"learner_id": "sami",
                                              "wordlist_id": wid})
    session = response.json()
    assert session["word_count"] == 2
    assert session["current_word"]["word"] == WORD_BAT
    assert session["current_word"]["word_index"] == 1


def test_session_with_nothing_granted_is_born_complete(client, rng):
    make_learner(client)
    wordlist = make_wordlist(client)
    wid = wordlist["wordlist_id"]
    client.patch(f"/wordlists/{wid}", json={"grants": [
        {"index": i, "granted": False} for i in range(3)]})
    session = client.post("/sessions", json={"learner_id": "sami",
                                             "wordlist_id": wid}).json()
    assert session["complete"] is True
    assert session["current_word"] is None
    sid = session["session_id"]
    assert client.post(f"/sessions/{sid}/advance").status_code == 409
    posted = client.post(f"/sessions/{sid}/attempts",
                         content=attempt_wav(("F", "IY"), rng))
    assert posted.status_code == 409


def test_advance_walks_the_wordlist_then_conflicts(client):
    session, _ = make_session(client)
    sid = session["session_id"]
    second = client.post(f"/sessions/{sid}/advance").json()
    assert second["cursor"] == 1
    assert second["current_word"]["word"] == WORD_BAT
    client.post(f"/sessions/{sid}/advance")
    final = client.post(f"/sessions/{sid}/advance").json()
    assert final["complete"] is True
    assert final["current_word"] is None
    assert client.post(f"/sessions/{sid}/advance").status_code == 409
    assert client.post("/sessions/nope/advance").status_code == 404


# -- attempts ---------------------------------------------------------------------


def test_attempt_happy_path(client, rng):
    session, wordlist = make_session(client)
    sid = session["session_id"]
    response = client.post(f"/sessions/{sid}/attempts",
                           content=attempt_wav(("F", "IY"), rng))
    assert response.status_code == 200
    body = response.json()
    assert body["word"] == WORD_FII
    assert body["word_index"] == 0
    assert body["verdict"] == "Accepted"
    assert body["next_action"] == "Advance"
    assert body["repeats_so_far"] == 0
    assert body["faulty_indices"] == []
    assert [p["phoneme"] for p in body["per_phoneme"]] == ["F", "IY"]
    assert [p["span"] for p in body["per_phoneme"]] == \
        wordlist["words"][0]["spans"]
    assert not any(p["flagged"] for p in body["per_phoneme"])

    alignment = body["alignment"]
    assert [s["phoneme"] for s in alignment["segments"]] == \
        ["SIL", "F", "IY", "SIL"]
    assert alignment["segments"][0]["start_frame"] == 0
    assert alignment["segments"][-1]["end_frame"] == alignment["frame_count"] - 1

    stored = client.get(f"/sessions/{sid}").json()
    assert len(stored["attempts"]) == 1
    assert stored["attempts"][0]["verdict"] == "Accepted"
    assert stored["cursor"] == 0  # scoring never advances by itself


def test_attempt_with_wrong_word_audio_is_not_accepted(client, rng):
    session, _ = make_session(client)
    sid = session["session_id"]
    response = client.post(f"/sessions/{sid}/attempts",
                           content=attempt_wav(("B", "AE", "T"), rng))
    assert response.status_code == 200
    body = response.json()
    assert body["verdict"] in ("Faulty", "Rejected")
    assert body["next_action"] in ("RepeatRequired", "OfferRepeat")


def test_attempt_repeats_count_up_and_hit_the_teacher_limit(client, rng):
    session, _ = make_session(client, teacher_limit=1)
    sid = session["session_id"]
    wrong = lambda: attempt_wav(("B", "AE", "T"), rng)
    first = client.post(f"/sessions/{sid}/attempts", content=wrong()).json()
    assert first["repeats_so_far"] == 0
    assert first["next_action"] == "RepeatRequired"
    second = client.post(f"/sessions/{sid}/attempts", content=wrong()).json()
    assert second["repeats_so_far"] == 1
    assert second["next_action"] == "OfferRepeat"


def test_attempt_idempotency_key_replays_without_new_record(client, rng):
    session, _ = make_session(client)
    sid = session["session_id"]
    payload = attempt_wav(("F", "IY"), rng)
    headers = {"Idempotency-Key": "abc-123"}
    first = client.post(f"/sessions/{sid}/attempts", content=payload,
                        headers=headers)
    replay = client.post(f"/sessions/{sid}/attempts", content=payload,
                         headers=headers)
    assert replay.status_code == 200
    assert replay.json() == first.json()
    assert len(client.get(f"/sessions/{sid}").json()["attempts"]) == 1

    fresh = client.post(f"/sessions/{sid}/attempts", content=payload,
                        headers={"Idempotency-Key": "other"})
    assert fresh.status_code == 200
    assert len(client.get(f"/sessions/{sid}").json()["attempts"]) == 2


def test_attempt_bad_audio_is_a_400(client, rng):
    session, _ = make_session(client)
    sid = session["session_id"]

    eight_k = encode_wav(tone_samples(("F",), rng), sample_rate_hz=8000)
    response = client.post(f"/sessions/{sid}/attempts", content=eight_k)
    assert response.status_code == 400
    assert "UnsupportedFormat" in response.json()["detail"]

    stereo = io.BytesIO()
    with wave.open(stereo, "wb") as writer:
        writer.setnchannels(2)
        writer.setsampwidth(2)
        writer.setframerate(16000)
        writer.writeframes(b"\x00\x00" * 6400)
    response = client.post(f"/sessions/{sid}/attempts",
                           content=stereo.getvalue())
    assert response.status_code == 400
    assert "UnsupportedFormat" in response.json()["detail"]

    response = client.post(f"/sessions/{sid}/attempts", content=b"not a wav")
    assert response.status_code == 400
    assert "MalformedWav" in response.json()["detail"]


def test_attempt_on_unknown_session_is_404(client, rng):
    response = client.post("/sessions/nope/attempts",
                           content=attempt_wav(("F", "IY"), rng))
    assert response.status_code == 404


def test_attempt_on_word_outside_the_model_is_422(client, rng):
    session, _ = make_session(client, words=(UNCOVERED_WORD,))
    sid = session["session_id"]
    response = client.post(f"/sessions/{sid}/attempts",
                           content=attempt_wav(("F", "IY"), rng))
    assert response.status_code == 422
    assert "not covered" in response.json()["detail"]


# -- statistics -------------------------------------------------------------------


def test_stats_unknown_learner_404(client):
    assert client.get("/learners/ghost/stats").status_code == 404


def test_stats_empty(client):
    make_learner(client)
    body = client.get("/learners/sami/stats").json()
    assert body == {"learner_id": "sami", "classes": [], "levels": []}


def test_stats_aggregates_by_class_and_level(client, rng):
    session, _ = make_session(client)
    sid = session["session_id"]
    client.post(f"/sessions/{sid}/attempts",
                content=attempt_wav(("F", "IY"), rng))          # accepted US
    client.post(f"/sessions/{sid}/attempts",
                content=attempt_wav(("B", "AE", "T"), rng))     # not accepted
    client.post(f"/sessions/{sid}/advance")
    client.post(f"/sessions/{sid}/advance")
    client.post(f"/sessions/{sid}/attempts",
                content=attempt_wav(("B", "AE", "T", "T", "AE"), rng))

    body = client.get("/learners/sami/stats").json()
    by_class = {row["class"]: row for row in body["classes"]}
    assert set(by_class) == {"US", "LSVG"}
    assert by_class["US"]["attempts"] == 2
    assert by_class["US"]["accepted"] == 1
    assert by_class["US"]["success_rate"] == pytest.approx(50.0)
    assert by_class["LSVG"]["attempts"] == 1

    assert len(body["levels"]) == 1
    level_row = body["levels"][0]
    assert level_row["level"] == "A1"
    assert level_row["attempts"] == 3
    total_accepted = sum(row["accepted"] for row in body["classes"])
    assert level_row["accepted"] == total_accepted
