"""HTTP/JSON service: word lists, practice sessions, attempts, statistics.

The app wraps one immutable acoustic model and a document store.  Teachers
create word lists (each word phonetized and class-labeled for review, with
grapheme spans so the UI can highlight letters) and grant words into use;
learners open sessions over the granted words and upload complete WAV
recordings per attempt.  Every attempt is scored, persisted, and answered
with the verdict, per-phoneme z-scores, the alignment, and what to do next.
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .audio import compute_mfcc, load_wav
from .decoder import forced_align
from .errors import (
    AudioTooShort,
    MalformedWav,
    NoValidPath,
    UnknownPhoneme,
    UnsupportedFormat,
    UnvocalizedConsonant,
    UnknownCharacter,
)
from .feedback import (
    LEVELS,
    PhonemeClass,
    WordItem,
    aggregate_stats,
    classify_word,
    evaluate_attempt,
    feedback_from_dict,
    next_action,
)
from .lexicon import phonetize_with_spans
from .store import DocumentStore, new_id

__all__ = ["create_app"]


class LearnerCreate(BaseModel):
    learner_id: str | None = None
    name: str = ""


class WordlistCreate(BaseModel):
    name: str = ""
    level: str
    words: list[str]


class GrantItem(BaseModel):
    index: int
    granted: bool


class WordlistPatch(BaseModel):
    grants: list[GrantItem]


class SessionCreate(BaseModel):
    learner_id: str
    wordlist_id: str
    teacher_limit: int = 3


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _word_entry(word: str, level: str) -> dict:
    spans = phonetize_with_spans(word)
    phonemes = tuple(symbol for symbol, _, _ in spans)
    return {
        "word": word,
        "level": level,
        "phonemes": list(phonemes),
        "class": classify_word(phonemes, word).value,
        "spans": [[start, end] for _, start, end in spans],
        "granted": True,
    }


def _session_view(session: dict, wordlist: dict) -> dict:
    indices = session["word_indices"]
    cursor = session["cursor"]
    complete = cursor >= len(indices)
    current = None
    if not complete:
        word_index = indices[cursor]
        current = dict(wordlist["words"][word_index], word_index=word_index)
    return {
        "session_id": session["session_id"],
        "learner_id": session["learner_id"],
        "wordlist_id": session["wordlist_id"],
        "teacher_limit": session["teacher_limit"],
        "cursor": cursor,
        "word_count": len(indices),
        "complete": complete,
        "current_word": current,
        "attempts": [
            {"word_index": a["word_index"], "word": a["word"],
             "verdict": a["response"]["verdict"], "timestamp": a["timestamp"]}
            for a in session["attempts"]
        ],
    }


def create_app(store: DocumentStore, model) -> FastAPI:
    app = FastAPI(title="nutq", version="1")

    def _get_or_404(collection: str, doc_id: str, what: str) -> dict:
        try:
            doc = store.load(collection, doc_id)
        except ValueError:
            doc = None
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown {what} {doc_id!r}")
        return doc

    @app.post("/learners", status_code=201)
    def create_learner(body: LearnerCreate):
        learner_id = body.learner_id or new_id()
        try:
            if store.exists("learners", learner_id):
                raise HTTPException(status_code=409,
                                    detail=f"learner {learner_id!r} already exists")
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        doc = store.put("learners", learner_id,
                        {"learner_id": learner_id, "name": body.name,
                         "created_at": _now()})
        return doc

    @app.post("/wordlists", status_code=201)
    def create_wordlist(body: WordlistCreate):
        if body.level not in LEVELS:
            raise HTTPException(status_code=422,
                                detail=f"level must be one of {list(LEVELS)}")
        if not body.words:
            raise HTTPException(status_code=422, detail="word list is empty")
        entries, failures = [], []
        for word in body.words:
            try:
                entries.append(_word_entry(word, body.level))
            except (UnvocalizedConsonant, UnknownCharacter) as exc:
                failures.append({"word": word, "error": str(exc)})
        if failures:
            raise HTTPException(status_code=422,
                                detail={"unphonetizable": failures})
        wordlist_id = new_id()
        doc = store.put("wordlists", wordlist_id, {
            "wordlist_id": wordlist_id, "name": body.name, "level": body.level,
            "words": entries, "created_at": _now()})
        return doc

    @app.get("/wordlists/{wordlist_id}")
    def get_wordlist(wordlist_id: str):
        return _get_or_404("wordlists", wordlist_id, "wordlist")

    @app.patch("/wordlists/{wordlist_id}")
    def patch_wordlist(wordlist_id: str, body: WordlistPatch):
        doc = _get_or_404("wordlists", wordlist_id, "wordlist")
        bad = [g.index for g in body.grants
               if not 0 <= g.index < len(doc["words"])]
        if bad:
            raise HTTPException(status_code=422,
                                detail=f"word indices out of range: {bad}")

        def mutate(current):
            for grant in body.grants:
                current["words"][grant.index]["granted"] = grant.granted
            return current

        return store.update("wordlists", wordlist_id, mutate)

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        if body.teacher_limit < 0:
            raise HTTPException(status_code=422,
                                detail="teacher_limit must be non-negative")
        _get_or_404("learners", body.learner_id, "learner")
        wordlist = _get_or_404("wordlists", body.wordlist_id, "wordlist")
        indices = [i for i, w in enumerate(wordlist["words"]) if w["granted"]]
        session_id = new_id()
        doc = store.put("sessions", session_id, {
            "session_id": session_id, "learner_id": body.learner_id,
            "wordlist_id": body.wordlist_id, "teacher_limit": body.teacher_limit,
            "word_indices": indices, "cursor": 0, "attempts": [],
            "created_at": _now()})
        return _session_view(doc, wordlist)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _get_or_404("sessions", session_id, "session")
        wordlist = _get_or_404("wordlists", session["wordlist_id"], "wordlist")
        return _session_view(session, wordlist)

    @app.post("/sessions/{session_id}/advance")
    def advance_session(session_id: str, request: Request):
        _get_or_404("sessions", session_id, "session")

        def mutate(doc):
            if doc["cursor"] >= len(doc["word_indices"]):
                raise HTTPException(status_code=409, detail="session complete")
            doc["cursor"] += 1
            return doc

        session = store.update("sessions", session_id, mutate)
        wordlist = _get_or_404("wordlists", session["wordlist_id"], "wordlist")
        return _session_view(session, wordlist)

    @app.post("/sessions/{session_id}/attempts")
    async def submit_attempt(session_id: str, request: Request):
        session = _get_or_404("sessions", session_id, "session")
        key = request.headers.get("Idempotency-Key")
        if key:
            for attempt in session["attempts"]:
                if attempt.get("idempotency_key") == key:
                    return JSONResponse(attempt["response"])
        indices = session["word_indices"]
        cursor = session["cursor"]
        if cursor >= len(indices):
            raise HTTPException(status_code=409, detail="session complete")
        wordlist = _get_or_404("wordlists", session["wordlist_id"], "wordlist")
        word_index = indices[cursor]
        entry = wordlist["words"][word_index]
        item = WordItem(word=entry["word"], level=entry["level"],
                        phoneme_class=PhonemeClass(entry["class"]),
                        phonemes=tuple(entry["phonemes"]))

        body = await request.body()
        try:
            buffer = load_wav(body)
            features = compute_mfcc(buffer, model.frame_params)
        except (MalformedWav, UnsupportedFormat, AudioTooShort) as exc:
            raise HTTPException(status_code=400,
                                detail=f"{type(exc).__name__}: {exc}")
        try:
            feedback = evaluate_attempt(features, item, model)
            alignment = None
            try:
                alignment = forced_align(features, item.phonemes, model)
            except NoValidPath:
                pass
        except UnknownPhoneme as exc:
            raise HTTPException(status_code=422,
                                detail=f"word not covered by the model: {exc}")

        repeats_prior = sum(a["word_index"] == word_index
                            for a in session["attempts"])
        action = next_action(feedback, repeats_prior, session["teacher_limit"])
        response = {
            "session_id": session_id,
            "word_index": word_index,
            "word": entry["word"],
            "level": entry["level"],
            "class": entry["class"],
            "verdict": feedback.verdict,
            "message": feedback.message,
            "per_phoneme": [
                {"phoneme": score.phoneme,
                 "normalized_score": score.normalized_score,
                 "flagged": score.flagged,
                 "span": entry["spans"][i]}
                for i, score in enumerate(feedback.per_phoneme)],
            "faulty_indices": list(feedback.faulty_indices),
            "next_action": action,
            "repeats_so_far": repeats_prior,
            "alignment": None if alignment is None else {
                "segments": [
                    {"phoneme": s.phoneme, "start_frame": s.start_frame,
                     "end_frame": s.end_frame, "log_score": s.log_score}
                    for s in alignment.segments],
                "total_log_score": alignment.total_log_score,
                "frame_count": alignment.frame_count,
                "bridge_log_score": alignment.bridge_log_score,
            },
        }
        record = {"word_index": word_index, "word": entry["word"],
                  "level": entry["level"], "class": entry["class"],
                  "timestamp": _now(), "idempotency_key": key,
                  "response": response}

        duplicate = {}

        def mutate(doc):
            if key:
                for attempt in doc["attempts"]:
                    if attempt.get("idempotency_key") == key:
                        duplicate["response"] = attempt["response"]
                        return doc
            doc["attempts"] = doc["attempts"] + [record]
            return doc

        store.update("sessions", session_id, mutate)
        return JSONResponse(duplicate.get("response", response))

    @app.get("/learners/{learner_id}/stats")
    def learner_stats(learner_id: str):
        _get_or_404("learners", learner_id, "learner")
        history = []
        per_level: dict[str, list] = {}
        for session_id in store.list_ids("sessions"):
            session = store.load("sessions", session_id)
            if session is None or session["learner_id"] != learner_id:
                continue
            for attempt in session["attempts"]:
                item = WordItem.from_word(attempt["word"], attempt["level"])
                feedback = feedback_from_dict(attempt["response"])
                history.append((learner_id, item, feedback))
                bucket = per_level.setdefault(attempt["level"], [0, 0])
                bucket[0] += 1
                bucket[1] += feedback.verdict == "Accepted"
        rows = aggregate_stats(history)
        return {
            "learner_id": learner_id,
            "classes": [row.to_dict() for row in rows],
            "levels": [
                {"level": level, "attempts": attempts, "accepted": accepted,
                 "success_rate": 100.0 * accepted / attempts}
                for level, (attempts, accepted) in sorted(per_level.items())],
        }

    return app
