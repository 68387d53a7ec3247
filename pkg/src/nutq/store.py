"""Crash-safe on-disk document store: one JSON file per document.

Four collections (learners, wordlists, sessions, models) live as
subdirectories of the store root.  Every write goes to a temporary file in
the same directory and is published with an atomic rename, so an interrupted
write never corrupts the previously stored document; leftover temporaries
are ignored on read and swept on startup.  Writes are serialized per
collection; reads take no lock (documents are immutable once published).
"""

from __future__ import annotations

import json
import os
import re
import threading
import uuid
from pathlib import Path

__all__ = ["DocumentStore", "SCHEMA_VERSION", "COLLECTIONS", "new_id"]

SCHEMA_VERSION = 1
COLLECTIONS = ("learners", "wordlists", "sessions", "models")

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]{0,63}$")


def new_id() -> str:
    return uuid.uuid4().hex[:12]


def _check_id(doc_id: str) -> str:
    if not _ID_RE.match(doc_id):
        raise ValueError(f"invalid document id {doc_id!r}")
    return doc_id


class DocumentStore:
    """JSON documents keyed by (collection, id) with atomic replace-on-write."""

    def __init__(self, root):
        self.root = Path(root)
        self._locks = {name: threading.Lock() for name in COLLECTIONS}
        for name in COLLECTIONS:
            (self.root / name).mkdir(parents=True, exist_ok=True)
            for stray in (self.root / name).glob("*.tmp-*"):
                stray.unlink()

    def _path(self, collection: str, doc_id: str) -> Path:
        if collection not in COLLECTIONS:
            raise ValueError(f"unknown collection {collection!r}")
        return self.root / collection / f"{_check_id(doc_id)}.json"

    @staticmethod
    def _publish(path: Path, doc: dict) -> dict:
        """Serialize and atomically replace the document file."""
        doc = dict(doc)
        doc["schema_version"] = SCHEMA_VERSION
        payload = json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=1)
        tmp = path.with_name(f"{path.name}.tmp-{uuid.uuid4().hex}")
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
        return doc

    def put(self, collection: str, doc_id: str, doc: dict) -> dict:
        """Write a document atomically, stamping the schema version."""
        path = self._path(collection, doc_id)
        with self._locks[collection]:
            return self._publish(path, doc)

    def load(self, collection: str, doc_id: str):
        """Return the stored document, or None when absent."""
        path = self._path(collection, doc_id)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        return json.loads(text)

    def exists(self, collection: str, doc_id: str) -> bool:
        return self._path(collection, doc_id).exists()

    def list_ids(self, collection: str) -> list[str]:
        if collection not in COLLECTIONS:
            raise ValueError(f"unknown collection {collection!r}")
        return sorted(p.stem for p in (self.root / collection).glob("*.json"))

    def update(self, collection: str, doc_id: str, mutate) -> dict:
        """Read-modify-write one document under the collection lock.

        ``mutate`` receives the current document (never None; missing
        documents raise KeyError) and returns the replacement.
        """
        path = self._path(collection, doc_id)
        with self._locks[collection]:
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise KeyError(f"{collection}/{doc_id}") from None
            return self._publish(path, mutate(doc))
