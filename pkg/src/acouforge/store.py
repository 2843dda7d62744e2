"""Content-addressed text document store.

One file per document, named by the first 16 hex digits of the SHA-256 of
its content. Identical content therefore maps to the same id, and a reload
can detect files whose bytes no longer match their name. Writes go through
a temp file plus rename so an interrupted process never leaves a partial
document under a valid id.
"""

import hashlib
import logging
import os
import threading

from .errors import StoreUnavailable

log = logging.getLogger(__name__)

ID_HEX_DIGITS = 16
_SUFFIX = ".json"


def content_id(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:ID_HEX_DIGITS]


def is_valid_id(doc_id: str) -> bool:
    return (len(doc_id) == ID_HEX_DIGITS
            and all(c in "0123456789abcdef" for c in doc_id))


class DocumentStore:
    """Immutable text documents under one directory; single writer."""

    def __init__(self, root: str):
        self.root = root
        try:
            os.makedirs(root, exist_ok=True)
            probe = os.path.join(root, ".write-probe")
            with open(probe, "w", encoding="utf-8") as fh:
                fh.write("")
            os.remove(probe)
        except OSError as exc:
            raise StoreUnavailable(f"store directory {root!r} is not "
                                   f"writable: {exc}") from None
        self._write_lock = threading.Lock()

    def _path(self, doc_id: str) -> str:
        return os.path.join(self.root, doc_id + _SUFFIX)

    def put(self, text: str) -> str:
        """Store the document and return its content id (idempotent)."""
        doc_id = content_id(text)
        path = self._path(doc_id)
        with self._write_lock:
            if not os.path.exists(path):
                temp = path + ".tmp"
                with open(temp, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
                os.replace(temp, path)
        return doc_id

    def get(self, doc_id: str):
        """The stored text, or None when absent or corrupt (logged)."""
        if not is_valid_id(doc_id):
            return None
        try:
            with open(self._path(doc_id), "r", encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError:
            return None
        if content_id(text) != doc_id:
            log.warning("store document %s does not match its content "
                        "hash; skipping", doc_id)
            return None
        return text

    def __contains__(self, doc_id: str) -> bool:
        return self.get(doc_id) is not None

    def ids(self) -> list:
        """Ids of the intact documents on disk, sorted."""
        found = []
        for entry in sorted(os.listdir(self.root)):
            if not entry.endswith(_SUFFIX):
                continue
            doc_id = entry[:-len(_SUFFIX)]
            if not is_valid_id(doc_id):
                continue
            if self.get(doc_id) is not None:
                found.append(doc_id)
        return found
