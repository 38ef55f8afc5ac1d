"""Layout records with optimistic concurrency and durable persistence.

Every record carries a monotonically increasing revision; a mutation
either fully applies (revision + 1, persisted to disk) or fully rejects
with the in-memory and on-disk state unchanged. Persistence is one JSON
file per record written via temp file + atomic rename, so a crash at any
point leaves either the old file or the new file, never a torn one.
Corrupt files found at startup are skipped with a warning; the rest load.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    InvalidArgumentError,
    NotFoundError,
    ParseError,
    StaleRevisionError,
)
from .geometry import DEFAULT_MAX_BLOBS, BlobLayout, edit_layout
from .layout_text import layout_doc, layout_from_doc

logger = logging.getLogger(__name__)

_ID_ALPHABET = set("0123456789abcdef")


def new_record_id() -> str:
    return uuid.uuid4().hex


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


@dataclass(frozen=True)
class LayoutRecord:
    id: str
    layout: BlobLayout
    created_at: str
    updated_at: str
    revision: int

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "revision": self.revision,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "layout": layout_doc(self.layout),
        }


def record_from_doc(doc) -> LayoutRecord:
    if not isinstance(doc, dict):
        raise ParseError("expected object at top level")
    for key in ("id", "revision", "created_at", "updated_at", "layout"):
        if key not in doc:
            raise ParseError(f"missing field: {key}")
    if not isinstance(doc["id"], str) or not doc["id"]:
        raise ParseError("id: expected non-empty string")
    if isinstance(doc["revision"], bool) or not isinstance(doc["revision"], int):
        raise ParseError("revision: expected integer")
    if doc["revision"] < 1:
        raise ParseError("revision: expected >= 1")
    for key in ("created_at", "updated_at"):
        if not isinstance(doc[key], str):
            raise ParseError(f"{key}: expected string")
    return LayoutRecord(
        id=doc["id"],
        layout=layout_from_doc(doc["layout"]),
        created_at=doc["created_at"],
        updated_at=doc["updated_at"],
        revision=doc["revision"],
    )


class LayoutStore:
    """Thread-safe record map, optionally mirrored to a directory.

    With ``data_dir=None`` the store is memory-only (tests, ephemeral
    use). With a directory, every successful mutation is persisted
    before it becomes visible, so an exception during the write leaves
    the previous state fully intact.
    """

    def __init__(self, data_dir: str | Path | None = None):
        self._lock = threading.Lock()
        self._records: dict[str, LayoutRecord] = {}
        self._data_dir: Path | None = None
        if data_dir is not None:
            self._data_dir = Path(data_dir)
            self._open_data_dir()

    def _open_data_dir(self):
        directory = self._data_dir
        try:
            directory.mkdir(parents=True, exist_ok=True)
            probe = directory / f".write-probe-{uuid.uuid4().hex}"
            probe.write_bytes(b"")
            probe.unlink()
        except OSError as exc:
            raise InvalidArgumentError(
                f"data directory {directory} is not writable: {exc}"
            ) from exc
        for path in sorted(directory.glob("*.json")):
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
                record = record_from_doc(doc)
            except (OSError, ValueError, ParseError, InvalidArgumentError) as exc:
                logger.warning("skipping corrupt record file %s: %s", path, exc)
                continue
            if record.id != path.stem:
                logger.warning(
                    "skipping record file %s: id %r does not match filename",
                    path,
                    record.id,
                )
                continue
            self._records[record.id] = record

    def _record_path(self, record_id: str) -> Path:
        return self._data_dir / f"{record_id}.json"

    def _persist(self, record: LayoutRecord):
        if self._data_dir is None:
            return
        path = self._record_path(record.id)
        payload = json.dumps(record.to_doc(), indent=2).encode("utf-8")
        tmp = path.with_name(f".{record.id}.{uuid.uuid4().hex}.tmp")
        try:
            with open(tmp, "wb") as f:
                f.write(payload)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, path)
        finally:
            if tmp.exists():
                try:
                    tmp.unlink()
                except OSError:
                    pass

    def list_ids(self) -> tuple:
        with self._lock:
            return tuple(sorted(self._records))

    def get(self, record_id: str) -> LayoutRecord:
        with self._lock:
            record = self._records.get(record_id)
        if record is None:
            raise NotFoundError(f"no layout with id {record_id!r}")
        return record

    def create(self, layout: BlobLayout) -> LayoutRecord:
        now = _now()
        record = LayoutRecord(
            id=new_record_id(),
            layout=layout,
            created_at=now,
            updated_at=now,
            revision=1,
        )
        with self._lock:
            self._persist(record)
            self._records[record.id] = record
        return record

    def _commit(self, current: LayoutRecord, layout: BlobLayout) -> LayoutRecord:
        # Caller holds the lock. Persist first: a failed write must not
        # leave memory ahead of disk.
        updated = replace(
            current,
            layout=layout,
            updated_at=_now(),
            revision=current.revision + 1,
        )
        self._persist(updated)
        self._records[updated.id] = updated
        return updated

    def _check_revision(self, record: LayoutRecord, expected_revision: int):
        if isinstance(expected_revision, bool) or not isinstance(expected_revision, int):
            raise InvalidArgumentError("revision: expected integer")
        if expected_revision != record.revision:
            raise StaleRevisionError(
                f"layout {record.id} is at revision {record.revision}, "
                f"write supplied {expected_revision}",
                expected=record.revision,
                got=expected_revision,
            )

    def put(self, record_id: str, layout: BlobLayout, expected_revision: int) -> LayoutRecord:
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise NotFoundError(f"no layout with id {record_id!r}")
            self._check_revision(record, expected_revision)
            return self._commit(record, layout)

    def apply_edit(
        self,
        record_id: str,
        edit,
        expected_revision: int | None = None,
        max_blobs: int = DEFAULT_MAX_BLOBS,
    ) -> LayoutRecord:
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise NotFoundError(f"no layout with id {record_id!r}")
            if expected_revision is not None:
                self._check_revision(record, expected_revision)
            layout = edit_layout(record.layout, edit, max_blobs=max_blobs)
            return self._commit(record, layout)
