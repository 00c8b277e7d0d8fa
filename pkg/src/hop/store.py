"""Directory-backed motion store with atomic writes and optimistic locking.

One JSON file per motion, always in canonical form.  Writes go through a
temporary file in the same directory followed by ``os.replace``, so a
crash at any point leaves either the old or the new version on disk,
never a torn file.  Concurrent writers to the same name serialize on a
per-name lock; readers never block.
"""

from __future__ import annotations

import json
import os
import re
import threading
from pathlib import Path
from typing import Dict, Tuple

from .canonical import canonical_bytes
from .errors import SchemaError, StaleWriteError
from .motions import Motion, load_motion

_NAME_RE = re.compile(r"^[a-z][a-z0-9_-]{0,63}$")


def check_motion_name(name: str) -> None:
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise SchemaError(
            "motion names are 1-64 chars of lowercase letters, digits, _ or -, "
            f"starting with a letter; got {name!r}"
        )


class MotionStore:
    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: Dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._counter = 0

    def _lock(self, name: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(name, threading.Lock())

    def _path(self, name: str) -> Path:
        return self.directory / f"{name}.json"

    def list(self) -> Dict[str, int]:
        """Motion names mapped to modification timestamps (ns)."""
        out = {}
        for p in sorted(self.directory.glob("*.json")):
            if _NAME_RE.match(p.stem):
                out[p.stem] = p.stat().st_mtime_ns
        return out

    def load_bytes(self, name: str) -> Tuple[bytes, int]:
        """Raw stored document and its timestamp; KeyError if absent."""
        check_motion_name(name)
        path = self._path(name)
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise KeyError(name) from None
        return data, path.stat().st_mtime_ns

    def load(self, name: str) -> Tuple[Motion, int]:
        data, stamp = self.load_bytes(name)
        return load_motion(json.loads(data)), stamp

    def save(self, name: str, doc: dict, expected_mtime_ns: int = None) -> int:
        """Validate and store a motion document; returns the new timestamp.

        With ``expected_mtime_ns`` the write only goes through if the
        stored version still carries that timestamp (pass the value from a
        prior load; anything else raises StaleWriteError).
        """
        check_motion_name(name)
        motion = load_motion(doc)
        if motion.name != name:
            raise SchemaError(f"document name {motion.name!r} does not match {name!r}", path="name")
        data = canonical_bytes(motion.to_dict())
        path = self._path(name)
        with self._lock(name):
            if expected_mtime_ns is not None:
                try:
                    current = path.stat().st_mtime_ns
                except FileNotFoundError:
                    current = None
                if current != expected_mtime_ns:
                    raise StaleWriteError(
                        f"motion {name!r} changed underneath the write "
                        f"(have {current}, expected {expected_mtime_ns})"
                    )
            self._counter += 1
            tmp = self.directory / f".{name}.{os.getpid()}.{self._counter}.tmp"
            try:
                with open(tmp, "wb") as fh:
                    fh.write(data)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, path)
            finally:
                try:
                    os.unlink(tmp)
                except FileNotFoundError:
                    pass
            return path.stat().st_mtime_ns
