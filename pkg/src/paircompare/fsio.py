"""Filesystem helpers shared by the artifact writers."""

from __future__ import annotations

import os
from pathlib import Path

from .errors import IoError


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to ``path`` via a temp file and rename.

    The rename is atomic on POSIX, so readers never observe a partial file;
    a crash mid-write leaves the previous content (or nothing) in place.
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, target)
    except OSError as exc:
        raise IoError(f"cannot write {target}: {exc}") from exc
    return target
