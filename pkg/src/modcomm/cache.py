"""On-disk cache of coset tables, keyed by a hash of the construction request."""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path
from typing import Callable, Optional, Union

from .errors import ParseError
from .modgroup import CosetTable, FreeCosetTable, table_from_text

Table = Union[CosetTable, FreeCosetTable]


def cache_dir() -> Path:
    env = os.environ.get("MODCOMM_CACHE")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "modcomm"


def request_key(request: str) -> str:
    return hashlib.sha256(request.encode()).hexdigest()[:32]


def atomic_write(path: Path, text: str) -> None:
    """Write to a temporary file in the same directory, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cached_table(request: str, build: Callable[[], Table],
                 directory: Optional[Path] = None) -> Table:
    """Load the table for ``request`` from the cache, or build and store it.

    The stored record repeats the request on its first line; a record that
    fails to parse or names another request is rebuilt and overwritten.
    """
    path = (directory or cache_dir()) / f"{request_key(request)}.table"
    try:
        head, _, body = path.read_text().partition("\n")
        if head == f"request {request}":
            return table_from_text(body)
    except (OSError, ParseError):
        pass
    tbl = build()
    try:
        atomic_write(path, f"request {request}\n" + tbl.to_text())
    except OSError:
        pass  # a read-only cache is not an error
    return tbl
