"""Shared file helpers for the plain-text formats read and written by simpleclir."""

import hashlib
import os
from collections.abc import Iterator
from pathlib import Path

DATA_DIR_ENV = "SIMPLECLIR_DATA_DIR"
PACKAGE_DATA = Path(__file__).parent / "data"


class FormatError(ValueError):
    """A line in an input file does not follow the expected format."""

    def __init__(self, path: str | os.PathLike[str], line_number: int, message: str):
        self.path = str(path)
        self.line_number = line_number
        super().__init__(f"{self.path}, line {line_number}: {message}")


def resolve_path(path: str | os.PathLike[str]) -> Path:
    """Resolve a relative data path against ``$SIMPLECLIR_DATA_DIR`` when it is set."""
    candidate = Path(path).expanduser()
    root = os.environ.get(DATA_DIR_ENV)
    if root and not candidate.is_absolute():
        return Path(root).expanduser() / candidate
    return candidate


def iter_lines(path: str | os.PathLike[str]) -> Iterator[tuple[int, str]]:
    """Yield ``(line_number, line)`` pairs of a UTF-8 file, 1-based, newline stripped.

    Blank lines are skipped.
    """
    resolved = resolve_path(path)
    if not resolved.exists():
        raise FileNotFoundError(f"No such file: {resolved}")
    with open(resolved, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if line.strip():
                yield number, line


def file_digest(path: str | os.PathLike[str]) -> str:
    """SHA-256 hex digest of a file, used in run manifests."""
    sha = hashlib.sha256()
    with open(resolve_path(path), "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            sha.update(chunk)
    return sha.hexdigest()
