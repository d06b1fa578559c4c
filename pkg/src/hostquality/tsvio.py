"""Small helpers for the line-oriented TSV files used throughout the pipeline."""

import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

from .errors import FormatError


def read_rows(path, min_fields=1):
    """Yield ``(lineno, fields)`` for non-blank, non-comment lines of a TSV file."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < min_fields:
                raise FormatError(
                    f"{path}:{lineno}: expected {min_fields} tab-separated fields, got {len(fields)}"
                )
            yield lineno, fields


def read_list(path):
    """One item per line (train.txt / test.txt)."""
    return [fields[0].strip() for _, fields in read_rows(path)]


def parse_int(text, path, lineno, what):
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: {what} must be an integer, got {text!r}") from None


def parse_float(text, path, lineno, what):
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: {what} must be numeric, got {text!r}") from None


@contextmanager
def atomic_write(path):
    """Open ``path`` for text writing via a temp file renamed into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
