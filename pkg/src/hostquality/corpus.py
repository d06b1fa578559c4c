"""Host identity canonicalization, duplicate merging and quality classes.

A labeled host carries a genre plus two boolean facets. The quality class
follows the challenge scoring rules: spam is 0, news/editorial and
educational sites start at 5, discussion at 4, anything else at 3; a
facts-or-trust flag adds 2 and a bias flag subtracts 2 (non-spam only).
"""

import enum
from dataclasses import dataclass

from .errors import FormatError, IngestionError, LabelConflictError
from .tsvio import read_rows

N_QUALITY_CLASSES = 10


class Genre(enum.Enum):
    SPAM = "spam"
    NEWS_EDITORIAL = "news"
    COMMERCIAL = "commercial"
    EDUCATIONAL_RESEARCH = "education"
    DISCUSSION = "discussion"
    PERSONAL_LEISURE = "personal"
    OTHER = "other"

    @classmethod
    def from_token(cls, token):
        try:
            return cls(token)
        except ValueError:
            valid = ", ".join(g.value for g in cls)
            raise FormatError(f"unknown genre {token!r} (expected one of: {valid})") from None


_BASE_QUALITY = {
    Genre.SPAM: 0,
    Genre.NEWS_EDITORIAL: 5,
    Genre.EDUCATIONAL_RESEARCH: 5,
    Genre.DISCUSSION: 4,
}
_DEFAULT_BASE = 3
_BONUS = 2


@dataclass(frozen=True)
class FacetLabels:
    genre: Genre
    facts_or_trust: bool = False
    bias: bool = False


def canonicalize_host(raw):
    """Lowercase a hostname and strip leading literal ``www.`` labels.

    Repeated ``www.www.`` prefixes are all removed so that the mapping is
    idempotent; labels such as ``www2`` are left alone.

    >>> canonicalize_host("www.Example.COM")
    'example.com'
    >>> canonicalize_host("www.www2.site.org")
    'www2.site.org'
    """
    if raw is None:
        raise IngestionError("empty host name")
    name = raw.strip().lower().rstrip(".")
    if not name:
        raise IngestionError("empty host name")
    while name.startswith("www.") and len(name) > 4:
        name = name[4:]
    return name


def derive_quality_class(labels):
    if labels.genre is Genre.SPAM:
        return 0
    q = _BASE_QUALITY.get(labels.genre, _DEFAULT_BASE)
    if labels.facts_or_trust:
        q += _BONUS
    if labels.bias:
        q -= _BONUS
    return min(max(q, 0), N_QUALITY_CLASSES - 1)


def merge_duplicates(records):
    """Collapse records sharing a canonical host id.

    Identical labels merge silently; contradictory ones raise
    :class:`LabelConflictError` naming the host.
    """
    merged = {}
    for host, labels in records:
        prev = merged.get(host)
        if prev is None:
            merged[host] = labels
        elif prev != labels:
            raise LabelConflictError(host, prev, labels)
    return merged


def _flag(text, path, lineno, what):
    if text not in ("0", "1"):
        raise FormatError(f"{path}:{lineno}: {what} must be 0 or 1, got {text!r}")
    return text == "1"


def read_labels(path):
    """Parse ``host, genre, facts_or_trust, bias`` rows, canonicalize and merge."""
    records = []
    for lineno, fields in read_rows(path, min_fields=4):
        try:
            host = canonicalize_host(fields[0])
            genre = Genre.from_token(fields[1].strip())
        except FormatError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        except IngestionError as exc:
            raise IngestionError(f"{path}:{lineno}: {exc}") from None
        labels = FacetLabels(
            genre,
            _flag(fields[2].strip(), path, lineno, "facts_or_trust"),
            _flag(fields[3].strip(), path, lineno, "bias"),
        )
        records.append((host, labels))
    return merge_duplicates(records)


def write_labels(fh, labels):
    fh.write("# host\tgenre\tfacts_or_trust\tbias\n")
    for host in sorted(labels):
        lab = labels[host]
        fh.write(f"{host}\t{lab.genre.value}\t{int(lab.facts_or_trust)}\t{int(lab.bias)}\n")


FACETS = ("spam", "news", "commercial", "education", "discussion", "personal", "trust", "bias")


def facet_value(labels, facet):
    """Binary relevance of a host for a single-facet task (0 or 1)."""
    if facet == "trust":
        return int(labels.facts_or_trust)
    if facet == "bias":
        return int(labels.bias)
    if facet in FACETS:
        return int(labels.genre.value == facet)
    raise FormatError(f"unknown facet {facet!r} (expected one of: {', '.join(FACETS)})")
