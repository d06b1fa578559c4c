"""DCG / NDCG of a ranking against graded relevance."""

import numpy as np

from .corpus import canonicalize_host
from .errors import DomainError, FormatError
from .tsvio import parse_int, read_rows

GAINS = ("exp", "linear")


def _gain(grades, gain):
    if gain == "exp":
        return np.exp2(grades) - 1.0
    if gain == "linear":
        return grades
    raise DomainError(f"unknown gain {gain!r} (expected one of: {', '.join(GAINS)})")


def dcg(grades, cutoff=None, gain="exp"):
    grades = np.asarray(grades, dtype=float)
    if np.any(grades < 0):
        raise DomainError("relevance grades must be nonnegative")
    if cutoff is not None:
        grades = grades[:cutoff]
    discounts = np.log2(np.arange(2, len(grades) + 2))
    return float(np.sum(_gain(grades, gain) / discounts))


def ndcg(grades, cutoff=None, gain="exp"):
    """DCG of ``grades`` (in predicted order) over the ideal DCG; 1.0 if the ideal is 0."""
    grades = np.asarray(grades, dtype=float)
    if len(grades) == 0:
        raise DomainError("cannot evaluate an empty ranking")
    ideal = dcg(np.sort(grades)[::-1], cutoff, gain)
    if ideal == 0.0:
        return 1.0
    return dcg(grades, cutoff, gain) / ideal


def ranked_grades(ranked_hosts, qrels):
    """Grades in ranked order; judged hosts missing from the ranking go last, by name.

    Unjudged hosts in the ranking are skipped.
    """
    seen = set()
    grades = []
    for h in ranked_hosts:
        if h in seen:
            raise DomainError(f"host {h!r} ranked twice")
        seen.add(h)
        if h in qrels:
            grades.append(qrels[h])
    grades.extend(qrels[h] for h in sorted(set(qrels) - seen))
    return grades


def read_qrels(path):
    qrels = {}
    for lineno, fields in read_rows(path, min_fields=2):
        host = canonicalize_host(fields[0])
        grade = parse_int(fields[1].strip(), path, lineno, "grade")
        if grade < 0:
            raise FormatError(f"{path}:{lineno}: grade must be nonnegative")
        if qrels.get(host, grade) != grade:
            raise FormatError(f"{path}:{lineno}: conflicting grades for {host!r}")
        qrels[host] = grade
    return qrels


def read_ranking(path):
    """Hosts of a ranking.tsv in file order."""
    return [canonicalize_host(fields[1]) for _, fields in read_rows(path, min_fields=3)]
