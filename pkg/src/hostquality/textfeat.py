"""TFIDF term weights and information-gain term selection."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .corpus import canonicalize_host
from .errors import DomainError, FormatError
from .features import FeatureMatrix
from .tsvio import parse_int, read_rows

DEFAULT_K = 500


def tfidf_weight(f_ik, n_docs, n_i):
    """``f_ik * ln(n_docs / n_i)``."""
    if n_i < 1 or n_i > n_docs:
        raise DomainError(f"document frequency must lie in [1, {n_docs}], got {n_i}")
    if f_ik < 0:
        raise DomainError(f"term frequency must be nonnegative, got {f_ik}")
    return f_ik * math.log(n_docs / n_i)


@dataclass(frozen=True, eq=False)
class TermStats:
    """Sparse host-by-term frequency table.

    Term ids follow the lexicographic order of the terms, so ids do not
    depend on the order in which rows were read.
    """

    hosts: tuple
    terms: tuple
    freq: sparse.csr_matrix
    doc_freq: np.ndarray
    n_docs: int

    @classmethod
    def from_counts(cls, rows, doc_freq=None, n_docs=None):
        """``rows`` yields ``(host, term, count)``; counts for a repeated pair are summed."""
        agg = {}
        for host, term, count in rows:
            if count < 0:
                raise FormatError(f"negative term count for {host!r}/{term!r}")
            agg[host, term] = agg.get((host, term), 0) + count
        hosts = tuple(sorted({h for h, _ in agg}))
        terms = tuple(sorted({t for _, t in agg}))
        hi = {h: i for i, h in enumerate(hosts)}
        ti = {t: i for i, t in enumerate(terms)}
        keys = [k for k, c in agg.items() if c > 0]
        r = [hi[h] for h, _ in keys]
        c = [ti[t] for _, t in keys]
        v = [agg[k] for k in keys]
        freq = sparse.csr_matrix((v, (r, c)), shape=(len(hosts), len(terms)), dtype=float)
        freq.sort_indices()
        if n_docs is None:
            n_docs = len(hosts)
        if doc_freq is None:
            df = np.diff(freq.tocsc().indptr).astype(np.int64)
        else:
            df = np.array([doc_freq.get(t, 0) for t in terms], dtype=np.int64)
            present = np.diff(freq.tocsc().indptr)
            bad = [terms[i] for i in np.flatnonzero((present > 0) & ((df < 1) | (df > n_docs)))]
            if bad:
                raise FormatError(f"document frequency out of range for terms: {', '.join(bad[:5])}")
        return cls(hosts, terms, freq, df, int(n_docs))

    @property
    def vocab(self):
        return {t: i for i, t in enumerate(self.terms)}

    def presence(self, hosts):
        """Sparse 0/1 presence rows for ``hosts``; hosts without text have no terms."""
        return (self._selector(hosts) @ (self.freq > 0).astype(np.int64)).tocsr()

    def _selector(self, hosts):
        idx = {h: i for i, h in enumerate(self.hosts)}
        pairs = [(r, idx[h]) for r, h in enumerate(hosts) if h in idx]
        r = [a for a, _ in pairs]
        c = [b for _, b in pairs]
        return sparse.csr_matrix(
            (np.ones(len(pairs), dtype=np.int64), (r, c)), shape=(len(hosts), len(self.hosts))
        )


def read_termfreq(path, docfreq_path=None):
    rows = []
    for lineno, fields in read_rows(path, min_fields=3):
        rows.append((
            canonicalize_host(fields[0]),
            fields[1].strip(),
            parse_int(fields[2].strip(), path, lineno, "count"),
        ))
    doc_freq = None
    if docfreq_path is not None:
        doc_freq = {}
        for lineno, fields in read_rows(docfreq_path, min_fields=2):
            doc_freq[fields[0].strip()] = parse_int(fields[1].strip(), docfreq_path, lineno, "n_i")
    return TermStats.from_counts(rows, doc_freq)


def _entropy_bits(counts):
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts), where=total > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=-1)


def information_gain(term_presence, classes):
    """Entropy reduction (bits) in ``classes`` from knowing term presence."""
    present = np.asarray(term_presence, dtype=bool)
    classes = np.asarray(classes)
    if present.shape != classes.shape or present.size == 0:
        raise DomainError("need one presence flag per host and at least one host")
    _, y = np.unique(classes, return_inverse=True)
    k = y.max() + 1
    all_counts = np.bincount(y, minlength=k)
    with_t = np.bincount(y[present], minlength=k)
    return float(_information_gains(all_counts, with_t[None, :])[0])


def _information_gains(class_counts, counts_with_term):
    """IG for many terms at once; ``counts_with_term`` is terms x classes."""
    n = class_counts.sum()
    without = class_counts[None, :] - counts_with_term
    n_t = counts_with_term.sum(axis=1)
    h_c = _entropy_bits(class_counts)
    cond = (n_t * _entropy_bits(counts_with_term) + (n - n_t) * _entropy_bits(without)) / n
    return np.maximum(h_c - cond, 0.0)


def term_information_gains(stats, hosts, classes):
    """IG of every vocabulary term measured on ``hosts`` labelled ``classes``."""
    classes = np.asarray(classes)
    _, y = np.unique(classes, return_inverse=True)
    k = int(y.max()) + 1
    onehot = sparse.csr_matrix(
        (np.ones(len(y)), (np.arange(len(y)), y)), shape=(len(y), k)
    )
    pres = stats.presence(hosts)
    counts_with = np.asarray((pres.T @ onehot).todense())
    return _information_gains(np.bincount(y, minlength=k), counts_with)


def select_top_k(stats, hosts, classes, k=DEFAULT_K):
    """Ids of the ``k`` highest-IG terms, ties to the lower id, returned in rank order.

    Only ``hosts`` (the labelled training hosts) influence the choice.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if len(hosts) == 0:
        raise DomainError("term selection needs at least one labelled host")
    ig = term_information_gains(stats, hosts, classes)
    order = np.lexsort((np.arange(len(ig)), -ig))
    return [int(i) for i in order[:k]]


def tfidf_matrix(stats, term_ids, hosts=None):
    """TFIDF weights restricted to ``term_ids`` for ``hosts`` (default: all hosts)."""
    term_ids = list(term_ids)
    hosts = stats.hosts if hosts is None else tuple(hosts)
    df = stats.doc_freq[term_ids]
    idf = np.where(df > 0, np.log(stats.n_docs / np.maximum(df, 1)), 0.0)
    sub = (stats._selector(hosts) @ stats.freq[:, term_ids]).toarray()
    out = sub * idf[None, :]
    names = tuple(stats.terms[i] for i in term_ids)
    return FeatureMatrix(hosts, names, out)
