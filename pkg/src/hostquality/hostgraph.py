"""Weighted directed host graph built from inter-host hyperlink counts."""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .corpus import canonicalize_host
from .errors import FormatError
from .tsvio import parse_int, read_rows


class WeightFn(enum.Enum):
    """Map a hyperlink count ``n`` to an edge weight."""

    ONE = "one"
    LOGN = "logn"
    N = "n"

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self is WeightFn.ONE:
            return np.ones_like(n)
        if self is WeightFn.LOGN:
            # ln(1+n) keeps single-link edges at nonzero weight
            return np.log1p(n)
        return n


@dataclass(frozen=True, eq=False)
class HostGraph:
    """Hosts are indexed in lexicographic order of their canonical names.

    Edges are stored once as parallel arrays sorted by ``(src, dst)``;
    ``out_edges``/``in_edges`` give per-node adjacency views.
    """

    nodes: tuple
    src: np.ndarray
    dst: np.ndarray
    count: np.ndarray
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {h: i for i, h in enumerate(self.nodes)})

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.src)

    def index(self, host):
        return self._index[host]

    def __contains__(self, host):
        return host in self._index

    @property
    def out_edges(self):
        out = [[] for _ in self.nodes]
        for s, d, n in zip(self.src.tolist(), self.dst.tolist(), self.count.tolist()):
            out[s].append((d, n))
        return out

    @property
    def in_edges(self):
        inn = [[] for _ in self.nodes]
        for s, d, n in zip(self.src.tolist(), self.dst.tolist(), self.count.tolist()):
            inn[d].append((s, n))
        for lst in inn:
            lst.sort()
        return inn

    def adjacency(self, wf=WeightFn.N):
        """Sparse ``A[src, dst] = wf(count)``."""
        n = self.n_nodes
        return sparse.csr_matrix(
            (wf(self.count), (self.src, self.dst)), shape=(n, n), dtype=float
        )

    def in_degree(self):
        return np.bincount(self.dst, minlength=self.n_nodes)

    def out_degree(self):
        return np.bincount(self.src, minlength=self.n_nodes)

    def __eq__(self, other):
        return (
            isinstance(other, HostGraph)
            and self.nodes == other.nodes
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.count, other.count)
        )

    __hash__ = None


def build_graph(edges, W=1, hosts=()):
    """Build a :class:`HostGraph` from ``(src, dst, n)`` triples.

    Parallel entries are summed, self-loops dropped, and an edge survives
    iff its summed count is at least ``W``. ``hosts`` adds nodes that may
    have no surviving edges.
    """
    totals = {}
    names = set(hosts)
    for src, dst, n in edges:
        if n <= 0:
            raise FormatError(f"hyperlink count must be positive, got {n} for {src}->{dst}")
        names.add(src)
        names.add(dst)
        if src == dst:
            continue
        totals[src, dst] = totals.get((src, dst), 0) + int(n)

    nodes = tuple(sorted(names))
    index = {h: i for i, h in enumerate(nodes)}
    kept = sorted((index[s], index[d], n) for (s, d), n in totals.items() if n >= W)
    if kept:
        src, dst, count = (np.array(col, dtype=np.int64) for col in zip(*kept))
    else:
        src = dst = count = np.zeros(0, dtype=np.int64)
    return HostGraph(nodes, src, dst, count)


def read_edges(path):
    """Parse ``src, dst, count`` rows into canonical-host triples."""
    edges = []
    for lineno, fields in read_rows(path, min_fields=3):
        src = canonicalize_host(fields[0])
        dst = canonicalize_host(fields[1])
        n = parse_int(fields[2].strip(), path, lineno, "count")
        if n <= 0:
            raise FormatError(f"{path}:{lineno}: count must be positive, got {n}")
        edges.append((src, dst, n))
    return edges


def write_edges(fh, g):
    for s, d, n in zip(g.src.tolist(), g.dst.tolist(), g.count.tolist()):
        fh.write(f"{g.nodes[s]}\t{g.nodes[d]}\t{n}\n")


@dataclass(frozen=True)
class Transition:
    """Column-stochastic random-walk operator over the graph nodes.

    ``P[j, i]`` is the probability of stepping from ``i`` to ``j``; columns of
    dangling nodes are implicit and spread mass uniformly.
    """

    P: sparse.csr_matrix
    dangling: np.ndarray

    @property
    def size(self):
        return self.P.shape[0]

    def __matmul__(self, x):
        n = self.size
        out = self.P @ x
        leaked = x[self.dangling].sum(axis=0)
        return out + leaked / n

    def toarray(self):
        n = self.size
        M = self.P.toarray()
        M[:, self.dangling] = 1.0 / n
        return M


def transition_matrix(g, wf=WeightFn.N):
    A = g.adjacency(wf)
    out_w = np.asarray(A.sum(axis=1)).ravel()
    dangling = out_w <= 0
    scale = np.divide(1.0, out_w, out=np.zeros_like(out_w), where=~dangling)
    P = sparse.diags(scale) @ A
    return Transition(sparse.csr_matrix(P.T), dangling)

