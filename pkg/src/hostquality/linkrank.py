"""Per-host link measures on the host graph.

HostRank is PageRank by power iteration. Truncated PageRank drops the
first ``T + 1`` terms of the geometric-series expansion
``sum_t (1 - alpha) alpha^t M^t u``. Supporters at distance ``d`` count the
hosts that reach a host within ``d`` hops, either exactly (bounded reverse
BFS) or with Flajolet-Martin bit sketches propagated along the edges.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, FormatError
from .hostgraph import WeightFn, transition_matrix
from .tsvio import parse_float, read_rows

log = logging.getLogger(__name__)

HOSTRANK = "HostRank"
DOMAINPR = "DomainPR"
TPR_LEVELS = (1, 2, 3, 4)
SUPPORTER_DISTANCES = (1, 2, 3, 4)

# Flajolet-Martin bias correction for the average least-zero-bit position
FM_PHI = 0.77351


def tpr_id(T):
    return f"TPR{T}"


def supporters_id(d):
    return f"Supporters{d}"


MEASURE_IDS = (
    (HOSTRANK, DOMAINPR)
    + tuple(tpr_id(T) for T in TPR_LEVELS)
    + tuple(supporters_id(d) for d in SUPPORTER_DISTANCES)
)


@dataclass(frozen=True, eq=False)
class MeasureVector:
    measure_id: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError(f"{self.measure_id}: values must be finite and nonnegative")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class RankParams:
    alpha: float = 0.85
    tol: float = 1e-9
    max_iters: int = 200

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")


def hostrank(g, wf=WeightFn.N, p=RankParams()):
    n = g.n_nodes
    if n == 0:
        raise DomainError("HostRank of an empty graph is undefined")
    M = transition_matrix(g, wf)
    u = np.full(n, 1.0 / n)
    r = u.copy()
    for _ in range(p.max_iters):
        nxt = (1.0 - p.alpha) * u + p.alpha * (M @ r)
        delta = np.abs(nxt - r).sum()
        r = nxt
        if delta < p.tol:
            break
    return MeasureVector(HOSTRANK, r / r.sum())


def truncated_pagerank(g, wf=WeightFn.N, T=1, p=RankParams()):
    """Sum of the series terms ``t = T+1, T+2, ...`` until a term's mass drops below tol.

    Not renormalized: the result carries only the long-path share of HostRank.
    """
    if T < 0:
        raise DomainError(f"truncation level must be >= 0, got {T}")
    n = g.n_nodes
    if n == 0:
        return MeasureVector(tpr_id(T), np.zeros(0))
    M = transition_matrix(g, wf)
    walk = np.full(n, 1.0 / n)
    total = np.zeros(n)
    coef = 1.0 - p.alpha
    t = 0
    while True:
        if t > T:
            total += coef * walk
            # M is stochastic, so the term's L1 mass is exactly coef
            if coef < p.tol:
                break
        walk = M @ walk
        coef *= p.alpha
        t += 1
    return MeasureVector(tpr_id(T), total)


def _predecessors(g):
    preds = [[] for _ in range(g.n_nodes)]
    for s, d in zip(g.src.tolist(), g.dst.tolist()):
        preds[d].append(s)
    return preds


def supporter_counts(g, max_d):
    """``counts[h, k]`` = number of hosts reaching ``h`` within ``k + 1`` hops."""
    preds = _predecessors(g)
    counts = np.zeros((g.n_nodes, max_d), dtype=np.int64)
    for h in range(g.n_nodes):
        seen = {h}
        frontier = [h]
        for k in range(max_d):
            nxt = []
            for x in frontier:
                for v in preds[x]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
            counts[h, k] = len(seen) - 1
            if not frontier:
                counts[h, k + 1:] = len(seen) - 1
                break
    return counts


def supporters_exact(g, d):
    if d < 1:
        raise DomainError(f"distance must be >= 1, got {d}")
    counts = supporter_counts(g, d)[:, d - 1] if g.n_nodes else np.zeros(0)
    return MeasureVector(supporters_id(d), counts.astype(float))


def _least_zero_bit(sketch):
    """Index of the lowest unset bit of each uint64 entry."""
    low = ~sketch & (sketch + np.uint64(1))
    # low is a power of two (or 0 once all 64 bits are set)
    out = np.full(sketch.shape, 64, dtype=np.int64)
    nz = low != 0
    out[nz] = np.log2(low[nz].astype(np.float64)).round().astype(np.int64)
    return out


def _fm_estimate(sketch, bits):
    r = np.minimum(_least_zero_bit(sketch), bits).mean(axis=1)
    return np.exp2(r) / FM_PHI


def initial_sketches(n, bits, reps, seed):
    """One geometric-position bit per (node, repetition), seeded."""
    rng = np.random.default_rng(seed)
    rho = np.minimum(rng.geometric(0.5, size=(n, reps)) - 1, bits - 1)
    return np.left_shift(np.uint64(1), rho.astype(np.uint64))


def propagate_sketches(g, sketch, rounds):
    """OR each host's sketch into its out-neighbors' sketches, ``rounds`` times."""
    for _ in range(rounds):
        nxt = sketch.copy()
        np.bitwise_or.at(nxt, g.dst, sketch[g.src])
        if np.array_equal(nxt, sketch):
            break
        sketch = nxt
    return sketch


def supporters_estimate(g, d, bits=32, reps=64, seed=0):
    """Probabilistic supporter counts.

    The decoded size of a host's propagated sketch counts the host itself,
    so the decoded size of its own initial sketch is subtracted; a host
    whose sketch never changes estimates to exactly 0.
    """
    if d < 1:
        raise DomainError(f"distance must be >= 1, got {d}")
    if not 8 <= bits <= 63:
        raise ConfigError(f"sketch width must lie in [8, 63], got {bits}")
    if reps < 1:
        raise ConfigError(f"repetitions must be >= 1, got {reps}")
    n = g.n_nodes
    if n == 0:
        return MeasureVector(supporters_id(d), np.zeros(0))
    start = initial_sketches(n, bits, reps, seed)
    final = propagate_sketches(g, start, d)
    est = _fm_estimate(final, bits) - _fm_estimate(start, bits)
    est[np.all(final == start, axis=1)] = 0.0
    return MeasureVector(supporters_id(d), np.maximum(est, 0.0))


def read_domain_table(path):
    table = {}
    for lineno, fields in read_rows(path, min_fields=2):
        domain = fields[0].strip().lower().rstrip(".")
        value = parse_float(fields[1].strip(), path, lineno, "DomainPR value")
        if not domain:
            raise FormatError(f"{path}:{lineno}: empty domain")
        if not (value >= 0 and np.isfinite(value)):
            raise FormatError(f"{path}:{lineno}: DomainPR value must be nonnegative, got {value}")
        table[domain] = value
    return table


def resolve_domain(host, table):
    """Longest table key equal to ``host`` or a dot-bounded suffix of it."""
    labels = host.split(".")
    for i in range(len(labels)):
        candidate = ".".join(labels[i:])
        if candidate in table:
            return candidate
    return None


def domain_pr(hosts, table):
    values = np.zeros(len(hosts))
    missing = 0
    for i, host in enumerate(hosts):
        key = resolve_domain(host, table)
        if key is None:
            missing += 1
        else:
            values[i] = table[key]
    if missing:
        log.warning("DomainPR: %d of %d hosts have no domain entry; using 0", missing, len(hosts))
    return MeasureVector(DOMAINPR, values)


def compute_measures(g, domain_table, wf=WeightFn.N, p=RankParams(),
                     supporters="estimate", bits=32, reps=64, seed=0):
    """All ten measures in :data:`MEASURE_IDS` order, keyed by measure id."""
    if supporters not in ("exact", "estimate"):
        raise ConfigError(f"supporters must be 'exact' or 'estimate', got {supporters!r}")
    out = {HOSTRANK: hostrank(g, wf, p), DOMAINPR: domain_pr(g.nodes, domain_table)}
    for T in TPR_LEVELS:
        out[tpr_id(T)] = truncated_pagerank(g, wf, T, p)
    if supporters == "exact":
        counts = supporter_counts(g, max(SUPPORTER_DISTANCES)).astype(float)
        for d in SUPPORTER_DISTANCES:
            out[supporters_id(d)] = MeasureVector(supporters_id(d), counts[:, d - 1])
    else:
        for d in SUPPORTER_DISTANCES:
            out[supporters_id(d)] = supporters_estimate(g, d, bits, reps, seed)
    return out
