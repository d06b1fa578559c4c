"""Host-level link features: each measure, and its weighted means over in- and out-neighbors."""

import numpy as np

from .errors import ConfigError, DomainError
from .features import FeatureMatrix
from .hostgraph import WeightFn
from .linkrank import MEASURE_IDS

AGGREGATIONS = (
    ("F1", None),
    ("F2.one", WeightFn.ONE),
    ("F2.n", WeightFn.N),
    ("F3.one", WeightFn.ONE),
    ("F3.n", WeightFn.N),
)

FEATURE_NAMES = tuple(f"{m}.{agg}" for m in MEASURE_IDS for agg, _ in AGGREGATIONS)


def _values(m):
    return getattr(m, "values", m)


def f1(m, g, h):
    try:
        return float(_values(m)[g.index(h)])
    except KeyError:
        raise DomainError(f"unknown host {h!r}") from None


def _neighbor_mean(values, g, wf, h, inbound):
    try:
        i = g.index(h)
    except KeyError:
        raise DomainError(f"unknown host {h!r}") from None
    if inbound:
        mask = g.dst == i
        nbrs = g.src[mask]
    else:
        mask = g.src == i
        nbrs = g.dst[mask]
    if len(nbrs) == 0:
        return 0.0
    w = wf(g.count[mask])
    return float(np.dot(values[nbrs], w) / w.sum())


def f2_inlink(m, g, wf, h):
    """Mean of the measure over in-neighbors, weighted by the connecting edge."""
    return _neighbor_mean(_values(m), g, wf, h, inbound=True)


def f3_outlink(m, g, wf, h):
    return _neighbor_mean(_values(m), g, wf, h, inbound=False)


def neighbor_means(values, g, wf, inbound):
    """Vectorized F2 (``inbound``) or F3 for every host; 0 where no neighbors."""
    n = g.n_nodes
    w = wf(g.count)
    if inbound:
        target, other = g.dst, g.src
    else:
        target, other = g.src, g.dst
    num = np.bincount(target, weights=values[other] * w, minlength=n)
    den = np.bincount(target, weights=w, minlength=n)
    return np.divide(num, den, out=np.zeros(n), where=den > 0)


def raw_host_features(g, measures):
    """Untransformed 50-column aggregation matrix (hosts in graph order)."""
    missing = [mid for mid in MEASURE_IDS if mid not in measures]
    if missing:
        raise ConfigError(f"missing link measures: {', '.join(missing)}")
    cols = []
    for mid in MEASURE_IDS:
        v = np.asarray(_values(measures[mid]), dtype=float)
        if len(v) != g.n_nodes:
            raise ConfigError(f"measure {mid} has {len(v)} values for {g.n_nodes} hosts")
        for agg, wf in AGGREGATIONS:
            if wf is None:
                cols.append(v)
            else:
                cols.append(neighbor_means(v, g, wf, inbound=agg.startswith("F2")))
    return np.column_stack(cols) if cols else np.zeros((g.n_nodes, 0))


def assemble_host_features(g, measures):
    """The 50 host link features, each log-transformed as ``ln(1 + x)``."""
    raw = raw_host_features(g, measures)
    return FeatureMatrix(g.nodes, FEATURE_NAMES, np.log1p(raw))
