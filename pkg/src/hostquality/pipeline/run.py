"""End-to-end run: ingest, features, fusion, training, scoring, ranking, evaluation."""

import logging
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .. import evaluate
from ..corpus import canonicalize_host, derive_quality_class, facet_value, read_labels
from ..errors import DataError, HostQualityError, InvariantError
from ..features import FeatureMatrix
from ..hostfeat import assemble_host_features
from ..hostgraph import WeightFn, build_graph, read_edges
from ..learner import predict_posterior, train_bagging
from ..linkrank import RankParams, compute_measures, read_domain_table
from ..quality import QualityScore, expected_quality, positive_posterior, rank_hosts, write_ranking
from ..textfeat import read_termfreq, select_top_k, tfidf_matrix
from ..tsvio import atomic_write, read_list
from .fusion import fuse

log = logging.getLogger(__name__)

NDCG_CUTOFFS = (10, 100, 0)


@contextmanager
def stage(name, timings=None):
    """Prefix any pipeline error with the stage it came from."""
    t0 = time.perf_counter()
    try:
        yield
    except HostQualityError as exc:
        raise _restage(exc, name) from exc
    except (KeyError, IndexError, AssertionError) as exc:
        raise InvariantError(f"[{name}] internal error: {exc!r}") from exc
    if timings is not None:
        timings[name] = time.perf_counter() - t0


def _restage(exc, name):
    new = HostQualityError.__new__(type(exc))
    Exception.__init__(new, f"[{name}] {exc}")
    new.__dict__.update(exc.__dict__)
    return new


def read_hosts(path):
    return tuple(sorted({canonicalize_host(h) for h in read_list(path)}))


def task_targets(labels, hosts, task):
    """Quality class (``quality``) or 0/1 facet relevance (``facet:<name>``) per host."""
    missing = [h for h in hosts if h not in labels]
    if missing:
        raise DataError(f"{len(missing)} host(s) have no labels, e.g. {', '.join(missing[:5])}")
    if task == "quality":
        return np.array([derive_quality_class(labels[h]) for h in hosts])
    facet = task.split(":", 1)[1]
    return np.array([facet_value(labels[h], facet) for h in hosts])


def host_link_block(edges, domain_table, hosts, cfg):
    g = build_graph(edges, cfg.W, hosts=hosts)
    measures = compute_measures(
        g, domain_table, WeightFn.N, RankParams(cfg.alpha, cfg.tol, cfg.max_iters),
        supporters=cfg.supporters, bits=cfg.sketch_bits, reps=cfg.sketch_reps, seed=cfg.seed,
    )
    return g, assemble_host_features(g, measures)


def tfidf_block(stats, train_hosts, train_targets, hosts, k):
    terms = select_top_k(stats, train_hosts, train_targets, k)
    return tfidf_matrix(stats, sorted(terms), hosts), terms


def score_posteriors(P, classes, task):
    if task == "quality":
        return expected_quality(P, class_values=classes)
    return positive_posterior(P, classes, positive=1)


def ndcg_table(ranked_hosts, qrels, gain, cutoff):
    grades = evaluate.ranked_grades(ranked_hosts, qrels)
    table = {}
    for g in evaluate.GAINS:
        for c in NDCG_CUTOFFS:
            table[g, c] = evaluate.ndcg(grades, c or None, g)
    headline = evaluate.ndcg(grades, cutoff or None, gain)
    return headline, table


def format_report(cfg, dims, headline, table):
    lines = list(cfg.echo())
    lines += [f"{k}={v}" for k, v in dims.items()]
    lines.append(f"ndcg={headline!r}")
    lines.append("")
    lines.append("gain\t" + "\t".join(f"@{c}" if c else "@all" for c in NDCG_CUTOFFS))
    for g in evaluate.GAINS:
        lines.append(g + "\t" + "\t".join(f"{table[g, c]:.6f}" for c in NDCG_CUTOFFS))
    return "\n".join(lines) + "\n"


def run_task(cfg):
    """Run the whole pipeline for ``cfg``; returns ``(ranking, report)``.

    Writes ``ranking.tsv``, ``report.txt`` and ``timing.txt`` under
    ``cfg.out_dir``. On failure any file written by this run is removed.
    """
    cfg.validate()
    out = Path(cfg.out_dir)
    written = []
    timings = {}
    try:
        return _run(cfg, out, written, timings)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _run(cfg, out, written, timings):
    spec = cfg.fusion_spec
    with stage("ingest", timings):
        labels = read_labels(cfg.labels)
        train = read_hosts(cfg.train)
        test = read_hosts(cfg.test)
        overlap = set(train) & set(test)
        if overlap:
            raise DataError(f"{len(overlap)} host(s) in both train and test lists")
        hosts = tuple(sorted(set(train) | set(test)))
        y_train = task_targets(labels, train, cfg.task)
        if cfg.qrels:
            qrels = evaluate.read_qrels(cfg.qrels)
        else:
            judged = [h for h in test if h in labels]
            qrels = dict(zip(judged, task_targets(labels, judged, cfg.task).tolist()))

    blocks = {}
    dims = {"n_train": len(train), "n_test": len(test)}
    if "H" in spec:
        with stage("graphfeat", timings):
            table = read_domain_table(cfg.domainpr) if cfg.domainpr else {}
            g, blocks["H"] = host_link_block(read_edges(cfg.edges), table, hosts, cfg)
            dims["graph_nodes"] = g.n_nodes
            dims["graph_edges"] = g.n_edges
    if "T" in spec:
        with stage("textfeat", timings):
            stats = read_termfreq(cfg.termfreq, cfg.docfreq or None)
            blocks["T"], _ = tfidf_block(stats, train, y_train, hosts, cfg.k)
    for tag, path in (("L", cfg.link_features), ("C", cfg.content_features)):
        if tag in spec:
            with stage(f"load_{tag}", timings):
                blocks[tag] = FeatureMatrix.read_tsv(path)
    for tag in spec.blocks:
        dims[f"dim_{tag}"] = blocks[tag].shape[1]

    with stage("fuse", timings):
        X = fuse(blocks, spec, hosts)
        dims["dim_fused"] = X.shape[1]
        X_train = X.select(train).values
        X_test = X.select(test).values

    with stage("train", timings):
        model = train_bagging(X_train, y_train, cfg.n_trees, cfg.seed, cfg.min_leaf, X.columns)
        dims["classes"] = ",".join(str(int(c)) for c in model.classes)

    with stage("predict", timings):
        P = predict_posterior(model, X_test) if len(test) else np.zeros((0, len(model.classes)))
        if not np.allclose(P.sum(axis=1), 1.0, atol=1e-12, rtol=0):
            raise InvariantError("posteriors do not sum to 1")
        scores = score_posteriors(P, model.classes, cfg.task)

    with stage("rank", timings):
        ranked = rank_hosts([QualityScore(h, float(s)) for h, s in zip(test, scores)])
        path = out / "ranking.tsv"
        with atomic_write(path) as fh:
            write_ranking(fh, ranked)
        written.append(path)

    with stage("eval", timings):
        if qrels:
            headline, table = ndcg_table([r.host for r in ranked], qrels, cfg.gain, cfg.cutoff)
        else:
            headline, table = float("nan"), {(g, c): float("nan") for g in evaluate.GAINS for c in NDCG_CUTOFFS}
        report = format_report(cfg, dims, headline, table)
        path = out / "report.txt"
        with atomic_write(path) as fh:
            fh.write(report)
        written.append(path)

    path = out / "timing.txt"
    with atomic_write(path) as fh:
        for name, secs in timings.items():
            fh.write(f"{name}={secs:.3f}\n")
    written.append(path)
    log.info("run finished: ndcg=%.6f", headline)
    return ranked, {
        "ndcg": headline, "table": table, "dims": dims, "columns": X.columns, "text": report,
    }
