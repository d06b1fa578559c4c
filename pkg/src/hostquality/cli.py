"""Command-line interface.

Every subcommand accepts ``--config FILE`` (flat ``key = value``); any key
can be overridden by the flag of the same name. Exit codes: 0 success,
1 usage/config error, 2 data/format error, 3 internal invariant violation.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluate
from .corpus import derive_quality_class, read_labels
from .errors import ConfigError, HostQualityError
from .features import FeatureMatrix
from .hostgraph import build_graph, read_edges, write_edges
from .learner import load_model, predict_posterior, save_model, train_bagging
from .linkrank import read_domain_table
from .pipeline.config import PATH_KEYS, RunConfig, make_config, read_key_values
from .pipeline.fusion import fuse
from .pipeline.run import host_link_block, read_hosts, run_task, score_posteriors, task_targets, tfidf_block
from .pipeline.synth import gen_synthetic
from .quality import QualityScore, rank_hosts, write_ranking
from .textfeat import read_termfreq
from .tsvio import atomic_write, read_rows

log = logging.getLogger("hostquality")

BLOCK_KEYS = {"L": "link_features", "H": "host_features", "C": "content_features", "T": "tfidf_features"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _add(p, *names, **kw):
    kw.setdefault("default", None)
    p.add_argument(*names, **kw)


def _build_parser():
    parser = _Parser(prog="hostquality", description="Host content-quality scoring pipeline.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_text, seed=False):
        p = sub.add_parser(name, help=help_text)
        _add(p, "--config", help="flat key=value config file")
        _add(p, "--seed", type=int, help="random seed" + (" (required)" if seed else ""))
        return p

    p = cmd("ingest", "canonicalize and merge labels and edges")
    _add(p, "--labels")
    _add(p, "--edges")
    _add(p, "--out_dir")

    p = cmd("graphfeat", "compute the 50 host-level link features")
    for key in ("edges", "domainpr", "hosts", "out", "supporters"):
        _add(p, f"--{key}")
    for key in ("W", "max_iters", "sketch_bits", "sketch_reps"):
        _add(p, f"--{key}", type=int)
    for key in ("alpha", "tol"):
        _add(p, f"--{key}", type=float)

    p = cmd("textfeat", "TFIDF features over information-gain selected terms")
    for key in ("termfreq", "docfreq", "labels", "train", "hosts", "task", "out"):
        _add(p, f"--{key}")
    _add(p, "--k", type=int)

    p = cmd("train", "train a bagged tree ensemble on fused blocks", seed=True)
    for key in ("labels", "train", "task", "fusion", "model", *BLOCK_KEYS.values()):
        _add(p, f"--{key}")
    _add(p, "--n_trees", type=int)
    _add(p, "--min_leaf", type=int)

    p = cmd("predict", "class posteriors for test hosts")
    for key in ("model", "test", "fusion", "out", *BLOCK_KEYS.values()):
        _add(p, f"--{key}")

    p = cmd("rank", "rank hosts from posteriors")
    for key in ("posteriors", "task", "out"):
        _add(p, f"--{key}")

    p = cmd("eval", "NDCG of a ranking against qrels")
    for key in ("ranking", "qrels", "out"):
        _add(p, f"--{key}")
    _add(p, "--gain", choices=evaluate.GAINS)
    _add(p, "--cutoff", type=int)

    p = cmd("run", "end-to-end pipeline", seed=True)
    for f in dataclasses.fields(RunConfig):
        if f.name == "seed":
            continue
        kind = f.type if f.type in (int, float) else str
        _add(p, f"--{f.name}", type=kind)

    p = cmd("gen-synth", "write a seeded synthetic corpus", seed=True)
    _add(p, "--n_hosts", type=int)
    _add(p, "--signal", type=float)
    _add(p, "--out_dir")
    return parser


DEFAULTS = {
    "out_dir": "out", "task": "quality", "fusion": "LHCT", "n_trees": 90, "min_leaf": 2,
    "k": 500, "W": 1, "alpha": 0.85, "tol": 1e-9, "max_iters": 200, "supporters": "estimate",
    "sketch_bits": 32, "sketch_reps": 64, "gain": "exp", "cutoff": 0, "n_hosts": 400,
    "signal": 1.0,
}


def _resolve(args):
    """Merge defaults, config file and explicit flags into a plain dict."""
    values = {k: v for k, v in DEFAULTS.items() if hasattr(args, k)}
    if args.config:
        for key, value in _read_any_config(args.config).items():
            if hasattr(args, key):
                values[key] = value
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command", "verbose"):
            values[key] = value
    return values


def _read_any_config(path):
    """Config reader tolerant of keys that only some subcommands use."""
    extra = ("out_dir", "hosts", "model", "out", "posteriors", "ranking", *BLOCK_KEYS.values())
    raw = read_key_values(path, PATH_KEYS + extra)
    return {key: _typed(key, value) for key, value in raw.items()}


_INT_KEYS = {"seed", "n_trees", "min_leaf", "k", "W", "max_iters", "sketch_bits", "sketch_reps",
             "cutoff", "n_hosts"}
_FLOAT_KEYS = {"alpha", "tol", "signal"}


def _typed(key, value):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: bad numeric value {value!r}") from None
    return value


def _need(values, *keys):
    for key in keys:
        if values.get(key) in (None, ""):
            raise ConfigError(f"--{key} is required")


def _load_blocks(values, fusion):
    blocks = {}
    for tag in fusion:
        key = BLOCK_KEYS[tag]
        _need(values, key)
        blocks[tag] = FeatureMatrix.read_tsv(values[key])
    return blocks


def cmd_ingest(v):
    _need(v, "labels")
    out = Path(v["out_dir"])
    labels = read_labels(v["labels"])
    with atomic_write(out / "labels.tsv") as fh:
        fh.write("# host\tgenre\tfacts_or_trust\tbias\tquality\n")
        for host in sorted(labels):
            lab = labels[host]
            fh.write(f"{host}\t{lab.genre.value}\t{int(lab.facts_or_trust)}\t{int(lab.bias)}\t"
                     f"{derive_quality_class(lab)}\n")
    print(f"labels={len(labels)}")
    if v.get("edges"):
        g = build_graph(read_edges(v["edges"]), 1)
        with atomic_write(out / "edges.tsv") as fh:
            write_edges(fh, g)
        print(f"hosts={g.n_nodes} edges={g.n_edges}")


def _cfg_like(v):
    return make_config(None, {k: v.get(k) for k in (
        "W", "alpha", "tol", "max_iters", "supporters", "sketch_bits", "sketch_reps", "seed")})


def cmd_graphfeat(v):
    _need(v, "edges", "out")
    hosts = read_hosts(v["hosts"]) if v.get("hosts") else ()
    table = read_domain_table(v["domainpr"]) if v.get("domainpr") else {}
    cfg = _cfg_like({**v, "seed": v.get("seed") or 0})
    g, feats = host_link_block(read_edges(v["edges"]), table, hosts, cfg)
    with atomic_write(v["out"]) as fh:
        feats.write_tsv(fh)
    print(f"hosts={g.n_nodes} edges={g.n_edges} features={feats.shape[1]}")


def cmd_textfeat(v):
    _need(v, "termfreq", "labels", "train", "out")
    stats = read_termfreq(v["termfreq"], v.get("docfreq") or None)
    labels = read_labels(v["labels"])
    train = read_hosts(v["train"])
    hosts = read_hosts(v["hosts"]) if v.get("hosts") else stats.hosts
    feats, _ = tfidf_block(stats, train, task_targets(labels, train, v["task"]), hosts, v["k"])
    with atomic_write(v["out"]) as fh:
        feats.write_tsv(fh)
    print(f"hosts={len(hosts)} terms={feats.shape[1]}")


def cmd_train(v):
    _need(v, "labels", "train", "model")
    fusion = make_config(None, {"fusion": v["fusion"]}).fusion_spec
    train = read_hosts(v["train"])
    X = fuse(_load_blocks(v, fusion.blocks), fusion, train)
    y = task_targets(read_labels(v["labels"]), train, v["task"])
    model = train_bagging(X.values, y, v["n_trees"], v["seed"], v["min_leaf"], X.columns)
    with atomic_write(v["model"]) as fh:
        save_model(fh, model)
    print(f"trees={model.n_trees} features={model.n_features} classes={len(model.classes)}")


def cmd_predict(v):
    _need(v, "model", "test", "out")
    model = load_model(v["model"])
    fusion = make_config(None, {"fusion": v["fusion"]}).fusion_spec
    test = read_hosts(v["test"])
    X = fuse(_load_blocks(v, fusion.blocks), fusion, test)
    if model.feature_names and tuple(X.columns) != model.feature_names:
        raise ConfigError("feature columns do not match the model's training columns")
    P = predict_posterior(model, X.values)
    with atomic_write(v["out"]) as fh:
        fh.write("host\t" + "\t".join(f"p{int(c)}" for c in model.classes) + "\n")
        for h, row in zip(test, P):
            fh.write(h + "\t" + "\t".join(repr(float(p)) for p in row) + "\n")
    print(f"hosts={len(test)}")


def cmd_rank(v):
    _need(v, "posteriors", "out")
    post = FeatureMatrix.read_tsv(v["posteriors"])
    classes = np.array([int(c.lstrip("p")) for c in post.columns])
    scores = score_posteriors(post.values, classes, v["task"])
    ranked = rank_hosts([QualityScore(h, float(s)) for h, s in zip(post.hosts, scores)])
    with atomic_write(v["out"]) as fh:
        write_ranking(fh, ranked)
    print(f"hosts={len(ranked)}")


def cmd_eval(v):
    _need(v, "ranking", "qrels")
    grades = evaluate.ranked_grades(evaluate.read_ranking(v["ranking"]), evaluate.read_qrels(v["qrels"]))
    score = evaluate.ndcg(grades, v["cutoff"] or None, v["gain"])
    line = f"ndcg={score!r}"
    if v.get("out"):
        with atomic_write(v["out"]) as fh:
            fh.write(line + "\n")
    print(line)


def cmd_run(v):
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    cfg = make_config(None, {k: val for k, val in v.items() if k in fields})
    _, report = run_task(cfg)
    print(report["text"], end="")


def cmd_gen_synth(v):
    _need(v, "out_dir")
    corpus = gen_synthetic(v["n_hosts"], v["signal"], v["seed"])
    out = corpus.write(v["out_dir"])
    print(f"hosts={len(corpus.hosts)} edges={len(corpus.edges)} out={out}")


COMMANDS = {
    "ingest": cmd_ingest, "graphfeat": cmd_graphfeat, "textfeat": cmd_textfeat,
    "train": cmd_train, "predict": cmd_predict, "rank": cmd_rank, "eval": cmd_eval,
    "run": cmd_run, "gen-synth": cmd_gen_synth,
}
NEEDS_SEED = ("train", "run", "gen-synth")


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        values = _resolve(args)
        if args.command in NEEDS_SEED and args.seed is None:
            raise ConfigError(f"--seed is required for {args.command}")
        COMMANDS[args.command](values)
    except HostQualityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
