"""Seeded synthetic corpus with a tunable class signal.

Every host draws a latent quality class. With signal strength ``s`` each
feature source sees a mix ``s * level + (1 - s) * level'`` of the host's
own class level and the level of an unrelated host, so ``s = 0`` makes
every feature independent of the labels.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import FacetLabels, Genre, derive_quality_class, write_labels
from ..errors import ConfigError
from ..features import FeatureMatrix
from ..tsvio import atomic_write
from .config import write_config

CLASSES = (0, 3, 4, 5, 7)
CLASS_PROBS = (0.15, 0.35, 0.15, 0.2, 0.15)

N_BACKGROUND_TERMS = 400
N_CLASS_TERMS = 12
TOPIC_SHARE = 0.3
FITNESS_SLOPE = 0.9
MEAN_OUT_DEGREE = 5.0
L_COLUMNS, L_NOISE = 6, 2.5
C_COLUMNS, C_NOISE = 8, 1.2
DOMAIN_AFFINITY = 0.5
TLDS = ("com", "org", "eu", "de", "fr")

_GENRES_FOR_3 = (Genre.COMMERCIAL, Genre.PERSONAL_LEISURE, Genre.OTHER)
_GENRES_FOR_5 = (Genre.NEWS_EDITORIAL, Genre.EDUCATIONAL_RESEARCH)


@dataclass(eq=False)
class SyntheticCorpus:
    hosts: tuple
    classes: np.ndarray
    labels: dict
    edges: list
    termfreq: list
    domain_table: dict
    link_features: FeatureMatrix
    content_features: FeatureMatrix
    train: tuple
    test: tuple
    seed: int
    signal: float

    def write(self, out_dir):
        """Write the corpus files plus a ready-to-run ``run.conf``."""
        out = Path(out_dir)
        with atomic_write(out / "labels.tsv") as fh:
            write_labels(fh, self.labels)
            # www-prefixed duplicates exercise host merging
            for host in self.hosts[::17]:
                lab = self.labels[host]
                fh.write(f"www.{host}\t{lab.genre.value}\t{int(lab.facts_or_trust)}\t{int(lab.bias)}\n")
        with atomic_write(out / "edges.tsv") as fh:
            for src, dst, n in self.edges:
                fh.write(f"{src}\t{dst}\t{n}\n")
        with atomic_write(out / "termfreq.tsv") as fh:
            for host, term, n in self.termfreq:
                fh.write(f"{host}\t{term}\t{n}\n")
        with atomic_write(out / "domainpr.tsv") as fh:
            for dom in sorted(self.domain_table):
                fh.write(f"{dom}\t{self.domain_table[dom]!r}\n")
        with atomic_write(out / "link_features.tsv") as fh:
            self.link_features.write_tsv(fh)
        with atomic_write(out / "content_features.tsv") as fh:
            self.content_features.write_tsv(fh)
        for name, hosts in (("train.txt", self.train), ("test.txt", self.test)):
            with atomic_write(out / name) as fh:
                fh.writelines(f"{h}\n" for h in hosts)
        with atomic_write(out / "qrels.tsv") as fh:
            for h in sorted(self.test):
                fh.write(f"{h}\t{derive_quality_class(self.labels[h])}\n")
        with atomic_write(out / "run.conf") as fh:
            write_config(fh, {
                "labels": "labels.tsv", "edges": "edges.tsv", "termfreq": "termfreq.tsv",
                "domainpr": "domainpr.tsv", "link_features": "link_features.tsv",
                "content_features": "content_features.tsv", "train": "train.txt",
                "test": "test.txt", "qrels": "qrels.tsv", "seed": self.seed,
            })
        return out


def _labels_for(cls, rng):
    if cls == 0:
        return FacetLabels(Genre.SPAM, bool(rng.random() < 0.2), False)
    if cls == 3:
        return FacetLabels(_GENRES_FOR_3[rng.integers(3)])
    if cls == 4:
        return FacetLabels(Genre.DISCUSSION)
    if cls == 5:
        if rng.random() < 0.25:
            return FacetLabels(Genre.COMMERCIAL, facts_or_trust=True)
        return FacetLabels(_GENRES_FOR_5[rng.integers(2)])
    return FacetLabels(_GENRES_FOR_5[rng.integers(2)], facts_or_trust=True)


def gen_synthetic(n_hosts, s, seed):
    if n_hosts < 20:
        raise ConfigError(f"n_hosts must be >= 20, got {n_hosts}")
    if not 0.0 <= s <= 1.0:
        raise ConfigError(f"signal strength must lie in [0, 1], got {s}")
    rng = np.random.default_rng(seed)
    n = n_hosts
    n_levels = len(CLASSES)

    level = rng.choice(n_levels, size=n, p=CLASS_PROBS)
    classes = np.array(CLASSES)[level]

    def mixed_level():
        return s * level + (1.0 - s) * level[rng.permutation(n)]

    # hosts grouped under registrable domains; domains carry a level group
    n_domains = max(n // 3, n_levels)
    dom_group = np.arange(n_domains) % n_levels
    dom_names = [f"d{j:03d}.{TLDS[j % len(TLDS)]}" for j in range(n_domains)]
    by_group = [np.flatnonzero(dom_group == g) for g in range(n_levels)]
    own = rng.random(n) < DOMAIN_AFFINITY * s
    dom_of = np.where(
        own,
        [rng.choice(by_group[lv]) for lv in level],
        rng.integers(0, n_domains, size=n),
    )
    host_names = [f"h{i:04d}.{dom_names[d]}" for i, d in enumerate(dom_of)]
    domain_table = {
        dom_names[j]: float(min(2 * dom_group[j] + rng.integers(0, 2), 9)) for j in range(n_domains)
    }

    # fitness-proportional attachment with a rich-get-richer term
    fitness = np.exp(FITNESS_SLOPE * mixed_level())
    indeg = np.zeros(n)
    edges = []
    for src in rng.permutation(n):
        k = 1 + rng.poisson(MEAN_OUT_DEGREE - 1)
        w = fitness * np.sqrt(1.0 + indeg)
        w[src] = 0.0
        targets = rng.choice(n, size=min(k, n - 1), replace=False, p=w / w.sum())
        for dst in targets:
            indeg[dst] += 1
            count = int(rng.geometric(0.35))
            s_name, d_name = host_names[src], host_names[dst]
            if rng.random() < 0.1:
                s_name = "www." + s_name
            edges.append((s_name, d_name, count))

    # term frequencies: Zipfian background plus class-topic words
    bg_terms = [f"w{i:04d}" for i in range(N_BACKGROUND_TERMS)]
    bg_p = 1.0 / np.arange(1, N_BACKGROUND_TERMS + 1)
    bg_p /= bg_p.sum()
    text_level = np.rint(mixed_level()).astype(int)
    termfreq = []
    for i in range(n):
        length = 50 + rng.poisson(150)
        n_topic = rng.binomial(length, TOPIC_SHARE * s)
        counts = {}
        for t in rng.choice(N_BACKGROUND_TERMS, size=length - n_topic, p=bg_p):
            counts[bg_terms[t]] = counts.get(bg_terms[t], 0) + 1
        for t in rng.integers(0, N_CLASS_TERMS, size=n_topic):
            term = f"c{CLASSES[text_level[i]]}_{t:02d}"
            counts[term] = counts.get(term, 0) + 1
        termfreq.extend((host_names[i], term, counts[term]) for term in sorted(counts))

    def noisy_block(prefix, cols, noise):
        slopes = rng.uniform(0.5, 1.5, size=cols)
        vals = mixed_level()[:, None] * slopes[None, :] + rng.normal(0.0, noise, size=(n, cols))
        return FeatureMatrix(host_names, [f"{prefix}{j}" for j in range(cols)], vals)

    link_block = noisy_block("pl", L_COLUMNS, L_NOISE)
    content_block = noisy_block("ct", C_COLUMNS, C_NOISE)

    labels = {host_names[i]: _labels_for(int(classes[i]), rng) for i in range(n)}
    perm = rng.permutation(n)
    half = n // 2
    train = tuple(sorted(host_names[i] for i in perm[:half]))
    test = tuple(sorted(host_names[i] for i in perm[half:]))

    return SyntheticCorpus(
        hosts=tuple(host_names), classes=classes, labels=labels, edges=edges,
        termfreq=termfreq, domain_table=domain_table, link_features=link_block,
        content_features=content_block, train=train, test=test, seed=seed, signal=s,
    )
