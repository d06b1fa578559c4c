"""Column-wise fusion of feature blocks.

Blocks: L page-level link, H host-level link, C content statistics,
T TFIDF. Fused columns always follow L, H, C, T order.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import AlignmentError, ConfigError
from ..features import FeatureMatrix

BLOCK_ORDER = ("L", "H", "C", "T")
PRESETS = ("L", "H", "C", "T", "HCT", "LHCT", "LH")


@dataclass(frozen=True)
class FusionSpec:
    blocks: tuple

    @classmethod
    def parse(cls, text):
        text = text.strip().upper()
        unknown = set(text) - set(BLOCK_ORDER)
        if not text or unknown:
            raise ConfigError(f"bad fusion spec {text!r}: use letters from {''.join(BLOCK_ORDER)}")
        if len(set(text)) != len(text):
            raise ConfigError(f"bad fusion spec {text!r}: repeated block")
        return cls(tuple(b for b in BLOCK_ORDER if b in text))

    @property
    def name(self):
        return "".join(self.blocks)

    def __contains__(self, block):
        return block in self.blocks


def fuse(blocks, spec, hosts=None):
    """Concatenate the requested blocks, columns prefixed ``<tag>:``.

    Rows follow ``hosts`` if given, else the first block's row order. Any
    block lacking a required host, or (without ``hosts``) covering a
    different host set, raises :class:`AlignmentError`.
    """
    if isinstance(spec, str):
        spec = FusionSpec.parse(spec)
    missing_blocks = [b for b in spec.blocks if b not in blocks]
    if missing_blocks:
        raise ConfigError(f"fusion {spec.name} needs blocks not provided: {', '.join(missing_blocks)}")
    mats = [blocks[b] for b in spec.blocks]
    if hosts is None:
        hosts = mats[0].hosts
        for b, m in zip(spec.blocks, mats):
            diff = set(m.hosts) ^ set(hosts)
            if diff:
                raise AlignmentError(f"block {b} covers a different host set", diff)
    hosts = tuple(hosts)
    parts, names = [], []
    for b, m in zip(spec.blocks, mats):
        idx = m.row_index()
        absent = [h for h in hosts if h not in idx]
        if absent:
            raise AlignmentError(f"block {b} has no row for {len(absent)} host(s)", absent)
        parts.append(m.values[[idx[h] for h in hosts]])
        names.extend(f"{b}:{c}" for c in m.columns)
    values = np.hstack(parts) if parts else np.zeros((len(hosts), 0))
    return FeatureMatrix(hosts, tuple(names), values)
