"""Expected-quality scores from class posteriors, and deterministic host rankings."""

from dataclasses import dataclass

import numpy as np

from .corpus import N_QUALITY_CLASSES
from .errors import DomainError


@dataclass(frozen=True)
class QualityScore:
    host: str
    score: float


def expected_quality(P, class_values=None, atol=1e-9):
    """Posterior-weighted quality ``sum_i P_i * Q(i)``.

    ``P`` is either a length-10 vector over classes 0..9 or a mapping
    ``class -> probability``; ``class_values`` gives the quality of each
    entry when ``P`` is a plain vector over a different class set.
    """
    if isinstance(P, dict):
        class_values = np.array(list(P.keys()), dtype=float)
        P = np.array(list(P.values()), dtype=float)
    else:
        P = np.asarray(P, dtype=float)
        if class_values is None:
            if P.shape[-1] != N_QUALITY_CLASSES:
                raise DomainError(f"expected {N_QUALITY_CLASSES} class probabilities, got {P.shape[-1]}")
            class_values = np.arange(N_QUALITY_CLASSES, dtype=float)
        class_values = np.asarray(class_values, dtype=float)
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise DomainError("probabilities must be finite and nonnegative")
    if np.any(np.abs(P.sum(axis=-1) - 1.0) > atol):
        raise DomainError("probabilities must sum to 1")
    if np.any((class_values < 0) | (class_values >= N_QUALITY_CLASSES)):
        raise DomainError("quality classes must lie in 0..9")
    return P @ class_values


def positive_posterior(P, classes, positive=1):
    """Ranking key for binary facet tasks: probability of the positive class."""
    classes = list(np.asarray(classes).tolist())
    P = np.asarray(P, dtype=float)
    if positive not in classes:
        return np.zeros(P.shape[:-1])
    return P[..., classes.index(positive)]


def rank_hosts(scores):
    """Sort by descending score, ties by ascending host name."""
    return sorted(scores, key=lambda s: (-s.score, s.host))


def write_ranking(fh, ranked):
    fh.write("# rank\thost\tscore\n")
    for r, s in enumerate(ranked, 1):
        fh.write(f"{r}\t{s.host}\t{float(s.score)!r}\n")
