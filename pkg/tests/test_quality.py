import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from hostquality.errors import DomainError
from hostquality.quality import (
    QualityScore, expected_quality, positive_posterior, rank_hosts, write_ranking,
)

simplex = st.lists(st.floats(0, 1), min_size=10, max_size=10).filter(lambda v: sum(v) > 0.1).map(
    lambda v: np.array(v) / sum(v)
)


def test_examples():
    P = np.zeros(10)
    P[0] = 1.0
    assert expected_quality(P) == 0.0
    assert expected_quality(np.full(10, 0.1)) == pytest.approx(4.5, abs=1e-12)
    assert expected_quality({5: 0.6, 7: 0.4}) == pytest.approx(5.8, abs=1e-12)
    assert expected_quality([0.6, 0.4], class_values=[5, 7]) == pytest.approx(5.8, abs=1e-12)


@pytest.mark.parametrize("P", [np.full(10, 0.2), np.r_[-0.1, 1.1, np.zeros(8)], np.full(9, 1 / 9)])
def test_malformed(P):
    with pytest.raises(DomainError):
        expected_quality(P)


@given(simplex, st.integers(0, 9), st.integers(0, 9), st.floats(0.01, 1.0))
def test_mass_shift_and_range(P, i, j, frac):
    assume(i < j and P[i] > 0)
    eps = P[i] * frac
    Q = P.copy()
    Q[i] -= eps
    Q[j] += eps
    assert expected_quality(Q) - expected_quality(P) == pytest.approx(eps * (j - i), abs=1e-9)
    assert 0.0 <= expected_quality(P) <= 9.0


def test_positive_posterior():
    P = np.array([[0.3, 0.7], [0.9, 0.1]])
    assert positive_posterior(P, [0, 1]).tolist() == [0.7, 0.1]
    assert positive_posterior(P[:, :1], [0]).tolist() == [0.0, 0.0]


def test_rank_examples():
    assert [s.host for s in rank_hosts([QualityScore("a", 1), QualityScore("b", 5)])] == ["b", "a"]
    assert [s.host for s in rank_hosts([QualityScore("b", 3), QualityScore("a", 3)])] == ["a", "b"]
    mixed = [QualityScore("m", 2.0), QualityScore("k", 7.5), QualityScore("z", 2.0)]
    assert rank_hosts(mixed) == sorted(mixed, key=lambda s: (-s.score, s.host))


@given(st.lists(st.tuples(st.text("abc", min_size=1, max_size=3), st.integers(0, 5)),
                unique_by=lambda t: t[0]), st.randoms(use_true_random=False))
def test_rank_permutation_and_deterministic(pairs, rnd):
    scores = [QualityScore(h, float(s)) for h, s in pairs]
    shuffled = list(scores)
    rnd.shuffle(shuffled)
    ranked = rank_hosts(scores)
    assert sorted(ranked, key=lambda s: s.host) == sorted(scores, key=lambda s: s.host)
    assert rank_hosts(shuffled) == ranked


def test_write_ranking_full_precision(tmp_path):
    p = tmp_path / "ranking.tsv"
    with open(p, "w") as fh:
        write_ranking(fh, [QualityScore("a", 1 / 3)])
    line = p.read_text().splitlines()[1]
    assert line.split("\t") == ["1", "a", repr(1 / 3)]
