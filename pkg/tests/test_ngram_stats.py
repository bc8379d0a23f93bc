import math

import pytest
from hypothesis import given, strategies as st

from curriculum_lm.corpus import Corpus
from curriculum_lm.ngram_stats import (
    NGramTable, UndefinedDistributionError, count_ngrams, count_ngrams_sharded, dump_table, ngram_prob,
)

from conftest import toy_corpus
from oracles import brute_ngram_counts


def test_unigram_counts(tiny3):
    t = count_ngrams(tiny3, 1)
    assert dict(t.counts) == {("a",): 3, ("b",): 2, ("c",): 1}
    assert t.total == 6


def test_bigram_counts_skip_short_samples(tiny3):
    t = count_ngrams(tiny3, 2)
    assert dict(t.counts) == {("a", "a"): 1, ("a", "b"): 2}
    assert t.total == 3


def test_trigram_of_short_sample_is_empty():
    t = count_ngrams(toy_corpus("c"), 3)
    assert dict(t.counts) == {} and t.total == 0


def test_probabilities(tiny3):
    assert ngram_prob(count_ngrams(tiny3, 1), ["a"]) == pytest.approx(0.5, abs=0)
    assert ngram_prob(count_ngrams(tiny3, 2), ("a", "b")) == 2 / 3
    assert ngram_prob(count_ngrams(tiny3, 2), ("b", "a")) == 0.0


def test_unique_denominator_flag(tiny3):
    # 3 occurrences of "a" over 3 distinct unigrams
    assert ngram_prob(count_ngrams(tiny3, 1), ("a",), denominator="unique") == 1.0


def test_empty_table_probability_is_an_error():
    with pytest.raises(UndefinedDistributionError):
        ngram_prob(count_ngrams(toy_corpus("c"), 3), ("a", "b", "c"))


def test_table_invariants_checked():
    with pytest.raises(ValueError):
        NGramTable(2, {("a",): 1}, 1)
    with pytest.raises(ValueError):
        NGramTable(1, {("a",): 1}, 2)
    with pytest.raises(ValueError):
        count_ngrams(toy_corpus("a"), 4)


def test_dump_sorted(tmp_path, tiny3):
    p = tmp_path / "t.tsv"
    dump_table(count_ngrams(tiny3, 2), p)
    assert p.read_text() == "a a\t1\na b\t2\n"


corpora = st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=8), min_size=1, max_size=15)


@given(corpora, st.sampled_from([1, 2, 3]))
def test_matches_brute_force(lines, order):
    c = Corpus.from_token_lists(lines)
    t = count_ngrams(c, order)
    assert dict(t.counts) == brute_ngram_counts(lines, order)
    if t.total:
        assert math.isclose(sum(ngram_prob(t, g) for g in t.counts), 1.0, abs_tol=1e-12)


@given(corpora, st.sampled_from([1, 2, 3]), st.randoms(use_true_random=False))
def test_shuffle_invariant(lines, order, rnd):
    shuffled = list(lines)
    rnd.shuffle(shuffled)
    assert count_ngrams(Corpus.from_token_lists(lines), order) == count_ngrams(Corpus.from_token_lists(shuffled), order)


@given(corpora, st.sampled_from([1, 2, 3]), st.integers(1, 7))
def test_sharded_equals_single(lines, order, shards):
    c = Corpus.from_token_lists(lines)
    assert count_ngrams_sharded(c, order, shards=shards) == count_ngrams(c, order)


def test_sharded_in_processes(fixture_train):
    for order in (1, 2, 3):
        assert count_ngrams_sharded(fixture_train, order, shards=3, workers=2) == count_ngrams(fixture_train, order)
