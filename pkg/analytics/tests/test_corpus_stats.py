import math
from collections import Counter

import pytest

from analytics.corpus import reservoir_sample, select_shard
from analytics.corpus_stats import (
    F2_TRACE, F2_TREE, SCOPE_PRETOKEN, CorpusStats, StatsShard, accumulate, accumulate_shard, merge_shards,
    neighbor_entropy,
)
from analytics.tasks import run_sharded
from bpe.exceptions import IntegrityError, UnsupportedFlavorError
from conftest import build_standard_model


def named(model, counter):
    return {model.display(token): count for token, count in counter.items() if count}


@pytest.fixture
def spaced_model():
    return build_standard_model(['a', 'b', ' '], [('a', 'b'), ('ab', 'ab')])


@pytest.fixture
def fixture_stats(trained_model, fixture_corpus):
    return accumulate(trained_model, fixture_corpus, f2_mode=F2_TRACE)


class TestCounting:

    @pytest.mark.parametrize('f2_mode', [F2_TRACE, F2_TREE])
    def test_abab(self, abab_model, f2_mode):
        stats = accumulate(abab_model, [b'abab'], f2_mode=f2_mode)

        assert named(abab_model, stats.f1) == {'abab': 1}
        assert named(abab_model, stats.f2) == {'a': 2, 'b': 2, 'ab': 2}
        assert stats.total_docs == 1 and stats.total_tokens == 1

    def test_tree_without_multiplicity(self, abab_model):
        stats = accumulate(abab_model, [b'abab'], f2_mode=F2_TREE, count_multiplicity=False)
        assert named(abab_model, stats.f2) == {'a': 1, 'b': 1, 'ab': 1}

    def test_neighbors_cross_pretokens(self, spaced_model):
        stats = accumulate(spaced_model, [b'ab ab'])
        ab, space = spaced_model.token_to_id[b'ab'], spaced_model.token_to_id[b' ']

        assert stats.f1[ab] == 2
        assert stats.right_neighbors[ab] == Counter({space: 1})
        assert stats.left_neighbors[ab] == Counter({space: 1})

    def test_pretoken_scope(self, spaced_model):
        stats = accumulate(spaced_model, [b'ab ab'], neighbor_scope=SCOPE_PRETOKEN)
        ab, space = spaced_model.token_to_id[b'ab'], spaced_model.token_to_id[b' ']

        assert not stats.right_neighbors.get(ab)
        assert stats.right_neighbors[space] == Counter({ab: 1})

    def test_empty_corpus(self, abab_model):
        stats = accumulate(abab_model, [])

        assert stats.total_docs == 0
        assert not stats.f1 and not stats.f2
        assert neighbor_entropy(stats, 0) == (0.0, 0.0)

    def test_tree_matches_trace(self, trained_model, fixture_corpus, fixture_stats):
        tree = accumulate(trained_model, fixture_corpus, f2_mode=F2_TREE)

        assert tree.f1 == fixture_stats.f1
        assert +tree.f2 == +fixture_stats.f2

    def test_tree_needs_standard_flavor(self, greedy_model):
        with pytest.raises(UnsupportedFlavorError):
            accumulate(greedy_model, [b'abcd'], f2_mode=F2_TREE)

    def test_rank_greedy_defaults_to_trace(self, greedy_model):
        stats = accumulate(greedy_model, [b'abcd'])

        assert stats.f2_mode == F2_TRACE
        assert named(greedy_model, stats.f2) == {'a': 1, 'b': 1, 'c': 1, 'd': 1, 'cd': 1, 'bcd': 1}


class TestSharding:

    def test_shards_sum_to_single_pass(self, trained_model, fixture_corpus, fixture_stats):
        shards = [
            accumulate_shard(trained_model, select_shard(fixture_corpus, i, 3), f2_mode=F2_TRACE)
            for i in range(3)
        ]

        assert merge_shards(shards).to_dict() == fixture_stats.to_dict()
        assert merge_shards(shards[::-1]).to_dict() == fixture_stats.to_dict()

    def test_celery_group(self, trained_model, fixture_corpus, fixture_stats, tmp_path):
        corpus = tmp_path / 'corpus.txt'
        corpus.write_bytes(b'\n'.join(fixture_corpus) + b'\n')

        stats = run_sharded(
            trained_model, [str(corpus)], 'text', 4,
            f2_mode=F2_TRACE, neighbor_scope='document', count_multiplicity=True,
        )
        assert stats.to_dict() == fixture_stats.to_dict()

    def test_mismatched_settings(self, abab_model):
        trace = accumulate_shard(abab_model, [b'abab'], f2_mode=F2_TRACE)
        tree = accumulate_shard(abab_model, [b'abab'], f2_mode=F2_TREE)

        with pytest.raises(IntegrityError):
            merge_shards([trace, tree])

    def test_mismatched_tokenizers(self, abab_model, corruption_model):
        with pytest.raises(IntegrityError):
            merge_shards([accumulate_shard(abab_model, [b'ab']), accumulate_shard(corruption_model, [b' cor'])])

    def test_nothing_to_merge(self):
        with pytest.raises(ValueError):
            merge_shards([])

    def test_serialized_round_trip(self, fixture_stats):
        restored = CorpusStats.from_dict(fixture_stats.to_dict())
        assert restored.to_dict() == fixture_stats.to_dict()

    def test_not_a_stats_document(self):
        with pytest.raises(IntegrityError):
            StatsShard.from_dict({'format': 'residue-report', 'version': 1})


class TestEntropy:

    def stats_with(self, neighbors):
        stats = StatsShard(model_hash='x', f2_mode=F2_TRACE)
        stats.right_neighbors[0].update(neighbors)
        return stats

    @pytest.mark.parametrize('k', [2, 3, 4, 8])
    def test_uniform(self, k):
        _, right = neighbor_entropy(self.stats_with({token: 4 for token in range(1, k + 1)}), 0)
        assert right == pytest.approx(math.log(k), abs=1e-9)

    def test_skewed(self):
        _, right = neighbor_entropy(self.stats_with({1: 3, 2: 1}), 0)
        assert right == pytest.approx(0.5623, abs=1e-4)

    def test_single_neighbor(self):
        left, right = neighbor_entropy(self.stats_with({7: 12}), 0)
        assert (left, right) == (0.0, 0.0)


def test_reservoir_sample_is_seeded_and_ordered():
    documents = [str(i).encode() for i in range(1000)]

    first = reservoir_sample(documents, 50, seed=3)
    assert first == reservoir_sample(documents, 50, seed=3)
    assert len(first) == 50
    assert first == sorted(first, key=lambda doc: int(doc))
    assert reservoir_sample(documents[:10], 50) == documents[:10]
