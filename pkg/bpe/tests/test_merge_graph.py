from collections import Counter

import pytest

from bpe.exceptions import CannotSplitError, InvalidTokenError, UnsupportedFlavorError
from bpe.merge_graph import build_graph, descendants, merge_tree, split_once, to_dot


def token_id(model, text):
    return model.token_to_id[text.encode('utf-8')]


def leaf_counts(graph, node, memo):
    """Occurrences of every token inside the full merge tree of `node`"""
    if node not in memo:
        counts = Counter({node: 1})
        for parent in graph.parent_pairs(node)[:1]:
            for part in parent:
                counts.update(leaf_counts(graph, part, memo))
        memo[node] = counts
    return memo[node]


class TestDescendants:

    def test_matches_brute_force(self, trained_model):
        graph = build_graph(trained_model)
        memo = {}
        for token in range(0, len(trained_model), 7):
            expected = Counter()
            for other in range(len(trained_model)):
                if other != token and leaf_counts(graph, other, memo)[token]:
                    expected[other] = leaf_counts(graph, other, memo)[token]
            assert descendants(graph, token).descendants == expected

    def test_abab_multiplicity(self, abab_model):
        graph = build_graph(abab_model)
        a = token_id(abab_model, 'a')

        assert descendants(graph, a).descendants == {
            token_id(abab_model, 'ab'): 1,
            token_id(abab_model, 'abab'): 2,
        }
        assert descendants(graph, a, count_multiplicity=False).descendants[token_id(abab_model, 'abab')] == 1

    def test_rank_greedy_has_no_descendant_sets(self, greedy_model):
        with pytest.raises(UnsupportedFlavorError):
            descendants(build_graph(greedy_model), 0)

    def test_unknown_token(self, abab_model):
        with pytest.raises(InvalidTokenError):
            descendants(build_graph(abab_model), 42)


class TestSplit:

    def test_standard(self, corruption_model):
        graph = build_graph(corruption_model)
        left, right = split_once(graph, token_id(corruption_model, 'ruptions'))

        assert (corruption_model.display(left), corruption_model.display(right)) == ('ru', 'ptions')

    def test_base_token(self, corruption_model):
        with pytest.raises(CannotSplitError):
            split_once(build_graph(corruption_model), token_id(corruption_model, 'c'))

    def test_rank_greedy_parents(self, greedy_model):
        graph = build_graph(greedy_model)
        abcd = token_id(greedy_model, 'abcd')

        assert set(graph.parent_pairs(abcd)) == {
            (token_id(greedy_model, 'a'), token_id(greedy_model, 'bcd')),
            (token_id(greedy_model, 'ab'), token_id(greedy_model, 'cd')),
        }

    def test_rank_greedy_needs_trace_parent(self, greedy_model):
        graph = build_graph(greedy_model)
        abcd = token_id(greedy_model, 'abcd')
        used = (token_id(greedy_model, 'ab'), token_id(greedy_model, 'cd'))

        assert split_once(graph, abcd, used_parent=used) == used
        with pytest.raises(InvalidTokenError):
            split_once(graph, abcd)
        with pytest.raises(InvalidTokenError):
            split_once(graph, abcd, used_parent=(token_id(greedy_model, 'a'), token_id(greedy_model, 'b')))


class TestExport:

    def test_tree_and_dot(self, corruption_model):
        graph = build_graph(corruption_model)
        ruptions = token_id(corruption_model, 'ruptions')
        tree = merge_tree(graph, corruption_model, ruptions, categories={ruptions: 'residue'})

        assert tree['token'] == 'ruptions'
        assert [child['token'] for child in tree['children']] == ['ru', 'ptions']
        dot = to_dot(tree)
        assert dot.startswith('digraph merge_tree {')
        assert 'fillcolor=red' in dot
        assert dot.count('->') == 14

    def test_rank_greedy_alternatives(self, greedy_model):
        graph = build_graph(greedy_model)
        tree = merge_tree(graph, greedy_model, token_id(greedy_model, 'abcd'))

        assert [child['token'] for child in tree['children']] == ['a', 'bcd']
        assert tree['alternatives'] == [['ab', 'cd']]
