"""
Merge graph over a vocabulary

Standard models give a tree: every non-base token has exactly one parent
pair. Rank-greedy models only store ranks, so every split of a token into two
lower-ranked vocabulary tokens is an admissible parent pair and the structure
is a DAG.
"""

import logging
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .exceptions import CannotSplitError, IntegrityError, InvalidTokenError, UnsupportedFlavorError
from .tokenizer import RANK_GREEDY, STANDARD, TokenizerModel

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]

CATEGORY_COLORS = {
    'frequent': 'green',
    'kept_low_ratio': 'goldenrod',
    'residue': 'red',
}


@dataclass(frozen=True)
class DescendantSet:
    """Tokens built on top of `token`, with subtree multiplicities"""
    token: int
    descendants: Counter

    def __len__(self) -> int:
        return len(self.descendants)


@dataclass
class MergeGraph:
    """
    Parent decompositions and child links for every token

    Args:
        parents: token -> admissible (left, right) pairs
        children: token -> tokens having it in some parent pair
        flavor: flavor of the source model
    """
    parents: Dict[int, List[Pair]]
    children: Dict[int, Set[int]]
    flavor: str
    vocab_size: int
    _descendants: Dict[Tuple[int, bool], DescendantSet] = field(default_factory=dict, repr=False)

    def parent_pairs(self, token: int) -> List[Pair]:
        return self.parents.get(token, [])

    def is_base(self, token: int) -> bool:
        return not self.parents.get(token)


def build_graph(model: TokenizerModel) -> MergeGraph:
    """
    Build the merge tree (standard) or merge DAG (rank_greedy)

    Args:
        model: a validated TokenizerModel

    Returns:
        MergeGraph; raises IntegrityError when the structure has a cycle
    """
    parents: Dict[int, List[Pair]] = {}

    if model.flavor == STANDARD:
        for rule in model.merges:
            parents[rule.result] = [(rule.left, rule.right)]
    else:
        for token_id, token in enumerate(model.vocab):
            if token_id in model.base_ids or token_id in model.specials:
                continue
            rank = model.ranks[token_id]
            pairs = []
            for cut in range(1, len(token)):
                left = model.token_to_id.get(token[:cut])
                right = model.token_to_id.get(token[cut:])
                if left is None or right is None or left in model.specials or right in model.specials:
                    continue
                if model.ranks[left] < rank and model.ranks[right] < rank:
                    pairs.append((left, right))
            if pairs:
                parents[token_id] = pairs

    children: Dict[int, Set[int]] = defaultdict(set)
    for token_id, pairs in parents.items():
        for left, right in pairs:
            children[left].add(token_id)
            children[right].add(token_id)

    graph = MergeGraph(parents=parents, children=dict(children), flavor=model.flavor, vocab_size=len(model))
    _check_acyclic(graph)
    logger.debug(f"Built {graph.flavor} merge graph with {len(parents)} composite tokens")
    return graph


def _check_acyclic(graph: MergeGraph):
    """Kahn's algorithm over parent -> child edges"""
    indegree = {token: len({p for pair in pairs for p in pair}) for token, pairs in graph.parents.items()}
    queue = deque(token for token in range(graph.vocab_size) if indegree.get(token, 0) == 0)
    visited = 0
    while queue:
        token = queue.popleft()
        visited += 1
        for child in graph.children.get(token, ()):
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    if visited != graph.vocab_size:
        raise IntegrityError("Merge graph contains a cycle")


def descendants(graph: MergeGraph, token: int, count_multiplicity: bool = True) -> DescendantSet:
    """
    All tokens whose merge tree contains `token`

    Args:
        graph: standard-flavor graph
        token: token id
        count_multiplicity: count every subtree occurrence (True) or each
            descendant once (False)

    Returns:
        DescendantSet, memoized on the graph
    """
    if graph.flavor != STANDARD:
        raise UnsupportedFlavorError("Descendant sets need a unique merge tree; use trace-based counting")
    if not 0 <= token < graph.vocab_size:
        raise InvalidTokenError(f"Token id {token} outside vocabulary")

    key = (token, count_multiplicity)
    cached = graph._descendants.get(key)
    if cached is not None:
        return cached

    reachable = set()
    stack = [token]
    while stack:
        for child in graph.children.get(stack.pop(), ()):
            if child not in reachable:
                reachable.add(child)
                stack.append(child)

    occurrences: Dict[int, int] = {}

    def occurrences_in(node: int) -> int:
        if node == token:
            return 1
        if node not in reachable:
            return 0
        if node not in occurrences:
            left, right = graph.parents[node][0]
            occurrences[node] = occurrences_in(left) + occurrences_in(right)
        return occurrences[node]

    counts = Counter()
    for node in sorted(reachable):
        counts[node] = occurrences_in(node) if count_multiplicity else 1

    result = DescendantSet(token=token, descendants=counts)
    graph._descendants[key] = result
    return result


def split_once(graph: MergeGraph, token: int, used_parent: Optional[Pair] = None) -> Pair:
    """
    Reverse one merge

    Args:
        graph: merge graph
        token: non-base token id
        used_parent: decomposition recorded in the encode trace; required for
            rank_greedy graphs, ignored for standard ones

    Returns:
        (left, right) parent pair
    """
    pairs = graph.parents.get(token)
    if not pairs:
        raise CannotSplitError(f"Token {token} is a base token and cannot be split")

    if graph.flavor == STANDARD:
        return pairs[0]

    if used_parent is None:
        raise InvalidTokenError(f"rank_greedy split of token {token} needs the decomposition used while encoding")
    used_parent = tuple(used_parent)
    if used_parent not in pairs:
        raise InvalidTokenError(f"{used_parent} is not an admissible parent pair of token {token}")
    return used_parent


def merge_tree(
        graph: MergeGraph,
        model: TokenizerModel,
        token: int,
        categories: Optional[Dict[int, str]] = None,
) -> dict:
    """
    Nested merge tree rooted at `token`

    rank_greedy nodes expand the parent pair whose larger rank is smallest
    and list the other admissible pairs under "alternatives".
    """
    node = {'id': token, 'token': model.display(token)}
    if categories and token in categories:
        node['category'] = categories[token]

    pairs = graph.parents.get(token)
    if not pairs:
        return node

    if graph.flavor == RANK_GREEDY:
        pairs = sorted(pairs, key=lambda pair: (max(model.ranks[pair[0]], model.ranks[pair[1]]), pair))
        if len(pairs) > 1:
            node['alternatives'] = [
                [model.display(left), model.display(right)] for left, right in pairs[1:]
            ]

    left, right = pairs[0]
    node['children'] = [
        merge_tree(graph, model, left, categories),
        merge_tree(graph, model, right, categories),
    ]
    return node


def to_dot(tree: dict) -> str:
    """Graphviz rendering of a merge_tree() result"""
    lines = ['digraph merge_tree {', '\tnode [shape=box];']
    counter = [0]

    def visit(node: dict) -> str:
        name = f"n{counter[0]}"
        counter[0] += 1
        label = node['token'].replace('\\', '\\\\').replace('"', '\\"')
        attrs = f'label="{label}"'
        color = CATEGORY_COLORS.get(node.get('category'))
        if color:
            attrs += f', style=filled, fillcolor={color}'
        lines.append(f'\t{name} [{attrs}];')
        for child in node.get('children', []):
            lines.append(f'\t{name} -> {visit(child)};')
        return name

    visit(tree)
    lines.append('}')
    return '\n'.join(lines) + '\n'
