"""
Corpus statistics behind the residue scores

For every token: F1 (final occurrences), F2 (occurrences formed and then
consumed by a later merge) and left/right neighbor counts over the final
token sequence of each document.

F2 modes:
- trace: count every consumed formation recorded while encoding (any flavor)
- tree: derive F2 from F1 through the merge tree after the pass
  (standard flavor only)
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import ClassVar, Dict, Iterable, List, Optional, Sequence, Tuple

from scipy.stats import entropy

from bpe.exceptions import IntegrityError, UnsupportedFlavorError
from bpe.merge_graph import MergeGraph, build_graph, descendants
from bpe.tokenizer import STANDARD, TokenizerModel

logger = logging.getLogger(__name__)

F2_TRACE = 'trace'
F2_TREE = 'tree'
F2_MODES = (F2_TRACE, F2_TREE)

SCOPE_DOCUMENT = 'document'
SCOPE_PRETOKEN = 'pretoken'
NEIGHBOR_SCOPES = (SCOPE_DOCUMENT, SCOPE_PRETOKEN)

STATS_FORMAT = 'corpus-stats'
SHARD_FORMAT = 'corpus-stats-shard'
STATS_VERSION = 1

PROGRESS_INTERVAL = 10_000


def default_f2_mode(model: TokenizerModel) -> str:
    return F2_TREE if model.flavor == STANDARD else F2_TRACE


def _neighbor_table() -> Dict[int, Counter]:
    return defaultdict(Counter)


@dataclass
class StatsShard:
    """
    Counters over one corpus partition

    Args:
        model_hash: content hash of the tokenizer that produced the counts
        f2_mode: 'trace' or 'tree'
        neighbor_scope: 'document' (pairs cross pretokens) or 'pretoken'
        count_multiplicity: tree mode counts every subtree occurrence
    """
    FORMAT: ClassVar[str] = SHARD_FORMAT

    model_hash: str
    f2_mode: str
    neighbor_scope: str = SCOPE_DOCUMENT
    count_multiplicity: bool = True
    total_docs: int = 0
    total_tokens: int = 0
    f1: Counter = field(default_factory=Counter)
    f2: Counter = field(default_factory=Counter)
    left_neighbors: Dict[int, Counter] = field(default_factory=_neighbor_table)
    right_neighbors: Dict[int, Counter] = field(default_factory=_neighbor_table)

    def key(self) -> Tuple[str, str, str, bool]:
        return self.model_hash, self.f2_mode, self.neighbor_scope, self.count_multiplicity

    def observed(self, token: int) -> bool:
        return self.f1.get(token, 0) + self.f2.get(token, 0) > 0

    def to_dict(self, run_config: Optional[dict] = None) -> dict:
        return {
            'format': self.FORMAT,
            'version': STATS_VERSION,
            'model_hash': self.model_hash,
            'f2_mode': self.f2_mode,
            'neighbor_scope': self.neighbor_scope,
            'count_multiplicity': self.count_multiplicity,
            'total_docs': self.total_docs,
            'total_tokens': self.total_tokens,
            'f1': _dump_counter(self.f1),
            'f2': _dump_counter(self.f2),
            'left_neighbors': _dump_table(self.left_neighbors),
            'right_neighbors': _dump_table(self.right_neighbors),
            'run_config': run_config or {},
        }

    @classmethod
    def from_dict(cls, data: dict):
        if data.get('format') not in (STATS_FORMAT, SHARD_FORMAT):
            raise IntegrityError(f"Not a corpus statistics document (format {data.get('format')!r})")
        if data.get('version') != STATS_VERSION:
            raise IntegrityError(f"Unsupported statistics version {data.get('version')!r}")
        try:
            stats = cls(
                model_hash=data['model_hash'],
                f2_mode=data['f2_mode'],
                neighbor_scope=data['neighbor_scope'],
                count_multiplicity=bool(data['count_multiplicity']),
                total_docs=int(data['total_docs']),
                total_tokens=int(data['total_tokens']),
                f1=_load_counter(data['f1']),
                f2=_load_counter(data['f2']),
            )
            stats.left_neighbors.update(_load_table(data['left_neighbors']))
            stats.right_neighbors.update(_load_table(data['right_neighbors']))
        except (KeyError, TypeError, ValueError) as e:
            raise IntegrityError(f"Malformed statistics document: {e}")
        if stats.f2_mode not in F2_MODES or stats.neighbor_scope not in NEIGHBOR_SCOPES:
            raise IntegrityError(f"Unknown f2_mode/neighbor_scope: {stats.f2_mode}/{stats.neighbor_scope}")
        return stats


@dataclass
class CorpusStats(StatsShard):
    """Merged counters for a whole corpus"""
    FORMAT: ClassVar[str] = STATS_FORMAT


def _dump_counter(counter: Counter) -> Dict[str, int]:
    return {str(token): count for token, count in sorted(counter.items()) if count}


def _load_counter(data: Dict[str, int]) -> Counter:
    return Counter({int(token): int(count) for token, count in data.items()})


def _dump_table(table: Dict[int, Counter]) -> Dict[str, Dict[str, int]]:
    return {str(token): _dump_counter(counter) for token, counter in sorted(table.items()) if counter}


def _load_table(data: Dict[str, Dict[str, int]]) -> Dict[int, Counter]:
    return {int(token): _load_counter(counter) for token, counter in data.items()}


def tree_f2(
        graph: MergeGraph,
        model: TokenizerModel,
        f1: Counter,
        count_multiplicity: bool = True,
) -> Counter:
    """
    F2 from the merge tree: f2(t) = sum over descendants d of mult(t, d) * f1(d)

    With multiplicity the counts flow down the tree from longer tokens to
    their parents in one pass; without it every descendant counts once.
    """
    f2: Counter = Counter()
    if count_multiplicity:
        inherited: Counter = Counter()
        for token in sorted(range(len(model)), key=lambda t: (-len(model.vocab[t]), -t)):
            flow = f1.get(token, 0) + inherited.get(token, 0)
            if not flow or graph.is_base(token):
                continue
            left, right = graph.parent_pairs(token)[0]
            inherited[left] += flow
            inherited[right] += flow
        f2.update({token: count for token, count in inherited.items() if count})
        return f2

    for token in graph.children:
        total = sum(f1.get(d, 0) for d in descendants(graph, token, count_multiplicity=False).descendants)
        if total:
            f2[token] = total
    return f2


def accumulate_shard(
        model: TokenizerModel,
        docs: Iterable[bytes],
        f2_mode: Optional[str] = None,
        neighbor_scope: str = SCOPE_DOCUMENT,
        count_multiplicity: bool = True,
        graph: Optional[MergeGraph] = None,
) -> StatsShard:
    """
    Encode every document and accumulate its counters

    Args:
        model: tokenizer to analyze
        docs: documents as byte strings
        f2_mode: 'trace' or 'tree'; defaults to tree for standard models and
            trace for rank_greedy ones
        neighbor_scope: 'document' or 'pretoken'
        count_multiplicity: tree mode only
        graph: prebuilt merge graph for tree mode

    Returns:
        StatsShard over `docs`
    """
    f2_mode = f2_mode or default_f2_mode(model)
    if f2_mode not in F2_MODES:
        raise ValueError(f"Unknown f2_mode: {f2_mode}")
    if neighbor_scope not in NEIGHBOR_SCOPES:
        raise ValueError(f"Unknown neighbor scope: {neighbor_scope}")
    if f2_mode == F2_TREE and model.flavor != STANDARD:
        raise UnsupportedFlavorError("Tree-mode F2 needs a standard-flavor tokenizer; use --f2-mode trace")

    shard = StatsShard(
        model_hash=model.content_hash,
        f2_mode=f2_mode,
        neighbor_scope=neighbor_scope,
        count_multiplicity=count_multiplicity,
    )

    for doc in docs:
        trace = model.encode(doc)
        ids = trace.final_ids
        shard.total_docs += 1
        shard.total_tokens += len(ids)
        shard.f1.update(ids)

        if f2_mode == F2_TRACE:
            shard.f2.update(f.token for f in trace.formations if not f.survived)

        if neighbor_scope == SCOPE_DOCUMENT:
            spans = [(0, len(ids))]
        else:
            spans = trace.pretoken_spans
        for start, end in spans:
            for left, right in zip(ids[start:end - 1], ids[start + 1:end]):
                shard.right_neighbors[left][right] += 1
                shard.left_neighbors[right][left] += 1

        if shard.total_docs % PROGRESS_INTERVAL == 0:
            logger.debug(f"Processed {shard.total_docs} documents, {shard.total_tokens} tokens")

    if f2_mode == F2_TREE:
        graph = graph or build_graph(model)
        shard.f2 = tree_f2(graph, model, shard.f1, count_multiplicity)

    logger.info(f"Accumulated {shard.total_docs} documents, {shard.total_tokens} tokens ({f2_mode} F2)")
    return shard


def merge_shards(shards: Sequence[StatsShard]) -> CorpusStats:
    """
    Element-wise sum of shard counters

    All shards must share model hash, f2_mode, neighbor scope and the
    multiplicity switch.
    """
    if not shards:
        raise ValueError("Nothing to merge")
    key = shards[0].key()
    for shard in shards[1:]:
        if shard.key() != key:
            if shard.model_hash != key[0]:
                raise IntegrityError(
                    f"Shard built from tokenizer {shard.model_hash[:12]}, expected {key[0][:12]}"
                )
            raise IntegrityError(f"Shard settings {shard.key()[1:]} differ from {key[1:]}")

    merged = CorpusStats(
        model_hash=key[0],
        f2_mode=key[1],
        neighbor_scope=key[2],
        count_multiplicity=key[3],
    )
    for shard in shards:
        merged.total_docs += shard.total_docs
        merged.total_tokens += shard.total_tokens
        merged.f1.update(shard.f1)
        merged.f2.update(shard.f2)
        for token, counter in shard.left_neighbors.items():
            merged.left_neighbors[token].update(counter)
        for token, counter in shard.right_neighbors.items():
            merged.right_neighbors[token].update(counter)
    return merged


def accumulate(
        model: TokenizerModel,
        docs: Iterable[bytes],
        f2_mode: Optional[str] = None,
        neighbor_scope: str = SCOPE_DOCUMENT,
        count_multiplicity: bool = True,
) -> CorpusStats:
    """Single-pass statistics over a whole corpus"""
    return merge_shards([accumulate_shard(model, docs, f2_mode, neighbor_scope, count_multiplicity)])


def _side_entropy(counter: Optional[Counter]) -> float:
    if not counter:
        return 0.0
    return float(entropy(list(counter.values())))


def neighbor_entropy(stats: StatsShard, token: int) -> Tuple[float, float]:
    """
    Left and right neighbor entropies of a token, in nats

    Maximum-likelihood probabilities, no smoothing; an empty side scores 0.
    """
    return (
        _side_entropy(stats.left_neighbors.get(token)),
        _side_entropy(stats.right_neighbors.get(token)),
    )


def shard_counts(stats: StatsShard) -> List[Tuple[str, int]]:
    """Summary rows for logging and command output"""
    return [
        ('documents', stats.total_docs),
        ('tokens', stats.total_tokens),
        ('distinct final tokens', len(stats.f1)),
        ('distinct consumed tokens', len(stats.f2)),
    ]
