"""
BPE Tokenizer Model
Immutable vocabulary + merge table, with encoding in two flavors:

- standard: replay the learned merges, lowest rank first, within each pretoken
- rank_greedy: repeatedly merge the adjacent pair whose concatenation is the
  lowest-ranked vocabulary token (tiktoken style, no stored merge tree)

Every encoding returns an EncodeTrace recording each formation, so callers can
tell which tokens survived to the output and which were consumed by later
merges.
"""

import base64
import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .exceptions import IntegrityError, InvalidTokenError, UnknownByteError
from .pretokenizer import Pretokenizer, PretokenizerConfig, split_specials

logger = logging.getLogger(__name__)

STANDARD = 'standard'
RANK_GREEDY = 'rank_greedy'
FLAVORS = (STANDARD, RANK_GREEDY)

NATIVE_FORMAT = 'bpe-native'
NATIVE_VERSION = 1

DEFAULT_CACHE_SIZE = 100_000


class MergeRule(NamedTuple):
    """bytes(result) == bytes(left) + bytes(right); lower rank merges first"""
    rank: int
    left: int
    right: int
    result: int


class Formation(NamedTuple):
    """
    One token occurrence created while encoding

    Base atoms and specials have rule None and no children; merged tokens
    point at the two formations they consumed.
    """
    token: int
    rule: Optional[MergeRule]
    left: int = -1
    right: int = -1
    survived: bool = False


@dataclass
class EncodeTrace:
    """
    Full record of one encoding

    Args:
        final_ids: emitted token ids
        formations: every formation, in creation order
        final_nodes: index into formations for each final id
        pretoken_spans: (start, end) ranges over final_ids, one per pretoken
    """
    final_ids: List[int] = field(default_factory=list)
    formations: List[Formation] = field(default_factory=list)
    final_nodes: List[int] = field(default_factory=list)
    pretoken_spans: List[Tuple[int, int]] = field(default_factory=list)

    def consumed(self) -> List[Formation]:
        return [f for f in self.formations if not f.survived]


class _PretokenEncoding(NamedTuple):
    ids: Tuple[int, ...]
    formations: Tuple[Formation, ...]
    nodes: Tuple[int, ...]


class TokenizerModel:
    """
    Immutable BPE model

    Args:
        vocab: token byte strings indexed by id
        base_ids: ids of the initial alphabet
        merges: MergeRule list (standard flavor); empty for rank_greedy
        flavor: 'standard' or 'rank_greedy'
        pretokenizer: PretokenizerConfig
        specials: ids never analyzed, split or removed
        ranks: per-id rank (rank_greedy only); defaults to the id itself
        cache_size: bound on the per-pretoken encoding cache
    """

    def __init__(
            self,
            vocab: Sequence[bytes],
            base_ids: Iterable[int],
            merges: Sequence[MergeRule] = (),
            flavor: str = STANDARD,
            pretokenizer: Optional[PretokenizerConfig] = None,
            specials: Iterable[int] = (),
            ranks: Optional[Sequence[int]] = None,
            cache_size: int = DEFAULT_CACHE_SIZE,
    ):
        if flavor not in FLAVORS:
            raise IntegrityError(f"Unknown flavor: {flavor}")

        self.vocab: Tuple[bytes, ...] = tuple(bytes(token) for token in vocab)
        self.base_ids: FrozenSet[int] = frozenset(base_ids)
        self.merges: Tuple[MergeRule, ...] = tuple(MergeRule(*rule) for rule in merges)
        self.flavor = flavor
        self.pretokenizer_config = pretokenizer or PretokenizerConfig()
        self.specials: FrozenSet[int] = frozenset(specials)

        if flavor == RANK_GREEDY:
            self.ranks: Tuple[int, ...] = tuple(ranks) if ranks is not None else tuple(range(len(self.vocab)))
        else:
            self.ranks = tuple(ranks) if ranks is not None else ()

        self.token_to_id: Dict[bytes, int] = {}
        for token_id, token in enumerate(self.vocab):
            if token in self.token_to_id:
                raise IntegrityError(f"Duplicate token bytes {token!r} for ids {self.token_to_id[token]} and {token_id}")
            self.token_to_id[token] = token_id

        self.merge_lookup: Dict[Tuple[int, int], MergeRule] = {
            (rule.left, rule.right): rule for rule in self.merges
        }
        self.rank_lookup: Dict[bytes, int] = {}
        if flavor == RANK_GREEDY:
            self.rank_lookup = {
                self.vocab[token_id]: rank
                for token_id, rank in enumerate(self.ranks)
                if token_id not in self.specials
            }

        self._pretokenizer = Pretokenizer(self.pretokenizer_config)
        self._special_bytes = [self.vocab[token_id] for token_id in sorted(self.specials)]
        self._cache: Dict[bytes, _PretokenEncoding] = {}
        self._cache_size = cache_size

        self.validate()

    # ------------------------------------------------------------------
    # Structure
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.vocab)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    @cached_property
    def byte_units(self) -> Dict[bytes, int]:
        """Base tokens keyed by their bytes"""
        return {self.vocab[token_id]: token_id for token_id in self.base_ids}

    @cached_property
    def missing_bytes(self) -> Tuple[int, ...]:
        """Byte values with no single-byte base token; input holding one cannot be encoded"""
        byte_units = self.byte_units
        return tuple(byte for byte in range(256) if bytes([byte]) not in byte_units)

    @property
    def covers_all_bytes(self) -> bool:
        return not self.missing_bytes

    def validate(self):
        """Check the structural invariants of the model"""
        size = len(self.vocab)
        for token_id in self.base_ids | self.specials:
            if not 0 <= token_id < size:
                raise IntegrityError(f"Token id {token_id} outside vocabulary of size {size}")

        if any(not token for token in self.vocab):
            raise IntegrityError("Empty token in vocabulary")

        if self.flavor == STANDARD:
            seen_ranks = set()
            produced = {}
            for rule in self.merges:
                for token_id in (rule.left, rule.right, rule.result):
                    if not 0 <= token_id < size:
                        raise IntegrityError(f"Merge rank {rule.rank} references unknown id {token_id}")
                if rule.rank in seen_ranks:
                    raise IntegrityError(f"Duplicate merge rank {rule.rank}")
                seen_ranks.add(rule.rank)
                if self.vocab[rule.left] + self.vocab[rule.right] != self.vocab[rule.result]:
                    raise IntegrityError(f"Merge rank {rule.rank} does not concatenate to its result")
                if rule.result in produced:
                    raise IntegrityError(
                        f"Token {rule.result} produced by merges {produced[rule.result]} and {rule.rank}"
                    )
                if rule.result in self.base_ids:
                    raise IntegrityError(f"Base token {rule.result} is produced by merge {rule.rank}")
                produced[rule.result] = rule.rank

            orphans = set(range(size)) - self.base_ids - self.specials - set(produced)
            if orphans:
                raise IntegrityError(f"{len(orphans)} tokens are neither base, special nor merge results")
        else:
            if len(self.ranks) != size:
                raise IntegrityError("rank_greedy model needs one rank per token")
            if len(set(self.ranks)) != size:
                raise IntegrityError("Duplicate ranks in rank table")

    @cached_property
    def content_hash(self) -> str:
        """SHA-256 over the canonical native JSON of the model"""
        payload = json.dumps(self.to_native(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()

    def is_ascii(self, token_id: int) -> bool:
        return all(byte < 0x80 for byte in self.vocab[token_id])

    def display(self, token_id: int) -> str:
        return display_token(self.vocab[token_id])

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_native(self) -> dict:
        """Native JSON document (see docs/NATIVE_FORMAT.md)"""
        data = {
            'format': NATIVE_FORMAT,
            'version': NATIVE_VERSION,
            'flavor': self.flavor,
            'pretokenizer': self.pretokenizer_config.to_dict(),
            'vocab': [base64.b64encode(token).decode('ascii') for token in self.vocab],
            'base_ids': sorted(self.base_ids),
            'merges': [list(rule) for rule in self.merges],
            'specials': sorted(self.specials),
        }
        if self.flavor == RANK_GREEDY:
            data['ranks'] = list(self.ranks)
        return data

    @classmethod
    def from_native(cls, data: dict, cache_size: int = DEFAULT_CACHE_SIZE) -> 'TokenizerModel':
        return cls(
            vocab=[base64.b64decode(token) for token in data['vocab']],
            base_ids=data['base_ids'],
            merges=[MergeRule(*rule) for rule in data.get('merges', [])],
            flavor=data['flavor'],
            pretokenizer=PretokenizerConfig.from_dict(data.get('pretokenizer')),
            specials=data.get('specials', []),
            ranks=data.get('ranks'),
            cache_size=cache_size,
        )

    # ------------------------------------------------------------------
    # Encoding
    # ------------------------------------------------------------------

    def pretokenize(self, text: bytes) -> List[Tuple[bytes, bool]]:
        """Split into (pretoken, is_special) pieces, specials matched first"""
        pieces = []
        for chunk, is_special in split_specials(text, self._special_bytes):
            if is_special:
                pieces.append((chunk, True))
            else:
                pieces.extend((piece, False) for piece in self._pretokenizer(chunk))
        return pieces

    def encode(self, text: bytes) -> EncodeTrace:
        """
        Encode bytes, recording every formation

        Args:
            text: any byte string

        Returns:
            EncodeTrace with final ids, formations and pretoken spans
        """
        trace = EncodeTrace()
        for piece, is_special in self.pretokenize(text):
            start = len(trace.final_ids)
            if is_special:
                special_id = self.token_to_id[piece]
                trace.final_nodes.append(len(trace.formations))
                trace.formations.append(Formation(special_id, None, survived=True))
                trace.final_ids.append(special_id)
            else:
                local = self.encode_pretoken(piece)
                offset = len(trace.formations)
                for formation in local.formations:
                    if formation.rule is not None:
                        formation = formation._replace(left=formation.left + offset, right=formation.right + offset)
                    trace.formations.append(formation)
                trace.final_nodes.extend(node + offset for node in local.nodes)
                trace.final_ids.extend(local.ids)
            trace.pretoken_spans.append((start, len(trace.final_ids)))
        return trace

    def encode_ids(self, text: bytes) -> List[int]:
        return self.encode(text).final_ids

    def encode_pretoken(self, piece: bytes) -> _PretokenEncoding:
        """Encode one pretoken, memoized per model"""
        cached = self._cache.get(piece)
        if cached is not None:
            return cached

        units = self._initial_units(piece)
        if self.flavor == STANDARD:
            encoding = self._merge_standard(units)
        else:
            encoding = self._merge_rank_greedy(units)

        if len(self._cache) >= self._cache_size:
            self._cache.clear()
        self._cache[piece] = encoding
        return encoding

    def _initial_units(self, piece: bytes) -> List[int]:
        """Map a pretoken onto base tokens: whole characters first, then bytes"""
        units = []
        byte_units = self.byte_units
        for char in piece.decode('utf-8', errors='surrogateescape'):
            char_bytes = char.encode('utf-8', errors='surrogateescape')
            token_id = byte_units.get(char_bytes)
            if token_id is not None:
                units.append(token_id)
                continue
            for byte in char_bytes:
                token_id = byte_units.get(bytes([byte]))
                if token_id is None:
                    raise UnknownByteError(f"Byte 0x{byte:02x} is not covered by the base alphabet")
                units.append(token_id)
        return units

    def _merge_standard(self, units: List[int]) -> _PretokenEncoding:
        formations = [Formation(token_id, None) for token_id in units]
        symbols = list(units)
        nodes = list(range(len(units)))

        while len(symbols) > 1:
            best = None
            for pair in zip(symbols, symbols[1:]):
                rule = self.merge_lookup.get(pair)
                if rule is not None and (best is None or rule.rank < best.rank):
                    best = rule
            if best is None:
                break

            # Merge every non-overlapping occurrence, left to right
            merged_symbols, merged_nodes = [], []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and symbols[i] == best.left and symbols[i + 1] == best.right:
                    merged_nodes.append(len(formations))
                    formations.append(Formation(best.result, best, nodes[i], nodes[i + 1]))
                    merged_symbols.append(best.result)
                    i += 2
                else:
                    merged_symbols.append(symbols[i])
                    merged_nodes.append(nodes[i])
                    i += 1
            symbols, nodes = merged_symbols, merged_nodes

        return self._finish(symbols, formations, nodes)

    def _merge_rank_greedy(self, units: List[int]) -> _PretokenEncoding:
        formations = [Formation(token_id, None) for token_id in units]
        symbols = list(units)
        nodes = list(range(len(units)))
        vocab = self.vocab

        while len(symbols) > 1:
            best_rank, best_index = None, -1
            for i in range(len(symbols) - 1):
                rank = self.rank_lookup.get(vocab[symbols[i]] + vocab[symbols[i + 1]])
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_index = rank, i
            if best_rank is None:
                break

            left, right = symbols[best_index], symbols[best_index + 1]
            result = self.token_to_id[vocab[left] + vocab[right]]
            rule = MergeRule(best_rank, left, right, result)
            formations.append(Formation(result, rule, nodes[best_index], nodes[best_index + 1]))
            symbols[best_index:best_index + 2] = [result]
            nodes[best_index:best_index + 2] = [len(formations) - 1]

        return self._finish(symbols, formations, nodes)

    @staticmethod
    def _finish(symbols: List[int], formations: List[Formation], nodes: List[int]) -> _PretokenEncoding:
        for node in nodes:
            formations[node] = formations[node]._replace(survived=True)
        return _PretokenEncoding(tuple(symbols), tuple(formations), tuple(nodes))

    # ------------------------------------------------------------------
    # Decoding
    # ------------------------------------------------------------------

    def decode(self, ids: Iterable[int]) -> bytes:
        """Concatenate token bytes; raises InvalidTokenError on unknown ids"""
        size = len(self.vocab)
        parts = []
        for token_id in ids:
            if not 0 <= token_id < size:
                raise InvalidTokenError(f"Token id {token_id} outside vocabulary of size {size}")
            parts.append(self.vocab[token_id])
        return b''.join(parts)


def encode(model: TokenizerModel, text: bytes) -> EncodeTrace:
    return model.encode(text)


def decode(model: TokenizerModel, ids: Iterable[int]) -> bytes:
    return model.decode(ids)


def display_token(token: bytes) -> str:
    """Readable token text with leading spaces shown as ␣"""
    text = token.decode('utf-8', errors='backslashreplace')
    stripped = text.lstrip(' ')
    return '␣' * (len(text) - len(stripped)) + stripped


def render_tokens(model: TokenizerModel, ids: Iterable[int], separator: str = '|') -> str:
    return separator.join(model.display(token_id) for token_id in ids)
