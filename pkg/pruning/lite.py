"""
Lite tokenizer: a base model with its residue tokens removed

Encoding runs the base model, splits every emitted residue back into the
parts it was formed from (recursively, following the encode trace) and can
then re-merge each affected pretoken with the merges that survive the
removal.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from bpe.exceptions import EligibilityError, IntegrityError, InvalidTokenError
from bpe.loaders import Source, read_native, save_native
from bpe.tokenizer import DEFAULT_CACHE_SIZE, STANDARD, EncodeTrace, MergeRule, TokenizerModel

logger = logging.getLogger(__name__)

ORIGINAL = 'original'
SPLIT_ONLY = 'split_only'
SPLIT_REMERGE = 'split_remerge'
INCREMENTAL = 'incremental'
LITE_MODES = (SPLIT_ONLY, SPLIT_REMERGE, INCREMENTAL)
ENCODE_MODES = (ORIGINAL,) + LITE_MODES

Span = Tuple[int, int]


@dataclass(frozen=True)
class LiteEncoding:
    ids: Tuple[int, ...]
    mode: str

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class SplitResult:
    """Split ids with pretoken spans remapped onto them"""
    ids: List[int]
    pretoken_spans: List[Span]
    touched: List[bool]


class LiteTokenizer:
    """
    Base model plus the set of removed ids

    Args:
        base: the unpruned model
        imr: ids to remove; never base, special or non-ASCII tokens
    """

    def __init__(self, base: TokenizerModel, imr: Iterable[int]):
        self.base = base
        self.imr: FrozenSet[int] = frozenset(imr)
        self.removed_ids: List[int] = sorted(self.imr)

        if base.flavor == STANDARD:
            self.surviving_merges: Tuple[MergeRule, ...] = tuple(
                rule for rule in base.merges if rule.result not in self.imr
            )
            self.surviving_ranks: Dict[bytes, int] = {}
        else:
            self.surviving_merges = ()
            self.surviving_ranks = {
                token: rank for token, rank in base.rank_lookup.items()
                if base.token_to_id[token] not in self.imr
            }
        self.merge_lookup: Dict[Tuple[int, int], MergeRule] = {
            (rule.left, rule.right): rule for rule in self.surviving_merges
        }

    def __len__(self) -> int:
        return len(self.base) - len(self.imr)

    @property
    def flavor(self) -> str:
        return self.base.flavor

    @property
    def content_hash(self) -> str:
        return self.base.content_hash

    def to_native(self) -> dict:
        data = self.base.to_native()
        data['imr'] = list(self.removed_ids)
        return data

    def encode(self, text: bytes, mode: str = SPLIT_REMERGE) -> LiteEncoding:
        return encode_lite(self, text, mode)

    def decode(self, ids: Iterable[int]) -> bytes:
        return self.base.decode(ids)


def build_lite(model: TokenizerModel, imr: Iterable[int]) -> LiteTokenizer:
    """
    Remove `imr` from `model`

    Raises:
        InvalidTokenError: an id is outside the vocabulary
        EligibilityError: an id is a base, special or non-ASCII token
    """
    imr = frozenset(imr)
    for token in sorted(imr):
        if not 0 <= token < len(model):
            raise InvalidTokenError(f"Token id {token} outside vocabulary of size {len(model)}")
        if token in model.base_ids:
            raise EligibilityError(f"Token {token} ({model.display(token)}) is a base token")
        if token in model.specials:
            raise EligibilityError(f"Token {token} ({model.display(token)}) is a special token")
        if not model.is_ascii(token):
            raise EligibilityError(f"Token {token} ({model.display(token)}) is not ASCII")

    lite = LiteTokenizer(model, imr)
    logger.info(f"Built lite tokenizer: {len(imr)} of {len(model)} tokens removed")
    return lite


def split_trace(lite: LiteTokenizer, trace: EncodeTrace) -> SplitResult:
    """Replace every removed id by its recorded parts, keeping span bookkeeping"""
    ids: List[int] = []
    spans: List[Span] = []
    touched: List[bool] = []
    formations = trace.formations

    for start, end in trace.pretoken_spans:
        span_start = len(ids)
        split_any = False
        for position in range(start, end):
            stack = [trace.final_nodes[position]]
            while stack:
                node = stack.pop()
                formation = formations[node]
                if formation.token in lite.imr:
                    # Base tokens are never removed, so every removed
                    # formation has two recorded parts.
                    stack.append(formation.right)
                    stack.append(formation.left)
                    split_any = True
                else:
                    ids.append(formation.token)
        spans.append((span_start, len(ids)))
        touched.append(split_any)

    return SplitResult(ids=ids, pretoken_spans=spans, touched=touched)


def split(lite: LiteTokenizer, trace: EncodeTrace) -> List[int]:
    """
    Split removed tokens of a base encoding until none remains

    Args:
        lite: lite tokenizer
        trace: base encoding of the text

    Returns:
        ids free of removed tokens, decoding to the same bytes
    """
    return split_trace(lite, trace).ids


def _remerge_standard(lite: LiteTokenizer, symbols: List[int]) -> List[int]:
    lookup = lite.merge_lookup
    while len(symbols) > 1:
        best = None
        for pair in zip(symbols, symbols[1:]):
            rule = lookup.get(pair)
            if rule is not None and (best is None or rule.rank < best.rank):
                best = rule
        if best is None:
            break

        merged = []
        i = 0
        while i < len(symbols):
            if i < len(symbols) - 1 and symbols[i] == best.left and symbols[i + 1] == best.right:
                merged.append(best.result)
                i += 2
            else:
                merged.append(symbols[i])
                i += 1
        symbols = merged
    return symbols


def _remerge_rank_greedy(lite: LiteTokenizer, symbols: List[int]) -> List[int]:
    vocab = lite.base.vocab
    ranks = lite.surviving_ranks
    while len(symbols) > 1:
        best_rank, best_index = None, -1
        for i in range(len(symbols) - 1):
            rank = ranks.get(vocab[symbols[i]] + vocab[symbols[i + 1]])
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank, best_index = rank, i
        if best_rank is None:
            break
        merged = lite.base.token_to_id[vocab[symbols[best_index]] + vocab[symbols[best_index + 1]]]
        symbols[best_index:best_index + 2] = [merged]
    return symbols


def remerge(
        lite: LiteTokenizer,
        ids: Sequence[int],
        pretoken_spans: Sequence[Span],
        touched: Optional[Sequence[bool]] = None,
) -> List[int]:
    """
    Re-run merge resolution inside pretoken spans with the surviving merges

    Args:
        lite: lite tokenizer
        ids: split ids (no removed token)
        pretoken_spans: (start, end) ranges over `ids`
        touched: which spans contained a split; every span is re-run when
            None, which leaves untouched spans as they are since a base
            encoding admits no further merge

    Returns:
        merged ids; never contains a removed token
    """
    remerge_span = _remerge_standard if lite.flavor == STANDARD else _remerge_rank_greedy
    result: List[int] = []
    for index, (start, end) in enumerate(pretoken_spans):
        symbols = list(ids[start:end])
        if touched is None or touched[index]:
            symbols = remerge_span(lite, symbols)
        result.extend(symbols)
    return result


def encode_lite(lite: LiteTokenizer, text: bytes, mode: str = SPLIT_REMERGE) -> LiteEncoding:
    """
    Encode with the lite tokenizer

    Args:
        lite: lite tokenizer
        text: input bytes
        mode: 'original' (base encoding), 'split_only', 'split_remerge' or
            'incremental' (split_only applied pretoken by pretoken)

    Returns:
        LiteEncoding
    """
    if mode not in ENCODE_MODES:
        raise ValueError(f"Unknown encoding mode: {mode}")

    trace = lite.base.encode(text)
    if mode == ORIGINAL or not lite.imr.intersection(trace.final_ids):
        return LiteEncoding(tuple(trace.final_ids), mode)

    result = split_trace(lite, trace)
    if mode == SPLIT_REMERGE:
        ids = remerge(lite, result.ids, result.pretoken_spans, result.touched)
    else:
        ids = result.ids
    return LiteEncoding(tuple(ids), mode)


class IncrementalEncoder:
    """
    Append-only encoder for streamed text

    A pretoken is emitted only once the next one has started, so ids already
    handed out are never revised by later input. Trailing bytes that could
    still grow into a special token are held back until they either complete
    it or stop matching.
    """

    def __init__(self, lite: LiteTokenizer):
        self.lite = lite
        self.emitted: List[int] = []
        self._pending = b''
        self._specials = [lite.base.vocab[token] for token in sorted(lite.base.specials)]

    def feed(self, data: bytes) -> List[int]:
        """Add text; return the ids that became final"""
        self._pending += data
        held = self._special_prefix_length(self._pending)
        head, tail = self._pending[:len(self._pending) - held], self._pending[len(self._pending) - held:]

        pieces = self.lite.base.pretokenize(head)
        if pieces and pieces[-1][1]:
            # A completed special token cannot change, whatever follows
            ready, self._pending = head, tail
        elif len(pieces) < 2:
            return []
        else:
            ready = b''.join(piece for piece, _ in pieces[:-1])
            self._pending = pieces[-1][0] + tail
        return self._emit(ready)

    def _special_prefix_length(self, data: bytes) -> int:
        """Length of the longest suffix of `data` that is a proper prefix of a special token"""
        longest = max((len(special) for special in self._specials), default=0)
        for size in range(min(len(data), longest - 1), 0, -1):
            suffix = data[-size:]
            if any(special.startswith(suffix) and special != suffix for special in self._specials):
                return size
        return 0

    def flush(self) -> List[int]:
        """End of stream: emit whatever is pending"""
        ready, self._pending = self._pending, b''
        return self._emit(ready) if ready else []

    def _emit(self, data: bytes) -> List[int]:
        ids = list(encode_lite(self.lite, data, INCREMENTAL).ids)
        self.emitted.extend(ids)
        return ids


def export_mask(lite: LiteTokenizer) -> Tuple[List[int], bytes]:
    """
    Removed ids as a sorted list and as a dense bitmask over the vocabulary

    Bit i (little-endian within each byte) is set when id i is removed.
    """
    mask = np.zeros(len(lite.base), dtype=bool)
    if lite.removed_ids:
        mask[np.asarray(lite.removed_ids, dtype=np.int64)] = True
    bits = np.packbits(mask, bitorder='little').tobytes()
    return list(lite.removed_ids), bits


def unpack_mask(bits: bytes, vocab_size: int) -> List[int]:
    mask = np.unpackbits(np.frombuffer(bits, dtype=np.uint8), count=vocab_size, bitorder='little')
    return [int(i) for i in np.flatnonzero(mask)]


def save_lite(lite: LiteTokenizer, destination: Union[str, Path], extra: Optional[dict] = None):
    """Native JSON of the base model with the removed ids under "imr" """
    fields = {'imr': list(lite.removed_ids)}
    if extra:
        fields.update(extra)
    save_native(lite.base, destination, extra=fields)


def load_lite(source: Source, cache_size: int = DEFAULT_CACHE_SIZE) -> LiteTokenizer:
    data = read_native(source)
    if 'imr' not in data:
        raise IntegrityError("Native document has no imr array; not a lite tokenizer")
    try:
        model = TokenizerModel.from_native(data, cache_size=cache_size)
    except (ValueError, TypeError) as e:
        raise IntegrityError(f"Invalid native tokenizer document: {e}")
    return build_lite(model, data['imr'])
